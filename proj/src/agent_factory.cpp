#include "nsed/agents.hpp"

namespace nsed::agents {

std::unique_ptr<Agent> make_agent(const AgentBinding& binding, std::uint64_t seed_salt) {
  validate_profile(binding.profile);
  if (const auto* sim = std::get_if<SimParams>(&binding.backend)) {
    SimParams params = *sim;
    if (seed_salt != 0) params.seed = mix_seed(params.seed, seed_salt);
    return std::make_unique<SimulatedAgent>(binding.profile, params);
  }
  return std::make_unique<RemoteAgent>(binding.profile, std::get<RemoteParams>(binding.backend));
}

}  // namespace nsed::agents
