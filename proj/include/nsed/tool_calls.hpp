#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace nsed::agents {

inline constexpr const char* kSubmitProposal = "submit_proposal";
inline constexpr const char* kSubmitEvaluation = "submit_evaluation";
inline constexpr const char* kUpdateScratchpad = "update_scratchpad";

struct ToolInvocation {
  std::string name;
  nlohmann::json arguments = nlohmann::json::object();
  bool native = false;  // true when read from the message's tool_calls field

  /// Equality ignores how the call was transported.
  friend bool operator==(const ToolInvocation& a, const ToolInvocation& b) {
    return a.name == b.name && a.arguments == b.arguments;
  }
};

/// OpenAI "tools" array for the three protocol functions.
nlohmann::json protocol_tool_schemas();

bool is_protocol_tool(std::string_view name);

/// Reads `message.tool_calls[*].function.{name, arguments}`; arguments may be
/// a JSON string or an object.
std::vector<ToolInvocation> parse_native_tool_calls(const nlohmann::json& message);

/// Regex-driven scan of free text for pseudo-calls: `<tool_call>` blocks,
/// `name({...})` or `name(key="value", ...)` call syntax, and bare JSON
/// objects carrying a protocol tool name.
std::vector<ToolInvocation> heuristic_unwrap(std::string_view text);

struct ParsedResponse {
  ToolInvocation call;
  bool heuristic = false;
  std::vector<ToolInvocation> side_calls;  // e.g. scratchpad updates
};

/// Picks the `expected` tool invocation out of a chat-completions response,
/// preferring native tool calls and falling back to heuristic unwrapping of
/// the message content. Throws MalformedOutput when neither yields one.
ParsedResponse extract_invocation(const nlohmann::json& response, std::string_view expected);

}  // namespace nsed::agents
