#include "nsed/tool_calls.hpp"

#include <regex>

#include "nsed/errors.hpp"

namespace nsed::agents {

using nlohmann::json;

namespace {

json function_schema(const char* name, const char* description, json properties, json required) {
  return {{"type", "function"},
          {"function",
           {{"name", name},
            {"description", description},
            {"parameters", {{"type", "object"}, {"properties", std::move(properties)}, {"required", std::move(required)}}}}}};
}

json parse_arguments(const json& raw) {
  if (raw.is_object()) return raw;
  if (raw.is_string()) {
    auto parsed = json::parse(raw.get<std::string>(), nullptr, false);
    if (parsed.is_object()) return parsed;
  }
  if (raw.is_null()) return json::object();
  throw Error(ErrorCode::MalformedOutput, "tool arguments are not a JSON object");
}

// Index one past the balanced JSON object starting at `open`, or npos.
std::size_t match_object(std::string_view text, std::size_t open) {
  int depth = 0;
  bool in_string = false;
  for (std::size_t i = open; i < text.size(); ++i) {
    const char c = text[i];
    if (in_string) {
      if (c == '\\') ++i;
      else if (c == '"') in_string = false;
      continue;
    }
    if (c == '"') in_string = true;
    else if (c == '{') ++depth;
    else if (c == '}' && --depth == 0) return i + 1;
  }
  return std::string_view::npos;
}

// key="value", key=12, key='value' inside name(...).
std::optional<json> parse_kwargs(std::string_view body) {
  static const std::regex kwarg(R"re(\s*([A-Za-z_][A-Za-z0-9_]*)\s*=\s*("(?:[^"\\]|\\.)*"|'(?:[^'\\]|\\.)*'|-?[0-9]+(?:\.[0-9]+)?)\s*,?)re");
  json args = json::object();
  std::string rest(body);
  std::smatch m;
  std::size_t consumed = 0;
  auto begin = rest.cbegin();
  while (std::regex_search(begin, rest.cend(), m, kwarg, std::regex_constants::match_continuous)) {
    const std::string key = m[1].str();
    std::string value = m[2].str();
    if (value.front() == '"') {
      auto parsed = json::parse(value, nullptr, false);
      if (parsed.is_discarded()) return std::nullopt;
      args[key] = parsed;
    } else if (value.front() == '\'') {
      std::string unquoted;
      for (std::size_t i = 1; i + 1 < value.size(); ++i) {
        if (value[i] == '\\' && i + 2 < value.size()) ++i;
        unquoted += value[i];
      }
      args[key] = unquoted;
    } else {
      args[key] = json::parse(value);
    }
    consumed += static_cast<std::size_t>(m.length(0));
    begin += m.length(0);
  }
  const auto tail = std::string_view(rest).substr(consumed);
  if (tail.find_first_not_of(" \t\r\n") != std::string_view::npos || args.empty()) return std::nullopt;
  return args;
}

std::optional<ToolInvocation> invocation_from_object(const json& obj) {
  if (!obj.is_object()) return std::nullopt;
  const json* holder = &obj;
  if (obj.contains("function") && obj["function"].is_object()) holder = &obj["function"];
  if (!holder->contains("name") || !(*holder)["name"].is_string()) return std::nullopt;
  const auto name = (*holder)["name"].get<std::string>();
  if (!is_protocol_tool(name)) return std::nullopt;
  for (const char* key : {"arguments", "parameters", "args"}) {
    if (holder->contains(key)) {
      try {
        return ToolInvocation{name, parse_arguments((*holder)[key]), false};
      } catch (const Error&) {
        return std::nullopt;
      }
    }
  }
  return std::nullopt;
}

}  // namespace

json protocol_tool_schemas() {
  return json::array(
      {function_schema(kSubmitProposal, "Submit your proposal for this round.",
                       {{"reasoning", {{"type", "string"}}}, {"final_answer", {{"type", "string"}}}},
                       {"reasoning", "final_answer"}),
       function_schema(kSubmitEvaluation, "Score one anonymized candidate on a 0-100 scale.",
                       {{"target_id", {{"type", "string"}}},
                        {"score", {{"type", "number"}, {"minimum", 0}, {"maximum", 100}}},
                        {"critique", {{"type", "string"}}}},
                       {"target_id", "score", "critique"}),
       function_schema(kUpdateScratchpad, "Save summarized findings for later rounds.",
                       {{"content", {{"type", "string"}}},
                        {"strategy", {{"type", "string"}, {"enum", {"append", "overwrite"}}}}},
                       {"content"})});
}

bool is_protocol_tool(std::string_view name) {
  return name == kSubmitProposal || name == kSubmitEvaluation || name == kUpdateScratchpad;
}

std::vector<ToolInvocation> parse_native_tool_calls(const json& message) {
  std::vector<ToolInvocation> calls;
  if (!message.is_object() || !message.contains("tool_calls") || !message["tool_calls"].is_array()) return calls;
  for (const auto& call : message["tool_calls"]) {
    if (!call.contains("function")) continue;
    const auto& fn = call["function"];
    if (!fn.contains("name") || !fn["name"].is_string()) continue;
    calls.push_back({fn["name"].get<std::string>(), parse_arguments(fn.value("arguments", json::object())), true});
  }
  return calls;
}

std::vector<ToolInvocation> heuristic_unwrap(std::string_view text) {
  std::vector<ToolInvocation> calls;
  std::vector<std::pair<std::size_t, std::size_t>> claimed;
  auto overlaps = [&](std::size_t b, std::size_t e) {
    for (auto [cb, ce] : claimed) {
      if (b < ce && cb < e) return true;
    }
    return false;
  };

  // name( {json} ) or name(key=value, ...)
  static const std::regex call_site(R"(\b(submit_proposal|submit_evaluation|update_scratchpad)\s*\()");
  const std::string owned(text);
  for (auto it = std::sregex_iterator(owned.begin(), owned.end(), call_site); it != std::sregex_iterator(); ++it) {
    const auto name = (*it)[1].str();
    const std::size_t open_paren = static_cast<std::size_t>(it->position(0) + it->length(0));
    std::size_t body_start = text.find_first_not_of(" \t\r\n", open_paren);
    if (body_start == std::string_view::npos) continue;
    if (text[body_start] == '{') {
      const auto end = match_object(text, body_start);
      if (end == std::string_view::npos) continue;
      auto args = json::parse(text.substr(body_start, end - body_start), nullptr, false);
      if (!args.is_object()) continue;
      calls.push_back({name, args, false});
      claimed.emplace_back(static_cast<std::size_t>(it->position(0)), end);
    } else {
      // Find the closing paren outside quotes.
      bool in_dq = false, in_sq = false;
      std::size_t close = std::string_view::npos;
      for (std::size_t i = open_paren; i < text.size(); ++i) {
        const char c = text[i];
        if ((in_dq || in_sq) && c == '\\') { ++i; continue; }
        if (!in_sq && c == '"') in_dq = !in_dq;
        else if (!in_dq && c == '\'') in_sq = !in_sq;
        else if (!in_dq && !in_sq && c == ')') { close = i; break; }
      }
      if (close == std::string_view::npos) continue;
      if (auto args = parse_kwargs(text.substr(open_paren, close - open_paren))) {
        calls.push_back({name, *args, false});
        claimed.emplace_back(static_cast<std::size_t>(it->position(0)), close + 1);
      }
    }
  }

  // Bare JSON objects, including <tool_call> payloads and fenced blocks.
  for (std::size_t pos = text.find('{'); pos != std::string_view::npos; pos = text.find('{', pos + 1)) {
    if (overlaps(pos, pos + 1)) continue;
    const auto end = match_object(text, pos);
    if (end == std::string_view::npos) continue;
    auto obj = json::parse(text.substr(pos, end - pos), nullptr, false);
    if (obj.is_discarded()) continue;
    if (auto call = invocation_from_object(obj)) {
      calls.push_back(*call);
      claimed.emplace_back(pos, end);
      pos = end - 1;
    }
  }
  return calls;
}

ParsedResponse extract_invocation(const json& response, std::string_view expected) {
  if (!response.is_object() || !response.contains("choices") || !response["choices"].is_array() ||
      response["choices"].empty()) {
    throw Error(ErrorCode::MalformedOutput, "response has no choices");
  }
  const auto& message = response["choices"][0].value("message", json::object());

  auto pick = [&](std::vector<ToolInvocation> calls, bool heuristic) -> std::optional<ParsedResponse> {
    ParsedResponse out;
    out.heuristic = heuristic;
    bool found = false;
    for (auto& c : calls) {
      if (!found && c.name == expected) {
        out.call = std::move(c);
        found = true;
      } else {
        out.side_calls.push_back(std::move(c));
      }
    }
    if (!found) return std::nullopt;
    return out;
  };

  auto native = parse_native_tool_calls(message);
  if (auto parsed = pick(native, false)) return *parsed;

  std::string content;
  if (message.contains("content") && message["content"].is_string()) content = message["content"].get<std::string>();
  auto unwrapped = heuristic_unwrap(content);
  if (auto parsed = pick(unwrapped, true)) {
    for (auto& c : native) parsed->side_calls.push_back(c);
    return *parsed;
  }
  throw Error(ErrorCode::MalformedOutput, "no " + std::string(expected) + " call in response");
}

}  // namespace nsed::agents
