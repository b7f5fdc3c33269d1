#include "forge/crawler/robots.hpp"

#include <cctype>
#include <sstream>

#include "forge/util.hpp"

namespace forge {

namespace {

// Returns true if `pattern` matches a prefix of `path` (or all of it when
// the pattern ends with '$').
bool pattern_matches(std::string_view pattern, std::string_view path) {
  bool anchored = !pattern.empty() && pattern.back() == '$';
  if (anchored) pattern.remove_suffix(1);
  // backtracking over '*' with the usual two-pointer scheme
  std::size_t p = 0, s = 0;
  std::size_t star = std::string_view::npos, mark = 0;
  while (true) {
    if (p == pattern.size()) {
      if (!anchored || s == path.size()) return true;
    } else if (pattern[p] == '*') {
      star = p++;
      mark = s;
      continue;
    } else if (s < path.size() && pattern[p] == path[s]) {
      ++p;
      ++s;
      continue;
    }
    if (star == std::string_view::npos || mark >= path.size()) return false;
    p = star + 1;
    s = ++mark;
  }
}

std::string product_token(std::string_view ua) {
  std::string out;
  for (char c : ua) {
    if (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_') {
      out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    } else {
      break;
    }
  }
  return out;
}

}  // namespace

RobotsRules RobotsRules::parse(std::string_view text, std::string_view user_agent) {
  struct Group {
    std::vector<std::string> agents;
    std::vector<Rule> rules;
  };
  std::vector<Group> groups;
  bool last_was_agent = false;

  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    auto colon = line.find(':');
    if (colon == std::string::npos) continue;
    std::string key = to_lower(trim(std::string_view(line).substr(0, colon)));
    std::string value(trim(std::string_view(line).substr(colon + 1)));
    if (key == "user-agent") {
      if (!last_was_agent) groups.emplace_back();
      groups.back().agents.push_back(to_lower(value));
      last_was_agent = true;
    } else if (key == "allow" || key == "disallow") {
      last_was_agent = false;
      if (groups.empty()) continue;
      // an empty Disallow means "allow everything" and adds no rule
      if (value.empty()) continue;
      groups.back().rules.push_back({value, key == "allow"});
    } else {
      last_was_agent = false;
    }
  }

  const std::string token = product_token(user_agent);
  const Group* chosen = nullptr;
  std::size_t best = 0;
  for (const auto& g : groups) {
    for (const auto& a : g.agents) {
      if (a != "*" && !token.empty() && token.starts_with(a) && a.size() > best) {
        chosen = &g;
        best = a.size();
      }
    }
  }
  if (chosen == nullptr) {
    for (const auto& g : groups) {
      for (const auto& a : g.agents) {
        if (a == "*") {
          chosen = &g;
          break;
        }
      }
      if (chosen) break;
    }
  }
  RobotsRules rules;
  if (chosen) rules.rules_ = chosen->rules;
  return rules;
}

bool RobotsRules::allowed(std::string_view path) const {
  if (path == "/robots.txt") return true;
  const Rule* best = nullptr;
  for (const auto& r : rules_) {
    if (!pattern_matches(r.pattern, path)) continue;
    if (best == nullptr || r.pattern.size() > best->pattern.size() ||
        (r.pattern.size() == best->pattern.size() && r.allow && !best->allow)) {
      best = &r;
    }
  }
  return best == nullptr || best->allow;
}

}  // namespace forge
