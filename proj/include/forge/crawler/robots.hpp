#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace forge {

/// Allow/Disallow rules from one robots.txt group. Matching follows
/// RFC 9309: the longest matching pattern wins, Allow wins ties, `*`
/// matches any run of characters and a trailing `$` anchors the end.
class RobotsRules {
 public:
  /// Empty rule set; everything allowed.
  RobotsRules() = default;

  /// Selects the group whose user-agent token is a case-insensitive prefix
  /// of `user_agent`'s product token, falling back to `*`.
  static RobotsRules parse(std::string_view robots_txt, std::string_view user_agent);

  static RobotsRules allow_all() { return {}; }

  /// `path_and_query` as produced by Url::path_and_query().
  bool allowed(std::string_view path_and_query) const;

  std::size_t rule_count() const { return rules_.size(); }

 private:
  struct Rule {
    std::string pattern;
    bool allow;
  };
  std::vector<Rule> rules_;
};

}  // namespace forge
