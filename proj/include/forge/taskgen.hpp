#pragma once

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "forge/page.hpp"
#include "forge/retrieval.hpp"
#include "forge/sitegraph/graph.hpp"

namespace forge {

class LlmClient;

enum class TaskMode { intra, inter };

std::string_view mode_name(TaskMode mode);
TaskMode parse_mode(std::string_view text);

struct DraftTask {
  std::string id;
  TaskMode mode = TaskMode::intra;
  std::string query;
  std::string answer;
  std::string rationale;
  std::vector<GraphNode> evidence;
  std::string language = "und";
  PairSample pair;
  std::string gen_model;

  friend bool operator==(const DraftTask&, const DraftTask&) = default;
};

/// Page content of a node in a graph set.
using ContentLookup = std::function<PageContent(const GraphNode&)>;

/// The multi-hop generation template with both website slots filled by the
/// clipped structural rendering. A non-empty `language` other than English
/// appends one line asking for output in that language.
std::string build_generation_prompt(const PageContent& seed, const PageContent& secondary,
                                    std::string_view language = {});

struct ParsedTask {
  std::string task;
  std::string rationale;
  std::string answer;
  friend bool operator==(const ParsedTask&, const ParsedTask&) = default;
};

/// First TASK:, then the first RATIONALE: after it, then the first ANSWER:
/// after that; text before TASK: is ignored. Throws missing-marker or
/// placeholder-answer.
ParsedTask parse_response(std::string_view text);
std::string render_response(const ParsedTask& t);

/// True for answers that are only a bracketed placeholder like "[...]".
bool is_placeholder(std::string_view answer);

struct GenerationOptions {
  /// "seed" follows the seed page's language; anything else is a fixed tag.
  std::string language_policy = "seed";
};

/// One chat call (stage "generate"). A response that cannot be parsed is
/// noted in the ledger and raised as generation-parse-error.
DraftTask generate_task(const PairSample& pair, const ContentLookup& contents, LlmClient& client,
                        const GenerationOptions& options = {});

std::string draft_to_json(const DraftTask& d);
DraftTask draft_from_json(const std::string& line);
std::string drafts_to_string(const std::vector<DraftTask>& drafts);
std::vector<DraftTask> drafts_from_string(const std::string& text);

}  // namespace forge
