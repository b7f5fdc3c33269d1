#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "forge/error.hpp"
#include "forge/sitegraph/graph.hpp"
#include "forge/taskgen.hpp"

namespace forge {

class LlmClient;

enum class QcStage { hop_order, concatenation, correctness, ambiguity, solvability };

std::string_view stage_name(QcStage stage);
QcStage parse_stage(std::string_view text);

struct Verdict {
  QcStage stage = QcStage::concatenation;
  bool pass = false;
  std::string detail;
  std::optional<std::string> raw_model_output;
  /// Set when the stage failed because of a typed error rather than a
  /// negative judgement.
  std::optional<Errc> error;

  friend bool operator==(const Verdict&, const Verdict&) = default;
};

struct VerifiedTask {
  DraftTask draft;
  GoldPath gold_path;
  int hop_order = 0;
  std::vector<Verdict> audit;
  std::optional<std::string> fixed_from;
  std::string verify_model;
  /// Digest of each graph file the task was verified against, by graph id.
  std::vector<std::string> graph_digests;

  friend bool operator==(const VerifiedTask&, const VerifiedTask&) = default;
};

struct Rejection {
  std::string draft_id;
  QcStage stage = QcStage::hop_order;
  std::string detail;
  std::optional<Errc> error;
  int hop_order = 0;
  std::vector<Verdict> audit;
};

struct QcOutcome {
  std::optional<VerifiedTask> verified;
  std::optional<Rejection> rejection;
};

/// Distinct evidence nodes.
int hop_order(const DraftTask& task);

// Prompts. The two classification prompts end with a
// one-line answer format so replies can be parsed.
std::string build_concatenation_prompt(std::string_view query);
std::string build_ambiguity_prompt(std::string_view query);
std::string build_correctness_prompt(const PageContent& web1, const PageContent& web2, std::string_view question,
                                     std::string_view answer);
std::string build_fix_prompt(std::string_view query, const std::vector<PageContent>& context);

/// Zero-cost screen for the concatenated shape: two questions
/// joined by "and" whose second part neither refers back to the first nor
/// shares a named entity with it.
bool looks_concatenated(std::string_view query);

Verdict check_concatenation(const DraftTask& task, LlmClient& client);
Verdict check_correctness(const DraftTask& task, const std::vector<PageContent>& evidence_contents, LlmClient& client);
Verdict check_ambiguity(const DraftTask& task, LlmClient& client);

struct FixResult {
  std::string fixed_query;
  std::string changes_made;
};
/// Parses {"FIXED_QUERY": ..., "CHANGES_MADE": ...}; throws fix-parse-error.
FixResult parse_fix(std::string_view text);
FixResult fix_ambiguity(const DraftTask& task, const std::vector<PageContent>& evidence_contents, LlmClient& client);

struct SolvabilityResult {
  Verdict verdict;
  std::optional<GoldPath> path;
};
SolvabilityResult check_solvability(const GraphSet& graphs, const DraftTask& task);

struct QcOptions {
  int repair_attempts = 1;
  bool fail_closed = true;
};

/// hop_order -> concatenation -> correctness -> ambiguity (+ repair) ->
/// solvability; the first failure ends the run.
QcOutcome run_qc(const DraftTask& draft, const GraphSet& graphs, const ContentLookup& contents, LlmClient& client,
                 const QcOptions& options = {});

std::string verified_to_json(const VerifiedTask& t);
VerifiedTask verified_from_json(const std::string& line);
std::string verified_to_string(const std::vector<VerifiedTask>& tasks);
std::vector<VerifiedTask> verified_from_string(const std::string& text);
std::string rejection_to_json(const Rejection& r);

}  // namespace forge
