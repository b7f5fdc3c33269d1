#include "forge/error.hpp"

namespace forge {

std::string_view errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::malformed_url: return "malformed-url";
    case Errc::root_unreachable: return "root-unreachable";
    case Errc::unknown_parent: return "unknown-parent";
    case Errc::schema_version_mismatch: return "schema-version-mismatch";
    case Errc::corrupt_file: return "corrupt-file";
    case Errc::seed_not_indexed: return "seed-not-indexed";
    case Errc::index_too_small: return "index-too-small";
    case Errc::empty_index: return "empty-index";
    case Errc::generation_parse_error: return "generation-parse-error";
    case Errc::missing_marker: return "missing-marker";
    case Errc::placeholder_answer: return "placeholder-answer";
    case Errc::verifier_protocol_error: return "verifier-protocol-error";
    case Errc::fix_parse_error: return "fix-parse-error";
    case Errc::task_references_unknown_node: return "task-references-unknown-node";
    case Errc::broken_edge: return "broken-edge";
    case Errc::evidence_not_on_path: return "evidence-not-on-path";
    case Errc::provider_error: return "provider-error";
    case Errc::budget_exceeded: return "budget-exceeded";
    case Errc::protocol_error: return "protocol-error";
    case Errc::config_error: return "config-error";
    case Errc::missing_artifact: return "missing-artifact";
    case Errc::io_error: return "io-error";
  }
  return "unknown";
}

Error::Error(Errc code, const std::string& message)
    : std::runtime_error(std::string(errc_name(code)) + ": " + message),
      code_(code),
      message_(message) {}

}  // namespace forge
