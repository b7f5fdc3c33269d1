#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace forge {

enum class Errc {
  malformed_url,
  root_unreachable,
  unknown_parent,
  schema_version_mismatch,
  corrupt_file,
  seed_not_indexed,
  index_too_small,
  empty_index,
  generation_parse_error,
  missing_marker,
  placeholder_answer,
  verifier_protocol_error,
  fix_parse_error,
  task_references_unknown_node,
  broken_edge,
  evidence_not_on_path,
  provider_error,
  budget_exceeded,
  protocol_error,
  config_error,
  missing_artifact,
  io_error,
};

std::string_view errc_name(Errc code) noexcept;

/// Every failure surfaced by the library carries one of the codes above.
/// `what()` is "<code>: <message>".
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message);

  Errc code() const noexcept { return code_; }
  const std::string& message() const noexcept { return message_; }

 private:
  Errc code_;
  std::string message_;
};

}  // namespace forge
