#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <string>
#include <vector>

#include "forge/money.hpp"

namespace forge {

struct LedgerEntry {
  std::string stage;
  std::string model;
  std::int64_t input_tokens = 0;
  std::int64_t output_tokens = 0;
  bool cached = false;
  Money priced_cost;
  /// Free-form reason for entries that record a rejection at source.
  std::string note;

  friend bool operator==(const LedgerEntry&, const LedgerEntry&) = default;
};

/// Append-only record of every provider call, cached or not.
class CostLedger {
 public:
  CostLedger() = default;
  CostLedger(const CostLedger& other);
  CostLedger& operator=(const CostLedger& other);

  void append(LedgerEntry entry);
  std::vector<LedgerEntry> entries() const;
  std::size_t size() const;

  Money total_cost() const;
  /// Entries that reached the provider.
  std::size_t wire_calls(const std::string& stage) const;
  std::size_t calls(const std::string& stage) const;

  /// One JSON record per line, entry order preserved.
  std::string to_jsonl() const;
  static CostLedger from_jsonl(const std::string& text);

  void save(const std::filesystem::path& path) const;
  static CostLedger load(const std::filesystem::path& path);

 private:
  mutable std::mutex mu_;
  std::vector<LedgerEntry> entries_;
};

}  // namespace forge
