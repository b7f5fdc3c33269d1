#include "forge/llm/ledger.hpp"

#include <nlohmann/json.hpp>
#include <sstream>

#include "forge/error.hpp"
#include "forge/util.hpp"

namespace forge {

using ojson = nlohmann::ordered_json;

CostLedger::CostLedger(const CostLedger& other) {
  std::lock_guard lock(other.mu_);
  entries_ = other.entries_;
}

CostLedger& CostLedger::operator=(const CostLedger& other) {
  if (this == &other) return *this;
  auto copy = other.entries();
  std::lock_guard lock(mu_);
  entries_ = std::move(copy);
  return *this;
}

void CostLedger::append(LedgerEntry entry) {
  std::lock_guard lock(mu_);
  entries_.push_back(std::move(entry));
}

std::vector<LedgerEntry> CostLedger::entries() const {
  std::lock_guard lock(mu_);
  return entries_;
}

std::size_t CostLedger::size() const {
  std::lock_guard lock(mu_);
  return entries_.size();
}

Money CostLedger::total_cost() const {
  std::lock_guard lock(mu_);
  Money total;
  for (const auto& e : entries_) total += e.priced_cost;
  return total;
}

std::size_t CostLedger::wire_calls(const std::string& stage) const {
  std::lock_guard lock(mu_);
  std::size_t n = 0;
  for (const auto& e : entries_) {
    if (e.stage == stage && !e.cached && e.note.empty()) ++n;
  }
  return n;
}

std::size_t CostLedger::calls(const std::string& stage) const {
  std::lock_guard lock(mu_);
  std::size_t n = 0;
  for (const auto& e : entries_) {
    if (e.stage == stage && e.note.empty()) ++n;
  }
  return n;
}

std::string CostLedger::to_jsonl() const {
  std::lock_guard lock(mu_);
  std::string out;
  for (const auto& e : entries_) {
    ojson j;
    j["stage"] = e.stage;
    j["model"] = e.model;
    j["input_tokens"] = e.input_tokens;
    j["output_tokens"] = e.output_tokens;
    j["cached"] = e.cached;
    j["priced_cost"] = e.priced_cost.to_string();
    if (!e.note.empty()) j["note"] = e.note;
    out += j.dump() + "\n";
  }
  return out;
}

CostLedger CostLedger::from_jsonl(const std::string& text) {
  CostLedger ledger;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    try {
      auto j = ojson::parse(line);
      LedgerEntry e;
      e.stage = j.at("stage").get<std::string>();
      e.model = j.at("model").get<std::string>();
      e.input_tokens = j.at("input_tokens").get<std::int64_t>();
      e.output_tokens = j.at("output_tokens").get<std::int64_t>();
      e.cached = j.at("cached").get<bool>();
      e.priced_cost = Money::parse(j.at("priced_cost").get<std::string>());
      if (j.contains("note")) e.note = j["note"].get<std::string>();
      ledger.entries_.push_back(std::move(e));
    } catch (const std::exception& ex) {
      throw Error(Errc::corrupt_file, "ledger line " + std::to_string(lineno) + ": " + ex.what());
    }
  }
  return ledger;
}

void CostLedger::save(const std::filesystem::path& path) const { write_file_atomic(path, to_jsonl()); }

CostLedger CostLedger::load(const std::filesystem::path& path) { return from_jsonl(read_file(path)); }

}  // namespace forge
