#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace atep::metrics {

struct TransferCounts {
  int fbt = 0;
  int sbt = 0;
  int rt = 0;

  friend bool operator==(const TransferCounts&, const TransferCounts&) = default;
};

struct LedgerRow {
  int iteration = 0;
  int annecs = 0;
  double mean_nodes = 0.0;  // hidden nodes per genome over active pairs
  double mean_best_fitness = 0.0;
  std::uint64_t cumulative_function_evals = 0;
  int active_pair_count = 0;
  TransferCounts transfers;

  friend bool operator==(const LedgerRow&, const LedgerRow&) = default;
};

struct TransferEvent {
  int iteration = 0;
  std::string kind;  // fbt, sbt or rt
  int source_env = 0;
  int target_env = 0;

  friend bool operator==(const TransferEvent&, const TransferEvent&) = default;
};

std::string_view ledger_header();
std::string format_row(const LedgerRow& row);
LedgerRow parse_row(std::string_view line);
void write_ledger(std::ostream& out, const std::vector<LedgerRow>& rows);
/// Throws std::runtime_error on a bad header, short row or malformed number.
std::vector<LedgerRow> read_ledger(std::istream& in);

std::string_view transfers_header();
std::string format_transfer(const TransferEvent& e);
void write_transfers(std::ostream& out, const std::vector<TransferEvent>& events);
std::vector<TransferEvent> read_transfers(std::istream& in);

/// Fitness-to-nodes ratio; nullopt when the row has no hidden nodes.
std::optional<double> fnr(const LedgerRow& row);
/// ANNECS-to-nodes ratio; nullopt when the row has no hidden nodes.
std::optional<double> anr(const LedgerRow& row);

}  // namespace atep::metrics
