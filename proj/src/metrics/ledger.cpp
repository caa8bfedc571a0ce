#include "atep/metrics/ledger.hpp"

#include <istream>
#include <ostream>
#include <stdexcept>

#include "atep/io_format.hpp"

namespace atep::metrics {

namespace {

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto tab = line.find('\t', start);
    out.push_back(line.substr(start, tab == std::string_view::npos ? std::string_view::npos : tab - start));
    if (tab == std::string_view::npos) break;
    start = tab + 1;
  }
  return out;
}

int to_int(std::string_view s) { return static_cast<int>(parse_int(s)); }

template <typename Parse>
auto read_table(std::istream& in, std::string_view header, Parse parse) {
  std::string line;
  if (!std::getline(in, line) || line != header)
    throw std::runtime_error("table header mismatch: expected '" + std::string(header) + "'");
  std::vector<decltype(parse(std::string_view{}))> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    try {
      rows.push_back(parse(line));
    } catch (const std::exception& e) {
      throw std::runtime_error("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return rows;
}

}  // namespace

std::string_view ledger_header() {
  return "iteration\tannecs\tmean_nodes\tmean_best_fitness\tcumulative_function_evals\t"
         "active_pair_count\ttransfers_fbt\ttransfers_sbt\ttransfers_rt";
}

std::string format_row(const LedgerRow& r) {
  std::string s;
  s += std::to_string(r.iteration) + '\t';
  s += std::to_string(r.annecs) + '\t';
  s += format_double(r.mean_nodes) + '\t';
  s += format_double(r.mean_best_fitness) + '\t';
  s += std::to_string(r.cumulative_function_evals) + '\t';
  s += std::to_string(r.active_pair_count) + '\t';
  s += std::to_string(r.transfers.fbt) + '\t';
  s += std::to_string(r.transfers.sbt) + '\t';
  s += std::to_string(r.transfers.rt);
  return s;
}

LedgerRow parse_row(std::string_view line) {
  const auto f = split_tabs(line);
  if (f.size() != 9) throw std::runtime_error("expected 9 ledger fields, got " + std::to_string(f.size()));
  LedgerRow r;
  r.iteration = to_int(f[0]);
  r.annecs = to_int(f[1]);
  r.mean_nodes = parse_double(f[2]);
  r.mean_best_fitness = parse_double(f[3]);
  const long long evals = parse_int(f[4]);
  if (evals < 0) throw std::runtime_error("negative function evaluation count");
  r.cumulative_function_evals = static_cast<std::uint64_t>(evals);
  r.active_pair_count = to_int(f[5]);
  r.transfers.fbt = to_int(f[6]);
  r.transfers.sbt = to_int(f[7]);
  r.transfers.rt = to_int(f[8]);
  return r;
}

void write_ledger(std::ostream& out, const std::vector<LedgerRow>& rows) {
  out << ledger_header() << '\n';
  for (const auto& r : rows) out << format_row(r) << '\n';
}

std::vector<LedgerRow> read_ledger(std::istream& in) { return read_table(in, ledger_header(), parse_row); }

std::string_view transfers_header() { return "iteration\tkind\tsource_env\ttarget_env"; }

std::string format_transfer(const TransferEvent& e) {
  return std::to_string(e.iteration) + '\t' + e.kind + '\t' + std::to_string(e.source_env) + '\t' +
         std::to_string(e.target_env);
}

void write_transfers(std::ostream& out, const std::vector<TransferEvent>& events) {
  out << transfers_header() << '\n';
  for (const auto& e : events) out << format_transfer(e) << '\n';
}

std::vector<TransferEvent> read_transfers(std::istream& in) {
  return read_table(in, transfers_header(), [](std::string_view line) {
    const auto f = split_tabs(line);
    if (f.size() != 4) throw std::runtime_error("expected 4 transfer fields");
    if (f[1] != "fbt" && f[1] != "sbt" && f[1] != "rt")
      throw std::runtime_error("unknown transfer kind '" + std::string(f[1]) + "'");
    return TransferEvent{to_int(f[0]), std::string(f[1]), to_int(f[2]), to_int(f[3])};
  });
}

std::optional<double> fnr(const LedgerRow& row) {
  if (row.mean_nodes == 0.0) return std::nullopt;
  return row.mean_best_fitness / row.mean_nodes;
}

std::optional<double> anr(const LedgerRow& row) {
  if (row.mean_nodes == 0.0) return std::nullopt;
  return row.annecs / row.mean_nodes;
}

}  // namespace atep::metrics
