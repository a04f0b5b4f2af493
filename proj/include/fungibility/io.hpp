#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fungibility/chain.hpp"
#include "fungibility/metrics.hpp"
#include "fungibility/records.hpp"

namespace fungibility {

enum class InputFormat { transfers_csv, utxo_jsonl, balances_csv, prior_csv };

struct InputManifest {
  InputFormat format = InputFormat::transfers_csv;
  int unit_exponent = 0;
  std::filesystem::path path;
};

/// Non-fatal observations made while parsing (unsorted seq, dropped zero rows).
using Warnings = std::vector<std::string>;

/// round(text * 10^unit_exponent) for a plain or exponent-notation decimal.
/// Rejects negatives, overflow, and results off an integer by more than
/// 1e-9 relative.
Amount parse_amount(std::string_view text, int unit_exponent);

/// `seq,src,dst,amount[,shielded_src,shielded_dst]`. Rows come back stably
/// sorted by seq. Zero amounts are dropped with a warning.
std::vector<TransferRecord> parse_transfers(std::istream& in, int unit_exponent,
                                            std::string_view source = "<stream>",
                                            Warnings* warnings = nullptr);
std::vector<TransferRecord> parse_transfers(const std::filesystem::path& path, int unit_exponent,
                                            Warnings* warnings = nullptr);

/// One JSON object per line:
/// {"txid", "coinbase", "inputs": [{"txid", "vout", "value"?, "owner"?}
/// | {"shielded": true, "value"}], "outputs": [{"value", "owner"?, "shielded"?}]}.
/// Values may be JSON integers or decimal strings.
std::vector<UtxoTransaction> parse_utxo(std::istream& in, int unit_exponent,
                                        std::string_view source = "<stream>",
                                        Warnings* warnings = nullptr);
std::vector<UtxoTransaction> parse_utxo(const std::filesystem::path& path, int unit_exponent,
                                        Warnings* warnings = nullptr);

/// `node,balance` rows; repeated nodes add up.
std::map<std::string, Amount> parse_balances(std::istream& in, int unit_exponent,
                                             std::string_view source = "<stream>");
std::map<std::string, Amount> parse_balances(const std::filesystem::path& path, int unit_exponent);

/// `value` rows, normalised.
PriorPoolDistribution parse_prior(std::istream& in, std::string_view source = "<stream>");
PriorPoolDistribution parse_prior(const std::filesystem::path& path);

/// `node,target,probability` rows grouped by node in file order.
HeuristicOverride parse_overrides(std::istream& in, std::string_view source = "<stream>");
HeuristicOverride parse_overrides(const std::filesystem::path& path);

void write_transfers(std::ostream& out, std::span<const TransferRecord> records);
void write_utxo(std::ostream& out, std::span<const UtxoTransaction> txs);

/// Decimal with 12 significant digits.
std::string format_number(double value);

/// Report CSV: `node,fungibility_bits,expected_steps` rows by node id, a blank
/// line, then a `summary,fungibility_bits,expected_steps` block with mean,
/// median, variance and max rows.
void write_report_csv(std::ostream& out, const FungibilityReport& report);

/// One JSON object per row: {"node": id, "distribution": {absorber: p, ...}}.
void write_distributions_jsonl(std::ostream& out, const FungibilityReport& report);

/// Sidecar path used when distributions are requested.
std::filesystem::path distributions_path(const std::filesystem::path& report_path);

/// Writes the report and, when asked, the distribution sidecar. Rejects
/// empty reports.
void write_report(const FungibilityReport& report, const std::filesystem::path& path,
                  bool include_distributions);

/// Reads the rows of a report CSV (and the sidecar when present) and
/// recomputes the aggregates.
FungibilityReport read_report(std::istream& csv, std::istream* distributions = nullptr,
                              std::string_view source = "<stream>");
FungibilityReport read_report(const std::filesystem::path& path);

void write_histogram_csv(std::ostream& out, const Histogram& hist);

}  // namespace fungibility
