#include "fungibility/io.hpp"

#include <json.hpp>

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <set>

#include "fungibility/error.hpp"

namespace fungibility {

namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

std::string_view trim(std::string_view s) {
  const auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(trim(line.substr(start)));
      return fields;
    }
    fields.push_back(trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
}

[[noreturn]] void fail(std::string_view source, std::size_t line, const std::string& what) {
  throw ValidationError(std::string(source) + ":" + std::to_string(line) + ": " + what);
}

/// Line-oriented CSV reader that checks the header and skips blank lines.
class CsvReader {
 public:
  CsvReader(std::istream& in, std::string_view source) : in_(in), source_(source) {}

  /// Reads the header and returns which of the accepted layouts matched.
  std::size_t header(std::initializer_list<std::vector<std::string_view>> layouts) {
    std::vector<std::string_view> fields;
    if (!next(fields)) fail(source_, line_no_, "missing header");
    std::size_t k = 0;
    for (const auto& layout : layouts) {
      if (fields == layout) return k;
      ++k;
    }
    std::string expected;
    for (std::string_view f : *layouts.begin()) expected += (expected.empty() ? "" : ",") + std::string(f);
    fail(source_, line_no_, "unexpected header, expected '" + expected + "'");
  }

  bool next(std::vector<std::string_view>& fields) {
    while (std::getline(in_, line_)) {
      ++line_no_;
      if (trim(line_).empty()) continue;
      fields = split_csv(line_);
      return true;
    }
    if (in_.bad()) fail(source_, line_no_, "read error");
    return false;
  }

  std::size_t line() const { return line_no_; }
  std::string_view source() const { return source_; }

 private:
  std::istream& in_;
  std::string_view source_;
  std::string line_;
  std::size_t line_no_ = 0;
};

bool parse_bool(std::string_view text, bool& out) {
  if (text == "1" || text == "true") {
    out = true;
  } else if (text == "0" || text == "false" || text.empty()) {
    out = false;
  } else {
    return false;
  }
  return true;
}

double parse_double(std::string_view text) {
  const std::string s(text);
  if (s.empty()) throw ValidationError("empty number");
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size() || errno == ERANGE || !std::isfinite(v)) {
    throw ValidationError("'" + s + "' is not a finite number");
  }
  return v;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path.string());
  return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ValidationError("cannot write " + path.string());
  return out;
}

void check_csv_id(std::string_view id) {
  if (id.find_first_of(",\n\r\"") != std::string_view::npos) {
    throw ValidationError("id '" + std::string(id) + "' cannot be written to CSV");
  }
}

Amount json_amount(const json& v, int unit_exponent) {
  if (v.is_number_unsigned()) return parse_amount(std::to_string(v.get<std::uint64_t>()), unit_exponent);
  if (v.is_number()) return parse_amount(v.dump(), unit_exponent);
  if (v.is_string()) return parse_amount(v.get<std::string>(), unit_exponent);
  throw ValidationError("value must be a number or a decimal string");
}

std::string json_string(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_string()) {
    throw ValidationError(std::string("field '") + key + "' must be a string");
  }
  return it->get<std::string>();
}

std::optional<std::string> json_optional_string(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) throw ValidationError(std::string("field '") + key + "' must be a string");
  return it->get<std::string>();
}

bool json_flag(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return false;
  if (!it->is_boolean()) throw ValidationError(std::string("field '") + key + "' must be a boolean");
  return it->get<bool>();
}

}  // namespace

Amount parse_amount(std::string_view text, int unit_exponent) {
  const std::string_view s = trim(text);
  const auto bad = [&](const std::string& why) -> ValidationError {
    return ValidationError("amount '" + std::string(s) + "': " + why);
  };
  std::size_t i = 0;
  if (i < s.size() && s[i] == '+') ++i;
  if (i < s.size() && s[i] == '-') throw bad("negative");

  // Significant digits as an integer, tracking the decimal exponent.
  unsigned __int128 mantissa = 0;
  long exponent = unit_exponent;
  bool any_digit = false;
  bool inexact_digits = false;  // more digits than fit; only zeros may be dropped
  constexpr unsigned __int128 kDigitLimit = static_cast<unsigned __int128>(1) << 120;
  auto take = [&](char c, bool fractional) {
    any_digit = true;
    const unsigned d = static_cast<unsigned>(c - '0');
    if (mantissa < kDigitLimit / 10) {
      mantissa = mantissa * 10 + d;
      if (fractional) --exponent;
    } else {
      if (d != 0) inexact_digits = true;
      if (!fractional) ++exponent;
    }
  };
  for (; i < s.size() && s[i] >= '0' && s[i] <= '9'; ++i) take(s[i], false);
  if (i < s.size() && s[i] == '.') {
    ++i;
    for (; i < s.size() && s[i] >= '0' && s[i] <= '9'; ++i) take(s[i], true);
  }
  if (!any_digit) throw bad("not a decimal number");
  if (i < s.size() && (s[i] == 'e' || s[i] == 'E')) {
    ++i;
    long e = 0;
    const auto [ptr, ec] = std::from_chars(s.data() + i + (i < s.size() && s[i] == '+' ? 1 : 0),
                                           s.data() + s.size(), e);
    if (ec != std::errc{} || ptr != s.data() + s.size()) throw bad("malformed exponent");
    exponent += e;
    i = s.size();
  }
  if (i != s.size()) throw bad("not a decimal number");
  if (inexact_digits) throw bad("too many significant digits");
  if (mantissa == 0) return 0;

  constexpr auto kMax = std::numeric_limits<Amount>::max();
  if (exponent >= 0) {
    for (long k = 0; k < exponent; ++k) {
      if (mantissa > kMax / 10) throw bad("overflows 64-bit base units");
      mantissa *= 10;
    }
    if (mantissa > kMax) throw bad("overflows 64-bit base units");
    return static_cast<Amount>(mantissa);
  }
  // Any value below 0.1 base units cannot be within 1e-9 of a whole number.
  if (-exponent > 39) throw bad("not a whole number of base units");
  unsigned __int128 scale = 1;
  for (long k = 0; k < -exponent; ++k) {
    if (scale > mantissa) throw bad("not a whole number of base units");
    scale *= 10;
  }
  unsigned __int128 quotient = mantissa / scale;
  const unsigned __int128 remainder = mantissa % scale;
  if (remainder != 0) {
    const unsigned __int128 rounded = quotient + (remainder >= scale - remainder ? 1 : 0);
    const long double exact = static_cast<long double>(quotient) +
                              static_cast<long double>(remainder) / static_cast<long double>(scale);
    const long double rel = std::fabs(static_cast<long double>(rounded) - exact) / exact;
    if (rounded == 0 || rel > 1e-9L) throw bad("not a whole number of base units");
    quotient = rounded;
  }
  if (quotient > kMax) throw bad("overflows 64-bit base units");
  return static_cast<Amount>(quotient);
}

std::vector<TransferRecord> parse_transfers(std::istream& in, int unit_exponent,
                                            std::string_view source, Warnings* warnings) {
  CsvReader csv(in, source);
  const std::size_t layout = csv.header({{"seq", "src", "dst", "amount"},
                                         {"seq", "src", "dst", "amount", "shielded_src", "shielded_dst"}});
  const std::size_t width = layout == 0 ? 4 : 6;
  std::vector<TransferRecord> records;
  std::vector<std::string_view> f;
  bool unsorted = false;
  while (csv.next(f)) {
    if (f.size() != width) {
      fail(source, csv.line(), "expected " + std::to_string(width) + " fields, got " + std::to_string(f.size()));
    }
    TransferRecord rec;
    const auto [ptr, ec] = std::from_chars(f[0].data(), f[0].data() + f[0].size(), rec.seq);
    if (ec != std::errc{} || ptr != f[0].data() + f[0].size()) fail(source, csv.line(), "bad seq '" + std::string(f[0]) + "'");
    if (f[1].empty() || f[2].empty()) fail(source, csv.line(), "empty account id");
    if (f[2] == kMint) fail(source, csv.line(), "MINT cannot receive");
    rec.src = std::string(f[1]);
    rec.dst = std::string(f[2]);
    try {
      rec.amount = parse_amount(f[3], unit_exponent);
    } catch (const ValidationError& e) {
      fail(source, csv.line(), e.what());
    }
    if (width == 6) {
      if (!parse_bool(f[4], rec.shielded_src) || !parse_bool(f[5], rec.shielded_dst)) {
        fail(source, csv.line(), "shielded flags must be 0, 1, true or false");
      }
    }
    if (rec.amount == 0) {
      if (warnings) warnings->push_back(std::string(source) + ":" + std::to_string(csv.line()) + ": zero amount dropped");
      continue;
    }
    if (!records.empty() && rec.seq < records.back().seq) unsorted = true;
    records.push_back(std::move(rec));
  }
  if (unsorted) {
    if (warnings) warnings->push_back(std::string(source) + ": seq is not monotone; rows were stably sorted");
    std::stable_sort(records.begin(), records.end(),
                     [](const TransferRecord& a, const TransferRecord& b) { return a.seq < b.seq; });
  }
  return records;
}

std::vector<TransferRecord> parse_transfers(const std::filesystem::path& path, int unit_exponent,
                                            Warnings* warnings) {
  auto in = open_input(path);
  return parse_transfers(in, unit_exponent, path.string(), warnings);
}

std::vector<UtxoTransaction> parse_utxo(std::istream& in, int unit_exponent, std::string_view source,
                                        Warnings* warnings) {
  (void)warnings;
  std::vector<UtxoTransaction> txs;
  std::set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      const json obj = json::parse(line);
      if (!obj.is_object()) throw ValidationError("line is not a JSON object");
      UtxoTransaction tx;
      tx.txid = json_string(obj, "txid");
      if (tx.txid.empty()) throw ValidationError("empty txid");
      tx.coinbase = json_flag(obj, "coinbase");
      if (auto it = obj.find("inputs"); it != obj.end()) {
        if (!it->is_array()) throw ValidationError("'inputs' must be an array");
        for (const json& j : *it) {
          if (!j.is_object()) throw ValidationError("input must be an object");
          UtxoInput input;
          input.shielded = json_flag(j, "shielded");
          if (!input.shielded) {
            OutPoint op;
            op.txid = json_string(j, "txid");
            auto vout = j.find("vout");
            if (vout == j.end() || !vout->is_number_unsigned() ||
                vout->get<std::uint64_t>() > std::numeric_limits<std::uint32_t>::max()) {
              throw ValidationError("input 'vout' must be a non-negative integer");
            }
            op.vout = vout->get<std::uint32_t>();
            input.prev = std::move(op);
          }
          if (auto v = j.find("value"); v != j.end() && !v->is_null()) input.value = json_amount(*v, unit_exponent);
          input.owner = json_optional_string(j, "owner");
          tx.inputs.push_back(std::move(input));
        }
      }
      auto outs = obj.find("outputs");
      if (outs == obj.end() || !outs->is_array()) throw ValidationError("'outputs' must be an array");
      for (const json& j : *outs) {
        if (!j.is_object()) throw ValidationError("output must be an object");
        auto v = j.find("value");
        if (v == j.end()) throw ValidationError("output without 'value'");
        UtxoOutput output;
        output.value = json_amount(*v, unit_exponent);
        output.owner = json_optional_string(j, "owner");
        output.shielded = json_flag(j, "shielded");
        tx.outputs.push_back(std::move(output));
      }
      if (!seen.insert(tx.txid).second) {
        throw ValidationError("transaction '" + tx.txid + "' appears twice, so its outputs are created twice");
      }
      txs.push_back(std::move(tx));
    } catch (const json::exception& e) {
      fail(source, line_no, std::string("malformed JSON: ") + e.what());
    } catch (const ValidationError& e) {
      fail(source, line_no, e.what());
    }
  }
  if (in.bad()) fail(source, line_no, "read error");
  return txs;
}

std::vector<UtxoTransaction> parse_utxo(const std::filesystem::path& path, int unit_exponent,
                                        Warnings* warnings) {
  auto in = open_input(path);
  return parse_utxo(in, unit_exponent, path.string(), warnings);
}

std::map<std::string, Amount> parse_balances(std::istream& in, int unit_exponent, std::string_view source) {
  CsvReader csv(in, source);
  csv.header({{"node", "balance"}});
  std::map<std::string, Amount> out;
  std::vector<std::string_view> f;
  while (csv.next(f)) {
    if (f.size() != 2) fail(source, csv.line(), "expected 2 fields");
    if (f[0].empty()) fail(source, csv.line(), "empty node id");
    Amount a = 0;
    try {
      a = parse_amount(f[1], unit_exponent);
    } catch (const ValidationError& e) {
      fail(source, csv.line(), e.what());
    }
    Amount& slot = out[std::string(f[0])];
    if (__builtin_add_overflow(slot, a, &slot)) fail(source, csv.line(), "balance overflows");
  }
  return out;
}

std::map<std::string, Amount> parse_balances(const std::filesystem::path& path, int unit_exponent) {
  auto in = open_input(path);
  return parse_balances(in, unit_exponent, path.string());
}

PriorPoolDistribution parse_prior(std::istream& in, std::string_view source) {
  CsvReader csv(in, source);
  csv.header({{"value"}});
  std::vector<double> values;
  std::vector<std::string_view> f;
  while (csv.next(f)) {
    if (f.size() != 1) fail(source, csv.line(), "expected 1 field");
    try {
      values.push_back(parse_double(f[0]));
    } catch (const ValidationError& e) {
      fail(source, csv.line(), e.what());
    }
  }
  try {
    return PriorPoolDistribution::from_values(values);
  } catch (const ValidationError& e) {
    throw ValidationError(std::string(source) + ": " + e.what());
  }
}

PriorPoolDistribution parse_prior(const std::filesystem::path& path) {
  auto in = open_input(path);
  return parse_prior(in, path.string());
}

HeuristicOverride parse_overrides(std::istream& in, std::string_view source) {
  CsvReader csv(in, source);
  csv.header({{"node", "target", "probability"}});
  HeuristicOverride out;
  std::map<std::string, std::size_t, std::less<>> slot;
  std::vector<std::string_view> f;
  while (csv.next(f)) {
    if (f.size() != 3) fail(source, csv.line(), "expected 3 fields");
    if (f[0].empty() || f[1].empty()) fail(source, csv.line(), "empty node id");
    double p = 0.0;
    try {
      p = parse_double(f[2]);
    } catch (const ValidationError& e) {
      fail(source, csv.line(), e.what());
    }
    auto it = slot.find(f[0]);
    if (it == slot.end()) {
      it = slot.emplace(std::string(f[0]), out.rows.size()).first;
      out.rows.push_back({std::string(f[0]), {}});
    }
    out.rows[it->second].row.emplace_back(std::string(f[1]), p);
  }
  return out;
}

HeuristicOverride parse_overrides(const std::filesystem::path& path) {
  auto in = open_input(path);
  return parse_overrides(in, path.string());
}

void write_transfers(std::ostream& out, std::span<const TransferRecord> records) {
  const bool shielded = std::any_of(records.begin(), records.end(), [](const TransferRecord& r) {
    return r.shielded_src || r.shielded_dst;
  });
  out << (shielded ? "seq,src,dst,amount,shielded_src,shielded_dst\n" : "seq,src,dst,amount\n");
  for (const TransferRecord& r : records) {
    check_csv_id(r.src);
    check_csv_id(r.dst);
    out << r.seq << ',' << r.src << ',' << r.dst << ',' << r.amount;
    if (shielded) out << ',' << (r.shielded_src ? 1 : 0) << ',' << (r.shielded_dst ? 1 : 0);
    out << '\n';
  }
}

void write_utxo(std::ostream& out, std::span<const UtxoTransaction> txs) {
  for (const UtxoTransaction& tx : txs) {
    ordered_json obj;
    obj["txid"] = tx.txid;
    obj["coinbase"] = tx.coinbase;
    obj["inputs"] = ordered_json::array();
    for (const UtxoInput& in : tx.inputs) {
      ordered_json j;
      if (in.prev) {
        j["txid"] = in.prev->txid;
        j["vout"] = in.prev->vout;
      }
      if (in.shielded) j["shielded"] = true;
      if (in.value) j["value"] = *in.value;
      if (in.owner) j["owner"] = *in.owner;
      obj["inputs"].push_back(std::move(j));
    }
    obj["outputs"] = ordered_json::array();
    for (const UtxoOutput& o : tx.outputs) {
      ordered_json j;
      j["value"] = o.value;
      if (o.owner) j["owner"] = *o.owner;
      if (o.shielded) j["shielded"] = true;
      obj["outputs"].push_back(std::move(j));
    }
    out << obj.dump() << '\n';
  }
}

std::string format_number(double value) {
  if (value == 0.0) value = 0.0;  // folds -0 into 0
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", value);
  return buf;
}

void write_report_csv(std::ostream& out, const FungibilityReport& report) {
  out << "node,fungibility_bits,expected_steps\n";
  for (const ReportRow& row : report.rows) {
    check_csv_id(row.node);
    out << row.node << ',' << format_number(row.fungibility_bits) << ','
        << format_number(row.expected_steps) << '\n';
  }
  out << "\nsummary,fungibility_bits,expected_steps\n";
  const auto line = [&](const char* name, double f, double s) {
    out << name << ',' << format_number(f) << ',' << format_number(s) << '\n';
  };
  line("mean", report.fungibility.mean, report.expected_steps.mean);
  line("median", report.fungibility.median, report.expected_steps.median);
  line("variance", report.fungibility.variance, report.expected_steps.variance);
  line("max", report.fungibility.max, report.expected_steps.max);
}

void write_distributions_jsonl(std::ostream& out, const FungibilityReport& report) {
  for (const ReportRow& row : report.rows) {
    out << "{\"node\":" << json(row.node).dump() << ",\"distribution\":{";
    bool first = true;
    for (const auto& [absorber, p] : row.distribution) {
      out << (first ? "" : ",") << json(absorber).dump() << ':' << format_number(p);
      first = false;
    }
    out << "}}\n";
  }
}

std::filesystem::path distributions_path(const std::filesystem::path& report_path) {
  std::filesystem::path p = report_path;
  p.replace_extension(".distributions.jsonl");
  return p;
}

void write_report(const FungibilityReport& report, const std::filesystem::path& path,
                  bool include_distributions) {
  if (report.rows.empty()) throw ValidationError("refusing to write an empty report");
  {
    auto out = open_output(path);
    write_report_csv(out, report);
    if (!out.flush()) throw ValidationError("failed writing " + path.string());
  }
  if (include_distributions) {
    const auto side = distributions_path(path);
    auto out = open_output(side);
    write_distributions_jsonl(out, report);
    if (!out.flush()) throw ValidationError("failed writing " + side.string());
  }
}

FungibilityReport read_report(std::istream& csv_in, std::istream* distributions, std::string_view source) {
  CsvReader csv(csv_in, source);
  csv.header({{"node", "fungibility_bits", "expected_steps"}});
  FungibilityReport report;
  std::vector<std::string_view> f;
  while (csv.next(f)) {
    if (f.size() == 3 && f[0] == "summary") break;  // aggregates are recomputed
    if (f.size() != 3) fail(source, csv.line(), "expected 3 fields");
    ReportRow row;
    row.node = std::string(f[0]);
    try {
      row.fungibility_bits = parse_double(f[1]);
      row.expected_steps = parse_double(f[2]);
    } catch (const ValidationError& e) {
      fail(source, csv.line(), e.what());
    }
    if (row.fungibility_bits < 0.0 || row.expected_steps < 0.0) fail(source, csv.line(), "negative value");
    report.rows.push_back(std::move(row));
  }
  std::sort(report.rows.begin(), report.rows.end(),
            [](const ReportRow& a, const ReportRow& b) { return a.node < b.node; });
  for (std::size_t i = 1; i < report.rows.size(); ++i) {
    if (report.rows[i].node == report.rows[i - 1].node) {
      throw ValidationError(std::string(source) + ": node '" + report.rows[i].node + "' listed twice");
    }
  }

  if (distributions != nullptr) {
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(*distributions, line)) {
      ++line_no;
      if (trim(line).empty()) continue;
      try {
        const json obj = json::parse(line);
        const std::string node = json_string(obj, "node");
        auto it = std::lower_bound(report.rows.begin(), report.rows.end(), node,
                                   [](const ReportRow& r, const std::string& n) { return r.node < n; });
        if (it == report.rows.end() || it->node != node) {
          throw ValidationError("distribution for unknown node '" + node + "'");
        }
        auto dist = obj.find("distribution");
        if (dist == obj.end() || !dist->is_object()) throw ValidationError("'distribution' must be an object");
        it->distribution.clear();
        for (const auto& [absorber, p] : dist->items()) {
          if (!p.is_number()) throw ValidationError("probability must be a number");
          it->distribution.emplace_back(absorber, p.get<double>());
        }
        std::sort(it->distribution.begin(), it->distribution.end());
      } catch (const json::exception& e) {
        fail(std::string(source) + " distributions", line_no, std::string("malformed JSON: ") + e.what());
      } catch (const ValidationError& e) {
        fail(std::string(source) + " distributions", line_no, e.what());
      }
    }
  }
  refresh_aggregates(report);
  return report;
}

FungibilityReport read_report(const std::filesystem::path& path) {
  auto in = open_input(path);
  const auto side = distributions_path(path);
  if (std::filesystem::exists(side)) {
    auto dist = open_input(side);
    return read_report(in, &dist, path.string());
  }
  return read_report(in, nullptr, path.string());
}

void write_histogram_csv(std::ostream& out, const Histogram& hist) {
  out << "bin_lower,bin_upper,count\n";
  for (std::size_t i = 0; i < hist.counts.size(); ++i) {
    out << format_number(hist.edges[i]) << ',' << format_number(hist.edges[i + 1]) << ','
        << hist.counts[i] << '\n';
  }
}

}  // namespace fungibility
