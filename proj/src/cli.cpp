#include "fungibility/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>

#include "fungibility/absorbers.hpp"
#include "fungibility/builders.hpp"
#include "fungibility/chain.hpp"
#include "fungibility/error.hpp"
#include "fungibility/io.hpp"
#include "fungibility/metrics.hpp"
#include "fungibility/oracle.hpp"
#include "fungibility/solver.hpp"

namespace fungibility::cli {

namespace {

struct PipelineOptions {
  std::string model;
  std::vector<std::string> inputs;
  int unit_exponent = 0;
  std::string balances;
  bool temporal = false;
  bool shielded_collapse = false;
  std::string overrides;
  std::string solver = "auto";
  SolverConfig config;
};

struct Pipeline {
  AugmentedGraph graph;  // after pruning
  AbsorbingChain chain;  // after overrides
};

void add_pipeline_options(CLI::App& cmd, PipelineOptions& o) {
  cmd.add_option("--model", o.model, "Ledger model")->required()->check(CLI::IsMember({"utxo", "account"}));
  cmd.add_option("--input", o.inputs, "Input file (transfers CSV or UTXO JSON lines); repeatable")
      ->required()
      ->take_all();
  cmd.add_option("--unit-exponent", o.unit_exponent, "Decimal digits scaling amounts to base units")
      ->capture_default_str();
  cmd.add_option("--balances", o.balances, "CSV of node,balance declared at the window start");
  cmd.add_flag("--temporal", o.temporal, "Split accounts into per-receipt snapshots (account model only)");
  cmd.add_flag("--shielded-collapse", o.shielded_collapse, "Route shielded endpoints through one pool node");
  cmd.add_option("--overrides", o.overrides, "CSV of node,target,probability forced transition rows");
}

void add_solver_options(CLI::App& cmd, PipelineOptions& o) {
  cmd.add_option("--solver", o.solver, "exact, iterative or auto")
      ->check(CLI::IsMember({"exact", "iterative", "auto"}))
      ->capture_default_str();
  cmd.add_option("--delta", o.config.delta_threshold, "Iterative stopping threshold on the largest series term")
      ->capture_default_str();
  cmd.add_option("--max-iterations", o.config.max_iterations, "Iteration cap before reporting non-convergence")
      ->capture_default_str();
  cmd.add_option("--block-width", o.config.block_width, "Absorber columns per work unit")
      ->capture_default_str();
  cmd.add_option("--exact-cutoff", o.config.exact_cutoff, "Largest transient count auto solves exactly")
      ->capture_default_str();
  cmd.add_option("--threads", o.config.threads, "Worker threads")->capture_default_str();
}

bool any_shielded(std::span<const TransferRecord> records) {
  return std::any_of(records.begin(), records.end(),
                     [](const TransferRecord& r) { return r.shielded_src || r.shielded_dst; });
}

TxGraph build_graph(const PipelineOptions& o, std::ostream& err) {
  if (o.temporal && o.model != "account") {
    throw ValidationError("--temporal requires --model account");
  }
  std::map<std::string, Amount> balances;
  if (!o.balances.empty()) balances = parse_balances(std::filesystem::path(o.balances), o.unit_exponent);
  Warnings warnings;

  TxGraph graph;
  if (o.model == "utxo") {
    std::vector<UtxoTransaction> txs;
    for (const std::string& in : o.inputs) {
      auto part = parse_utxo(std::filesystem::path(in), o.unit_exponent, &warnings);
      txs.insert(txs.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
    }
    graph = build_utxo_graph(txs, UtxoBuildOptions{.collapse_shielded = o.shielded_collapse});
    if (!balances.empty()) graph = with_declared_balances(graph, balances);
  } else {
    std::vector<TransferRecord> records;
    for (const std::string& in : o.inputs) {
      auto part = parse_transfers(std::filesystem::path(in), o.unit_exponent, &warnings);
      records.insert(records.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
    }
    std::stable_sort(records.begin(), records.end(),
                     [](const TransferRecord& a, const TransferRecord& b) { return a.seq < b.seq; });
    if (o.shielded_collapse) {
      records = collapse_shielded_records(records);
    } else if (any_shielded(records)) {
      throw ValidationError("input has shielded transfers; pass --shielded-collapse");
    }
    if (o.temporal) {
      // Declared balances are held before the first record.
      std::vector<TransferRecord> seeded;
      const std::int64_t seq = records.empty() ? 0 : records.front().seq - 1;
      for (const auto& [node, amount] : balances) {
        if (amount > 0) seeded.push_back({seq, std::string(kMint), node, amount, false, false});
      }
      seeded.insert(seeded.end(), records.begin(), records.end());
      graph = build_temporal_account_graph(seeded);
    } else {
      graph = build_account_graph(records);
      if (!balances.empty()) graph = with_declared_balances(graph, balances);
    }
  }
  for (const std::string& w : warnings) err << "warning: " << w << '\n';
  return graph;
}

Pipeline build_pipeline(const PipelineOptions& o, std::ostream& err) {
  const TxGraph graph = build_graph(o, err);
  PruneResult pruned = prune_non_absorbing(augment_absorbers(graph));
  if (!pruned.removed.empty()) {
    err << "warning: pruned " << pruned.removed.size() << " node(s) with no route to a source\n";
  }
  AbsorbingChain chain = build_chain(pruned.graph);
  if (!o.overrides.empty()) {
    OverrideResult r = apply_overrides(chain, parse_overrides(std::filesystem::path(o.overrides)));
    if (!r.removed.empty()) {
      err << "warning: overrides left " << r.removed.size() << " node(s) unable to reach a source\n";
    }
    chain = std::move(r.chain);
  }
  return {std::move(pruned.graph), std::move(chain)};
}

SolverConfig solver_config(const PipelineOptions& o) {
  SolverConfig c = o.config;
  c.mode = parse_solver_mode(o.solver);
  c.validate();
  return c;
}

/// Nodes for an explicit query name; in temporal graphs an account name
/// stands for all of its snapshots.
std::vector<std::size_t> resolve_queries(const Pipeline& p, const std::string& query) {
  const AbsorbingChain& chain = p.chain;
  if (query == "all") return all_transients(chain);

  std::vector<std::size_t> out;
  if (query == "sinks") {
    for (const std::string& id : sinks(p.graph.base())) {
      if (auto t = chain.find_transient(id)) out.push_back(*t);
    }
    if (out.empty()) throw ValidationError("the graph has no sinks to query");
    std::sort(out.begin(), out.end());
    return out;
  }

  std::multimap<std::string, std::string> by_label;
  for (const Node& n : p.graph.base().nodes()) {
    if (n.kind == NodeKind::snapshot) by_label.emplace(n.label, n.id);
  }
  std::string_view rest = query;
  while (true) {
    const std::size_t comma = rest.find(',');
    const std::string name(rest.substr(0, comma));
    if (name.empty()) throw ValidationError("empty name in --query");
    if (auto t = chain.find_transient(name)) {
      out.push_back(*t);
    } else {
      auto [lo, hi] = by_label.equal_range(name);
      if (lo == hi) throw ValidationError("query node '" + name + "' is not a transient state of the chain");
      for (auto it = lo; it != hi; ++it) {
        if (auto s = chain.find_transient(it->second)) out.push_back(*s);
      }
    }
    if (comma == std::string_view::npos) break;
    rest.remove_prefix(comma + 1);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::size_t parse_bins(const std::string& spec) {
  constexpr std::string_view prefix = "bins=";
  if (spec.rfind(prefix, 0) != 0) throw ValidationError("--histogram expects bins=B");
  std::size_t bins = 0;
  const std::string digits = spec.substr(prefix.size());
  const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), bins);
  if (ec != std::errc{} || ptr != digits.data() + digits.size() || bins == 0) {
    throw ValidationError("--histogram expects bins=B with B a positive integer");
  }
  return bins;
}

void print_summary(std::ostream& out, const FungibilityReport& report) {
  char line[160];
  std::snprintf(line, sizeof line, "%-16s%12s%12s%12s%12s\n", "", "mean", "median", "variance", "max");
  out << line;
  const auto row = [&](const char* name, const Aggregates& a) {
    std::snprintf(line, sizeof line, "%-16s%12.4f%12.4f%12.4f%12.4f\n", name, a.mean, a.median, a.variance, a.max);
    out << line;
  };
  row("fungibility", report.fungibility);
  row("expected_steps", report.expected_steps);
}

void emit_histogram(const FungibilityReport& report, const std::string& spec,
                    const std::string& output, std::ostream& out) {
  if (spec.empty()) return;
  std::vector<double> values;
  for (const ReportRow& r : report.rows) values.push_back(r.fungibility_bits);
  const Histogram h = histogram(values, parse_bins(spec));
  if (output.empty()) {
    out << '\n';
    write_histogram_csv(out, h);
    return;
  }
  std::filesystem::path path(output);
  path.replace_extension(".histogram.csv");
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw ValidationError("cannot write " + path.string());
  write_histogram_csv(f, h);
}

std::uint64_t parse_u64(const std::string& text, const char* flag) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw ValidationError(std::string(flag) + " expects a non-negative integer");
  }
  return v;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Fungibility of coins as the entropy of their origin distribution"};
  app.name("fungibility");
  app.require_subcommand(1);

  PipelineOptions analyze_opts;
  std::string query = "sinks";
  std::string output, histogram_spec, prior_path;
  bool distributions = false;
  CLI::App* analyze = app.add_subcommand("analyze", "Build the chain, solve it and report fungibility");
  add_pipeline_options(*analyze, analyze_opts);
  add_solver_options(*analyze, analyze_opts);
  analyze->add_option("--query", query, "sinks, all, or a comma-separated node list")->capture_default_str();
  analyze->add_option("--zcash-prior", prior_path, "CSV of pre-window shielded pool in-edge values");
  analyze->add_option("--output", output, "Report CSV path");
  analyze->add_flag("--distributions", distributions, "Also write the absorber distribution sidecar");
  analyze->add_option("--histogram", histogram_spec, "bins=B: fungibility histogram CSV");

  std::string stats_report, stats_histogram;
  CLI::App* stats = app.add_subcommand("stats", "Recompute the summary of an existing report");
  stats->add_option("--report", stats_report, "Report CSV written by analyze")->required();
  stats->add_option("--histogram", stats_histogram, "bins=B: fungibility histogram CSV on stdout");

  PipelineOptions traj_opts;
  std::string traj_start, traj_output, traj_seed = "0";
  std::size_t traj_walks = 0, traj_steps = 0;
  CLI::App* trajectory = app.add_subcommand("trajectory", "Mean fungibility along forward random walks");
  add_pipeline_options(*trajectory, traj_opts);
  add_solver_options(*trajectory, traj_opts);
  trajectory->add_option("--start", traj_start, "Node that owns an absorber")->required();
  trajectory->add_option("--walks", traj_walks, "Number of walks")->required();
  trajectory->add_option("--max-steps", traj_steps, "Longest walk")->required();
  trajectory->add_option("--seed", traj_seed, "Random seed")->capture_default_str();
  trajectory->add_option("--output", traj_output, "CSV path (stdout when omitted)");

  PipelineOptions oracle_opts;
  std::string oracle_start, oracle_seed = "0", oracle_walks = "100000", oracle_cap = std::to_string(kDefaultStepCap);
  CLI::App* oracle = app.add_subcommand("oracle", "Monte-Carlo absorption estimate");
  oracle->group("");
  add_pipeline_options(*oracle, oracle_opts);
  oracle->add_option("--start", oracle_start, "Transient node")->required();
  oracle->add_option("--walks", oracle_walks, "Number of walks");
  oracle->add_option("--seed", oracle_seed, "Random seed");
  oracle->add_option("--step-cap", oracle_cap, "Longest walk before failing");
  oracle->add_option("--threads", oracle_opts.config.threads, "Worker threads");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, err, err);
    return kExitValidation;
  }

  try {
    if (analyze->parsed()) {
      if (!prior_path.empty() && !analyze_opts.shielded_collapse) {
        throw ValidationError("--zcash-prior requires --shielded-collapse");
      }
      const SolverConfig config = solver_config(analyze_opts);
      const Pipeline p = build_pipeline(analyze_opts, err);
      const auto queries = resolve_queries(p, query);
      const AbsorptionResult result = solve(p.chain, config, queries);

      std::optional<PoolAdjustment> pool;
      if (!prior_path.empty()) {
        pool.emplace();
        pool->prior = parse_prior(std::filesystem::path(prior_path));
        for (const Absorber& a : p.graph.absorbers()) {
          const Node& owner = p.graph.base().node(a.owner);
          if (owner.kind == NodeKind::shielded_pool || owner.label == kShieldedPool) {
            pool->pool_absorbers.push_back(a.id);
          }
        }
      }
      const FungibilityReport report = make_report(result, distributions, pool ? &*pool : nullptr);
      if (!output.empty()) write_report(report, output, distributions);

      out << "nodes           " << p.graph.base().node_count() << '\n'
          << "transients      " << p.chain.transient_count() << '\n'
          << "absorbers       " << p.chain.absorber_count() << '\n'
          << "queried         " << report.rows.size() << '\n'
          << "solver          " << to_string(result.mode()) << '\n';
      print_summary(out, report);
      emit_histogram(report, histogram_spec, output, out);
    } else if (stats->parsed()) {
      const FungibilityReport report = read_report(std::filesystem::path(stats_report));
      out << "queried         " << report.rows.size() << '\n';
      print_summary(out, report);
      emit_histogram(report, stats_histogram, {}, out);
    } else if (trajectory->parsed()) {
      const SolverConfig config = solver_config(traj_opts);
      const Pipeline p = build_pipeline(traj_opts, err);
      const AbsorptionResult result = solve(p.chain, config, all_transients(p.chain));
      const auto series = fungibility_trajectory(p.graph, result, traj_start, traj_walks, traj_steps,
                                                 parse_u64(traj_seed, "--seed"));
      std::ofstream file;
      if (!traj_output.empty()) {
        file.open(traj_output, std::ios::binary | std::ios::trunc);
        if (!file) throw ValidationError("cannot write " + traj_output);
      }
      std::ostream& dst = traj_output.empty() ? out : file;
      dst << "step,mean_fungibility,walks\n";
      for (const TrajectoryPoint& pt : series) {
        dst << pt.step << ',' << format_number(pt.mean_fungibility) << ',' << pt.walks << '\n';
      }
    } else if (oracle->parsed()) {
      const Pipeline p = build_pipeline(oracle_opts, err);
      const WalkStats s = simulate(p.chain, oracle_start, parse_u64(oracle_walks, "--walks"),
                                   parse_u64(oracle_seed, "--seed"), parse_u64(oracle_cap, "--step-cap"),
                                   oracle_opts.config.threads);
      out << "absorber,count,frequency\n";
      for (std::size_t j = 0; j < s.counts.size(); ++j) {
        if (s.counts[j] == 0) continue;
        out << p.chain.absorbers()[j] << ',' << s.counts[j] << ',' << format_number(s.frequencies[j]) << '\n';
      }
      out << "\nmean_steps," << format_number(s.mean_steps) << "\nsteps_variance,"
          << format_number(s.steps_variance) << '\n';
    }
  } catch (const ConvergenceError& e) {
    err << "error: solver did not converge: " << e.what() << '\n';
    return kExitNonConvergence;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
  return kExitOk;
}

}  // namespace fungibility::cli
