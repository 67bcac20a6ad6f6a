#include <atomic>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <thread>

#include <fmt/format.h>
#include <json.hpp>

#include "dpsim/bounds.hpp"
#include "dpsim/harness.hpp"

namespace dpsim {

namespace {

std::string topology_label(const TopologySpec& spec) {
  if (spec.kind == TopologyKind::tree) {
    return fmt::format("tree_d{}_b{}", spec.tree_depth, spec.branching);
  }
  return fmt::format("{}{}", to_string(spec.kind), spec.machines);
}

struct Job {
  std::size_t topology;
  std::uint64_t seed;
};

struct JobResult {
  std::vector<RunRecord> records;
  std::vector<std::string> csvs;
};

void tally(RunRecord& rec, const VerdictTable& v) {
  rec.bound_checks += v.rows.size();
  rec.bound_violations += v.violations;
}

JobResult run_job(const ExperimentConfig& cfg, const Job& job) {
  TopologySpec spec = cfg.topologies[job.topology];
  spec.seed = job.seed;
  RandomMdpParams params = cfg.mdp;
  params.gamma = cfg.gamma;
  const auto inst = gen_topology_mdp(spec, params, job.seed);
  const DepGraph g = build_depgraph(inst.data);
  const MixingMatrix w = mh_matrix(g);
  const double phi = conductance_sweep(g, ConductanceMode::graph_volume).value;
  const std::size_t lb = std::min(g.diameter(), discounted_radius(cfg.gamma, cfg.epsilon));
  const DeltaNoise noise{cfg.delta, job.seed, cfg.noise_mode};
  const std::string label = topology_label(spec);

  RunOptions opt;
  opt.rounds = cfg.round_budget;
  opt.target = cfg.epsilon;
  opt.vstar = solve_vstar(inst.mdp, kOracleTolerance);
  opt.topology_label = label;
  opt.value_width = cfg.value_width;

  JobResult out;
  for (Algorithm alg : cfg.algorithms) {
    RunReport report;
    RunRecord rec;
    switch (alg) {
      case Algorithm::sdbp:
        report = run_sdbp(inst.mdp, inst.data, g, noise, opt);
        tally(rec, compare_bounds(report, BoundKind::thm5_direct));
        break;
      case Algorithm::broadcast:
        report = run_broadcast(inst.mdp, inst.data, noise, opt);
        tally(rec, compare_bounds(report, BoundKind::thm5_direct));
        break;
      case Algorithm::gossip: {
        RunOptions gopt = opt;
        gopt.track_recursion = true;
        report = run_gossip_fvi(inst.mdp, inst.data, g, w, noise, gopt);
        report.meta.diameter = g.diameter();
        tally(rec, compare_bounds(report, BoundKind::gossip_recursion));
        tally(rec, compare_bounds(report, BoundKind::thm8_gossip));
        break;
      }
      case Algorithm::async_sdbp:
        report = run_async_sdbp(inst.mdp, inst.data, g, noise,
                                DelaySchedule(cfg.schedule, cfg.delay, job.seed), opt);
        tally(rec, compare_bounds(report, BoundKind::thm7_async));
        break;
      case Algorithm::sdbp_bandwidth:
        report = run_sdbp_bandwidth(inst.mdp, inst.data, g, noise, cfg.bandwidth_bits, opt);
        break;
    }
    report.meta.gap = w.gap();
    report.meta.phi = phi;
    report.meta.diameter = g.diameter();
    if (report.rounds_to_target) tally(rec, compare_bounds(report, BoundKind::thm1_rounds));

    rec.topology = label;
    rec.machines = spec.machine_count();
    rec.seed = job.seed;
    rec.algorithm = alg;
    rec.rounds_to_target = report.rounds_to_target;
    rec.budget_exceeded = report.budget_exceeded;
    rec.final_error = report.rounds.empty() ? 0.0 : report.rounds.back().sup_error;
    rec.gap = w.gap();
    rec.phi = phi;
    rec.diameter = g.diameter();
    rec.lower_bound = lb;
    rec.csv_file = fmt::format("runs/{}_s{}_{}.csv", label, job.seed, to_string(alg));
    out.records.push_back(rec);
    out.csvs.push_back(report_csv(report));
  }
  return out;
}

std::string format_cell(const SummaryRow::Cell& c, std::uint64_t budget) {
  if (c.runs == 0) return "-";
  if (c.exceeded == c.runs) return fmt::format("> {}", budget);
  std::string s = fmt::format("{:.1f} ± {:.1f}", c.mean, c.std);
  if (c.exceeded > 0) s += fmt::format(" ({}/{} > {})", c.exceeded, c.runs, budget);
  return s;
}

}  // namespace

RunSummary cmd_run(const ExperimentConfig& config, bool write) {
  config.validate();
  std::vector<Job> jobs;
  for (std::size_t t = 0; t < config.topologies.size(); ++t) {
    for (std::uint64_t seed : config.seeds) jobs.push_back({t, seed});
  }
  std::vector<JobResult> results(jobs.size());
  std::vector<std::exception_ptr> errors(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      try {
        results[i] = run_job(config, jobs[i]);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t n_workers = std::min(config.workers, std::max<std::size_t>(jobs.size(), 1));
  if (n_workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t i = 0; i < n_workers; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  RunSummary summary;
  for (const auto& r : results) summary.runs.insert(summary.runs.end(), r.records.begin(), r.records.end());

  for (std::size_t t = 0; t < config.topologies.size(); ++t) {
    SummaryRow row;
    std::vector<const RunRecord*> mine;
    for (const auto& rec : summary.runs) {
      if (rec.topology == topology_label(config.topologies[t])) mine.push_back(&rec);
    }
    row.topology = to_string(config.topologies[t].kind);
    row.machines = config.topologies[t].machine_count();
    std::size_t per_seed = 0;
    for (const auto* rec : mine) {
      if (rec->algorithm != config.algorithms.front()) continue;
      row.phi += rec->phi;
      row.gap += rec->gap;
      row.lower_bound = std::max(row.lower_bound, rec->lower_bound);
      ++per_seed;
    }
    if (per_seed > 0) {
      row.phi /= static_cast<double>(per_seed);
      row.gap /= static_cast<double>(per_seed);
    }
    for (Algorithm alg : config.algorithms) {
      SummaryRow::Cell cell;
      std::vector<double> xs;
      for (const auto* rec : mine) {
        if (rec->algorithm != alg) continue;
        ++cell.runs;
        if (rec->rounds_to_target) {
          xs.push_back(static_cast<double>(*rec->rounds_to_target));
        } else {
          ++cell.exceeded;
        }
      }
      if (!xs.empty()) {
        for (double x : xs) cell.mean += x;
        cell.mean /= static_cast<double>(xs.size());
        double ss = 0.0;
        for (double x : xs) ss += (x - cell.mean) * (x - cell.mean);
        cell.std = xs.size() > 1 ? std::sqrt(ss / static_cast<double>(xs.size() - 1)) : 0.0;
      }
      row.cells.push_back(cell);
    }
    summary.rows.push_back(row);
  }

  // Markdown and CSV tables.
  std::string header = "| Topology | M | Phi | gap(W) |";
  std::string rule = "|---|---|---|---|";
  summary.csv = "topology,M,phi,gap";
  for (Algorithm alg : config.algorithms) {
    header += fmt::format(" {} |", to_string(alg));
    rule += "---|";
    summary.csv += fmt::format(",{0}_mean,{0}_std,{0}_exceeded", to_string(alg));
  }
  header += " LB |";
  rule += "---|";
  summary.csv += ",LB\n";
  summary.markdown = fmt::format("# {}\n\ngamma={} epsilon={} delta={} seeds={} budget={}\n\n{}\n{}\n",
                                 config.name, config.gamma, config.epsilon, config.delta,
                                 config.seeds.size(), config.round_budget, header, rule);
  for (const auto& row : summary.rows) {
    summary.markdown += fmt::format("| {} | {} | {:.3f} | {:.4f} |", row.topology, row.machines, row.phi, row.gap);
    summary.csv += fmt::format("{},{},{:.6f},{:.6f}", row.topology, row.machines, row.phi, row.gap);
    for (const auto& cell : row.cells) {
      summary.markdown += fmt::format(" {} |", format_cell(cell, config.round_budget));
      summary.csv += fmt::format(",{:.3f},{:.3f},{}", cell.mean, cell.std, cell.exceeded);
    }
    summary.markdown += fmt::format(" {} |\n", row.lower_bound);
    summary.csv += fmt::format(",{}\n", row.lower_bound);
  }
  std::size_t violations = 0, checks = 0;
  for (const auto& rec : summary.runs) {
    violations += rec.bound_violations;
    checks += rec.bound_checks;
  }
  summary.markdown += fmt::format("\nbound checks: {} ({} violations)\n", checks, violations);

  nlohmann::ordered_json m;
  m["tool"] = "dpsim";
  m["version"] = kToolVersion;
  m["config_hash"] = config_hash(config);
  m["config"] = config_to_yaml(config);
  m["seeds"] = config.seeds;
  auto& runs = m["runs"] = nlohmann::ordered_json::array();
  for (const auto& rec : summary.runs) {
    runs.push_back({{"topology", rec.topology},
                    {"M", rec.machines},
                    {"seed", rec.seed},
                    {"algorithm", to_string(rec.algorithm)},
                    {"rounds_to_target", rec.rounds_to_target ? nlohmann::ordered_json(*rec.rounds_to_target)
                                                              : nlohmann::ordered_json(nullptr)},
                    {"budget_exceeded", rec.budget_exceeded},
                    {"final_error", rec.final_error},
                    {"gap", rec.gap},
                    {"phi", rec.phi},
                    {"diameter", rec.diameter},
                    {"lower_bound", rec.lower_bound},
                    {"bound_checks", rec.bound_checks},
                    {"bound_violations", rec.bound_violations},
                    {"csv", rec.csv_file}});
  }
  summary.manifest = m.dump(2) + "\n";

  if (write) {
    namespace fs = std::filesystem;
    const fs::path root(config.output_dir);
    fs::create_directories(root / "runs");
    auto put = [](const fs::path& p, const std::string& text) {
      std::ofstream out(p, std::ios::binary | std::ios::trunc);
      if (!out) throw std::runtime_error(fmt::format("cannot write {}", p.string()));
      out << text;
    };
    for (const auto& r : results) {
      for (std::size_t i = 0; i < r.records.size(); ++i) put(root / r.records[i].csv_file, r.csvs[i]);
    }
    put(root / "summary.md", summary.markdown);
    put(root / "summary.csv", summary.csv);
    put(root / "manifest.json", summary.manifest);
  }
  return summary;
}

}  // namespace dpsim
