// Command-line driver: solve single instances, sweep abstention grids,
// evaluate asymptotic curves, and emit numeric-vs-asymptotic comparisons.
//
// Exit codes: 0 success, 2 invalid configuration or input, 3 solver
// failure / non-convergence.  Output is byte-deterministic for a fixed
// configuration and seed; grid points may be evaluated concurrently but
// are emitted in grid order with per-point seeds seed^index, so the
// schedule cannot change the bytes.

#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "abstention/asymptotics.hpp"
#include "abstention/model.hpp"
#include "abstention/solver.hpp"

namespace {

using abst::AbstentionBudget;
using abst::CostMatrix;
using abst::Family;
using abst::FiducialState;
using abst::Task;

// ---------------------------------------------------------------------
// formatting

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// JSON has no NaN/Inf literals; map them to null.
std::string json_number(double v) {
  if (!std::isfinite(v)) return "null";
  return fmt17(v);
}

// ---------------------------------------------------------------------
// asymptotic scenarios selectable from the command line

enum class Scenario {
  phase_optimal,
  phase_flat,
  phase_equator,
  direction_optimal,
  direction_povm,
  direction_antiparallel,
  frame_degenerate,
  frame_rydberg_leading,
  frame_rydberg_implicit,
};

Scenario scenario_from_string(const std::string& s) {
  if (s == "phase_optimal") return Scenario::phase_optimal;
  if (s == "phase_flat") return Scenario::phase_flat;
  if (s == "phase_equator") return Scenario::phase_equator;
  if (s == "direction_optimal") return Scenario::direction_optimal;
  if (s == "direction_povm") return Scenario::direction_povm;
  if (s == "direction_antiparallel") return Scenario::direction_antiparallel;
  if (s == "frame_degenerate") return Scenario::frame_degenerate;
  if (s == "frame_rydberg_leading") return Scenario::frame_rydberg_leading;
  if (s == "frame_rydberg_implicit") return Scenario::frame_rydberg_implicit;
  throw std::invalid_argument("unknown scenario: " + s);
}

// Exponent p in the scaled error n^p * S_min that stays finite in the
// family's natural asymptotic regime.
int scaled_power(Family f) {
  switch (f) {
    case Family::flat_phase:
      return 2;
    case Family::equator:
      return 1;
    case Family::povm_seed_direction:
      return 2;
    case Family::antiparallel:
      return 1;
    case Family::linear_ramp:
      return 1;
    case Family::custom:
      return 2;
  }
  return 2;
}

int scaled_power(Scenario s) {
  switch (s) {
    case Scenario::phase_optimal:
    case Scenario::phase_flat:
    case Scenario::direction_optimal:
    case Scenario::direction_povm:
    case Scenario::frame_degenerate:
      return 2;
    case Scenario::phase_equator:
    case Scenario::direction_antiparallel:
    case Scenario::frame_rydberg_leading:
    case Scenario::frame_rydberg_implicit:
      return 1;
  }
  return 1;
}

double apply_power(int n, int p, double smin) {
  double scale = 1.0;
  for (int i = 0; i < p; ++i) scale *= n;
  return scale * smin;
}

// Critical abstention rate associated with an asymptotic scenario, when
// the scenario has a finite one; NaN otherwise.
double scenario_qstar(Scenario s) {
  switch (s) {
    case Scenario::phase_flat:
      return 0.5;
    case Scenario::direction_povm:
      return abst::direction_povm_qstar();
    default:
      return std::numeric_limits<double>::quiet_NaN();
  }
}

// Unscaled asymptotic error S_min(q) for one scenario at resource n.
double scenario_smin(Scenario s, int n, double q) {
  switch (s) {
    case Scenario::phase_optimal:
      return 2.0 * (1.0 - abst::phase_optimal_fidelity(n));
    case Scenario::phase_flat:
      return 2.0 * (1.0 - abst::phase_flat_fidelity(n, q));
    case Scenario::phase_equator:
      return abst::phase_equator_curve_at(q, n).smin_at(n);
    case Scenario::direction_optimal:
      return 2.0 * (1.0 - abst::direction_optimal_fidelity(2 * n));
    case Scenario::direction_povm:
      return abst::direction_povm_smin(q) / (static_cast<double>(n) * n);
    case Scenario::direction_antiparallel:
      return abst::direction_antiparallel_curve_at(q, n).smin_at(n);
    case Scenario::frame_degenerate:
      return 2.0 * (1.0 - abst::frame_degenerate_fidelity(
                              2 * n, q, abst::FrameScenario::flat));
    case Scenario::frame_rydberg_leading:
      return abst::frame_rydberg_limited(n, q, abst::FrameCurveMode::leading)
          .smin_at(n);
    case Scenario::frame_rydberg_implicit:
      return abst::frame_rydberg_limited(n, q, abst::FrameCurveMode::implicit)
          .smin_at(n);
  }
  return std::numeric_limits<double>::quiet_NaN();
}

// ---------------------------------------------------------------------
// configuration

struct Options {
  std::string task;
  std::string family;
  std::string coeff_file;
  int n = 0;
  bool has_n = false;
  double q = 0.0;
  bool has_q = false;
  std::string q_grid;
  std::string scenario;
  std::string preset;
  std::string out;
  std::string format = "csv";
  std::uint64_t seed = 0;
};

struct Block {
  int n = 0;
  std::vector<double> qs;
};

// "start:stop:step" -> inclusive grid; every value must lie in [0,1).
std::vector<double> parse_grid(const std::string& text) {
  double v[3];
  std::size_t pos = 0;
  std::string rest = text;
  for (int i = 0; i < 3; ++i) {
    std::size_t colon = rest.find(':');
    std::string tok = (i < 2) ? rest.substr(0, colon) : rest;
    if (i < 2 && colon == std::string::npos)
      throw std::invalid_argument("grid must be start:stop:step: " + text);
    try {
      v[i] = std::stod(tok, &pos);
    } catch (const std::exception&) {
      throw std::invalid_argument("bad grid number: " + tok);
    }
    if (pos != tok.size())
      throw std::invalid_argument("bad grid number: " + tok);
    if (i < 2) rest = rest.substr(colon + 1);
  }
  const double start = v[0], stop = v[1], step = v[2];
  if (!(step > 0.0)) throw std::invalid_argument("grid step must be > 0");
  std::vector<double> qs;
  for (int i = 0;; ++i) {
    double q = start + i * step;
    if (q > stop + 1e-12) break;
    if (q < 0.0 || q >= 1.0)
      throw std::invalid_argument("grid value outside [0,1): " + fmt17(q));
    qs.push_back(q);
  }
  if (qs.empty()) throw std::invalid_argument("empty abstention grid");
  return qs;
}

void require_config(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument(what);
}

bool family_allowed(Task t, Family f) {
  if (f == Family::custom) return true;
  switch (t) {
    case Task::phase:
      return f == Family::flat_phase || f == Family::equator;
    case Task::frame_degenerate:
      return f == Family::flat_phase;
    case Task::direction:
      return f == Family::povm_seed_direction || f == Family::antiparallel;
    case Task::frame_rydberg:
      return f == Family::linear_ramp;
  }
  return false;
}

// ---------------------------------------------------------------------
// rows

struct Row {
  int n = 0;
  double q = 0.0;
  double qbar = 1.0;
  double lambda = 1.0;
  double delta = 0.0;
  double fidelity = 0.0;
  double one_minus_f = 0.0;
  double scaled_smin = 0.0;
  double q_star = std::numeric_limits<double>::quiet_NaN();
  double kkt_residual = std::numeric_limits<double>::quiet_NaN();
  int iterations = 0;
  bool converged = true;
  int coincidence_set_size = -1;  // negative: not applicable (asympt rows)
  double asymptotic_smin = std::numeric_limits<double>::quiet_NaN();
  double rel_dev = std::numeric_limits<double>::quiet_NaN();
};

int thread_count(std::size_t jobs) {
  unsigned hw = std::thread::hardware_concurrency();
  if (hw == 0) hw = 1;
  if (const char* env = std::getenv("ABST_THREADS")) {
    char* end = nullptr;
    unsigned long cap = std::strtoul(env, &end, 10);
    if (end != env && *end == '\0' && cap >= 1) hw = static_cast<unsigned>(cap);
  }
  if (hw > jobs) hw = static_cast<unsigned>(jobs);
  return static_cast<int>(hw == 0 ? 1 : hw);
}

// Numeric rows for all grid points of all blocks, in block-then-grid
// order.  Solves run on a small pool; each point uses seed^global_index.
std::vector<Row> numeric_rows(Task task, Family family,
                              const std::string& coeff_file,
                              const std::vector<Block>& blocks,
                              std::uint64_t seed) {
  struct BlockData {
    CostMatrix m;
    FiducialState c;
    double q_star;
  };
  std::vector<BlockData> data;
  for (const Block& b : blocks) {
    BlockData d;
    d.m = abst::build_cost_matrix(task, b.n);
    d.c = (family == Family::custom) ? abst::read_coefficient_file(coeff_file)
                                     : abst::make_fiducial(family, b.n);
    require_config(d.c.n() == b.n,
                   "coefficient file has " + std::to_string(d.c.n() + 1) +
                       " entries, matrix expects " + std::to_string(b.n + 1));
    d.q_star = abst::critical_abstention(d.c, abst::top_eigenpair(d.m)).q_star;
    data.push_back(std::move(d));
  }

  struct Job {
    std::size_t block;
    double q;
  };
  std::vector<Job> jobs;
  for (std::size_t bi = 0; bi < blocks.size(); ++bi)
    for (double q : blocks[bi].qs) jobs.push_back({bi, q});

  std::vector<Row> rows(jobs.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  const int d = abst::param_dimension(task);

  auto work = [&] {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= jobs.size() || failed.load()) break;
      try {
        const Job& job = jobs[i];
        const BlockData& bd = data[job.block];
        AbstentionBudget budget = abst::make_budget(job.q);
        auto r = abst::solve_abstention(bd.m, bd.c, budget,
                                        seed ^ static_cast<std::uint64_t>(i));
        auto fr = abst::fidelity_conversions(r.delta, d);
        Row& row = rows[i];
        row.n = blocks[job.block].n;
        row.q = job.q;
        row.qbar = budget.qbar;
        row.lambda = budget.lambda;
        row.delta = r.delta;
        row.fidelity = fr.fidelity;
        row.one_minus_f = fr.one_minus_f;
        row.scaled_smin = apply_power(row.n, scaled_power(family), fr.smin);
        row.q_star = bd.q_star;
        row.kkt_residual = r.kkt_residual;
        row.iterations = r.iterations;
        row.converged = r.converged;
        row.coincidence_set_size =
            static_cast<int>(r.coincidence_set.size());
      } catch (...) {
        if (!failed.exchange(true)) failure = std::current_exception();
        break;
      }
    }
  };

  int nthreads = thread_count(jobs.size());
  std::vector<std::thread> pool;
  for (int t = 1; t < nthreads; ++t) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  return rows;
}

std::vector<Row> asymptotic_rows(Scenario sc, int n,
                                 const std::vector<double>& qs) {
  const int p = scaled_power(sc);
  std::vector<Row> rows;
  for (double q : qs) {
    AbstentionBudget budget = abst::make_budget(q);
    double smin = scenario_smin(sc, n, q);
    Row row;
    row.n = n;
    row.q = q;
    row.qbar = budget.qbar;
    row.lambda = budget.lambda;
    row.delta = 1.0 - smin;
    row.fidelity = 1.0 - 0.5 * smin;
    row.one_minus_f = 0.5 * smin;
    row.scaled_smin = apply_power(n, p, smin);
    row.q_star = scenario_qstar(sc);
    row.iterations = 0;
    row.converged = true;
    rows.push_back(row);
  }
  return rows;
}

// ---------------------------------------------------------------------
// output

void write_csv(std::FILE* f, const std::vector<Row>& rows, bool compare) {
  std::string header =
      "q,qbar,lambda,delta,fidelity,one_minus_f,scaled_smin,q_star,"
      "kkt_residual,iterations,converged";
  if (compare) header += ",asymptotic_smin,rel_dev";
  std::fputs(header.c_str(), f);
  std::fputc('\n', f);
  for (const Row& r : rows) {
    std::string line = fmt17(r.q) + "," + fmt17(r.qbar) + "," +
                       fmt17(r.lambda) + "," + fmt17(r.delta) + "," +
                       fmt17(r.fidelity) + "," + fmt17(r.one_minus_f) + "," +
                       fmt17(r.scaled_smin) + "," + fmt17(r.q_star) + "," +
                       fmt17(r.kkt_residual) + "," +
                       std::to_string(r.iterations) + "," +
                       (r.converged ? "1" : "0");
    if (compare)
      line += "," + fmt17(r.asymptotic_smin) + "," + fmt17(r.rel_dev);
    std::fputs(line.c_str(), f);
    std::fputc('\n', f);
  }
}

void write_json(std::FILE* f, const std::string& command,
                const std::vector<std::pair<std::string, std::string>>& meta,
                std::uint64_t seed, const std::vector<Row>& rows,
                bool compare) {
  std::string out = "{\n  \"command\": \"" + command + "\",\n";
  for (const auto& [k, v] : meta)
    out += "  \"" + k + "\": \"" + v + "\",\n";
  out += "  \"seed\": " + std::to_string(seed) + ",\n  \"rows\": [";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const Row& r = rows[i];
    out += (i == 0) ? "\n" : ",\n";
    out += "    {\"n\": " + std::to_string(r.n);
    out += ", \"q\": " + json_number(r.q);
    out += ", \"qbar\": " + json_number(r.qbar);
    out += ", \"lambda\": " + json_number(r.lambda);
    out += ", \"delta\": " + json_number(r.delta);
    out += ", \"fidelity\": " + json_number(r.fidelity);
    out += ", \"one_minus_f\": " + json_number(r.one_minus_f);
    out += ", \"scaled_smin\": " + json_number(r.scaled_smin);
    out += ", \"q_star\": " + json_number(r.q_star);
    out += ", \"kkt_residual\": " + json_number(r.kkt_residual);
    out += ", \"iterations\": " + std::to_string(r.iterations);
    out += std::string(", \"converged\": ") + (r.converged ? "true" : "false");
    if (r.coincidence_set_size >= 0)
      out += ", \"coincidence_set_size\": " +
             std::to_string(r.coincidence_set_size);
    if (compare) {
      out += ", \"asymptotic_smin\": " + json_number(r.asymptotic_smin);
      out += ", \"rel_dev\": " + json_number(r.rel_dev);
    }
    out += "}";
  }
  out += rows.empty() ? "]\n}\n" : "\n  ]\n}\n";
  std::fputs(out.c_str(), f);
}

int emit(const Options& o, const std::string& command,
         const std::vector<std::pair<std::string, std::string>>& meta,
         const std::vector<Row>& rows, bool compare) {
  std::FILE* f = stdout;
  if (!o.out.empty()) {
    f = std::fopen(o.out.c_str(), "wb");
    if (!f) {
      std::fprintf(stderr, "abst: cannot open output file: %s\n",
                   o.out.c_str());
      return 2;
    }
  }
  if (o.format == "csv")
    write_csv(f, rows, compare);
  else
    write_json(f, command, meta, o.seed, rows, compare);
  if (f != stdout) std::fclose(f);
  for (const Row& r : rows)
    if (!r.converged) return 3;
  return 0;
}

// ---------------------------------------------------------------------
// commands

struct ParsedCommon {
  Task task;
  Family family;
};

ParsedCommon parse_task_family(const Options& o) {
  require_config(!o.task.empty(), "--task is required");
  require_config(!o.family.empty(), "--family is required");
  Task task = abst::task_from_string(o.task);
  Family family = abst::family_from_string(o.family);
  require_config(family_allowed(task, family),
                 "family '" + o.family + "' is not defined for task '" +
                     o.task + "'");
  if (family == Family::custom)
    require_config(!o.coeff_file.empty(),
                   "--coeff-file is required with --family custom");
  else
    require_config(o.coeff_file.empty(),
                   "--coeff-file only applies to --family custom");
  return {task, family};
}

void require_n(const Options& o) {
  require_config(o.has_n, "--n is required");
  require_config(o.n >= 1, "--n must be >= 1");
}

int cmd_solve(const Options& o) {
  auto [task, family] = parse_task_family(o);
  require_n(o);
  require_config(o.has_q, "solve needs a single --q");
  require_config(o.q_grid.empty(), "solve takes --q, not --q-grid");
  require_config(o.q >= 0.0 && o.q < 1.0, "--q must lie in [0,1)");
  std::vector<Block> blocks{{o.n, {o.q}}};
  auto rows = numeric_rows(task, family, o.coeff_file, blocks, o.seed);
  return emit(o, "solve",
              {{"task", o.task}, {"family", std::string(abst::to_string(family))}},
              rows, false);
}

int cmd_sweep(const Options& o) {
  auto [task, family] = parse_task_family(o);
  require_n(o);
  require_config(!o.q_grid.empty(), "sweep needs --q-grid start:stop:step");
  require_config(!o.has_q, "sweep takes --q-grid, not --q");
  std::vector<Block> blocks{{o.n, parse_grid(o.q_grid)}};
  auto rows = numeric_rows(task, family, o.coeff_file, blocks, o.seed);
  return emit(o, "sweep",
              {{"task", o.task}, {"family", std::string(abst::to_string(family))}},
              rows, false);
}

int cmd_asympt(const Options& o) {
  require_config(!o.scenario.empty(), "asympt needs --scenario");
  Scenario sc = scenario_from_string(o.scenario);
  require_n(o);
  std::vector<double> qs;
  if (o.has_q) {
    require_config(o.q_grid.empty(), "give --q or --q-grid, not both");
    require_config(o.q >= 0.0 && o.q < 1.0, "--q must lie in [0,1)");
    qs.push_back(o.q);
  } else {
    require_config(!o.q_grid.empty(), "asympt needs --q or --q-grid");
    qs = parse_grid(o.q_grid);
  }
  auto rows = asymptotic_rows(sc, o.n, qs);
  return emit(o, "asympt", {{"scenario", o.scenario}}, rows, false);
}

struct PresetDef {
  const char* task;
  const char* family;
  const char* scenario;
  std::vector<Block> blocks;
};

// Canned sweep configurations for the standard solver-vs-asymptote
// comparisons; each pins a task, family, scenario, and rate grid.
PresetDef preset_def(const std::string& name) {
  auto grid = [](double a, double b, double s) {
    std::vector<double> qs;
    for (int i = 0;; ++i) {
      double q = a + i * s;
      if (q > b + 1e-12) break;
      qs.push_back(q);
    }
    return qs;
  };
  if (name == "fig2")
    return {"phase", "equator", "phase_equator",
            {{100, grid(0.10, 0.90, 0.05)}}};
  if (name == "fig4")
    return {"direction", "povm_seed", "direction_povm",
            {{120, grid(0.05, 0.45, 0.05)}, {50, grid(0.50, 0.95, 0.05)}}};
  if (name == "fig5")
    return {"direction", "antiparallel", "direction_antiparallel",
            {{100, grid(0.20, 0.90, 0.05)}}};
  if (name == "fig6")
    return {"frame_rydberg", "linear_ramp", "frame_rydberg_implicit",
            {{20, grid(0.20, 0.80, 0.05)}, {90, grid(0.20, 0.80, 0.05)}}};
  throw std::invalid_argument("unknown preset: " + name);
}

int cmd_compare(const Options& o) {
  Options eff = o;
  std::vector<Block> blocks;
  std::vector<std::pair<std::string, std::string>> meta;
  if (!o.preset.empty()) {
    PresetDef def = preset_def(o.preset);
    eff.task = def.task;
    eff.family = def.family;
    eff.scenario = def.scenario;
    blocks = std::move(def.blocks);
    if (o.has_n)
      for (Block& b : blocks) b.n = o.n;
    meta.push_back({"preset", o.preset});
  } else {
    require_config(!o.scenario.empty(), "compare needs --scenario or --preset");
    require_n(o);
    require_config(!o.q_grid.empty(), "compare needs --q-grid");
    blocks.push_back({o.n, parse_grid(o.q_grid)});
  }
  auto [task, family] = parse_task_family(eff);
  Scenario sc = scenario_from_string(eff.scenario);
  meta.push_back({"task", eff.task});
  meta.push_back({"family", std::string(abst::to_string(family))});
  meta.push_back({"scenario", eff.scenario});

  auto rows = numeric_rows(task, family, eff.coeff_file, blocks, o.seed);
  const int p = scaled_power(family);
  for (Row& r : rows) {
    double smin = scenario_smin(sc, r.n, r.q);
    r.asymptotic_smin = apply_power(r.n, p, smin);
    r.rel_dev = std::abs(r.scaled_smin - r.asymptotic_smin) /
                std::abs(r.asymptotic_smin);
  }
  return emit(o, "compare", meta, rows, true);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Quantum estimation with a fixed abstention rate: numeric solver, "
      "grid sweeps, asymptotic curves, and comparisons."};
  app.require_subcommand(1);

  Options o;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--task", o.task,
                    "phase|direction|frame_degenerate|frame_rydberg");
    sub->add_option("--family", o.family,
                    "flat|equator|povm_seed|antiparallel|linear_ramp|custom");
    sub->add_option("--coeff-file", o.coeff_file,
                    "coefficient file for --family custom");
    sub->add_option("--n", o.n, "index cutoff (matrix order n+1)")
        ->each([&](const std::string&) { o.has_n = true; });
    sub->add_option("--q", o.q, "single abstention rate in [0,1)")
        ->each([&](const std::string&) { o.has_q = true; });
    sub->add_option("--q-grid", o.q_grid, "grid start:stop:step");
    sub->add_option("--scenario", o.scenario, "asymptotic scenario name");
    sub->add_option("--out", o.out, "output path (default: stdout)");
    sub->add_option("--format", o.format, "csv|json (default: csv)")
        ->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--seed", o.seed, "seed for solver fallback restarts");
  };

  CLI::App* solve = app.add_subcommand("solve", "solve one (n, q) instance");
  CLI::App* sweep = app.add_subcommand("sweep", "solve a grid of q values");
  CLI::App* asympt =
      app.add_subcommand("asympt", "evaluate an asymptotic curve");
  CLI::App* compare =
      app.add_subcommand("compare", "numeric vs asymptotic deviation table");
  for (CLI::App* sub : {solve, sweep, asympt, compare}) add_common(sub);
  compare->add_option("--preset", o.preset, "fig2|fig4|fig5|fig6");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (solve->parsed()) return cmd_solve(o);
    if (sweep->parsed()) return cmd_sweep(o);
    if (asympt->parsed()) return cmd_asympt(o);
    return cmd_compare(o);
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "abst: %s\n", e.what());
    return 2;
  } catch (const std::runtime_error& e) {
    std::fprintf(stderr, "abst: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "abst: internal error: %s\n", e.what());
    return 3;
  }
}
