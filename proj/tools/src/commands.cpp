#include "incmart/cli/commands.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "experiment_util.hpp"
#include "incmart/cli/experiments.hpp"
#include "incmart/errors.hpp"
#include "incmart/integration.hpp"
#include "incmart/quadvar.hpp"
#include "incmart/stats_mc.hpp"

namespace incmart::cli {

namespace {

using detail::num;

struct Globals {
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> paths;
  std::optional<std::string> grid;
  std::optional<std::string> spacing;
  std::optional<std::string> out;
  std::optional<unsigned> threads;
};

struct ModelFlags {
  std::string config_file;
  std::optional<std::string> model;
  std::vector<std::string> params;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config file " + path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void apply_globals(ExperimentConfig& c, const Globals& g) {
  if (g.seed) c.seed = *g.seed;
  if (g.paths) c.n_paths = *g.paths;
  if (g.grid) {
    const GridSpacing keep = c.grid.spacing;
    c.grid = parse_grid(*g.grid);
    c.grid.spacing = keep;
  }
  if (g.spacing) c.grid.spacing = parse_config("spacing = " + *g.spacing).grid.spacing;
  if (g.out) c.out = *g.out;
  if (g.threads) c.threads = *g.threads;
}

ExperimentConfig adhoc_config(const std::string& command, const ModelFlags& m, const Globals& g) {
  ExperimentConfig c = m.config_file.empty() ? parse_config("model = brownian_r\ngrid = -10:0:1000\n")
                                             : parse_config(read_file(m.config_file));
  if (c.name.empty()) c.name = command;
  if (m.model || !m.params.empty()) {
    if (m.model) c.model_name = *m.model;
    if (!c.model_name) c.model_name = "brownian_r";
    for (const auto& kv : m.params) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw ConfigurationError("--param expects key=value, got '" + kv + "'");
      c.model_params[kv.substr(0, eq)] = kv.substr(eq + 1);
    }
    c.model = parse_model(*c.model_name, c.model_params);
  }
  apply_globals(c, g);
  return c;
}

RunResult simulate(const ExperimentConfig& c) {
  const GridPtr grid = c.grid.build();
  const Ensemble e = run_ensemble(c.model, grid, c.n_paths, c.seed, c.threads);
  const auto paths = e.paths();
  std::vector<double> last;
  for (const auto& p : paths) last.push_back(p[p.size() - 1]);
  RunResult r;
  r.results["model"] = model_name(c.model);
  r.results["paths"] = paths.size();
  r.results["mean_final"] = detail::mean_of(last);
  r.results["variance_final"] = detail::variance_of(last);
  std::ostringstream ens;
  write_ensemble_csv(ens, e);
  r.artifacts.add("ensemble.csv", ens.str());
  r.artifacts.add("path0.csv", to_csv(paths.front()));
  r.artifacts.add("paths.svg", detail::fan_chart(model_name(c.model) + " paths", paths));
  return r;
}

RunResult qv(const ExperimentConfig& c, double from) {
  const GridPtr grid = c.grid.build();
  const Ensemble e = run_ensemble(c.model, grid, c.n_paths, c.seed, c.threads);
  const std::size_t s = grid->snap(from);
  RunResult r;
  std::vector<std::vector<double>> rows;
  std::vector<Series> curves;
  std::vector<double> totals;
  std::size_t verdicts[3] = {0, 0, 0};
  for (std::size_t k = 0; k < e.size(); ++k) {
    const QVReport rep = realized_qv(e.bundles[k].path, s);
    const std::size_t n = rep.qv.size() - 1;
    totals.push_back(rep.qv[n]);
    ++verdicts[static_cast<int>(rep.tail)];
    rows.push_back({static_cast<double>(k), rep.qv[n], rep.jump_sum[n], rep.continuous[n]});
    if (k < 8) curves.push_back(detail::series_of("path " + std::to_string(k), rep.qv));
    if (k == 0) {
      std::ostringstream csv;
      write_csv(csv, rep);
      r.artifacts.add("qv_path0.csv", csv.str());
    }
  }
  r.results["model"] = model_name(c.model);
  r.results["from"] = (*grid)[s];
  r.results["mean_qv"] = detail::mean_of(totals);
  r.results["tail_converges"] = verdicts[0];
  r.results["tail_diverges"] = verdicts[1];
  r.results["tail_inconclusive"] = verdicts[2];
  r.artifacts.add("qv_totals.csv", detail::table_csv({"path", "qv", "jump_sum", "cont_est"}, rows));
  r.artifacts.add("qv_curves.svg", line_chart("realized QV", curves, "t", "[M]_t"));
  return r;
}

RunResult integrate(const ExperimentConfig& c) {
  const Integrand phi = Integrand::parse(c.integrand_text("phi", "exp(1)"));
  const GridPtr grid = c.grid.build();
  const Ensemble e = run_ensemble(c.model, grid, c.n_paths, c.seed, c.threads);
  RunResult r;
  std::vector<double> values;
  std::vector<std::vector<double>> rows;
  std::size_t ll1 = 0, converged = 0;
  std::vector<SamplePath> shown;
  for (std::size_t k = 0; k < e.size(); ++k) {
    const SamplePath& m = e.bundles[k].path;
    const ClassVerdict v = ll1_classify(phi, realized_qv(m, std::size_t{0}), m);
    const IntegralReport ir = improper_integral(phi, m);
    ll1 += v.verdict == IntegrandClass::LL1;
    converged += ir.converged;
    if (ir.improper_value) values.push_back(*ir.improper_value);
    rows.push_back({static_cast<double>(k), ir.improper_value.value_or(std::nan("")),
                    ir.converged ? 1.0 : 0.0, v.verdict == IntegrandClass::LL1 ? 1.0 : 0.0});
    if (k == 0) r.artifacts.add("integral_path0.csv", to_csv(ir.integral));
    if (k < 12) shown.push_back(ir.integral);
  }
  const double n = static_cast<double>(e.size());
  r.results["model"] = model_name(c.model);
  r.results["phi"] = phi.name();
  r.results["ll1_fraction"] = static_cast<double>(ll1) / n;
  r.results["converged_fraction"] = static_cast<double>(converged) / n;
  if (!values.empty()) {
    r.results["mean_value"] = detail::mean_of(values);
    r.results["variance_value"] = detail::variance_of(values);
  }
  r.artifacts.add("integrals.csv",
                  detail::table_csv({"path", "improper_value", "converged", "ll1"}, rows));
  r.artifacts.add("integrals.svg", detail::fan_chart("phi (in) M from -inf", shown));
  return r;
}

RunResult mtest(const ExperimentConfig& c) {
  const GridPtr grid = c.grid.build();
  const Ensemble e = run_ensemble(c.model, grid, c.n_paths, c.seed, c.threads);
  const double s = c.test_real("s", grid->t_min() + 0.25 * (grid->t_max() - grid->t_min()));
  const double t = c.test_real("t", grid->t_max());
  const MartingaleTestReport m = martingale_test(e, s, t, increment_feature(), c.test_count("buckets", 5),
                                                "X_s - X_tmin");
  RunResult r;
  r.results["model"] = model_name(c.model);
  r.results["martingale_test"] = to_json(m);
  r.check("martingale_test", m.passed,
          "max |z| = " + num(m.max_abs_z) + ", " + std::to_string(m.excluded) + " of " +
              std::to_string(m.buckets.size()) + " buckets below " + std::to_string(kMinBucket) +
              " paths");
  r.artifacts.add("martingale_test.csv", detail::bucket_csv(m));
  r.artifacts.add("martingale_test.txt", to_text(m));
  r.artifacts.add("zscores.svg", detail::z_chart("bucket z-scores", m));
  return r;
}

int finish(const std::string& name, const Outcome& o, const ExperimentConfig& c, std::ostream& out,
           std::ostream& err) {
  o.files.commit(c.out);
  const auto& checks = o.result.checks;
  std::size_t ok = 0;
  for (const auto& k : checks) ok += k.passed;
  for (const auto& k : checks) {
    out << (k.passed ? "  ok    " : "  FAIL  ") << k.name << ": " << k.detail << '\n';
  }
  out << name << ": " << (o.result.passed() ? "PASS" : "FAIL") << " (" << ok << "/" << checks.size()
      << " checks) in " << num(o.seconds) << " s, wrote " << c.out << '\n';
  if (!o.within_budget) err << "warning: " << name << " exceeded its runtime budget\n";
  if (!o.result.passed()) {
    err << failure_list(o.result).dump() << '\n';
    return kExitCheckFailed;
  }
  return kExitPass;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"incmart: increment-martingale simulation and verification", "incmart"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--seed", g.seed, "master seed");
  app.add_option("--paths", g.paths, "number of paths")->check(CLI::PositiveNumber);
  app.add_option("--grid", g.grid, "grid as t_min:t_max:n_cells");
  app.add_option("--spacing", g.spacing, "uniform or log_tail");
  app.add_option("--out", g.out, "output directory");
  app.add_option("--threads", g.threads, "worker threads")->check(CLI::Range(1u, 1024u));

  ModelFlags mf;
  auto add_model_flags = [&](CLI::App* sub) {
    sub->add_option("--config", mf.config_file, "config file");
    sub->add_option("--model", mf.model, "model name");
    sub->add_option("--param", mf.params, "model parameter key=value (repeatable)");
  };
  auto* sim = app.add_subcommand("simulate", "sample an ensemble and write paths");
  add_model_flags(sim);
  auto* qv_cmd = app.add_subcommand("qv", "realized quadratic variation");
  add_model_flags(qv_cmd);
  double qv_from = -1e300;
  qv_cmd->add_option("--from", qv_from, "start time (default t_min)");
  auto* integ = app.add_subcommand("integrate", "integral from -inf and LL1 verdict");
  add_model_flags(integ);
  std::optional<std::string> phi_text;
  integ->add_option("--phi", phi_text, "integrand: exp(r), const(c), poly(k), indicator(a,b)");
  auto* mt = app.add_subcommand("mtest", "bucketed martingale test of sM_t");
  add_model_flags(mt);
  std::optional<double> mt_s, mt_t;
  std::optional<std::size_t> mt_buckets;
  mt->add_option("--s", mt_s, "conditioning time");
  mt->add_option("--t", mt_t, "terminal time");
  mt->add_option("--buckets", mt_buckets, "number of buckets");

  auto* exp = app.add_subcommand("experiment", "registry experiments");
  exp->require_subcommand(1);
  auto* exp_run = exp->add_subcommand("run", "run a registry experiment");
  std::string exp_name, exp_config;
  exp_run->add_option("name", exp_name, "experiment name")->required();
  exp_run->add_option("--config", exp_config, "config file replacing the defaults");
  auto* exp_list = exp->add_subcommand("list", "list registry experiments");
  auto* exp_show = exp->add_subcommand("config", "print the default config of an experiment");
  std::string show_name;
  exp_show->add_option("name", show_name, "experiment name")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitPass;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (exp_list->parsed()) {
      for (const auto& e : registry()) {
        out << e.name << "  (budget " << num(e.budget_seconds) << " s)  " << e.description << '\n';
      }
      return kExitPass;
    }
    if (exp_show->parsed()) {
      out << find_experiment(show_name).default_config;
      return kExitPass;
    }
    if (exp_run->parsed()) {
      const Experiment& e = find_experiment(exp_name);
      ExperimentConfig c = exp_config.empty() ? default_config(e) : parse_config(read_file(exp_config));
      if (!g.out) c.out = "out/" + e.name;
      apply_globals(c, g);
      return finish(e.name, run_experiment(e, c), c, out, err);
    }

    const std::string command = sim->parsed() ? "simulate"
                                : qv_cmd->parsed() ? "qv"
                                : integ->parsed() ? "integrate"
                                                  : "mtest";
    ExperimentConfig c = adhoc_config(command, mf, g);
    if (!g.out && mf.config_file.empty()) c.out = "out/" + command;
    if (phi_text) {
      Integrand::parse(*phi_text);
      c.integrand["phi"] = *phi_text;
    }
    if (mt_s) c.test["s"] = format_double(*mt_s);
    if (mt_t) c.test["t"] = format_double(*mt_t);
    if (mt_buckets) c.test["buckets"] = std::to_string(*mt_buckets);
    std::function<RunResult(const ExperimentConfig&)> body;
    if (command == "simulate") body = simulate;
    if (command == "qv") body = [&](const ExperimentConfig& cc) { return qv(cc, std::max(qv_from, cc.grid.t_min)); };
    if (command == "integrate") body = integrate;
    if (command == "mtest") body = mtest;
    return finish(command, run_and_package(command, 0.0, body, c), c, out, err);
  } catch (const IoError& e) {
    err << "io error: " << e.what() << '\n';
    return kExitIo;
  } catch (const ConfigurationError& e) {
    err << "config error:\n" << e.what() << '\n';
    return kExitUsage;
  } catch (const ModelError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const RangeError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ArgumentError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitUsage;
  }
}

}  // namespace incmart::cli
