// Monte Carlo experiments: martingale tests, tail diagnostics and limit modes.

#include <cmath>
#include <sstream>

#include "experiment_util.hpp"
#include "incmart/errors.hpp"
#include "incmart/integration.hpp"
#include "incmart/process_zoo.hpp"
#include "incmart/quadvar.hpp"
#include "incmart/stats_mc.hpp"

namespace incmart::cli::detail {

namespace {

/// Max - min of values at grid indices [0, last].
double oscillation(const SamplePath& p, std::size_t last) {
  double lo = p[0], hi = p[0];
  for (std::size_t i = 1; i <= last; ++i) {
    lo = std::min(lo, p[i]);
    hi = std::max(hi, p[i]);
  }
  return hi - lo;
}

const HazardPair& hazard_model(const ExperimentConfig& c) {
  const auto* h = std::get_if<HazardPair>(&c.model);
  if (!h) throw ConfigurationError("model: this experiment needs model = hazard_pair");
  return *h;
}

}  // namespace

RunResult run_hazard_martingale(const ExperimentConfig& c) {
  const HazardPair& model = hazard_model(c);
  const GridPtr grid = c.grid.build();
  SampleOptions lean;
  lean.auxiliary = false;
  const Ensemble e = run_ensemble(c.model, grid, c.n_paths, c.seed, c.threads, lean);
  const auto paths = e.paths();

  RunResult r;
  const double s = c.test_real("s", -1.0), t = c.test_real("t", 2.0);
  const MartingaleTestReport mt =
      martingale_test(paths, s, t, value_feature(), c.test_count("buckets", 5), "M1_s");
  r.results["martingale_test"] = to_json(mt);
  r.check("martingale_test", mt.passed, "max |z| = " + num(mt.max_abs_z));

  // M^2 - A should have mean zero when both start at -inf.
  nlohmann::ordered_json moment = nlohmann::ordered_json::array();
  for (double time : c.test_list("times", {-1.0, 0.0, 2.0})) {
    const std::size_t i = grid->snap(time);
    std::vector<double> v(e.size());
    for (std::size_t k = 0; k < e.size(); ++k) {
      const double m = e.bundles[k].path[i];
      v[k] = m * m - (*e.bundles[k].compensator)[i];
    }
    const MeanTest mz = mean_zero_test(v);
    auto doc = to_json(mz);
    doc["t"] = (*grid)[i];
    moment.push_back(doc);
    r.check("second_moment_compensated[t=" + num((*grid)[i]) + "]", mz.passed,
            "mean " + num(mz.mean) + ", z = " + num(mz.z));
  }
  r.results["m_squared_minus_a"] = moment;

  // Jump part of [M1] against N1, exactly.
  std::size_t mismatched = 0;
  double cont_coarse = 0.0;
  for (std::size_t k = 0; k < e.size(); ++k) {
    const QVReport qv = realized_qv(e.bundles[k].path, std::size_t{0});
    const SamplePath& n = *e.bundles[k].driver;
    bool same = true;
    for (std::size_t i = 0; i < n.size(); ++i) same = same && qv.jump_sum[i] == n[i] - n[0];
    if (!same) ++mismatched;
    cont_coarse += std::fabs(qv.qv[qv.qv.size() - 1] - qv.jump_sum[qv.jump_sum.size() - 1]);
  }
  r.check("jump_qv_equals_counting_process", mismatched == 0,
          std::to_string(mismatched) + " of " + std::to_string(e.size()) + " paths differ");

  // A at time 0 on {tau1 > 0}.
  const std::size_t i0 = grid->snap(0.0);
  const HazardLaw& law = model.first;
  const bool standard_logistic =
      law.kind == HazardKind::logistic && law.location == 0.0 && law.scale == 1.0;
  const double target = standard_logistic ? std::log(2.0) : cumulative_hazard(law, (*grid)[i0]);
  double a0_worst = 0.0;
  std::size_t survivors = 0;
  for (const auto& b : e.bundles) {
    if (b.marks.at("tau1")[0] > (*grid)[i0]) {
      ++survivors;
      a0_worst = std::max(a0_worst, std::fabs((*b.compensator)[i0] - target));
    }
  }
  r.results["a0_target"] = target;
  r.results["a0_max_error"] = a0_worst;
  r.results["a0_paths"] = survivors;
  r.check("compensator_at_zero", survivors > 0 && a0_worst <= 1e-6,
          "max |A_0 - " + num(target) + "| = " + num(a0_worst) + " over " +
              std::to_string(survivors) + " paths");

  // The part of [M1] beyond the jumps is a discretisation artefact and shrinks
  // with the cell width.
  const std::size_t fine_cells = c.test_count("refine_cells", 4 * c.grid.n_cells);
  const std::size_t fine_paths = std::min<std::size_t>(c.test_count("refine_paths", 2000), e.size());
  GridSpec fine_spec = c.grid;
  fine_spec.n_cells = fine_cells;
  const Ensemble fine = run_ensemble(c.model, fine_spec.build(), fine_paths, c.seed, c.threads, lean);
  double coarse = 0.0, refined = 0.0;
  for (std::size_t k = 0; k < fine_paths; ++k) {
    const QVReport a = realized_qv(e.bundles[k].path, std::size_t{0});
    const QVReport b = realized_qv(fine.bundles[k].path, std::size_t{0});
    coarse += std::fabs(a.qv[a.qv.size() - 1] - a.jump_sum[a.jump_sum.size() - 1]);
    refined += std::fabs(b.qv[b.qv.size() - 1] - b.jump_sum[b.jump_sum.size() - 1]);
  }
  const double ratio = coarse > 0.0 ? refined / coarse : 0.0;
  r.results["non_jump_qv_mean"] = cont_coarse / static_cast<double>(e.size());
  r.results["refinement_ratio"] = ratio;
  r.check("non_jump_qv_shrinks", ratio <= 0.5,
          "mean |[M] - jump sum| ratio " + std::to_string(fine_cells) + " vs " +
              std::to_string(c.grid.n_cells) + " cells: " + num(ratio));

  const UIReport ui = ui_diagnostic(paths, 0.0, c.test_list("cutoffs", {0.5, 1.0, 2.0}));
  const L2Report l2 = l2_bound_diagnostic(paths, 0.0);
  r.results["uniform_integrability"] = to_json(ui);
  r.results["l2_bound"] = to_json(l2);
  r.check("uniformly_integrable", ui.decays, "tail expectations stabilize and stay small");
  r.check("l2_bounded", l2.bounded, "E[(sM_0)^2] stabilizes as s decreases");

  r.artifacts.add("martingale_test.csv", bucket_csv(mt));
  r.artifacts.add("zscores.svg", z_chart("hazard M1: bucket z-scores", mt));
  r.artifacts.add("paths.svg", fan_chart("hazard M1 paths", paths));
  std::vector<SamplePath> comps;
  for (std::size_t k = 0; k < std::min<std::size_t>(12, e.size()); ++k) comps.push_back(*e.bundles[k].compensator);
  r.artifacts.add("compensator.svg", fan_chart("compensator A1", comps));
  r.artifacts.add("mtest.txt", to_text(mt) + to_text(ui) + to_text(l2));
  return r;
}

RunResult run_heavy_tail_divergence(const ExperimentConfig& c) {
  const HazardPair& model = hazard_model(c);
  const HazardLaw& law = model.first;
  RunResult r;

  // sB_0 by quadrature for s going to -inf.
  std::vector<std::vector<double>> rows;
  std::vector<double> xs, ys;
  bool monotone = true;
  double prev = 0.0, last = 0.0;
  for (int e10 = 1; e10 <= 6; ++e10) {
    const double s = -std::pow(10.0, e10);
    const double b = hazard_moment_integral(law, s, 0.0);
    rows.push_back({s, b, hazard_cdf(law, s)});
    xs.push_back(static_cast<double>(e10));
    ys.push_back(b);
    if (e10 > 1 && !(std::fabs(b) > std::fabs(prev))) monotone = false;
    prev = last = b;
  }
  r.results["sB0_at_minus_1e6"] = last;
  r.check("sB0_exceeds_5", std::fabs(last) > 5.0, "sB_0 = " + num(last) + " at s = -1e6");
  r.check("sB0_grows_monotonically", monotone, "|sB_0| increases as s decreases");
  const double f_at_minus_1 = hazard_cdf(law, -1.0);
  r.results["F_at_minus_1"] = f_at_minus_1;
  r.results["F_at_minus_1e6"] = hazard_cdf(law, -1e6);

  // Simulation: X1 - X2 settles over the earliest decade of time.
  const GridPtr grid = c.grid.build();
  const Ensemble e = run_ensemble(c.model, grid, c.n_paths, c.seed, c.threads);
  if (!(grid->t_min() < 0.0)) throw ConfigurationError("grid: t_min must be negative");
  const std::size_t last_idx = grid->index_at_or_before(grid->t_min() / 10.0);
  const double tol = c.test_real("tol", 1e-2);
  std::size_t diff_stable = 0, single_stable = 0;
  std::vector<SamplePath> diffs, singles;
  for (const auto& b : e.bundles) {
    const SamplePath& x1 = b.extras.at("X1");
    const SamplePath& x2 = b.extras.at("X2");
    std::vector<double> d(x1.size());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = x1[i] - x2[i];
    const SamplePath dp(grid, std::move(d));
    if (oscillation(dp, last_idx) <= tol) ++diff_stable;
    if (oscillation(x1, last_idx) <= tol) ++single_stable;
    if (diffs.size() < 12) {
      diffs.push_back(dp);
      singles.push_back(x1);
    }
  }
  const double n = static_cast<double>(e.size());
  const double frac_diff = static_cast<double>(diff_stable) / n;
  const double frac_single = static_cast<double>(single_stable) / n;
  r.results["decade"] = {grid->t_min(), (*grid)[last_idx]};
  r.results["difference_stable_fraction"] = frac_diff;
  r.results["single_stable_fraction"] = frac_single;
  r.check("difference_settles", frac_diff >= 0.99,
          "fraction of X1 - X2 with oscillation <= " + num(tol) + ": " + num(frac_diff));
  r.check("single_process_does_not_settle", frac_single <= 0.5,
          "fraction of X1 with oscillation <= " + num(tol) + ": " + num(frac_single));

  r.artifacts.add("sB0.csv", table_csv({"s", "sB_0", "F_s"}, rows));
  r.artifacts.add("sB0.svg", line_chart("sB_0 against log10|s|", {{"sB_0", xs, ys}}, "log10|s|", "sB_0"));
  r.artifacts.add("difference_paths.svg", fan_chart("X1 - X2", diffs));
  r.artifacts.add("x1_paths.svg", fan_chart("X1", singles));
  return r;
}

RunResult run_borel_cantelli_modes(const ExperimentConfig& c) {
  const GridPtr grid = c.grid.build();
  const Ensemble e = run_ensemble(c.model, grid, c.n_paths, c.seed, c.threads);
  const auto paths = e.paths();
  const double tol = c.test_real("tol", 1e-2);
  const LimitReport lr = limit_detector(paths, tol);

  std::vector<std::vector<double>> rows;
  std::vector<double> ts, ps;
  for (std::size_t i = 0; i < grid->size(); ++i) {
    std::size_t small = 0;
    for (const auto& p : paths) small += std::fabs(p[i]) <= tol ? 1 : 0;
    const double f = static_cast<double>(small) / static_cast<double>(paths.size());
    rows.push_back({(*grid)[i], f});
    ts.push_back((*grid)[i]);
    ps.push_back(f);
  }

  RunResult r;
  r.results["limit"] = to_json(lr);
  r.check("in_probability", lr.in_probability_fraction >= 0.9,
          "in-probability fraction " + num(lr.in_probability_fraction));
  r.check("not_almost_sure", lr.as_fraction <= 0.5, "a.s.-style fraction " + num(lr.as_fraction));
  r.check("separation", lr.separation >= 0.3, "separation " + num(lr.separation));
  r.artifacts.add("limit_report.json", to_json(lr).dump(2) + "\n");
  r.artifacts.add("limit_report.txt", to_text(lr));
  r.artifacts.add("small_fraction.csv", table_csv({"time", "fraction_small"}, rows));
  r.artifacts.add("small_fraction.svg",
                  line_chart("P(|X_t| <= tol)", {{"fraction", ts, ps}}, "t", "fraction"));
  r.artifacts.add("paths.svg", fan_chart("Borel-Cantelli paths", paths, 6));
  return r;
}

RunResult run_improper_iff_ll1(const ExperimentConfig& c) {
  const GridPtr grid = c.grid.build();
  const std::vector<std::pair<std::string, ModelSpec>> models{{"brownian_r", BrownianR{}},
                                                              {model_name(c.model), c.model}};
  const std::vector<Integrand> phis{Integrand::parse("exp(1)"), Integrand::parse("const(1)")};

  RunResult r;
  nlohmann::ordered_json cells = nlohmann::ordered_json::array();
  std::vector<std::vector<double>> rows;
  for (std::size_t mi = 0; mi < models.size(); ++mi) {
    const Ensemble e = run_ensemble(models[mi].second, grid, c.n_paths, c.seed, c.threads);
    std::vector<QVReport> qvs;
    qvs.reserve(e.size());
    for (const auto& b : e.bundles) qvs.push_back(realized_qv(b.path, std::size_t{0}));
    for (std::size_t fi = 0; fi < phis.size(); ++fi) {
      std::size_t agree = 0, ll1 = 0, converged = 0;
      std::vector<double> values;
      for (std::size_t k = 0; k < e.size(); ++k) {
        const ClassVerdict v = ll1_classify(phis[fi], qvs[k]);
        const IntegralReport ir = improper_integral(phis[fi], e.bundles[k].path);
        const bool is_ll1 = v.verdict == IntegrandClass::LL1;
        ll1 += is_ll1;
        converged += ir.converged;
        agree += is_ll1 == ir.converged;
        if (ir.improper_value) values.push_back(*ir.improper_value);
      }
      const double n = static_cast<double>(e.size());
      const double agreement = static_cast<double>(agree) / n;
      const std::string label = phis[fi].name() + " x " + models[mi].first;
      nlohmann::ordered_json doc;
      doc["phi"] = phis[fi].name();
      doc["model"] = models[mi].first;
      doc["ll1_fraction"] = static_cast<double>(ll1) / n;
      doc["converged_fraction"] = static_cast<double>(converged) / n;
      doc["agreement"] = agreement;
      if (!values.empty()) doc["improper_variance"] = variance_of(values);
      cells.push_back(doc);
      rows.push_back({static_cast<double>(fi), static_cast<double>(mi),
                      static_cast<double>(ll1) / n, static_cast<double>(converged) / n, agreement});
      r.check("agreement[" + label + "]", agreement >= 0.95, "agreement " + num(agreement));
      if (fi == 0 && mi == 0) {
        const double var = variance_of(values);
        r.check("improper_variance[" + label + "]",
                values.size() == e.size() && var >= 0.45 && var <= 0.55,
                "variance " + num(var) + " over " + std::to_string(values.size()) + " values");
      }
    }
  }
  r.results["cells"] = cells;
  r.artifacts.add("matrix.csv",
                  table_csv({"phi_index", "model_index", "ll1_fraction", "converged_fraction",
                             "agreement"},
                            rows));
  return r;
}

RunResult run_inverse_bessel3_entrance(const ExperimentConfig& c) {
  const auto* base = std::get_if<InverseBessel3>(&c.model);
  if (!base) throw ConfigurationError("model: this experiment needs model = inverse_bessel3");
  const GridPtr grid = c.grid.build();
  const auto eps = c.test_list("epsilons", {0.1, 0.05});
  const double s = c.test_real("s", -10.0), t = c.test_real("t", -9.5);
  const std::size_t buckets = c.test_count("buckets", 5);

  RunResult r;
  nlohmann::ordered_json runs = nlohmann::ordered_json::array();
  std::vector<double> medians;
  std::vector<std::string> labels;
  std::vector<double> zs;
  for (double epsilon : eps) {
    InverseBessel3 m = *base;
    m.epsilon = epsilon;
    const Ensemble e = run_ensemble(m, grid, c.n_paths, c.seed, c.threads);
    const auto paths = e.paths();
    const MartingaleTestReport mt = martingale_test(paths, s, t, value_feature(), buckets, "X_s");
    std::vector<double> x0(paths.size());
    for (std::size_t k = 0; k < paths.size(); ++k) x0[k] = paths[k][0];
    const double med = median_of(x0);
    medians.push_back(med);
    nlohmann::ordered_json doc;
    doc["epsilon"] = epsilon;
    doc["median_x_at_t_min"] = med;
    doc["martingale_test"] = to_json(mt);
    runs.push_back(doc);
    r.check("martingale_test[eps=" + num(epsilon) + "]", mt.passed, "max |z| = " + num(mt.max_abs_z));
    for (std::size_t b = 0; b < mt.buckets.size(); ++b) {
      labels.push_back(num(epsilon) + "/b" + std::to_string(b));
      zs.push_back(mt.buckets[b].z);
    }
    r.artifacts.add("mtest_eps" + num(epsilon) + ".csv", bucket_csv(mt));
    if (medians.size() == 1) r.artifacts.add("paths.svg", fan_chart("inverse BES(3)", paths));
  }
  for (std::size_t i = 1; i < eps.size(); ++i) {
    if (eps[i] < eps[i - 1]) {
      r.check("entrance_median[" + num(eps[i]) + " vs " + num(eps[i - 1]) + "]",
              medians[i] > medians[i - 1],
              "median X_tmin " + num(medians[i]) + " vs " + num(medians[i - 1]));
    }
  }
  r.results["runs"] = runs;
  r.artifacts.add("zscores.svg", bar_chart("inverse BES(3) bucket z-scores", labels, zs,
                                           {-kZThreshold, kZThreshold}));
  return r;
}

RunResult run_convergence_vs_qv(const ExperimentConfig& c) {
  const double max_off = c.test_real("max_off_diagonal", 0.05);
  struct Case {
    std::string name;
    ModelSpec model;
    GridSpec grid;
  };
  GridSpec log_grid{-200.0, 0.0, 8000, GridSpacing::log_tail};
  Bump bump;
  bump.a = -10.0;
  bump.b = -5.0;
  const std::vector<Case> cases{{"brownian_r", BrownianR{}, c.grid},
                                {"bump", bump, c.grid},
                                {"borel_cantelli", BorelCantelli{}, log_grid}};
  RunResult r;
  nlohmann::ordered_json reports = nlohmann::ordered_json::array();
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < cases.size(); ++i) {
    const Ensemble e = run_ensemble(cases[i].model, cases[i].grid.build(), c.n_paths, c.seed, c.threads);
    const auto paths = e.paths();
    const ContingencyReport cr = convergence_vs_qv_verdict(paths, cases[i].name, max_off);
    reports.push_back(to_json(cr));
    rows.push_back({static_cast<double>(i), static_cast<double>(cr.counts[1][1]),
                    static_cast<double>(cr.counts[1][0]), static_cast<double>(cr.counts[0][1]),
                    static_cast<double>(cr.counts[0][0]), static_cast<double>(cr.inconclusive)});
    r.check("diagonal[" + cases[i].name + "]", cr.passed,
            "off-diagonal fraction " + num(cr.off_diagonal_fraction));
  }
  r.results["contingency"] = reports;
  r.artifacts.add("contingency.csv",
                  table_csv({"model_index", "qv_stable_value_stable", "qv_stable_value_diverges",
                             "qv_diverges_value_stable", "qv_diverges_value_diverges",
                             "inconclusive"},
                            rows));
  return r;
}

}  // namespace incmart::cli::detail
