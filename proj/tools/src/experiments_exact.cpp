// Experiments whose checks are exact identities or desk-scale QV sums.

#include <array>
#include <cmath>
#include <random>
#include <sstream>

#include "experiment_util.hpp"
#include "incmart/errors.hpp"
#include "incmart/finite_space.hpp"
#include "incmart/increments.hpp"
#include "incmart/integration.hpp"
#include "incmart/quadvar.hpp"
#include "incmart/rng.hpp"
#include "incmart/stats_mc.hpp"

namespace incmart::cli::detail {

RunResult run_core_identities(const ExperimentConfig& c) {
  const GridPtr grid = c.grid.build();
  const Ensemble e = run_ensemble(c.model, grid, c.n_paths, c.seed, c.threads);
  const auto paths = e.paths();
  const std::size_t n = grid->size();
  const std::size_t anchor = grid->anchor_index();

  // Probe indices come from their own stream so they do not depend on the model.
  Rng rng = make_rng(derive_seed(c.seed, 0xC0DEULL));
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);

  Exact add_worst = 0, tower_worst = 0, assoc_worst = 0, stop_worst = 0;
  double consistency_worst = 0.0, float_add_worst = 0.0;
  std::vector<std::vector<double>> rows;
  for (std::size_t k = 0; k < paths.size(); ++k) {
    std::array<std::size_t, 3> idx{pick(rng), pick(rng), pick(rng)};
    std::sort(idx.begin(), idx.end());
    const auto [s, t, u] = idx;
    const std::size_t sigma_draw = pick(rng);
    GridStop sigma;
    if (sigma_draw % 7 != 0) sigma.emplace(sigma_draw);

    const ExactPath m = to_exact(paths[k]);
    const ExactPath sx = increment(m, s);
    const ExactPath tx = increment(m, t);

    Exact add = 0;
    for (std::size_t v = t; v < n; ++v) add = std::max<Exact>(add, abs(Exact(sx[v] - sx[t] - tx[v])));
    {
      // The same sum in floating point, for contrast.
      const SamplePath& p = paths[k];
      const double d = ((p[t] - p[s]) + (p[u] - p[t])) - (p[u] - p[s]);
      float_add_worst = std::max(float_add_worst, std::fabs(d));
    }

    const Exact tower = path_defect(increment(sx, t), tx);

    // associate() pins the anchor at 0, so compare with m shifted there.
    const ExactPath a = associate(increments_of(m));
    std::vector<Exact> shifted(m.values().begin(), m.values().end());
    const Exact base = m[anchor];
    for (auto& v : shifted) v -= base;
    const ExactPath expected(m.grid_ptr(), std::move(shifted),
                             std::vector<Jump<Exact>>(m.jumps().begin(), m.jumps().end()),
                             m.interpolation());
    const Exact assoc = path_defect(a, expected);

    const Exact stopped = path_defect(stop(sx, sigma), increment(stop(m, sigma), s));

    const auto consistency = check_consistency<Exact>(
        [&](double time) { return increment(m, grid->snap(time)); }, grid,
        {{(*grid)[s], (*grid)[t], (*grid)[u]}}, 0.0);

    add_worst = std::max(add_worst, add);
    tower_worst = std::max(tower_worst, tower);
    assoc_worst = std::max(assoc_worst, assoc);
    stop_worst = std::max(stop_worst, stopped);
    consistency_worst = std::max({consistency_worst, consistency.max_defect,
                                  consistency.max_start_defect});
    rows.push_back({static_cast<double>(k), add.get_d(), tower.get_d(), assoc.get_d(),
                    stopped.get_d(), consistency.max_defect});
  }

  RunResult r;
  r.results["model"] = model_name(c.model);
  r.results["paths"] = paths.size();
  r.results["additivity_defect"] = add_worst.get_d();
  r.results["tower_defect"] = tower_worst.get_d();
  r.results["associate_defect"] = assoc_worst.get_d();
  r.results["stopping_defect"] = stop_worst.get_d();
  r.results["consistency_defect"] = consistency_worst;
  r.results["floating_point_additivity_defect"] = float_add_worst;
  r.check("increment_additivity", add_worst == 0, "max defect " + num(add_worst.get_d()));
  r.check("increment_of_increment", tower_worst == 0, "max defect " + num(tower_worst.get_d()));
  r.check("associate_round_trip", assoc_worst == 0, "max defect " + num(assoc_worst.get_d()));
  r.check("stopping_commutes_with_increment", stop_worst == 0,
          "max defect " + num(stop_worst.get_d()));
  r.check("family_consistency", consistency_worst == 0.0,
          "max defect " + num(consistency_worst));
  r.artifacts.add("defects.csv",
                  table_csv({"path", "additivity", "tower", "associate", "stopping", "consistency"},
                            rows));
  r.artifacts.add("paths.svg", fan_chart("core_identities: sample paths", paths));
  return r;
}

RunResult run_prop_3_7_decomposition(const ExperimentConfig& c) {
  const std::size_t depth = c.grid.n_cells;
  if (depth < 1 || depth > 16) throw ConfigurationError("grid: tree depth (n_cells) must be in [1, 16]");
  const GridPtr grid = c.grid.build();
  const std::vector<double> times(grid->times().begin(), grid->times().end());

  Rng rng = make_rng(derive_seed(c.seed, 0));
  std::uniform_real_distribution<double> up(0.2, 0.8);
  std::vector<std::vector<double>> q(depth);
  for (std::size_t level = 0; level < depth; ++level) {
    q[level].resize(std::size_t{1} << level);
    for (double& p : q[level]) p = up(rng);
  }
  const auto tree = FiniteFilteredSpace::binary_tree(
      depth, times, [&](std::size_t level, std::size_t node) { return q[level][node]; });

  // A fair coin that is never revealed doubles each leaf, so the remainder
  // does not vanish at the last time.
  const std::size_t leaves = tree.outcomes();
  std::vector<double> probs(2 * leaves);
  std::vector<std::vector<std::size_t>> blocks(depth + 1, std::vector<std::size_t>(2 * leaves));
  for (std::size_t w = 0; w < 2 * leaves; ++w) {
    probs[w] = 0.5 * tree.probabilities()[w / 2];
    for (std::size_t k = 0; k <= depth; ++k) blocks[k][w] = tree.block(k, w / 2);
  }
  const FiniteFilteredSpace space(probs, times, blocks);
  const std::size_t outcomes = space.outcomes();

  std::normal_distribution<double> normal(0.0, 1.0);
  auto make_m = [&](FiniteProcess& k_out) {
    FiniteProcess k(depth + 1, outcomes);
    for (std::size_t level = 1; level <= depth; ++level) {
      const double amp = 0.5 + up(rng);
      for (std::size_t w = 0; w < outcomes; ++w) {
        const std::size_t leaf = w / 2;
        const bool bit = (leaf >> (depth - level)) & 1U;
        const double p = q[level - 1][leaf >> (depth - level + 1)];
        k.at(level, w) = k.at(level - 1, w) + amp * ((bit ? 1.0 : 0.0) - p);
      }
    }
    std::vector<double> z(outcomes);
    for (double& v : z) v = normal(rng);
    FiniteProcess m = k;
    for (std::size_t level = 0; level <= depth; ++level) {
      const auto cond = space.conditional_expectation(z, level);
      for (std::size_t w = 0; w < outcomes; ++w) m.at(level, w) += z[w] - cond[w];
    }
    k_out = k;
    return m;
  };
  FiniteProcess k1, k2;
  const FiniteProcess m1 = make_m(k1);
  const FiniteProcess m2 = make_m(k2);

  const Decomposition d = decompose(space, m1);
  const FiniteProcess& kk = d.martingale;
  const FiniteProcess& nn = d.remainder;

  const double reconstruction = m1.max_abs_difference(kk + nn);
  const auto em2 = second_moments(space, m1);
  const auto ek2 = second_moments(space, kk);
  const auto en2 = second_moments(space, nn);
  double centred = 0.0, cross = 0.0, pythagoras = 0.0, increase = 0.0;
  std::vector<std::vector<double>> rows;
  for (std::size_t level = 0; level <= depth; ++level) {
    const auto cond = space.conditional_expectation(nn.column(level), level);
    double c_max = 0.0;
    for (double v : cond) c_max = std::max(c_max, std::fabs(v));
    std::vector<double> prod(outcomes);
    for (std::size_t w = 0; w < outcomes; ++w) prod[w] = kk.at(level, w) * nn.at(level, w);
    const double ekn = space.expectation(prod);
    const double pyth = em2[level] - ek2[level] - en2[level];
    double recon = 0.0;
    for (std::size_t w = 0; w < outcomes; ++w) {
      recon = std::max(recon, std::fabs(m1.at(level, w) - kk.at(level, w) - nn.at(level, w)));
    }
    centred = std::max(centred, c_max);
    cross = std::max(cross, std::fabs(ekn));
    pythagoras = std::max(pythagoras, std::fabs(pyth));
    if (level > 0) increase = std::max(increase, en2[level] - en2[level - 1]);
    rows.push_back({times[level], recon, c_max, ekn, en2[level], em2[level], ek2[level], pyth});
  }

  const MartingaleVerdict k_mart = is_martingale(space, kk);
  const double k_match = kk.max_abs_difference(k1);

  const Decomposition again = decompose(space, kk);
  const double idempotence = std::max(again.martingale.max_abs_difference(kk),
                                      again.remainder.max_abs_difference(FiniteProcess(depth + 1, outcomes)));

  const double a = 2.0, b = -3.0;
  const Decomposition d2 = decompose(space, m2);
  const Decomposition dl = decompose(space, m1 * a + m2 * b);
  const double linearity = std::max(dl.martingale.max_abs_difference(kk * a + d2.martingale * b),
                                    dl.remainder.max_abs_difference(nn * a + d2.remainder * b));

  const auto tau = FiniteStoppingTime::first_hit(space, kk, 1.0);
  const MartingaleVerdict after = check_increment_martingale(space, increment_after(space, m1, tau));
  const MartingaleVerdict stopped = check_increment_martingale(space, stop(space, m1, tau));

  constexpr double tol = 1e-12;
  RunResult r;
  r.results["depth"] = depth;
  r.results["outcomes"] = outcomes;
  r.results["reconstruction_defect"] = reconstruction;
  r.results["conditional_mean_defect"] = centred;
  r.results["cross_moment_defect"] = cross;
  r.results["second_moment_increase"] = increase;
  r.results["pythagoras_defect"] = pythagoras;
  r.results["martingale_defect"] = k_mart.max_defect;
  r.results["martingale_matches_construction"] = k_match;
  r.results["idempotence_defect"] = idempotence;
  r.results["linearity_defect"] = linearity;
  r.results["increment_after_stop_defect"] = after.max_defect;
  r.results["stopped_defect"] = stopped.max_defect;
  r.check("reconstruction", reconstruction <= tol, "max |M - K - N| = " + num(reconstruction));
  r.check("remainder_conditionally_centred", centred <= tol, "max |E[N_t|F_t]| = " + num(centred));
  r.check("orthogonality", cross <= tol, "max |E[K_t N_t]| = " + num(cross));
  r.check("remainder_second_moment_nonincreasing", increase <= tol,
          "largest increase of E[N_t^2] = " + num(increase));
  r.check("pythagoras", pythagoras <= tol, "max |E[M^2] - E[K^2] - E[N^2]| = " + num(pythagoras));
  r.check("martingale_part_is_martingale", k_mart.holds, "defect " + num(k_mart.max_defect));
  r.check("martingale_part_unique", k_match <= tol, "max |K - K_constructed| = " + num(k_match));
  r.check("idempotent", idempotence <= tol, "defect " + num(idempotence));
  r.check("linear", linearity <= tol, "defect " + num(linearity));
  r.check("increment_after_stopping_time", after.holds, "defect " + num(after.max_defect));
  r.check("stopped_process", stopped.holds, "defect " + num(stopped.max_defect));

  r.artifacts.add("defect_table.csv",
                  table_csv({"time", "reconstruction", "cond_mean_N", "E_KN", "E_N2", "E_M2", "E_K2",
                             "pythagoras"},
                            rows));
  r.artifacts.add("space.json", space.to_json().dump(1) + "\n");
  r.artifacts.add("second_moments.svg",
                  line_chart("second moments", {{"E[M^2]", times, em2}, {"E[K^2]", times, ek2},
                                                {"E[N^2]", times, en2}},
                             "t", "moment"));
  return r;
}

RunResult run_qv_brownian(const ExperimentConfig& c) {
  const GridPtr grid = c.grid.build();
  const Ensemble e = run_ensemble(c.model, grid, c.n_paths, c.seed, c.threads);
  const auto paths = e.paths();

  RunResult r;
  std::vector<double> totals(paths.size());
  std::vector<Series> curves;
  std::vector<std::vector<double>> rows;
  double max_jump_sum = 0.0;
  for (std::size_t k = 0; k < paths.size(); ++k) {
    const QVReport rep = realized_qv(paths[k], std::size_t{0});
    totals[k] = rep.qv[rep.qv.size() - 1];
    max_jump_sum = std::max(max_jump_sum, rep.jump_sum[rep.jump_sum.size() - 1]);
    rows.push_back({static_cast<double>(k), static_cast<double>(e.seeds[k]), totals[k]});
    if (k < 8) curves.push_back(series_of("path " + std::to_string(k), rep.qv));
    if (k == 0) {
      std::ostringstream csv;
      write_csv(csv, rep);
      r.artifacts.add("qv_path0.csv", csv.str());
    }
  }
  const double span = grid->t_max() - grid->t_min();
  double predicted_var = 0.0;
  for (std::size_t i = 1; i < grid->size(); ++i) predicted_var += 2.0 * grid->width(i) * grid->width(i);
  const double mean = mean_of(totals);
  std::size_t inside = 0;
  for (double v : totals) inside += (v >= 0.9 * span && v <= 1.1 * span) ? 1 : 0;
  const double frac = static_cast<double>(inside) / static_cast<double>(totals.size());

  r.results["model"] = model_name(c.model);
  r.results["paths"] = paths.size();
  r.results["expected_qv"] = span;
  r.results["mean_qv"] = mean;
  r.results["variance_qv"] = variance_of(totals);
  r.results["predicted_variance"] = predicted_var;
  r.results["fraction_within_10_percent"] = frac;
  r.results["max_jump_sum"] = max_jump_sum;
  r.check("mean_qv", mean >= 0.98 * span && mean <= 1.02 * span,
          "mean " + num(mean) + " vs [" + num(0.98 * span) + ", " + num(1.02 * span) + "]");
  r.check("pathwise_qv", frac >= 0.99, "fraction in [0.9, 1.1] x span: " + num(frac));
  r.check("no_jumps", max_jump_sum == 0.0, "max jump sum " + num(max_jump_sum));
  r.artifacts.add("qv_totals.csv", table_csv({"path", "seed", "qv"}, rows));
  r.artifacts.add("qv_curves.svg", line_chart("realized QV", curves, "t", "[M]_t"));
  return r;
}

RunResult run_integral_properties(const ExperimentConfig& c) {
  const GridPtr grid = c.grid.build();
  const Ensemble e = run_ensemble(c.model, grid, c.n_paths, c.seed, c.threads);
  const auto paths = e.paths();
  const Integrand phi = Integrand::parse(c.integrand_text("phi", "exp(0.5)"));
  const Integrand psi =
      c.integrand.count("psi")
          ? Integrand::parse(c.integrand.at("psi"))
          : Integrand::functional(
                [](const PathPrefix& x, double) {
                  const double v = x.current();
                  return 1.0 / (1.0 + v * v);
                },
                "1/(1+X^2)");
  const std::size_t s = grid->snap(c.test_real("s", -1.0));
  const double level = c.test_real("level", 1.0);
  const std::size_t anchor = grid->anchor_index();

  PropertyReport worst;
  std::size_t jumps_checked = 0, jumps_total = 0, failed = 0, stopped_paths = 0;
  std::vector<std::vector<double>> rows;
  for (std::size_t k = 0; k < paths.size(); ++k) {
    const GridStop sigma = canonical_localizer(paths[k], paths[k][anchor], level);
    if (sigma) ++stopped_paths;
    const PropertyReport p = verify_integral_properties(phi, psi, paths[k], sigma, s);
    worst.increment_structure = std::max(worst.increment_structure, p.increment_structure);
    worst.linearity = std::max(worst.linearity, p.linearity);
    worst.jump_formula = std::max(worst.jump_formula, p.jump_formula);
    worst.qv_formula = std::max(worst.qv_formula, p.qv_formula);
    worst.stopping = std::max(worst.stopping, p.stopping);
    worst.associativity = std::max(worst.associativity, p.associativity);
    jumps_checked += p.jumps_checked;
    jumps_total += paths[k].jumps().size();
    if (!p.passed) ++failed;
    rows.push_back({static_cast<double>(k), p.increment_structure, p.linearity, p.jump_formula,
                    p.qv_formula, p.stopping, p.associativity,
                    static_cast<double>(p.jumps_checked)});
  }
  worst.jumps_checked = jumps_checked;
  worst.passed = failed == 0;

  RunResult r;
  r.results["model"] = model_name(c.model);
  r.results["phi"] = phi.name();
  r.results["psi"] = psi.name();
  r.results["paths"] = paths.size();
  r.results["paths_stopped"] = stopped_paths;
  r.results["worst"] = to_json(worst);
  r.results["jumps_recorded"] = jumps_total;
  r.check("increment_structure", worst.increment_structure == 0.0, "max defect " + num(worst.increment_structure));
  r.check("linearity", worst.linearity == 0.0, "max defect " + num(worst.linearity));
  r.check("jump_formula", worst.jump_formula == 0.0, "max defect " + num(worst.jump_formula));
  r.check("qv_formula", worst.qv_formula == 0.0, "max defect " + num(worst.qv_formula));
  r.check("stopping", worst.stopping == 0.0, "max defect " + num(worst.stopping));
  r.check("associativity", worst.associativity == 0.0, "max defect " + num(worst.associativity));
  r.check("every_jump_checked", jumps_total > 0 && jumps_checked == jumps_total,
          std::to_string(jumps_checked) + " of " + std::to_string(jumps_total) + " jumps");
  r.artifacts.add("defects.csv",
                  table_csv({"path", "increment_structure", "linearity", "jump_formula",
                             "qv_formula", "stopping", "associativity", "jumps_checked"},
                            rows));
  std::vector<SamplePath> integrals;
  for (std::size_t k = 0; k < std::min<std::size_t>(8, paths.size()); ++k) {
    integrals.push_back(increment_integral(phi, paths[k], s));
  }
  r.artifacts.add("integrals.svg", fan_chart("phi (in) M from s", integrals));
  return r;
}

RunResult run_time_change_levy(const ExperimentConfig& c) {
  const GridPtr grid = c.grid.build();
  const Ensemble e = run_ensemble(c.model, grid, c.n_paths, c.seed, c.threads);
  const auto paths = e.paths();
  const double span = grid->t_max() - grid->t_min();

  struct Vol {
    std::string name;
    std::function<double(double)> sigma;
  };
  const std::vector<Vol> vols{{"1+0.5sin(t)", [](double t) { return 1.0 + 0.5 * std::sin(t); }},
                              {"1", [](double) { return 1.0; }},
                              {"2", [](double) { return 2.0; }}};

  RunResult r;
  nlohmann::ordered_json cases = nlohmann::ordered_json::array();
  std::vector<std::vector<double>> rows;
  for (std::size_t v = 0; v < vols.size(); ++v) {
    const auto& vol = vols[v];
    const Integrand sig = Integrand::deterministic(vol.sigma, vol.name);
    const auto w = sig.left_values(*grid);
    std::vector<Exact> w_exact(w.begin(), w.end());
    Exact exact_worst = 0;
    double float_worst = 0.0, density_worst = 0.0, rate_lo = 1e300, rate_hi = -1e300;
    for (std::size_t k = 0; k < paths.size(); ++k) {
      const ExactPath b = to_exact(paths[k]);
      const ExactPath x = integral_kernel(w_exact, b, 0);
      exact_worst = std::max(exact_worst, path_defect(inverse_vol_kernel(x, w_exact, 0), increment(b, std::size_t{0})));

      const SamplePath xd = increment_integral(sig, paths[k], std::size_t{0});
      const SamplePath bd = time_change_by_vol(xd, vol.sigma, 0);
      const SamplePath bq = time_change_to_bm(
          xd, [&](double t) { const double s = vol.sigma(t); return s * s; }, 0);
      for (std::size_t i = 0; i < bd.size(); ++i) {
        const double target = paths[k][i] - paths[k][0];
        float_worst = std::max(float_worst, std::fabs(bd[i] - target));
        density_worst = std::max(density_worst, std::fabs(bq[i] - target));
      }
      const QVReport qv = realized_qv(bd, std::size_t{0});
      const double rate = qv.qv[qv.qv.size() - 1] / span;
      rate_lo = std::min(rate_lo, rate);
      rate_hi = std::max(rate_hi, rate);
      rows.push_back({static_cast<double>(v), static_cast<double>(k), rate});
    }
    nlohmann::ordered_json doc;
    doc["sigma"] = vol.name;
    doc["exact_round_trip_defect"] = exact_worst.get_d();
    doc["floating_round_trip_defect"] = float_worst;
    doc["density_form_defect"] = density_worst;
    doc["qv_rate_min"] = rate_lo;
    doc["qv_rate_max"] = rate_hi;
    cases.push_back(doc);
    r.check("exact_round_trip[" + vol.name + "]", exact_worst == 0,
            "max defect " + num(exact_worst.get_d()));
    r.check("qv_rate[" + vol.name + "]", rate_lo >= 0.9 && rate_hi <= 1.1,
            "QV per unit time in [" + num(rate_lo) + ", " + num(rate_hi) + "]");
    if (v == 0 && !paths.empty()) {
      const SamplePath xd = increment_integral(sig, paths[0], std::size_t{0});
      r.artifacts.add("time_change.svg",
                      line_chart("X = sigma (in) B and recovered B",
                                 {series_of("X", xd), series_of("B", time_change_by_vol(xd, vol.sigma, 0))},
                                 "t", "value"));
    }
  }
  r.results["paths"] = paths.size();
  r.results["cases"] = cases;
  r.artifacts.add("qv_rates.csv", table_csv({"case", "path", "qv_per_unit_time"}, rows));
  return r;
}

}  // namespace incmart::cli::detail
