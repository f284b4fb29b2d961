#include "shiftsim/harness/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <sstream>

#include "shiftsim/filtering.hpp"
#include "shiftsim/harness/csv.hpp"
#include "shiftsim/kernels.hpp"
#include "shiftsim/mixing.hpp"
#include "shiftsim/synthetic.hpp"
#include "shiftsim/trend.hpp"
#include "shiftsim/vec.hpp"

namespace shiftsim {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::string fmt(double v) { return format_cell(Cell{v}); }

struct Ctx {
    SeedSpec seed;
    std::filesystem::path out;
    bool strict = false;
    nlohmann::ordered_json results;
    nlohmann::ordered_json counters;
    std::vector<CheckResult> checks;

    void add_check(std::string name, std::string statement, double margin,
                   bool pass) {
        checks.push_back(
            CheckResult{std::move(name), std::move(statement), margin, pass});
    }
};

double mean_of(const std::vector<double>& xs) {
    double s = 0.0;
    for (double x : xs) s += x;
    return s / static_cast<double>(xs.size());
}

double se_of_mean(const std::vector<double>& xs) {
    if (xs.size() < 2) return 0.0;
    const double m = mean_of(xs);
    double ss = 0.0;
    for (double x : xs) ss += (x - m) * (x - m);
    return std::sqrt(ss / (static_cast<double>(xs.size() - 1) *
                           static_cast<double>(xs.size())));
}

bool specs_identical(const DistributionSpec& a, const DistributionSpec& b) {
    return a.rho == b.rho && a.noise == b.noise && a.theta == b.theta;
}

// ---------------------------------------------------------------- line_sweep

void run_line_sweep(const LineSweepConfig& c, Ctx& ctx) {
    std::vector<NoiseFamily> families = c.families;
    if (families.empty())
        families.push_back(c.train.noise.value_or(NoiseFamily::gaussian));

    Table points{{"family", "n", "xi", "trial", "acc_ref", "se_ref", "acc_shift",
                  "se_shift", "u", "v", "clamped_ref", "clamped_shift"},
                 {}};
    Table cells{{"family", "n", "xi", "mean_acc_ref", "se_acc_ref", "closed_form",
                 "limit", "mean_acc_shift"},
                {}};

    nlohmann::ordered_json fits_json = nlohmann::ordered_json::object();
    nlohmann::ordered_json cells_json = nlohmann::ordered_json::array();
    struct FamilyStats {
        std::vector<double> all_ref_accs;
        TrendFit fit_to, fit_free;
        double worst_closed_form_gap = 0.0;
        double theory_slope = 0.0;
    };
    std::vector<FamilyStats> fam_stats(families.size());

    const bool mc_mode = c.eval.mode == EvalConfig::Mode::mc;
    const std::uint64_t m = c.eval.samples;

    for (std::size_t fi = 0; fi < families.size(); ++fi) {
        const NoiseFamily family = families[fi];
        const DistributionSpec train = c.train.realize(c.dimension, family);
        const DistributionSpec test_ref = c.test_ref.realize(c.dimension, family);
        const DistributionSpec test_shift = c.test_shift.realize(c.dimension, family);
        const bool same_tests = specs_identical(test_ref, test_shift);
        FamilyStats& stats = fam_stats[fi];
        stats.theory_slope = theoretical_slope(train.theta, test_ref, test_shift);

        std::vector<std::pair<double, double>> uv;
        std::size_t cell = 0;
        for (std::uint64_t n : c.n_grid) {
            for (double xi : c.xi_grid) {
                const TrainedModelSpec mspec{train, n, xi};
                std::vector<double> cell_ref, cell_shift;
                for (std::uint64_t t = 0; t < c.trials; ++t) {
                    const LinearModel w = sample_trained_model(
                        mspec, derive_stream(ctx.seed, "line-model", fi)
                                   .substream(cell)
                                   .substream(t));
                    double acc_ref, se_ref, acc_shift, se_shift;
                    double u, v;
                    bool cl_ref = false, cl_shift = false;
                    if (mc_mode) {
                        const McAccuracy ar = mc_accuracy(
                            w, test_ref, m,
                            derive_stream(ctx.seed, "line-eval-ref", fi)
                                .substream(cell)
                                .substream(t));
                        McAccuracy as = ar;
                        if (!same_tests)
                            as = mc_accuracy(
                                w, test_shift, m,
                                derive_stream(ctx.seed, "line-eval-shift", fi)
                                    .substream(cell)
                                    .substream(t));
                        acc_ref = ar.accuracy.value;
                        se_ref = ar.stderr_;
                        acc_shift = as.accuracy.value;
                        se_shift = as.stderr_;
                        const Probability pr = clamp_accuracy(ar.accuracy, m);
                        const Probability ps = clamp_accuracy(as.accuracy, m);
                        cl_ref = pr.value != ar.accuracy.value;
                        cl_shift = ps.value != as.accuracy.value;
                        u = probit(pr.value);
                        v = probit(ps.value);
                    } else {
                        acc_ref = exact_gaussian_accuracy(w, test_ref).value;
                        acc_shift = same_tests
                                        ? acc_ref
                                        : exact_gaussian_accuracy(w, test_shift).value;
                        se_ref = se_shift = 0.0;
                        u = probit(acc_ref);
                        v = probit(acc_shift);
                    }
                    points.add_row({std::string(to_string(family)), n, xi, t, acc_ref,
                                    se_ref, acc_shift, se_shift, u, v,
                                    std::uint64_t(cl_ref), std::uint64_t(cl_shift)});
                    uv.emplace_back(u, v);
                    cell_ref.push_back(acc_ref);
                    cell_shift.push_back(acc_shift);
                    stats.all_ref_accs.push_back(acc_ref);
                }
                const double cf = closed_form_accuracy(mspec, test_ref).value;
                const double lim = limit_accuracy(mspec, test_ref).value;
                const double cell_mean = mean_of(cell_ref);
                cells.add_row({std::string(to_string(family)), n, xi, cell_mean,
                               se_of_mean(cell_ref), cf, lim, mean_of(cell_shift)});
                nlohmann::ordered_json cj;
                cj["family"] = to_string(family);
                cj["n"] = n;
                cj["xi"] = xi;
                cj["mean_acc_ref"] = cell_mean;
                cj["se_acc_ref"] = se_of_mean(cell_ref);
                cj["closed_form"] = cf;
                cj["limit"] = lim;
                cells_json.push_back(std::move(cj));
                stats.worst_closed_form_gap =
                    std::max(stats.worst_closed_form_gap, std::fabs(cell_mean - cf));
                ++cell;
            }
        }
        stats.fit_to = fit_trend(uv, FitMode::through_origin);
        stats.fit_free = fit_trend(uv, FitMode::free);

        nlohmann::ordered_json fj;
        fj["theory_slope"] = stats.theory_slope;
        fj["through_origin_slope"] = stats.fit_to.slope;
        fj["through_origin_rms"] = stats.fit_to.rms_residual;
        fj["free_slope"] = stats.fit_free.slope;
        fj["free_intercept"] = stats.fit_free.intercept;
        fj["free_rms"] = stats.fit_free.rms_residual;
        fj["n_points"] = static_cast<std::uint64_t>(uv.size());
        fits_json[to_string(family)] = std::move(fj);
    }

    emit_csv(points, ctx.out / "points.csv");
    emit_csv(cells, ctx.out / "cells.csv");
    ctx.results["fits"] = std::move(fits_json);
    ctx.results["cells"] = std::move(cells_json);

    for (std::size_t fi = 0; fi < families.size(); ++fi) {
        const FamilyStats& s = fam_stats[fi];
        const char* fam = to_string(families[fi]);
        if (c.checks.slope_rel_tol) {
            const double rel = std::fabs(s.fit_to.slope / s.theory_slope - 1.0);
            ctx.add_check(
                std::string("line_slope/") + fam,
                "through-origin slope " + fmt(s.fit_to.slope) + " within " +
                    fmt(*c.checks.slope_rel_tol * 100) + "% of theory " +
                    fmt(s.theory_slope),
                *c.checks.slope_rel_tol - rel, rel <= *c.checks.slope_rel_tol);
        }
        if (c.checks.intercept_abs_tol) {
            const double icpt = std::fabs(s.fit_free.intercept);
            ctx.add_check(std::string("line_intercept/") + fam,
                          "free-fit |intercept| " + fmt(icpt) + " <= " +
                              fmt(*c.checks.intercept_abs_tol),
                          *c.checks.intercept_abs_tol - icpt,
                          icpt <= *c.checks.intercept_abs_tol);
        }
        if (c.checks.closed_form_abs_tol) {
            ctx.add_check(std::string("closed_form/") + fam,
                          "worst |mean accuracy - closed form| " +
                              fmt(s.worst_closed_form_gap) + " <= " +
                              fmt(*c.checks.closed_form_abs_tol),
                          *c.checks.closed_form_abs_tol - s.worst_closed_form_gap,
                          s.worst_closed_form_gap <= *c.checks.closed_form_abs_tol);
        }
    }
    if (c.checks.family_agreement_sigma && families.size() >= 2) {
        for (std::size_t a = 0; a < families.size(); ++a) {
            for (std::size_t b = a + 1; b < families.size(); ++b) {
                const double ma = mean_of(fam_stats[a].all_ref_accs);
                const double mb = mean_of(fam_stats[b].all_ref_accs);
                const double sa = se_of_mean(fam_stats[a].all_ref_accs);
                const double sb = se_of_mean(fam_stats[b].all_ref_accs);
                const double combined = std::sqrt(sa * sa + sb * sb);
                const double gap = std::fabs(ma - mb);
                const double budget = *c.checks.family_agreement_sigma * combined;
                ctx.add_check(std::string("family_agreement/") + to_string(families[a]) +
                                  "-" + to_string(families[b]),
                              "|" + fmt(ma) + " - " + fmt(mb) + "| <= " +
                                  fmt(*c.checks.family_agreement_sigma) +
                                  " * combined SE " + fmt(combined),
                              budget - gap, gap <= budget);
            }
        }
    }
}

// ----------------------------------------------------------------- mix_sweep

struct SweepCheckAgg {
    double worst_envelope = std::numeric_limits<double>::infinity();
    double worst_monotone = std::numeric_limits<double>::infinity();
    double worst_endpoint = 0.0;
    std::uint64_t degenerate_points = 0;
};

void check_one_sweep(const std::vector<SweepPoint>& sweep, double slope1,
                     double slope2, SweepCheckAgg& agg) {
    const double lo = std::min(slope1, slope2), hi = std::max(slope1, slope2);
    std::vector<double> vals;
    for (const auto& pt : sweep) {
        if (!pt.slope) {
            ++agg.degenerate_points;
            continue;
        }
        vals.push_back(*pt.slope);
        agg.worst_envelope =
            std::min({agg.worst_envelope, *pt.slope - lo, hi - *pt.slope});
    }
    if (!sweep.empty()) {
        // endpoints: alpha=0 -> source2 alone, alpha=1 -> source1 alone
        if (sweep.front().alpha == 0.0 && sweep.front().slope)
            agg.worst_endpoint = std::max(agg.worst_endpoint,
                                          std::fabs(*sweep.front().slope - slope2));
        if (sweep.back().alpha == 1.0 && sweep.back().slope)
            agg.worst_endpoint =
                std::max(agg.worst_endpoint, std::fabs(*sweep.back().slope - slope1));
    }
    if (vals.size() >= 2) {
        const double dir = vals.back() >= vals.front() ? 1.0 : -1.0;
        for (std::size_t i = 1; i < vals.size(); ++i)
            agg.worst_monotone =
                std::min(agg.worst_monotone, dir * (vals[i] - vals[i - 1]));
    }
}

void run_mix_sweep(const MixSweepConfig& c, Ctx& ctx) {
    const NoiseFamily family = NoiseFamily::gaussian;
    const DistributionSpec src1 = c.source1.realize(c.dimension, family);
    const DistributionSpec src2 = c.source2.realize(c.dimension, family);
    const DistributionSpec test_ref = c.test_ref.realize(c.dimension, family);
    const DistributionSpec test_shift = c.test_shift.realize(c.dimension, family);

    SweepCheckAgg agg;

    const auto sweep =
        mixture_slope_sweep(src1, src2, c.n_total, c.alphas, test_ref, test_shift);
    const double slope1 = theoretical_slope(src1.theta, test_ref, test_shift);
    const double slope2 = theoretical_slope(src2.theta, test_ref, test_shift);
    check_one_sweep(sweep, slope1, slope2, agg);

    Table sweep_csv{{"alpha", "n1", "n2", "slope", "error"}, {}};
    for (const auto& pt : sweep)
        sweep_csv.add_row({pt.alpha, pt.n1, pt.n2,
                           pt.slope ? Cell{*pt.slope} : Cell{std::string("")},
                           pt.error});
    emit_csv(sweep_csv, ctx.out / "sweep.csv");
    ctx.results["fixture_geometry"] = {{"slope_source1", slope1},
                                       {"slope_source2", slope2}};

    // random geometries: directions in a cone around the reference test so
    // cos(test_ref, theta_bar) stays positive along the whole path
    if (c.random_geometries > 0) {
        Table geo_csv{{"geometry", "alpha", "slope"}, {}};
        const std::vector<double> b1 = unit_spread(c.dimension);
        const std::vector<double> b2 = unit_spread_partner(c.dimension);
        for (std::uint64_t g = 0; g < c.random_geometries; ++g) {
            Stream gs = derive_stream(ctx.seed, "mix-geom", g);
            auto angle = [&](double lo_deg, double hi_deg) {
                return (lo_deg + (hi_deg - lo_deg) * gs.next_uniform01()) * kPi / 180.0;
            };
            auto unif = [&](double lo, double hi) {
                return lo + (hi - lo) * gs.next_uniform01();
            };
            DistributionSpec t1{b1, unif(0.5, 2.0), family};
            DistributionSpec t2{rotate_in_plane(b1, b2, angle(15, 75)),
                                unif(0.5, 2.0), family};
            DistributionSpec s1{rotate_in_plane(b1, b2, angle(-55, 55)),
                                unif(0.5, 2.0), family};
            DistributionSpec s2{rotate_in_plane(b1, b2, angle(-55, 55)),
                                unif(0.5, 2.0), family};
            const double nrm1 = unif(0.5, 2.0), nrm2 = unif(0.5, 2.0);
            for (auto& x : s1.theta) x *= nrm1;
            for (auto& x : s2.theta) x *= nrm2;
            const auto gsweep =
                mixture_slope_sweep(s1, s2, c.n_total, c.alphas, t1, t2);
            check_one_sweep(gsweep, theoretical_slope(s1.theta, t1, t2),
                            theoretical_slope(s2.theta, t1, t2), agg);
            for (const auto& pt : gsweep)
                if (pt.slope) geo_csv.add_row({g, pt.alpha, *pt.slope});
        }
        emit_csv(geo_csv, ctx.out / "random_geometries.csv");
    }

    ctx.counters["degenerate_sweep_points"] = agg.degenerate_points;
    ctx.add_check("mix_envelope",
                  "every mixture slope within [min,max] of endpoint slopes; worst "
                  "margin " +
                      fmt(agg.worst_envelope),
                  agg.worst_envelope, agg.worst_envelope >= -1e-12);
    ctx.add_check("mix_monotone",
                  "slope sequence monotone along alpha; worst step " +
                      fmt(agg.worst_monotone),
                  agg.worst_monotone, agg.worst_monotone >= -1e-12);
    ctx.add_check("mix_endpoints",
                  "endpoint slopes equal single-source slopes exactly; worst gap " +
                      fmt(agg.worst_endpoint),
                  -agg.worst_endpoint, agg.worst_endpoint == 0.0);

    // Monte Carlo verification: canonical training on actually mixed data
    if (c.mc) {
        const MixMcConfig& mc = *c.mc;
        Table mc_points{{"alpha", "n_total", "trial", "acc_ref", "se_ref",
                         "acc_shift", "se_shift", "u", "v"},
                        {}};
        Table mc_slopes{{"alpha", "theory_slope", "fitted_slope", "rel_err"}, {}};
        double worst_rel = 0.0;
        for (std::size_t ai = 0; ai < mc.alphas.size(); ++ai) {
            const double alpha = mc.alphas[ai];
            std::vector<std::pair<double, double>> uv;
            double theory = 0.0;
            for (std::size_t ni = 0; ni < mc.n_grid.size(); ++ni) {
                const std::uint64_t n_tot = mc.n_grid[ni];
                const std::uint64_t n1 = static_cast<std::uint64_t>(
                    std::llround(alpha * static_cast<double>(n_tot)));
                const std::uint64_t n2 = n_tot - n1;
                MixtureSpec mix{{{src1, n1}, {src2, n2}}};
                const EffectiveTrainSpec eff = effective_spec(mix);
                theory = theoretical_slope(eff.theta_bar, test_ref, test_shift);
                for (std::uint64_t t = 0; t < mc.trials; ++t) {
                    const std::uint64_t idx = (ai * mc.n_grid.size() + ni) * mc.trials + t;
                    const LabeledDataset d1 = sample_dataset(
                        src1, n_tot, derive_stream(ctx.seed, "mix-parent1", idx),
                        "source1");
                    const LabeledDataset d2 = sample_dataset(
                        src2, n_tot, derive_stream(ctx.seed, "mix-parent2", idx),
                        "source2");
                    const LabeledDataset mixed = mix_datasets(
                        d1, d2, n1, n2, derive_stream(ctx.seed, "mix-pick", idx));
                    const LinearModel w = train_linear(mixed);
                    const McAccuracy ar =
                        mc_accuracy(w, test_ref, mc.samples,
                                    derive_stream(ctx.seed, "mix-eval-ref", idx));
                    const McAccuracy as =
                        mc_accuracy(w, test_shift, mc.samples,
                                    derive_stream(ctx.seed, "mix-eval-shift", idx));
                    const double u = probit(clamp_accuracy(ar.accuracy, mc.samples).value);
                    const double v = probit(clamp_accuracy(as.accuracy, mc.samples).value);
                    mc_points.add_row({alpha, n_tot, t, ar.accuracy.value, ar.stderr_,
                                       as.accuracy.value, as.stderr_, u, v});
                    uv.emplace_back(u, v);
                }
            }
            const TrendFit fit = fit_trend(uv, FitMode::through_origin);
            const double rel = std::fabs(fit.slope / theory - 1.0);
            worst_rel = std::max(worst_rel, rel);
            mc_slopes.add_row({alpha, theory, fit.slope, rel});
        }
        emit_csv(mc_points, ctx.out / "mc_points.csv");
        emit_csv(mc_slopes, ctx.out / "mc_slopes.csv");
        ctx.add_check("mix_mc_match",
                      "Monte Carlo fitted slopes within " +
                          fmt(mc.slope_rel_tol * 100) + "% of the mixture formula; "
                          "worst relative error " +
                          fmt(worst_rel),
                      mc.slope_rel_tol - worst_rel, worst_rel <= mc.slope_rel_tol);
    }
}

// ------------------------------------------------------------ ensemble_check

void run_ensemble_check(const EnsembleCheckConfig& c, Ctx& ctx) {
    Table rows{{"pair", "n1", "n2", "max_abs_diff"}, {}};
    const std::vector<double> b1 = unit_spread(c.dimension);
    const std::vector<double> b2 = unit_spread_partner(c.dimension);
    double worst = 0.0;
    for (std::uint64_t p = 0; p < c.pairs; ++p) {
        Stream gs = derive_stream(ctx.seed, "ens-geom", p);
        auto unif = [&](double lo, double hi) {
            return lo + (hi - lo) * gs.next_uniform01();
        };
        DistributionSpec s1{rotate_in_plane(b1, b2, unif(0, 80) * kPi / 180.0),
                            unif(0.5, 2.0), NoiseFamily::gaussian};
        DistributionSpec s2{rotate_in_plane(b1, b2, unif(0, 80) * kPi / 180.0),
                            unif(0.5, 2.0), NoiseFamily::gaussian};
        const double nrm1 = unif(0.5, 2.0), nrm2 = unif(0.5, 2.0);
        for (auto& x : s1.theta) x *= nrm1;
        for (auto& x : s2.theta) x *= nrm2;
        const std::uint64_t n1 = c.n_min + gs.next_below(c.n_max - c.n_min + 1);
        const std::uint64_t n2 = c.n_min + gs.next_below(c.n_max - c.n_min + 1);

        const LabeledDataset d1 =
            sample_dataset(s1, n1, derive_stream(ctx.seed, "ens-data1", p), "s1");
        const LabeledDataset d2 =
            sample_dataset(s2, n2, derive_stream(ctx.seed, "ens-data2", p), "s2");
        const LinearModel m1 = train_linear(d1);
        const LinearModel m2 = train_linear(d2);
        const LinearModel models[] = {m1, m2};
        const double weights[] = {static_cast<double>(n1), static_cast<double>(n2)};
        const LinearModel ens = ensemble_models(models, weights);

        LabeledDataset concat = d1;
        concat.xs.insert(concat.xs.end(), d2.xs.begin(), d2.xs.end());
        concat.labels.insert(concat.labels.end(), d2.labels.begin(), d2.labels.end());
        concat.provenance.push_back(d2.provenance.front());
        const LinearModel joint = train_linear(concat);

        double max_diff = 0.0;
        for (std::size_t j = 0; j < ens.weights.size(); ++j)
            max_diff = std::max(max_diff,
                                std::fabs(ens.weights[j] - joint.weights[j]));
        worst = std::max(worst, max_diff);
        rows.add_row({p, n1, n2, max_diff});
    }
    emit_csv(rows, ctx.out / "pairs.csv");
    ctx.results["worst_coordinate_gap"] = worst;
    ctx.add_check("ensemble_identity",
                  "count-weighted ensemble equals the concatenated-data estimator; "
                  "worst per-coordinate gap " +
                      fmt(worst) + " <= " + fmt(c.tolerance),
                  c.tolerance - worst, worst <= c.tolerance);
}

// -------------------------------------------------------- filter_experiment

FilterRule to_rule(const FilterRuleConfig& c) {
    FilterRule r;
    if (c.kind == "hard_threshold") {
        r.kind = FilterRule::Kind::hard_threshold;
        r.tau = c.tau;
    } else if (c.kind == "logistic") {
        r.kind = FilterRule::Kind::logistic;
        r.tau = c.tau;
        r.beta = c.beta;
    } else {
        r.kind = FilterRule::Kind::top_quantile;
        r.q = c.q;
    }
    return r;
}

void run_filter_experiment(const FilterExperimentConfig& c, Ctx& ctx) {
    FilterGeometry geom;
    geom.test_id = c.test_id.realize(c.dimension, NoiseFamily::gaussian);
    geom.test_ood = c.test_ood.realize(c.dimension, NoiseFamily::gaussian);
    geom.train = c.train.realize(c.dimension, NoiseFamily::gaussian);
    geom.pretrained = LinearModel{c.pretrained.realize(c.dimension)};

    const SlopeOrderingResult res = slope_ordering_experiment(
        geom, c.n, c.trials, to_rule(c.filter), derive_stream(ctx.seed, "filter", 0));

    Table rows{{"quantity", "value"}, {}};
    rows.add_row({std::string("slope_unfiltered"), res.slopes.unfiltered});
    rows.add_row({std::string("slope_filtered"), res.slopes.filtered});
    rows.add_row({std::string("slope_pretrained"), res.slopes.pretrained});
    rows.add_row({std::string("filtered_se"), res.filtered_se});
    rows.add_row({std::string("shift_coefficient"), res.shift_coefficient});
    rows.add_row({std::string("rejected_trials"),
                  static_cast<std::uint64_t>(res.rejected_trials)});

    nlohmann::ordered_json rj;
    rj["slope_unfiltered"] = res.slopes.unfiltered;
    rj["slope_filtered"] = res.slopes.filtered;
    rj["slope_pretrained"] = res.slopes.pretrained;
    rj["filtered_se"] = res.filtered_se;
    rj["shift_coefficient"] = res.shift_coefficient;
    rj["rejected_trials"] = res.rejected_trials;
    ctx.results["filter"] = std::move(rj);
    ctx.counters["filter_rejected_trials"] = res.rejected_trials;

    const double z = (res.slopes.filtered - res.slopes.unfiltered) /
                     (res.filtered_se > 0 ? res.filtered_se : 1.0);
    ctx.add_check("filter_improves",
                  "Slope(filtered) " + fmt(res.slopes.filtered) +
                      " exceeds Slope(unfiltered) " + fmt(res.slopes.unfiltered) +
                      " by " + fmt(z) + " SE (requires >= " + fmt(c.min_sigma) + ")",
                  z - c.min_sigma, z >= c.min_sigma);
    ctx.add_check("filter_bounded",
                  "Slope(filtered) " + fmt(res.slopes.filtered) +
                      " <= Slope(pretrained) " + fmt(res.slopes.pretrained),
                  res.slopes.pretrained - res.slopes.filtered,
                  res.slopes.filtered <= res.slopes.pretrained);

    if (c.control) {
        const SlopeOrderingResult ctl = slope_ordering_experiment(
            geom, c.n, c.trials, to_rule(*c.control),
            derive_stream(ctx.seed, "filter-control", 0));
        rows.add_row({std::string("control_slope_filtered"), ctl.slopes.filtered});
        rows.add_row({std::string("control_filtered_se"), ctl.filtered_se});
        nlohmann::ordered_json cj;
        cj["slope_filtered"] = ctl.slopes.filtered;
        cj["filtered_se"] = ctl.filtered_se;
        cj["shift_coefficient"] = ctl.shift_coefficient;
        ctx.results["control"] = std::move(cj);
        const double zc = (ctl.slopes.filtered - ctl.slopes.unfiltered) /
                          (ctl.filtered_se > 0 ? ctl.filtered_se : 1.0);
        ctx.add_check("control_no_improvement",
                      "constant-h control improvement " + fmt(zc) +
                          " SE stays within " + fmt(c.control_max_sigma) + " SE",
                      c.control_max_sigma - zc, zc <= c.control_max_sigma);
    }
    emit_csv(rows, ctx.out / "slopes.csv");
}

// -------------------------------------------------------- residual_scaling

void run_residual_scaling(const ResidualScalingConfig& c, Ctx& ctx) {
    ResidualScanConfig scan;
    scan.dims = c.dims;
    scan.n_over_d = c.n_over_d;
    scan.trials = c.trials;
    scan.xi = c.xi;
    scan.rho_train = c.rho_train;
    scan.rho_ref = c.rho_ref;
    scan.rho_shift = c.rho_shift;
    scan.shift_angle_rad = c.shift_angle_deg * kPi / 180.0;
    scan.inject_perfect = c.inject_perfect;

    const auto rows = residual_scaling_report(scan, derive_stream(ctx.seed, "resid", 0));
    Table csv{{"d", "mean_abs_residual"}, {}};
    for (const auto& r : rows) csv.add_row({static_cast<std::uint64_t>(r.dim),
                                            r.mean_abs_residual});
    emit_csv(csv, ctx.out / "residuals.csv");

    nlohmann::ordered_json rj = nlohmann::ordered_json::array();
    for (const auto& r : rows)
        rj.push_back({{"d", r.dim}, {"mean_abs_residual", r.mean_abs_residual}});
    ctx.results["residuals"] = std::move(rj);

    if (c.inject_perfect) {
        double worst = 0.0;
        for (const auto& r : rows) worst = std::max(worst, r.mean_abs_residual);
        ctx.add_check("residual_perfect",
                      "injected on-line points leave zero residual; worst " +
                          fmt(worst),
                      1e-12 - worst, worst <= 1e-12);
    } else {
        double worst_drop = std::numeric_limits<double>::infinity();
        for (std::size_t i = 1; i < rows.size(); ++i)
            worst_drop = std::min(
                worst_drop, rows[i - 1].mean_abs_residual - rows[i].mean_abs_residual);
        ctx.add_check("residual_decreasing",
                      "mean |probit residual| strictly decreases across the "
                      "dimension grid; smallest drop " +
                          fmt(worst_drop),
                      worst_drop, worst_drop > 0.0);
    }
}

// --------------------------------------------------------------- ingest_fit

void run_ingest_fit(const IngestFitConfig& c, Ctx& ctx) {
    const IngestResult in = ingest_accuracies(c.input, c.filter);

    std::vector<std::string> meta_cols;
    for (const auto& rec : in.records)
        for (const auto& [k, v] : rec.metadata)
            if (std::find(meta_cols.begin(), meta_cols.end(), k) == meta_cols.end())
                meta_cols.push_back(k);
    std::sort(meta_cols.begin(), meta_cols.end());

    auto clamped = [](const Probability& p, std::uint64_t m) {
        const double lo = 1.0 / (2.0 * static_cast<double>(m));
        return p.value < lo || p.value > 1.0 - lo;
    };

    std::vector<std::pair<double, double>> points;
    std::vector<bool> flags;
    for (const auto& rec : in.records) {
        const bool fl = clamped(rec.ref_accuracy, rec.m_ref) ||
                        clamped(rec.shift_accuracy, rec.m_shift);
        flags.push_back(fl);
        if (c.exclude_clamped && fl) continue;
        points.push_back(to_probit_point(rec));
    }

    const FitMode mode =
        c.fit_mode == "through_origin" ? FitMode::through_origin : FitMode::free;
    const TrendFit fit = fit_trend(points, mode);

    Table rec_csv{{"model_id", "ref_dataset", "ref_accuracy", "shift_name",
                   "shift_accuracy", "m_ref", "m_shift", "u", "v", "clamped",
                   "effective_robustness", "effective_robustness_acc"},
                  {}};
    for (const auto& m : meta_cols) rec_csv.header.push_back(m);
    for (std::size_t i = 0; i < in.records.size(); ++i) {
        const AccuracyRecord& rec = in.records[i];
        const auto [u, v] = to_probit_point(rec);
        std::vector<Cell> row{rec.model_id,
                              rec.ref_dataset,
                              rec.ref_accuracy.value,
                              rec.shift_name,
                              rec.shift_accuracy.value,
                              rec.m_ref,
                              rec.m_shift,
                              u,
                              v,
                              std::uint64_t(flags[i] ? 1 : 0),
                              effective_robustness(rec, fit),
                              effective_robustness_accuracy_space(rec, fit)};
        for (const auto& m : meta_cols) {
            auto it = rec.metadata.find(m);
            row.emplace_back(it == rec.metadata.end() ? std::string() : it->second);
        }
        rec_csv.add_row(std::move(row));
    }
    emit_csv(rec_csv, ctx.out / "records.csv");

    Table rej{{"line", "message"}, {}};
    for (const auto& d : in.errors)
        rej.add_row({static_cast<std::uint64_t>(d.line), d.message});
    emit_csv(rej, ctx.out / "rejected.csv");

    nlohmann::ordered_json fj;
    fj["mode"] = c.fit_mode;
    fj["slope"] = fit.slope;
    fj["intercept"] = fit.intercept;
    fj["n_points"] = static_cast<std::uint64_t>(fit.n_points);
    fj["rms_residual"] = fit.rms_residual;
    fj["r_squared"] = fit.r_squared;
    ctx.results["fit"] = std::move(fj);
    ctx.results["selection"] = {{"filter", c.filter},
                                {"records", in.records.size()},
                                {"rejected_rows", in.errors.size()},
                                {"clamped_records",
                                 static_cast<std::uint64_t>(std::count(
                                     flags.begin(), flags.end(), true))},
                                {"exclude_clamped", c.exclude_clamped}};
    nlohmann::ordered_json errs = nlohmann::ordered_json::array();
    for (const auto& d : in.errors)
        errs.push_back({{"line", d.line}, {"message", d.message}});
    ctx.results["rejected"] = std::move(errs);

    if (ctx.strict && !in.errors.empty())
        ctx.add_check("ingest_clean",
                      "strict mode: input has " + std::to_string(in.errors.size()) +
                          " malformed rows",
                      -static_cast<double>(in.errors.size()), false);
}

}  // namespace

std::filesystem::path resolve_out_dir(const ExperimentConfig& cfg,
                                      const RunOptions& opts) {
    if (opts.out_override) return *opts.out_override;
    if (const char* env = std::getenv("SHIFTSIM_OUT")) return env;
    if (!cfg.output.empty()) return cfg.output;
    return std::filesystem::path("runs") / cfg.kind;
}

RunOutcome run_experiment(const ExperimentConfig& cfg, const RunOptions& opts) {
    kernels::set_threads(opts.jobs);

    Ctx ctx;
    ctx.seed = opts.seed_override ? SeedSpec{*opts.seed_override} : cfg.seed;
    ctx.out = resolve_out_dir(cfg, opts);
    ctx.strict = opts.strict;
    ctx.results = nlohmann::ordered_json::object();
    ctx.counters = nlohmann::ordered_json::object();
    std::filesystem::create_directories(ctx.out);

    std::visit(
        [&](const auto& payload) {
            using T = std::decay_t<decltype(payload)>;
            if constexpr (std::is_same_v<T, LineSweepConfig>)
                run_line_sweep(payload, ctx);
            else if constexpr (std::is_same_v<T, MixSweepConfig>)
                run_mix_sweep(payload, ctx);
            else if constexpr (std::is_same_v<T, EnsembleCheckConfig>)
                run_ensemble_check(payload, ctx);
            else if constexpr (std::is_same_v<T, FilterExperimentConfig>)
                run_filter_experiment(payload, ctx);
            else if constexpr (std::is_same_v<T, ResidualScalingConfig>)
                run_residual_scaling(payload, ctx);
            else
                run_ingest_fit(payload, ctx);
        },
        cfg.payload);

    RunOutcome outcome;
    outcome.out_dir = ctx.out;
    outcome.checks = ctx.checks;
    outcome.checks_passed = true;
    for (const auto& c : ctx.checks) outcome.checks_passed &= c.pass;

    nlohmann::ordered_json report;
    report["toolkit_version"] = kToolkitVersion;
    report["kind"] = cfg.kind;
    report["effective_seed"] = ctx.seed.base_seed;
    report["config"] = cfg.raw;
    report["results"] = std::move(ctx.results);
    nlohmann::ordered_json checks = nlohmann::ordered_json::array();
    for (const auto& c : ctx.checks) checks.push_back(to_json(c));
    report["checks"] = std::move(checks);
    report["counters"] = std::move(ctx.counters);
    outcome.report = std::move(report);

    write_report(outcome.report, ctx.out / "report.json");
    return outcome;
}

}  // namespace shiftsim
