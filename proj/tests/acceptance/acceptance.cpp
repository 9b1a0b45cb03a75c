// Acceptance suite: one pass/fail line per criterion.
//   usage: acceptance [--only N]...
// Exit status is the number of failed criteria.

#include <Eigen/Dense>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "subdata/bench.hpp"
#include "subdata/dataset.hpp"
#include "subdata/lasso.hpp"
#include "subdata/rng.hpp"
#include "subdata/selectors.hpp"
#include "subdata/simulate.hpp"
#include "subdata/split_conquer.hpp"
#include "test_helpers.hpp"

using namespace subdata;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

// ---------------------------------------------------------------- 1
// Solver correctness: KKT certificate on 200 random instances plus the
// analytic solution on orthonormal designs.
Outcome criterion_solver_correctness() {
    RngEngine rng(20240101);
    std::uniform_real_distribution<double> frac(0.05, 0.95);

    int kkt_ok = 0;
    double worst_violation = 0.0;
    const int trials = 200;
    for (int t = 0; t < trials; ++t) {
        const int n = 20 + static_cast<int>(rng() % 81);   // <= 100
        const int p = 1 + static_cast<int>(rng() % 10);    // <= 10
        auto inst = testsupport::random_instance(n, p, rng);
        const double lmax = lambda_max(inst.x, inst.y);
        const double lambda = frac(rng) * lmax;
        LassoFit fit = lasso_fit(inst.x, inst.y, testsupport::identity_scaling(p), lambda);
        double v = 0.0;
        if (fit.converged && testsupport::kkt_check(inst.x, inst.y, fit.coefficients, lambda, 1e-6, &v))
            ++kkt_ok;
        worst_violation = std::max(worst_violation, v);
    }

    int ortho_ok = 0;
    double worst_gap = 0.0;
    const int ortho_trials = 50;
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int t = 0; t < ortho_trials; ++t) {
        const int n = 40 + static_cast<int>(rng() % 61);
        const int p = 2 + static_cast<int>(rng() % 9);
        Eigen::MatrixXd x = testsupport::orthonormal_design(n, p, rng);
        Eigen::VectorXd y(n);
        for (int i = 0; i < n; ++i) y[i] = normal(rng);
        const double lambda = frac(rng) * lambda_max(x, y);
        LassoFit fit = lasso_fit(x, y, testsupport::identity_scaling(p), lambda);
        double gap = 0.0;
        for (int j = 0; j < p; ++j)
            gap = std::max(gap, std::abs(fit.coefficients[j] -
                                         soft_threshold(x.col(j).dot(y) / n, lambda)));
        worst_gap = std::max(worst_gap, gap);
        if (gap < 1e-8) ++ortho_ok;
    }

    Outcome out;
    out.pass = kkt_ok == trials && ortho_ok == ortho_trials;
    std::ostringstream ss;
    ss << "KKT " << kkt_ok << "/" << trials << " (worst violation " << worst_violation
       << "), orthonormal " << ortho_ok << "/" << ortho_trials << " (worst gap " << worst_gap << ")";
    out.detail = ss.str();
    return out;
}

// ---------------------------------------------------------------- 2
// Extreme-point selection equals the full-sort oracle, exact set equality.
Outcome criterion_selection_oracle() {
    RngEngine rng(20240202);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_int_distribution<int> coarse(0, 6);

    int ok = 0;
    const int trials = 100;
    for (int t = 0; t < trials; ++t) {
        const int p = 1 + static_cast<int>(rng() % 5);
        const int n = std::max(50, static_cast<int>(rng() % 1001));
        const int k = std::min(n, 2 + static_cast<int>(rng() % 39));
        Dataset d;
        d.x.resize(n, p);
        d.y = Eigen::VectorXd::Zero(n);
        const bool with_ties = t % 3 == 0;  // integer-valued columns exercise tie-breaks
        for (int j = 0; j < p; ++j)
            for (int i = 0; i < n; ++i)
                d.x(i, j) = with_ties ? static_cast<double>(coarse(rng)) : normal(rng);

        std::vector<int> columns(p);
        for (int j = 0; j < p; ++j) columns[j] = j;
        SubdataIndex idx = iboss_select(d, k);
        std::vector<int> oracle = testsupport::oracle_iboss(d, k, columns);
        if (std::set<int>(idx.rows.begin(), idx.rows.end()) ==
                std::set<int>(oracle.begin(), oracle.end()) &&
            static_cast<int>(idx.rows.size()) == k)
            ++ok;
    }
    Outcome out;
    out.pass = ok == trials;
    out.detail = "oracle match " + std::to_string(ok) + "/" + std::to_string(trials);
    return out;
}

// ---------------------------------------------------------------- 3
// D-criterion dominance over uniform subdata on heavy-tailed designs.
Outcome criterion_d_dominance() {
    const int reps = 100;
    int wins = 0;
    for (int rep = 0; rep < reps; ++rep) {
        const std::uint64_t seed = mix_seed(20240303, rep);
        Eigen::MatrixXd x = gen_design({DesignDist::t2, 10000, 10, seed});
        Dataset d{std::move(x), Eigen::VectorXd::Zero(10000)};
        const double ib = d_criterion(information_matrix(d, iboss_select(d, 200), 1.0));
        const double un =
            d_criterion(information_matrix(d, uniform_select(10000, 200, mix_seed(seed, 1)), 1.0));
        if (ib > un) ++wins;
    }
    Outcome out;
    out.pass = wins >= 95;
    out.detail = "IBOSS beat UNIF in " + std::to_string(wins) + "/100 replications (need >= 95)";
    return out;
}

// ---------------------------------------------------------------- 4
// MSE ordering across methods at t(2), n = 1e4, p = 50, k = 1000.
Outcome criterion_mse_ordering() {
    Scenario sc;
    sc.id = "mse-ordering";
    sc.dist = DesignDist::t2;
    sc.n = 10000;
    sc.p = 50;
    sc.k = 1000;
    sc.methods = parse_method_list("FULL, D-OPT, LEV, UNIF");
    sc.reps = 100;
    sc.seed = 20240404;
    sc.n_test = 1000;

    auto records = run_scenario(sc);
    auto rows = aggregate(records);
    double full = 0, dopt = 0, lev = 0, unif = 0;
    int failures = 0;
    for (const auto& r : rows) {
        failures += r.reps_failed;
        if (r.method == "FULL") full = r.mse_mean;
        if (r.method == "D-OPT") dopt = r.mse_mean;
        if (r.method == "LEV") lev = r.mse_mean;
        if (r.method == "UNIF") unif = r.mse_mean;
    }
    Outcome out;
    out.pass = failures == 0 && full < dopt && full < lev && full < unif && dopt < lev && lev < unif;
    std::ostringstream ss;
    ss << "mean MSE: FULL " << full << " < D-OPT " << dopt << " < LEV " << lev << " < UNIF " << unif;
    if (failures) ss << " (" << failures << " failed reps)";
    out.detail = ss.str();
    return out;
}

// ---------------------------------------------------------------- 5
// Fixed k = 1000: extreme-point subdata improves with n, uniform does not.
Outcome criterion_n_benefit() {
    const int reps = 100;
    const int p = 50, k = 1000;
    const int n_small = 10000, n_big = 80000;
    const std::uint64_t seed = 20240505;

    std::vector<double> d_small(reps), d_big(reps), u_small(reps), u_big(reps);
    for (int rep = 0; rep < reps; ++rep) {
        const std::uint64_t rs = mix_seed(seed, rep);
        TrueModel model = gen_true_model(p, mix_seed(rs, 1));
        Eigen::MatrixXd xt = gen_design({DesignDist::t2, 1000, p, mix_seed(rs, 2)});

        MethodConfig cfg;
        cfg.k = k;
        cfg.seed = mix_seed(rs, 3);

        for (int which = 0; which < 2; ++which) {
            const int n = which == 0 ? n_small : n_big;
            Eigen::MatrixXd x = gen_design({DesignDist::t2, n, p, mix_seed(rs, 10 + which)});
            Eigen::VectorXd y = gen_response(x, model, mix_seed(rs, 20 + which));
            Dataset d{std::move(x), std::move(y)};

            MethodResult dm = apply_method(d, parse_method("D-OPT"), cfg);
            MethodResult um = apply_method(d, parse_method("UNIF"), cfg);
            (which == 0 ? d_small : d_big)[rep] = mse(xt, model.beta, dm.beta_hat);
            (which == 0 ? u_small : u_big)[rep] = mse(xt, model.beta, um.beta_hat);
        }
    }

    auto paired_t = [&](const std::vector<double>& a, const std::vector<double>& b) {
        // one-sided t statistic for mean(a - b) > 0
        const int m = static_cast<int>(a.size());
        double mean = 0;
        for (int i = 0; i < m; ++i) mean += a[i] - b[i];
        mean /= m;
        double var = 0;
        for (int i = 0; i < m; ++i) {
            const double d = a[i] - b[i] - mean;
            var += d * d;
        }
        var /= (m - 1);
        return mean / std::sqrt(var / m);
    };

    const double t_crit = 1.6604;  // one-sided 5%, 99 df
    const double t_dopt = paired_t(d_small, d_big);  // positive: MSE dropped with n
    const double t_unif = paired_t(u_small, u_big);

    auto mean_of = [](const std::vector<double>& v) {
        double s = 0;
        for (double x : v) s += x;
        return s / v.size();
    };

    Outcome out;
    out.pass = t_dopt > t_crit && !(t_unif > t_crit) &&
               mean_of(d_big) < mean_of(d_small);
    std::ostringstream ss;
    ss << "D-OPT mse " << mean_of(d_small) << " -> " << mean_of(d_big) << " (t = " << t_dopt
       << "), UNIF mse " << mean_of(u_small) << " -> " << mean_of(u_big) << " (t = " << t_unif
       << "), crit " << t_crit;
    out.detail = ss.str();
    return out;
}

// ---------------------------------------------------------------- 6
// Screening + extreme points recovers more of the support than uniform
// sampling at p = 500, k = 500.
Outcome criterion_sensitivity_gap() {
    Scenario sc;
    sc.id = "sensitivity-gap";
    sc.dist = DesignDist::t2;
    sc.n = 10000;
    sc.p = 500;
    sc.k = 500;
    sc.methods = parse_method_list("SIS-IBOSS(100), UNIF");
    sc.reps = 100;
    sc.seed = 20240606;
    sc.n_test = 1000;

    auto records = run_scenario(sc);
    auto rows = aggregate(records);
    double sis_sens = 0, sis_spec = 0, unif_sens = 0, unif_spec = 0;
    int failures = 0;
    for (const auto& r : rows) {
        failures += r.reps_failed;
        if (r.method == "SIS-IBOSS(100)") {
            sis_sens = r.sensitivity_mean;
            sis_spec = r.specificity_mean;
        }
        if (r.method == "UNIF") {
            unif_sens = r.sensitivity_mean;
            unif_spec = r.specificity_mean;
        }
    }
    Outcome out;
    out.pass = failures == 0 && sis_sens >= unif_sens + 0.10 && sis_spec >= unif_spec - 0.05;
    std::ostringstream ss;
    ss << "sensitivity SIS-IBOSS " << sis_sens << " vs UNIF " << unif_sens << " (need +0.10); "
       << "specificity " << sis_spec << " vs " << unif_spec << " (allowed -0.05)";
    out.detail = ss.str();
    return out;
}

// ---------------------------------------------------------------- 7
// Wall-time scaling in n: selection linear, subdata fitting flat, full fit linear.
Outcome criterion_scaling_slopes() {
    std::vector<Scenario> scenarios;
    std::vector<RunRecord> all;
    for (int i = 0; i < 4; ++i) {
        Scenario sc;
        sc.id = "scale-n" + std::to_string(i);
        sc.dist = DesignDist::t2;
        sc.n = 10000 << i;  // 1e4 .. 8e4
        sc.p = 50;
        sc.k = 1000;
        sc.methods = parse_method_list("FULL, D-OPT");
        sc.reps = 6;  // replication 0 is the timing warm-up
        sc.seed = 20240707;
        sc.n_test = 200;
        sc.path.c_count = 30;  // slope in n is invariant to the grid length
        scenarios.push_back(sc);
        auto records = run_scenario(sc);
        all.insert(all.end(), records.begin(), records.end());
    }
    auto slopes = scaling_report(all, scenarios, "n");

    double dopt_select = NAN, dopt_fit = NAN, full_fit = NAN;
    for (const auto& row : slopes) {
        if (row.method == "D-OPT" && row.phase == "select") dopt_select = row.slope;
        if (row.method == "D-OPT" && row.phase == "fit") dopt_fit = row.slope;
        if (row.method == "FULL" && row.phase == "fit") full_fit = row.slope;
    }
    Outcome out;
    out.pass = dopt_select >= 0.8 && dopt_select <= 1.2 && dopt_fit >= -0.2 && dopt_fit <= 0.3 &&
               full_fit >= 0.8 && full_fit <= 1.2;
    std::ostringstream ss;
    ss << "slopes: D-OPT select " << dopt_select << " (want [0.8,1.2]), D-OPT fit " << dopt_fit
       << " (want [-0.2,0.3]), FULL fit " << full_fit << " (want [0.8,1.2])";
    out.detail = ss.str();
    return out;
}

// ---------------------------------------------------------------- 8
// Degenerate split equals the direct fit; noiseless combination is exact.
Outcome criterion_spc_consistency() {
    RngEngine rng(20240808);
    std::normal_distribution<double> normal(0.0, 1.0);

    const int n = 240, p = 8;
    Eigen::MatrixXd x(n, p);
    for (int j = 0; j < p; ++j)
        for (int i = 0; i < n; ++i) x(i, j) = normal(rng);
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
    beta[1] = 1.4;
    beta[4] = -0.9;
    beta[6] = 0.5;
    Eigen::VectorXd y = x * beta;
    for (int i = 0; i < n; ++i) y[i] += normal(rng);
    Dataset d{x, y};

    SpcConfig cfg;
    cfg.k_chunks = 1;
    cfg.vote_threshold = 1;
    cfg.seed = 99;
    SpcFit spc = spc_fit(d, cfg);
    CvFit direct = cv_fit(d, cfg.folds, cfg.path, mix_seed(cfg.seed, 0), cfg.solver);
    const double gap = std::max((spc.coefficients - direct.fit.coefficients).cwiseAbs().maxCoeff(),
                                std::abs(spc.intercept - direct.fit.intercept));

    // noiseless recovery through the combination step
    Eigen::VectorXd truth(p + 1);
    truth.setZero();
    truth[0] = 0.25;
    truth[2] = 2.0;
    truth[5] = -1.0;
    Eigen::MatrixXd x2(n, p);
    for (int j = 0; j < p; ++j)
        for (int i = 0; i < n; ++i) x2(i, j) = normal(rng);
    Dataset noiseless{x2, (x2 * truth.tail(p)).array() + truth[0]};
    auto chunks = split_data(noiseless, 2, 7);
    std::vector<Eigen::VectorXd> fits;
    for (const auto& c : chunks) {
        Dataset chunk = noiseless.subset(c);
        fits.push_back(ols_fit(chunk.x, chunk.y, std::vector<int>{1, 4}, true));
    }
    Eigen::VectorXd combined = combine_estimates(noiseless, chunks, fits, SupportSet{{1, 4}});
    const double recover_gap = (combined - truth).cwiseAbs().maxCoeff();

    Outcome out;
    out.pass = gap < 1e-8 && recover_gap < 1e-6;
    std::ostringstream ss;
    ss << "K=1 vs direct max gap " << gap << " (need < 1e-8); noiseless recovery gap "
       << recover_gap << " (need < 1e-6)";
    out.detail = ss.str();
    return out;
}

// ---------------------------------------------------------------- 9
// Monte-Carlo variance of sqrt(n)(b^ - b) matches the least-squares limit
// when the penalty grows slower than sqrt(n).
Outcome criterion_asymptotic_variance() {
    TrueModel model = gen_true_model(5, 20240909);
    DesignSpec spec{DesignDist::standard_normal, 10000, 5, 20241000};
    VarianceCheckReport report = asymptotic_variance_check(spec, model, 500, LambdaRule{0.5, 0.25});
    Outcome out;
    out.pass = report.pass;
    std::ostringstream ss;
    ss << "median variance ratio " << report.median_ratio << " (want [0.7, 1.3]), lambda_n = "
       << report.lambda_n << ", reps = " << report.reps;
    out.detail = ss.str();
    return out;
}

// ---------------------------------------------------------------- 10
// Same seed + --deterministic-paths: byte-identical CSVs through the CLI.
Outcome criterion_determinism() {
#ifndef SUBDATA_CLI_PATH
    return {false, "CLI path not configured"};
#else
    const std::string cli = SUBDATA_CLI_PATH;
    const std::string config = "acceptance_determinism.cfg";
    {
        std::ofstream f(config);
        f << "[det-check]\n"
             "dist = t2\n"
             "n = 500\n"
             "p = 5\n"
             "k = 60\n"
             "methods = FULL, D-OPT, UNIF, SPC(2/4)\n"
             "reps = 3\n"
             "seed = 77\n"
             "n_test = 100\n"
             "c_count = 20\n";
    }
    auto run_once = [&](const std::string& dir) {
        const std::string cmd = cli + " --deterministic-paths --out-dir " + dir +
                                " simulate --config " + config + " > /dev/null 2>&1";
        return std::system(cmd.c_str());
    };
    auto slurp = [](const std::string& path) {
        std::ifstream f(path, std::ios::binary);
        std::ostringstream ss;
        ss << f.rdbuf();
        return ss.str();
    };

    if (run_once("acc_det_a") != 0) return {false, "first CLI run failed"};
    if (run_once("acc_det_b") != 0) return {false, "second CLI run failed"};

    Outcome out;
    out.pass = true;
    std::string detail;
    for (const std::string file : {"records.csv", "summary.csv"}) {
        const std::string a = slurp("acc_det_a/det-check/" + file);
        const std::string b = slurp("acc_det_b/det-check/" + file);
        if (a.empty() || a != b) {
            out.pass = false;
            detail += file + " differs or missing; ";
        }
    }
    out.detail = out.pass ? "records.csv and summary.csv byte-identical across reruns"
                          : detail;
    return out;
#endif
}

struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
    std::vector<Criterion> criteria = {
        {1, "solver correctness (KKT + orthonormal analytic)", criterion_solver_correctness},
        {2, "selection oracle equivalence", criterion_selection_oracle},
        {3, "D-criterion dominance", criterion_d_dominance},
        {4, "MSE ordering across methods", criterion_mse_ordering},
        {5, "fixed-k benefit of growing n", criterion_n_benefit},
        {6, "sensitivity gap at p = 500", criterion_sensitivity_gap},
        {7, "scaling slopes", criterion_scaling_slopes},
        {8, "split-and-conquer consistency", criterion_spc_consistency},
        {9, "asymptotic variance check", criterion_asymptotic_variance},
        {10, "deterministic outputs", criterion_determinism},
    };

    std::set<int> only;
    for (int a = 1; a < argc; ++a) {
        if (std::string(argv[a]) == "--only" && a + 1 < argc) only.insert(std::atoi(argv[++a]));
    }

    int failures = 0;
    for (const auto& c : criteria) {
        if (!only.empty() && !only.count(c.id)) continue;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome out;
        try {
            out = c.run();
        } catch (const std::exception& e) {
            out.pass = false;
            out.detail = std::string("exception: ") + e.what();
        }
        const double secs = std::chrono::duration<double>(
                                std::chrono::steady_clock::now() - t0).count();
        std::printf("[%s] criterion %2d: %s — %s (%.1fs)\n", out.pass ? "PASS" : "FAIL", c.id,
                    c.name, out.detail.c_str(), secs);
        std::fflush(stdout);
        if (!out.pass) ++failures;
    }
    return failures;
}
