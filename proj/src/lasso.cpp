#include "subdata/lasso.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "subdata/rng.hpp"

namespace subdata {

namespace {

// Same jitter rule as the leverage path: 1e-10 * trace / dim on the diagonal.
bool ldlt_with_jitter(Eigen::MatrixXd& g, Eigen::LDLT<Eigen::MatrixXd>& ldlt) {
    ldlt.compute(g);
    const auto& dvec = ldlt.vectorD();
    const double dmax = dvec.cwiseAbs().maxCoeff();
    if (ldlt.info() == Eigen::Success && dvec.minCoeff() > dmax * 1e-12 && dmax > 0.0) return false;
    const double jitter = 1e-10 * g.trace() / static_cast<double>(g.rows());
    g.diagonal().array() += jitter > 0.0 ? jitter : 1e-300;
    ldlt.compute(g);
    return true;
}

LassoFit to_original_scale(const Eigen::VectorXd& beta_std, const ScalingInfo& scaling) {
    const int p = static_cast<int>(beta_std.size());
    LassoFit fit;
    fit.coefficients.setZero(p);
    double dot = 0.0;
    for (int j = 0; j < p; ++j) {
        if (beta_std[j] != 0.0 && scaling.column_sds[j] > 0.0) {
            fit.coefficients[j] = beta_std[j] / scaling.column_sds[j];
            dot += fit.coefficients[j] * scaling.column_means[j];
        }
    }
    fit.intercept = scaling.response_mean - dot;
    return fit;
}

}  // namespace

double soft_threshold(double z, double gamma) {
    if (z > gamma) return z - gamma;
    if (z < -gamma) return z + gamma;
    return 0.0;
}

double lasso_objective(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                       const Eigen::VectorXd& beta, double lambda) {
    const double n = static_cast<double>(x.rows());
    const double rss = (y - x * beta).squaredNorm();
    return rss / (2.0 * n) + lambda * beta.lpNorm<1>();
}

CdResult cd_solve(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double lambda,
                  const Eigen::VectorXd* init, const SolverOptions& opts) {
    const int n = static_cast<int>(x.rows());
    const int p = static_cast<int>(x.cols());
    if (n < 1 || static_cast<int>(y.size()) != n)
        throw std::invalid_argument("cd_solve: dimension mismatch");
    if (lambda < 0.0) throw std::invalid_argument("cd_solve: lambda must be >= 0");
    if (init && static_cast<int>(init->size()) != p)
        throw std::invalid_argument("cd_solve: init has wrong length");

    CdResult res;
    res.beta = init ? *init : Eigen::VectorXd::Zero(p);

    Eigen::VectorXd norm2n(p);  // (1/n) x_j . x_j, ~1 for standardized columns, 0 for absent ones
    for (int j = 0; j < p; ++j) norm2n[j] = x.col(j).squaredNorm() / n;

    Eigen::VectorXd residual = y - x * res.beta;

    auto sweep = [&](const std::vector<int>& cols) {
        double max_delta = 0.0;
        for (int j : cols) {
            const double bj = res.beta[j];
            const double z = x.col(j).dot(residual) / n + norm2n[j] * bj;
            double nb = soft_threshold(z, lambda);
            if (norm2n[j] <= 0.0) nb = 0.0;
            const double diff = nb - bj;
            if (diff != 0.0) {
                residual.noalias() -= diff * x.col(j);
                res.beta[j] = nb;
                max_delta = std::max(max_delta, std::abs(diff));
            }
        }
        return max_delta;
    };

    std::vector<int> all_cols(p);
    for (int j = 0; j < p; ++j) all_cols[j] = j;

    double prev_obj = opts.check_monotone ? lasso_objective(x, y, res.beta, lambda) : 0.0;
    auto monotone_check = [&]() {
        if (!opts.check_monotone) return;
        const double obj = lasso_objective(x, y, res.beta, lambda);
        if (obj > prev_obj + 1e-10 * (1.0 + std::abs(prev_obj)))
            throw std::logic_error("cd_solve: objective increased during a sweep");
        prev_obj = obj;
    };

    std::vector<int> active;
    while (res.iterations < opts.max_iter) {
        ++res.iterations;
        const double delta = sweep(all_cols);
        monotone_check();
        if (delta < opts.tol) {
            res.converged = true;
            break;
        }
        if (!opts.active_set) continue;

        // Iterate on the current nonzero set, then re-verify with a full sweep.
        active.clear();
        for (int j = 0; j < p; ++j)
            if (res.beta[j] != 0.0) active.push_back(j);
        while (res.iterations < opts.max_iter && !active.empty()) {
            ++res.iterations;
            const double adelta = sweep(active);
            monotone_check();
            if (adelta < opts.tol) break;
        }
    }
    return res;
}

LassoFit lasso_fit(const Eigen::MatrixXd& x_std, const Eigen::VectorXd& y_centered,
                   const ScalingInfo& scaling, double lambda,
                   const Eigen::VectorXd* init, const SolverOptions& opts) {
    CdResult cd = cd_solve(x_std, y_centered, lambda, init, opts);
    LassoFit fit = to_original_scale(cd.beta, scaling);
    fit.lambda = lambda;
    fit.iterations = cd.iterations;
    fit.converged = cd.converged;
    fit.objective = lasso_objective(x_std, y_centered, cd.beta, lambda);
    return fit;
}

double lambda_max(const Eigen::MatrixXd& x_std, const Eigen::VectorXd& y_centered) {
    const double n = static_cast<double>(x_std.rows());
    // Per-column dots, the exact arithmetic of the coordinate update: the
    // fit at this lambda must soft-threshold every coordinate to an exact 0.
    double best = 0.0;
    for (int j = 0; j < x_std.cols(); ++j)
        best = std::max(best, std::abs(x_std.col(j).dot(y_centered) / n));
    return best;
}

LambdaPath build_path(double lmax, double epsilon, int c_count) {
    if (!(lmax > 0.0)) throw std::invalid_argument("build_path: lambda_max must be > 0");
    if (!(epsilon > 0.0 && epsilon < 1.0))
        throw std::invalid_argument("build_path: epsilon must be in (0, 1)");
    if (c_count < 2) throw std::invalid_argument("build_path: need at least 2 grid points");

    LambdaPath path;
    path.epsilon = epsilon;
    path.c_count = c_count;
    path.lambdas.resize(c_count);
    const double log_max = std::log(lmax);
    const double step = std::log(epsilon) / (c_count - 1);
    for (int t = 0; t < c_count; ++t) path.lambdas[t] = std::exp(log_max + step * t);
    path.lambdas[0] = lmax;
    path.lambdas[c_count - 1] = epsilon * lmax;
    return path;
}

std::vector<LassoFit> fit_path(const Eigen::MatrixXd& x_std, const Eigen::VectorXd& y_centered,
                               const ScalingInfo& scaling, const LambdaPath& path,
                               const SolverOptions& opts) {
    std::vector<LassoFit> fits;
    fits.reserve(path.lambdas.size());
    Eigen::VectorXd warm = Eigen::VectorXd::Zero(x_std.cols());
    for (int t = 0; t < static_cast<int>(path.lambdas.size()); ++t) {
        CdResult cd = cd_solve(x_std, y_centered, path.lambdas[t], &warm, opts);
        warm = cd.beta;
        LassoFit fit = to_original_scale(cd.beta, scaling);
        fit.lambda = path.lambdas[t];
        fit.iterations = cd.iterations;
        fit.converged = cd.converged;
        fit.objective = lasso_objective(x_std, y_centered, cd.beta, path.lambdas[t]);
        fits.push_back(std::move(fit));
    }
    return fits;
}

namespace {

std::vector<int> make_folds(int n, int folds, std::uint64_t seed) {
    std::vector<int> order = shuffled_indices(n, seed);
    std::vector<int> assignment(n, 0);
    const int base = n / folds;
    const int rem = n % folds;
    int pos = 0;
    for (int f = 0; f < folds; ++f) {
        const int size = base + (f < rem ? 1 : 0);
        for (int i = 0; i < size; ++i) assignment[order[pos++]] = f;
    }
    return assignment;
}

}  // namespace

CvResult cv_select(const Dataset& d, int folds, const PathParams& pp, std::uint64_t seed,
                   const SolverOptions& opts) {
    const int n = d.n();
    if (folds < 2) throw std::invalid_argument("cv_select: need at least 2 folds");
    if (n < folds) throw std::invalid_argument("cv_select: more folds than rows");
    if (n / folds < 2) throw std::invalid_argument("cv_select: a fold would have fewer than 2 rows");

    auto [full_std, full_scaling] = standardize(d);
    const double lmax = lambda_max(full_std.x, full_std.y);
    if (!(lmax > 0.0))
        throw std::invalid_argument("cv_select: response is orthogonal to every predictor");

    CvResult cv;
    cv.path = build_path(lmax, pp.epsilon, pp.c_count);
    cv.fold_assignment = make_folds(n, folds, seed);

    const int C = cv.path.c_count;
    Eigen::VectorXd sq_err_sum = Eigen::VectorXd::Zero(C);
    Eigen::MatrixXd fold_means(folds, C);

    std::vector<int> train_rows, test_rows;
    for (int f = 0; f < folds; ++f) {
        train_rows.clear();
        test_rows.clear();
        for (int i = 0; i < n; ++i)
            (cv.fold_assignment[i] == f ? test_rows : train_rows).push_back(i);

        Dataset train = d.subset(train_rows);
        auto [tstd, tscale] = standardize(train);
        std::vector<LassoFit> fits = fit_path(tstd.x, tstd.y, tscale, cv.path, opts);

        Dataset test = d.subset(test_rows);
        for (int t = 0; t < C; ++t) {
            const Eigen::VectorXd pred =
                (test.x * fits[t].coefficients).array() + fits[t].intercept;
            const double sq = (test.y - pred).squaredNorm();
            sq_err_sum[t] += sq;
            fold_means(f, t) = sq / static_cast<double>(test_rows.size());
        }
    }

    cv.cv_errors = sq_err_sum / static_cast<double>(n);
    cv.cv_se.resize(C);
    for (int t = 0; t < C; ++t) {
        const double m = fold_means.col(t).mean();
        const double var = (fold_means.col(t).array() - m).square().sum() / (folds - 1);
        cv.cv_se[t] = std::sqrt(var / folds);
    }

    int best = 0;
    for (int t = 1; t < C; ++t)
        if (cv.cv_errors[t] <= cv.cv_errors[best]) best = t;  // ties: smaller lambda wins
    cv.chosen_lambda = cv.path.lambdas[best];
    return cv;
}

CvFit cv_fit(const Dataset& d, int folds, const PathParams& pp, std::uint64_t seed,
             const SolverOptions& opts) {
    CvFit out;
    out.cv = cv_select(d, folds, pp, seed, opts);

    auto [xstd, scaling] = standardize(d);
    // Warm-start down the path, stopping at the chosen lambda.
    Eigen::VectorXd warm = Eigen::VectorXd::Zero(d.p());
    CdResult cd;
    int total_iter = 0;
    for (int t = 0; t < out.cv.path.c_count; ++t) {
        const double lam = out.cv.path.lambdas[t];
        cd = cd_solve(xstd.x, xstd.y, lam, &warm, opts);
        warm = cd.beta;
        total_iter += cd.iterations;
        if (lam == out.cv.chosen_lambda) break;
    }
    out.fit = lasso_fit(xstd.x, xstd.y, scaling, out.cv.chosen_lambda, &warm, opts);
    out.fit.iterations = total_iter + out.fit.iterations;
    return out;
}

Eigen::VectorXd ols_fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                        const std::optional<std::vector<int>>& support,
                        bool include_intercept, bool* jitter_warning) {
    const int n = static_cast<int>(x.rows());
    const int p = static_cast<int>(x.cols());
    std::vector<int> cols;
    if (support) {
        cols = *support;
        for (int j : cols)
            if (j < 0 || j >= p) throw std::out_of_range("ols_fit: support index out of range");
    } else {
        cols.resize(p);
        for (int j = 0; j < p; ++j) cols[j] = j;
    }

    const int q = static_cast<int>(cols.size());
    const int m = q + (include_intercept ? 1 : 0);
    if (m == 0) throw std::invalid_argument("ols_fit: empty design");

    Eigen::MatrixXd z(n, m);
    int c = 0;
    if (include_intercept) z.col(c++).setOnes();
    for (int j : cols) z.col(c++) = x.col(j);

    Eigen::MatrixXd g = z.transpose() * z;
    Eigen::VectorXd rhs = z.transpose() * y;
    Eigen::LDLT<Eigen::MatrixXd> ldlt;
    const bool jittered = ldlt_with_jitter(g, ldlt);
    if (jitter_warning) *jitter_warning = jittered;
    Eigen::VectorXd sol = ldlt.solve(rhs);

    Eigen::VectorXd beta = Eigen::VectorXd::Zero(p + 1);
    c = 0;
    if (include_intercept) beta[0] = sol[c++];
    for (int j : cols) beta[j + 1] = sol[c++];
    return beta;
}

}  // namespace subdata
