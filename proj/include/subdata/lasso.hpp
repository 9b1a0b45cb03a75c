#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <vector>

#include "subdata/dataset.hpp"

namespace subdata {

// Penalized least squares, glmnet parametrization:
//   f(b) = (1/2n) ||y - X b||^2 + lambda ||b||_1
// solved by cyclic coordinate descent with exact zeros.

struct SolverOptions {
    double tol = 1e-7;       // max absolute coefficient change per sweep
    int max_iter = 100000;   // full-sweep budget (active-set sweeps count too)
    bool active_set = true;  // fast path; bit-compatible with the plain sweep
    bool check_monotone = false;  // debug: assert the objective never increases
};

struct PathParams {
    double epsilon = 1e-3;  // lambda_min / lambda_max
    int c_count = 100;
};

struct LassoFit {
    double intercept = 0.0;
    Eigen::VectorXd coefficients;  // length p, original scale, exact zeros
    double lambda = 0.0;
    int iterations = 0;  // coordinate sweeps
    bool converged = false;
    double objective = 0.0;  // (1/2n)RSS + lambda*L1 on the standardized problem
};

struct LambdaPath {
    Eigen::VectorXd lambdas;  // strictly decreasing, log-equispaced
    double epsilon = 0.0;
    int c_count = 0;
};

struct CvResult {
    LambdaPath path;
    Eigen::VectorXd cv_errors;  // mean out-of-fold squared prediction error per lambda
    Eigen::VectorXd cv_se;      // standard error over fold means
    double chosen_lambda = 0.0;
    std::vector<int> fold_assignment;  // length n, values in {0..folds-1}
};

double soft_threshold(double z, double gamma);

struct CdResult {
    Eigen::VectorXd beta;  // standardized scale
    int iterations = 0;
    bool converged = false;
};

// Coordinate descent on given matrices; assumes columns have mean ~0 and
// (1/n)||x_j||^2 equal to 1 (or 0 for an absent column).
CdResult cd_solve(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double lambda,
                  const Eigen::VectorXd* init, const SolverOptions& opts);

// Full fit on a standardized design: runs cd_solve, maps coefficients back
// through `scaling` and recovers the intercept from the means.
LassoFit lasso_fit(const Eigen::MatrixXd& x_std, const Eigen::VectorXd& y_centered,
                   const ScalingInfo& scaling, double lambda,
                   const Eigen::VectorXd* init = nullptr, const SolverOptions& opts = {});

// Smallest lambda with an all-zero solution: max_j |x_j' y| / n.
double lambda_max(const Eigen::MatrixXd& x_std, const Eigen::VectorXd& y_centered);

LambdaPath build_path(double lmax, double epsilon, int c_count);

// Warm-started fits along the path, first to last.
std::vector<LassoFit> fit_path(const Eigen::MatrixXd& x_std, const Eigen::VectorXd& y_centered,
                               const ScalingInfo& scaling, const LambdaPath& path,
                               const SolverOptions& opts = {});

// 10-fold style cross-validation on raw data; lambda_max and the path come
// from the full training split, scaling statistics are recomputed inside
// each training fold.
CvResult cv_select(const Dataset& d, int folds, const PathParams& pp, std::uint64_t seed,
                   const SolverOptions& opts = {});

struct CvFit {
    CvResult cv;
    LassoFit fit;  // warm-path fit on the full data at cv.chosen_lambda
};
CvFit cv_fit(const Dataset& d, int folds, const PathParams& pp, std::uint64_t seed,
             const SolverOptions& opts = {});

// Least squares restricted to a support set; returns (p+1) coefficients,
// intercept first, zeros off-support. Rank-deficient normal equations get
// the same ridge jitter as the leverage computations.
Eigen::VectorXd ols_fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                        const std::optional<std::vector<int>>& support = std::nullopt,
                        bool include_intercept = true, bool* jitter_warning = nullptr);

// Objective value on standardized data.
double lasso_objective(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                       const Eigen::VectorXd& beta, double lambda);

}  // namespace subdata
