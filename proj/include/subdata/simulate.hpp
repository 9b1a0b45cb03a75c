#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "subdata/dataset.hpp"

namespace subdata {

enum class DesignDist { standard_normal, lognormal, t2, mixture };

DesignDist parse_design_dist(const std::string& name);
std::string design_dist_name(DesignDist dist);

struct DesignSpec {
    DesignDist dist = DesignDist::standard_normal;
    int n = 0;
    int p = 0;
    std::uint64_t seed = 0;
};

struct TrueModel {
    Eigen::VectorXd beta;      // length p+1, intercept first; exact zeros off-support
    std::vector<int> support;  // sorted indices of nonzero slopes (0-based)
    int p_star = 0;            // floor(sqrt(p)) + 1
    double sigma = 1.0;
};

// Mean of the nonzero coefficient law: sqrt(log(5000)/1000)/2.
double true_coef_mean();

// i.i.d. n x p design from the named law. The mixture is the scaled sum
// 0.25*(N(0,1) + t(2) + t(3) + lognormal(0,1)).
Eigen::MatrixXd gen_design(const DesignSpec& spec);

// p_star nonzero slopes on a uniformly random support, drawn from
// Normal(b*, (b*/5)^2); intercept 0.
TrueModel gen_true_model(int p, std::uint64_t seed);

// y = b0 + X b + eps, eps ~ N(0, sigma^2).
Eigen::VectorXd gen_response(const Eigen::MatrixXd& x, const TrueModel& model, std::uint64_t seed);

// Mean squared error of the linear predictor against the true signal;
// intercepts included on both sides. beta vectors are length p+1.
double mse(const Eigen::MatrixXd& x_test, const Eigen::VectorXd& beta_true,
           const Eigen::VectorXd& beta_hat);

// Mean squared prediction error against observed responses.
double mspe(const Eigen::MatrixXd& x_test, const Eigen::VectorXd& y_test,
            const Eigen::VectorXd& beta_hat);

struct SelectionMetrics {
    double sensitivity = 0.0;  // TP / (TP + FN) over truly nonzero slopes
    double specificity = 0.0;  // TN / (TN + FP) over truly zero slopes
};
// "Selected" means exactly nonzero; intercept excluded.
SelectionMetrics selection_metrics(const Eigen::VectorXd& beta_true, const Eigen::VectorXd& beta_hat);

// lambda_n = scale * n^exponent in the unnormalized parametrization
// (RSS + lambda_n * L1); scale 0 gives plain least squares.
struct LambdaRule {
    double scale = 0.5;
    double exponent = 0.25;
};

struct VarianceCheckReport {
    std::vector<int> support;  // slope coordinates checked
    Eigen::VectorXd ratios;    // empirical var of sqrt(n)(b_j - beta_j) over sigma^2 (C^{-1})_jj
    double median_ratio = 0.0;
    double lambda_n = 0.0;       // rule value at this n
    double solver_lambda = 0.0;  // lambda_n / (2n)
    bool condition_met = false;  // lambda_n grows slower than sqrt(n)
    bool pass = false;           // condition met and median ratio in [0.7, 1.3]
    int reps = 0;
};

// Monte-Carlo check that sqrt(n)(b^ - b) has per-coordinate variance close
// to sigma^2 (C^{-1})_jj on a standard-normal design (C = identity).
VarianceCheckReport asymptotic_variance_check(const DesignSpec& spec, const TrueModel& model,
                                              int reps, const LambdaRule& rule);

}  // namespace subdata
