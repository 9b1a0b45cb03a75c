#include "subdata/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "subdata/lasso.hpp"
#include "subdata/rng.hpp"

namespace subdata {

DesignDist parse_design_dist(const std::string& name) {
    if (name == "normal" || name == "standard-normal" || name == "gaussian")
        return DesignDist::standard_normal;
    if (name == "lognormal") return DesignDist::lognormal;
    if (name == "t2") return DesignDist::t2;
    if (name == "mixture") return DesignDist::mixture;
    throw std::invalid_argument("unknown design distribution: " + name);
}

std::string design_dist_name(DesignDist dist) {
    switch (dist) {
        case DesignDist::standard_normal: return "normal";
        case DesignDist::lognormal: return "lognormal";
        case DesignDist::t2: return "t2";
        case DesignDist::mixture: return "mixture";
    }
    return "?";
}

double true_coef_mean() { return std::sqrt(std::log(5000.0) / 1000.0) / 2.0; }

Eigen::MatrixXd gen_design(const DesignSpec& spec) {
    if (spec.n < 1 || spec.p < 1) throw std::invalid_argument("gen_design: n and p must be >= 1");
    RngEngine rng(spec.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::lognormal_distribution<double> lognormal(0.0, 1.0);
    std::student_t_distribution<double> t2(2.0);
    std::student_t_distribution<double> t3(3.0);

    Eigen::MatrixXd x(spec.n, spec.p);
    double* data = x.data();  // column-major fill, one stream
    const long total = static_cast<long>(spec.n) * spec.p;
    switch (spec.dist) {
        case DesignDist::standard_normal:
            for (long i = 0; i < total; ++i) data[i] = normal(rng);
            break;
        case DesignDist::lognormal:
            for (long i = 0; i < total; ++i) data[i] = lognormal(rng);
            break;
        case DesignDist::t2:
            for (long i = 0; i < total; ++i) data[i] = t2(rng);
            break;
        case DesignDist::mixture:
            for (long i = 0; i < total; ++i)
                data[i] = 0.25 * (normal(rng) + t2(rng) + t3(rng) + lognormal(rng));
            break;
    }
    return x;
}

TrueModel gen_true_model(int p, std::uint64_t seed) {
    if (p < 1) throw std::invalid_argument("gen_true_model: p must be >= 1");
    int root = static_cast<int>(std::sqrt(static_cast<double>(p)));
    while ((root + 1) * (root + 1) <= p) ++root;
    while (root * root > p) --root;

    TrueModel model;
    model.p_star = std::min(root + 1, p);  // the rule exceeds p only at p = 1
    model.sigma = 1.0;
    model.beta = Eigen::VectorXd::Zero(p + 1);

    RngEngine rng(seed);
    model.support = sample_without_replacement(p, model.p_star, rng);
    std::sort(model.support.begin(), model.support.end());

    const double mean = true_coef_mean();
    std::normal_distribution<double> coef(mean, mean / 5.0);
    for (int j : model.support) model.beta[j + 1] = coef(rng);
    return model;
}

Eigen::VectorXd gen_response(const Eigen::MatrixXd& x, const TrueModel& model, std::uint64_t seed) {
    const int n = static_cast<int>(x.rows());
    const int p = static_cast<int>(x.cols());
    if (static_cast<int>(model.beta.size()) != p + 1)
        throw std::invalid_argument("gen_response: model dimension mismatch");
    RngEngine rng(seed);
    std::normal_distribution<double> noise(0.0, model.sigma);
    Eigen::VectorXd y = (x * model.beta.tail(p)).array() + model.beta[0];
    for (int i = 0; i < n; ++i) y[i] += noise(rng);
    return y;
}

double mse(const Eigen::MatrixXd& x_test, const Eigen::VectorXd& beta_true,
           const Eigen::VectorXd& beta_hat) {
    const int nt = static_cast<int>(x_test.rows());
    const int p = static_cast<int>(x_test.cols());
    if (nt < 1) throw std::invalid_argument("mse: empty test set");
    if (static_cast<int>(beta_true.size()) != p + 1 || static_cast<int>(beta_hat.size()) != p + 1)
        throw std::invalid_argument("mse: coefficient length must be p+1");
    const Eigen::VectorXd diff = (x_test * (beta_true.tail(p) - beta_hat.tail(p))).array() +
                                 (beta_true[0] - beta_hat[0]);
    return diff.squaredNorm() / nt;
}

double mspe(const Eigen::MatrixXd& x_test, const Eigen::VectorXd& y_test,
            const Eigen::VectorXd& beta_hat) {
    const int nt = static_cast<int>(x_test.rows());
    const int p = static_cast<int>(x_test.cols());
    if (nt < 1 || static_cast<int>(y_test.size()) != nt)
        throw std::invalid_argument("mspe: dimension mismatch");
    if (static_cast<int>(beta_hat.size()) != p + 1)
        throw std::invalid_argument("mspe: coefficient length must be p+1");
    const Eigen::VectorXd pred = (x_test * beta_hat.tail(p)).array() + beta_hat[0];
    return (y_test - pred).squaredNorm() / nt;
}

SelectionMetrics selection_metrics(const Eigen::VectorXd& beta_true, const Eigen::VectorXd& beta_hat) {
    if (beta_true.size() != beta_hat.size())
        throw std::invalid_argument("selection_metrics: length mismatch");
    const int p = static_cast<int>(beta_true.size()) - 1;
    int tp = 0, fn = 0, tn = 0, fp = 0;
    for (int j = 1; j <= p; ++j) {
        const bool truth = beta_true[j] != 0.0;
        const bool picked = beta_hat[j] != 0.0;
        if (truth && picked) ++tp;
        else if (truth) ++fn;
        else if (picked) ++fp;
        else ++tn;
    }
    if (tp + fn == 0) throw std::invalid_argument("selection_metrics: no truly nonzero slopes");
    SelectionMetrics m;
    m.sensitivity = static_cast<double>(tp) / (tp + fn);
    m.specificity = (tn + fp) == 0 ? 1.0 : static_cast<double>(tn) / (tn + fp);
    return m;
}

VarianceCheckReport asymptotic_variance_check(const DesignSpec& spec, const TrueModel& model,
                                              int reps, const LambdaRule& rule) {
    if (spec.dist != DesignDist::standard_normal)
        throw std::invalid_argument("asymptotic_variance_check: needs a standard-normal design");
    if (reps < 2) throw std::invalid_argument("asymptotic_variance_check: reps must be >= 2");

    const int n = spec.n;
    const int p = spec.p;
    const double lambda_n = rule.scale * std::pow(static_cast<double>(n), rule.exponent);
    const double solver_lambda = lambda_n / (2.0 * n);

    const int s = static_cast<int>(model.support.size());
    Eigen::MatrixXd errors(reps, s);  // sqrt(n) * (beta_hat_j - beta_j)

    SolverOptions opts;
    for (int rep = 0; rep < reps; ++rep) {
        DesignSpec ds = spec;
        ds.seed = mix_seed(spec.seed, 2 * rep);
        Eigen::MatrixXd x = gen_design(ds);
        Eigen::VectorXd y = gen_response(x, model, mix_seed(spec.seed, 2 * rep + 1));

        Dataset d{std::move(x), std::move(y)};
        auto [xstd, scaling] = standardize(d);
        LassoFit fit = lasso_fit(xstd.x, xstd.y, scaling, solver_lambda, nullptr, opts);
        for (int a = 0; a < s; ++a) {
            const int j = model.support[a];
            errors(rep, a) = std::sqrt(static_cast<double>(n)) * (fit.coefficients[j] - model.beta[j + 1]);
        }
    }

    VarianceCheckReport report;
    report.support = model.support;
    report.reps = reps;
    report.lambda_n = lambda_n;
    report.solver_lambda = solver_lambda;
    report.condition_met = rule.exponent < 0.5 || rule.scale == 0.0;

    // Target variance sigma^2 (C^{-1})_jj with C = I on this design.
    const double target = model.sigma * model.sigma;
    report.ratios.resize(s);
    for (int a = 0; a < s; ++a) {
        const double m = errors.col(a).mean();
        const double var = (errors.col(a).array() - m).square().sum() / (reps - 1);
        report.ratios[a] = var / target;
    }
    std::vector<double> sorted(report.ratios.data(), report.ratios.data() + s);
    std::sort(sorted.begin(), sorted.end());
    report.median_ratio = s % 2 == 1 ? sorted[s / 2] : 0.5 * (sorted[s / 2 - 1] + sorted[s / 2]);
    report.pass = report.condition_met && report.median_ratio >= 0.7 && report.median_ratio <= 1.3;
    return report;
}

}  // namespace subdata
