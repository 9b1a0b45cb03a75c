#include <doctest.h>

#include <set>

#include "subdata/split_conquer.hpp"
#include "subdata/rng.hpp"
#include "test_helpers.hpp"

using namespace subdata;

namespace {

Dataset linear_dataset(int n, int p, const Eigen::VectorXd& beta, double noise_sd,
                       std::uint64_t seed) {
    RngEngine rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Dataset d;
    d.x.resize(n, p);
    d.y.resize(n);
    for (int j = 0; j < p; ++j)
        for (int i = 0; i < n; ++i) d.x(i, j) = normal(rng);
    d.y = d.x * beta.tail(p);
    d.y.array() += beta[0];
    if (noise_sd > 0)
        for (int i = 0; i < n; ++i) d.y[i] += noise_sd * normal(rng);
    return d;
}

}  // namespace

TEST_CASE("split_data: balanced partition, determinism, K = 1") {
    Dataset d = linear_dataset(10, 2, Eigen::Vector3d(0, 1, -1), 1.0, 3);

    auto chunks = split_data(d, 3, 5);
    REQUIRE(chunks.size() == 3);
    std::multiset<size_t> sizes{chunks[0].size(), chunks[1].size(), chunks[2].size()};
    CHECK(sizes == std::multiset<size_t>{4, 3, 3});

    std::set<int> seen;
    for (const auto& c : chunks)
        for (int i : c) CHECK(seen.insert(i).second);
    CHECK(seen.size() == 10);

    CHECK(split_data(d, 3, 5) == chunks);

    auto one = split_data(d, 1, 9);
    REQUIRE(one.size() == 1);
    CHECK(one[0] == std::vector<int>{0, 1, 2, 3, 4, 5, 6, 7, 8, 9});

    CHECK_THROWS(split_data(d, 11, 0));
    CHECK_THROWS(split_data(d, 0, 0));
}

TEST_CASE("majority_vote thresholds") {
    std::vector<Eigen::VectorXd> slopes(5, Eigen::VectorXd::Zero(4));
    // coefficient 0: nonzero in 3 of 5 chunks
    slopes[0][0] = 1.0;
    slopes[1][0] = -2.0;
    slopes[4][0] = 0.5;
    // coefficient 1: nonzero in 1 chunk
    slopes[2][1] = 3.0;
    // coefficient 2: nonzero everywhere
    for (auto& s : slopes) s[2] = 1.0;

    CHECK(majority_vote(slopes, 3).indices == std::vector<int>{0, 2});
    CHECK(majority_vote(slopes, 1).indices == std::vector<int>{0, 1, 2});  // union
    CHECK(majority_vote(slopes, 5).indices == std::vector<int>{2});        // intersection

    // increasing w never enlarges the support
    std::vector<int> prev_size;
    for (int w = 1; w <= 5; ++w) {
        auto sup = majority_vote(slopes, w);
        if (!prev_size.empty()) CHECK(static_cast<int>(sup.indices.size()) <= prev_size.back());
        prev_size.push_back(static_cast<int>(sup.indices.size()));
    }

    CHECK_THROWS(majority_vote(slopes, 0));
    CHECK_THROWS(majority_vote(slopes, 6));
}

TEST_CASE("combine_estimates: K = 1 returns the restricted fit unchanged") {
    Dataset d = linear_dataset(60, 3, Eigen::Vector4d(0.5, 2, 0, -1), 0.5, 7);
    auto chunks = split_data(d, 1, 0);

    Eigen::VectorXd fit(4);
    fit << 0.4, 1.9, 0.0, -1.1;
    SupportSet support{{0, 2}};
    Eigen::VectorXd combined = combine_estimates(d, chunks, {fit}, support);
    CHECK(std::abs(combined[0] - 0.4) < 1e-10);
    CHECK(std::abs(combined[1] - 1.9) < 1e-10);
    CHECK(combined[2] == 0.0);
    CHECK(std::abs(combined[3] - (-1.1)) < 1e-10);
}

TEST_CASE("combine_estimates: identical fits are returned unchanged") {
    Dataset d = linear_dataset(80, 4, Eigen::VectorXd::Zero(5), 1.0, 11);
    auto chunks = split_data(d, 4, 3);
    Eigen::VectorXd fit(5);
    fit << 0.2, 1.0, -0.5, 0.0, 2.0;
    std::vector<Eigen::VectorXd> fits(4, fit);
    SupportSet support{{0, 1, 3}};
    Eigen::VectorXd combined = combine_estimates(d, chunks, fits, support);
    CHECK(std::abs(combined[0] - fit[0]) < 1e-10);
    CHECK(std::abs(combined[1] - fit[1]) < 1e-10);
    CHECK(std::abs(combined[2] - fit[2]) < 1e-10);
    CHECK(combined[3] == 0.0);  // off-support slope zeroed
    CHECK(std::abs(combined[4] - fit[4]) < 1e-10);
}

TEST_CASE("combine_estimates recovers the truth on noiseless chunks") {
    Eigen::VectorXd truth(5);
    truth << 0.3, 1.5, 0.0, -2.0, 0.0;
    Dataset d = linear_dataset(100, 4, truth, 0.0, 13);
    auto chunks = split_data(d, 2, 17);

    // per-chunk least squares on the true support
    std::vector<Eigen::VectorXd> fits;
    for (const auto& c : chunks) {
        Dataset chunk = d.subset(c);
        fits.push_back(ols_fit(chunk.x, chunk.y, std::vector<int>{0, 2}, true));
    }
    SupportSet support{{0, 2}};
    Eigen::VectorXd combined = combine_estimates(d, chunks, fits, support);
    CHECK((combined - truth).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("combine_estimates with an empty support still combines intercepts") {
    Dataset d = linear_dataset(40, 2, Eigen::Vector3d(2.0, 0, 0), 0.1, 19);
    auto chunks = split_data(d, 2, 23);
    Eigen::VectorXd f0(3), f1(3);
    f0 << 1.8, 0, 0;
    f1 << 2.2, 0, 0;
    Eigen::VectorXd combined = combine_estimates(d, chunks, {f0, f1}, SupportSet{});
    CHECK(combined[1] == 0.0);
    CHECK(combined[2] == 0.0);
    CHECK(combined[0] > 1.8);
    CHECK(combined[0] < 2.2);
}

TEST_CASE("spc_fit: K = 1 equals the direct cross-validated fit") {
    Eigen::VectorXd truth(6);
    truth << 0.0, 1.2, 0.0, -0.8, 0.0, 0.6;
    Dataset d = linear_dataset(120, 5, truth, 1.0, 29);

    SpcConfig cfg;
    cfg.k_chunks = 1;
    cfg.vote_threshold = 1;
    cfg.seed = 31;
    SpcFit spc = spc_fit(d, cfg);

    CvFit direct = cv_fit(d, cfg.folds, cfg.path, mix_seed(31, 0), cfg.solver);
    CHECK(std::abs(spc.intercept - direct.fit.intercept) < 1e-8);
    CHECK((spc.coefficients - direct.fit.coefficients).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("spc_fit: diagnostics and parallel-time convention") {
    Eigen::VectorXd truth(4);
    truth << 0.1, 2.0, -1.0, 0.0;
    Dataset d = linear_dataset(300, 3, truth, 1.0, 37);

    SpcConfig cfg;
    cfg.k_chunks = 5;
    cfg.vote_threshold = 3;
    cfg.seed = 41;
    cfg.workers = 2;
    SpcFit fit = spc_fit(d, cfg);
    CHECK(fit.chunks.size() == 5);
    double max_chunk = 0.0;
    for (const auto& c : fit.chunks) {
        CHECK(c.rows == 60);
        max_chunk = std::max(max_chunk, c.seconds);
    }
    CHECK(fit.parallel_seconds == doctest::Approx(max_chunk + fit.combine_seconds));

    // strong signals survive the vote
    std::set<int> sup(fit.support.indices.begin(), fit.support.indices.end());
    CHECK(sup.count(0) == 1);
    CHECK(sup.count(1) == 1);

    // determinism across worker widths
    SpcConfig serial = cfg;
    serial.workers = 1;
    SpcFit fit2 = spc_fit(d, serial);
    CHECK((fit.coefficients - fit2.coefficients).cwiseAbs().maxCoeff() == 0.0);
}
