#include "subdata/split_conquer.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <stdexcept>
#include <thread>

#include "subdata/rng.hpp"

namespace subdata {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Static work division; tasks must be independent.
void parallel_for(int count, int workers, const std::function<void(int)>& fn) {
    workers = std::max(1, std::min(workers, count));
    if (workers == 1) {
        for (int i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) fn(i);
        });
    for (auto& t : pool) t.join();
}

}  // namespace

std::vector<std::vector<int>> split_data(const Dataset& d, int K, std::uint64_t seed) {
    const int n = d.n();
    if (K < 1 || K > n) throw std::invalid_argument("split_data: K must be in [1, n]");

    std::vector<int> order = shuffled_indices(n, seed);
    std::vector<std::vector<int>> chunks(K);
    const int base = n / K;
    const int rem = n % K;
    int pos = 0;
    for (int c = 0; c < K; ++c) {
        const int size = base + (c < rem ? 1 : 0);
        chunks[c].assign(order.begin() + pos, order.begin() + pos + size);
        std::sort(chunks[c].begin(), chunks[c].end());
        pos += size;
    }
    return chunks;
}

SupportSet majority_vote(const std::vector<Eigen::VectorXd>& chunk_slopes, int w) {
    if (chunk_slopes.empty()) throw std::invalid_argument("majority_vote: no chunk fits");
    const int K = static_cast<int>(chunk_slopes.size());
    const int p = static_cast<int>(chunk_slopes[0].size());
    if (w < 1 || w > K) throw std::invalid_argument("majority_vote: w must be in [1, K]");
    for (const auto& v : chunk_slopes)
        if (static_cast<int>(v.size()) != p)
            throw std::invalid_argument("majority_vote: chunk vectors differ in length");

    SupportSet s;
    for (int j = 0; j < p; ++j) {
        int votes = 0;
        for (const auto& v : chunk_slopes)
            if (v[j] != 0.0) ++votes;
        if (votes >= w) s.indices.push_back(j);
    }
    return s;
}

Eigen::VectorXd combine_estimates(const Dataset& d, const std::vector<std::vector<int>>& chunks,
                                  const std::vector<Eigen::VectorXd>& chunk_fits,
                                  const SupportSet& support, bool* jitter_warning) {
    const int p = d.p();
    const int K = static_cast<int>(chunks.size());
    if (chunk_fits.size() != chunks.size())
        throw std::invalid_argument("combine_estimates: chunks and fits differ in count");
    for (const auto& f : chunk_fits)
        if (static_cast<int>(f.size()) != p + 1)
            throw std::invalid_argument("combine_estimates: fits must be length p+1");

    Eigen::VectorXd combined = Eigen::VectorXd::Zero(p + 1);
    const int s = static_cast<int>(support.indices.size());

    // Weighted average with Gram-matrix weights over [intercept + support].
    const int m = s + 1;
    Eigen::MatrixXd gsum = Eigen::MatrixXd::Zero(m, m);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m);
    for (int c = 0; c < K; ++c) {
        Eigen::MatrixXd z(static_cast<int>(chunks[c].size()), m);
        z.col(0).setOnes();
        for (int a = 0; a < s; ++a) {
            const int j = support.indices[a];
            if (j < 0 || j >= p) throw std::out_of_range("combine_estimates: support index out of range");
            for (size_t i = 0; i < chunks[c].size(); ++i)
                z(static_cast<int>(i), a + 1) = d.x(chunks[c][i], j);
        }
        Eigen::MatrixXd g = z.transpose() * z;
        Eigen::VectorXd restricted(m);
        restricted[0] = chunk_fits[c][0];
        for (int a = 0; a < s; ++a) restricted[a + 1] = chunk_fits[c][support.indices[a] + 1];
        gsum.noalias() += g;
        rhs.noalias() += g * restricted;
    }

    Eigen::LDLT<Eigen::MatrixXd> ldlt;
    {
        ldlt.compute(gsum);
        const auto& dvec = ldlt.vectorD();
        const double dmax = dvec.cwiseAbs().maxCoeff();
        if (!(ldlt.info() == Eigen::Success && dvec.minCoeff() > dmax * 1e-12 && dmax > 0.0)) {
            const double jitter = 1e-10 * gsum.trace() / static_cast<double>(m);
            gsum.diagonal().array() += jitter > 0.0 ? jitter : 1e-300;
            ldlt.compute(gsum);
            if (jitter_warning) *jitter_warning = true;
        } else if (jitter_warning) {
            *jitter_warning = false;
        }
    }
    Eigen::VectorXd sol = ldlt.solve(rhs);

    combined[0] = sol[0];
    for (int a = 0; a < s; ++a) combined[support.indices[a] + 1] = sol[a + 1];
    return combined;
}

SpcFit spc_fit(const Dataset& d, const SpcConfig& cfg) {
    if (cfg.vote_threshold < 1 || cfg.vote_threshold > cfg.k_chunks)
        throw std::invalid_argument("spc_fit: vote threshold must be in [1, K]");

    const int K = cfg.k_chunks;
    const int p = d.p();
    auto chunks = split_data(d, K, cfg.seed);

    std::vector<Eigen::VectorXd> fits(K);
    std::vector<ChunkDiag> diags(K);
    std::vector<std::string> failures(K);

    parallel_for(K, cfg.workers, [&](int c) {
        const auto t0 = Clock::now();
        try {
            Dataset chunk = d.subset(chunks[c]);
            CvFit cf = cv_fit(chunk, cfg.folds, cfg.path, mix_seed(cfg.seed, c), cfg.solver);
            Eigen::VectorXd beta(p + 1);
            beta[0] = cf.fit.intercept;
            beta.tail(p) = cf.fit.coefficients;
            fits[c] = std::move(beta);
            diags[c] = {c, chunk.n(), cf.fit.lambda, cf.fit.iterations, cf.fit.converged, 0.0};
        } catch (const std::exception& e) {
            failures[c] = e.what();
        }
        diags[c].chunk = c;
        diags[c].seconds = seconds_since(t0);
    });
    for (int c = 0; c < K; ++c)
        if (!failures[c].empty())
            throw std::runtime_error("spc_fit: chunk " + std::to_string(c) + " failed: " + failures[c]);

    std::vector<Eigen::VectorXd> slopes(K);
    for (int c = 0; c < K; ++c) slopes[c] = fits[c].tail(p);
    SupportSet support = majority_vote(slopes, cfg.vote_threshold);

    const auto t_combine = Clock::now();
    Eigen::VectorXd combined = combine_estimates(d, chunks, fits, support);
    const double combine_s = seconds_since(t_combine);

    SpcFit out;
    out.intercept = combined[0];
    out.coefficients = combined.tail(p);
    out.support = support;
    out.chunks = diags;
    out.combine_seconds = combine_s;
    double max_chunk = 0.0;
    for (const auto& dg : diags) max_chunk = std::max(max_chunk, dg.seconds);
    out.parallel_seconds = max_chunk + combine_s;
    out.empty_support = support.indices.empty();
    return out;
}

}  // namespace subdata
