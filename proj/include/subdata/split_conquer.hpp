#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "subdata/dataset.hpp"
#include "subdata/lasso.hpp"

namespace subdata {

struct SpcConfig {
    int k_chunks = 1;        // K
    int vote_threshold = 1;  // w, support needs >= w nonzero votes
    std::uint64_t seed = 0;
    int folds = 10;
    PathParams path;
    SolverOptions solver;
    int workers = 1;
};

struct SupportSet {
    std::vector<int> indices;  // sorted predictor indices
};

struct ChunkDiag {
    int chunk = 0;
    int rows = 0;
    double lambda = 0.0;
    int iterations = 0;
    bool converged = false;
    double seconds = 0.0;
};

struct SpcFit {
    double intercept = 0.0;
    Eigen::VectorXd coefficients;  // length p, zero off-support
    SupportSet support;
    std::vector<ChunkDiag> chunks;
    double parallel_seconds = 0.0;  // max chunk time + combine time
    double combine_seconds = 0.0;
    bool empty_support = false;
};

// Random partition of {0..n-1} into K chunks, sizes differing by at most
// one; each chunk sorted ascending.
std::vector<std::vector<int>> split_data(const Dataset& d, int K, std::uint64_t seed);

// j is in the support iff >= w of the slope vectors are nonzero at j.
SupportSet majority_vote(const std::vector<Eigen::VectorXd>& chunk_slopes, int w);

// Gram-weighted combination of chunk estimates restricted to the support
// (intercept included alongside the voted slopes). chunk_fits are (p+1)
// vectors, intercept first; returns a (p+1) vector.
Eigen::VectorXd combine_estimates(const Dataset& d, const std::vector<std::vector<int>>& chunks,
                                  const std::vector<Eigen::VectorXd>& chunk_fits,
                                  const SupportSet& support, bool* jitter_warning = nullptr);

SpcFit spc_fit(const Dataset& d, const SpcConfig& cfg);

}  // namespace subdata
