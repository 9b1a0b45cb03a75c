#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "subdata/dataset.hpp"

namespace subdata {

struct RowTag {
    enum class Side { none, low, high };
    int column = -1;  // original predictor index, -1 when not column-driven
    Side side = Side::none;
    bool degenerate = false;  // column was constant over the remaining pool
};

struct SubdataIndex {
    std::vector<int> rows;  // distinct row indices, selection order
    int k = 0;
    std::string selector;
    std::vector<RowTag> provenance;  // empty, or one tag per row

    int size() const { return static_cast<int>(rows.size()); }
};

struct ScreenResult {
    std::vector<int> selected_vars;   // s predictor indices, |corr| descending, ties by index
    Eigen::VectorXd correlations;     // all p Pearson correlations with the response
};

struct InfoMatrix {
    Eigen::MatrixXd m;      // (p+1) x (p+1), intercept row/column first
    double sigma_sq = 1.0;
};

// Indices of the r smallest and r largest non-excluded values. Expected
// linear cost (selection, not a full sort). Ties break toward the smaller
// row index; the low side claims its rows before the high side.
std::pair<std::vector<int>, std::vector<int>>
partial_extremes(const Eigen::VectorXd& values, int r, const std::vector<int>& excluded);

// Extreme-point subdata: sweeps columns in order, taking the extremes of
// each from the pool of still-unselected rows.
SubdataIndex iboss_select(const Dataset& d, int k);

// Marginal-correlation screening: top-s columns by |corr(X_j, y)|.
ScreenResult sis_screen(const Dataset& d, int s);

// Screen to s columns, then extreme-point selection over the screened
// columns in screened order (largest |corr| first).
std::pair<SubdataIndex, ScreenResult> sis_iboss_select(const Dataset& d, int k, int s);

SubdataIndex uniform_select(int n, int k, std::uint64_t seed);

// Hat-matrix diagonal h_i = z_i' (Z'Z)^{-1} z_i over [intercept + vars]
// (all columns when vars is empty). Singular Gram matrices get a ridge
// jitter of 1e-10 * trace/dim; *jitter_warning reports the fallback.
Eigen::VectorXd exact_leverage_scores(const Dataset& d,
                                      const std::optional<std::vector<int>>& vars = std::nullopt,
                                      bool include_intercept = true,
                                      bool* jitter_warning = nullptr);

// Sketched leverage scores: a dense +-1/sqrt(m) sign sketch of the design,
// QR of the sketched matrix, scores from row norms of Z R^{-1}. With
// sketch_rows == n the sketch is the identity and scores are exact.
Eigen::VectorXd approx_leverage_scores(const Dataset& d, const std::vector<int>& vars,
                                       int sketch_rows, std::uint64_t seed,
                                       bool include_intercept = true);

// k draws without replacement, inclusion weight proportional to score,
// drawn rows removed between draws.
SubdataIndex leverage_select(const Eigen::VectorXd& scores, int k, std::uint64_t seed);

InfoMatrix information_matrix(const Dataset& d, const SubdataIndex& idx, double sigma_sq = 1.0);

// log|M|; -inf for singular M.
double d_criterion(const InfoMatrix& m);

std::string row_tag_text(const SubdataIndex& idx, int position);

}  // namespace subdata
