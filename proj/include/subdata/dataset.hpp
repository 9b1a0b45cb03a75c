#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace subdata {

// Column-major numeric matrix plus response. Immutable once built; the
// intercept is implicit (never stored as a column).
struct Dataset {
    Eigen::MatrixXd x;  // n x p, predictors in file/generation order
    Eigen::VectorXd y;  // length n

    int n() const { return static_cast<int>(x.rows()); }
    int p() const { return static_cast<int>(x.cols()); }

    // Materializes the given rows as a new Dataset (order preserved).
    Dataset subset(const std::vector<int>& rows) const;
};

struct ScalingInfo {
    Eigen::VectorXd column_means;  // length p
    Eigen::VectorXd column_sds;    // length p, population convention (divisor n); 0 marks a constant column
    double response_mean = 0.0;
};

struct SplitSpec {
    std::vector<int> train_indices;  // sorted ascending
    std::vector<int> test_indices;   // sorted ascending
    std::uint64_t seed = 0;
};

// CSV ingestion. `response_column` is a header name, or a 0-based column
// index when no header (or when the name parses as an integer and is not a
// header name). Row/column positions in error messages are 1-based; rows are
// counted among data rows.
Dataset load_csv(const std::string& path, const std::string& response_column, bool header);

// Center/scale every non-constant column to mean 0, population sd 1; center
// the response. Constant columns map to all zeros with sd recorded as 0.
std::pair<Dataset, ScalingInfo> standardize(const Dataset& d);

// Inverse of standardize.
Dataset destandardize(const Dataset& d, const ScalingInfo& info);

SplitSpec train_test_split(const Dataset& d, int n_test, std::uint64_t seed);

}  // namespace subdata
