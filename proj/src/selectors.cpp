#include "subdata/selectors.hpp"

#include <Eigen/Cholesky>
#include <Eigen/QR>
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "subdata/rng.hpp"

namespace subdata {

namespace {

// r_low smallest then r_high largest of values[pool], low side first.
// Ties always break toward the smaller row index. nth_element keeps the
// expected cost linear in the pool size.
std::pair<std::vector<int>, std::vector<int>>
extreme_indices(const double* values, std::vector<int> pool, int r_low, int r_high) {
    if (r_low < 0 || r_high < 0 || static_cast<int>(pool.size()) < r_low + r_high)
        throw std::invalid_argument("partial_extremes: insufficient available points");

    auto low_cmp = [values](int a, int b) {
        return values[a] < values[b] || (values[a] == values[b] && a < b);
    };
    auto high_cmp = [values](int a, int b) {
        return values[a] > values[b] || (values[a] == values[b] && a < b);
    };

    std::vector<int> low, high;
    auto mid = pool.begin() + r_low;
    if (r_low > 0) {
        std::nth_element(pool.begin(), mid, pool.end(), low_cmp);
        std::sort(pool.begin(), mid, low_cmp);
        low.assign(pool.begin(), mid);
    }
    if (r_high > 0) {
        auto hend = mid + r_high;
        std::nth_element(mid, hend, pool.end(), high_cmp);
        std::sort(mid, hend, high_cmp);
        high.assign(mid, hend);
    }
    return {std::move(low), std::move(high)};
}

// Extra extreme points per column when k is not a multiple of 2*ncols:
// round-robin (col 0 low, col 0 high, col 1 low, ...).
void column_quota(int k, int ncols, int col, int& r_low, int& r_high) {
    const int r = k / (2 * ncols);
    const int rem = k - 2 * ncols * r;
    r_low = r + (2 * col < rem ? 1 : 0);
    r_high = r + (2 * col + 1 < rem ? 1 : 0);
}

SubdataIndex iboss_over_columns(const Dataset& d, int k, const std::vector<int>& columns,
                                const std::string& selector) {
    const int n = d.n();
    const int ncols = static_cast<int>(columns.size());
    if (k > n) throw std::invalid_argument(selector + ": k exceeds the number of rows");
    if (k < 2) throw std::invalid_argument(selector + ": k must be at least 2");
    if (ncols < 1) throw std::invalid_argument(selector + ": no columns to select on");

    SubdataIndex out;
    out.k = k;
    out.selector = selector;
    out.rows.reserve(k);
    out.provenance.reserve(k);

    std::vector<char> available(n, 1);
    std::vector<int> pool;
    pool.reserve(n);

    for (int c = 0; c < ncols; ++c) {
        int r_low = 0, r_high = 0;
        column_quota(k, ncols, c, r_low, r_high);
        if (r_low + r_high == 0) continue;

        pool.clear();
        for (int i = 0; i < n; ++i)
            if (available[i]) pool.push_back(i);

        const int col = columns[c];
        const double* values = d.x.col(col).data();

        double vmin = values[pool.front()], vmax = vmin;
        for (int i : pool) {
            vmin = std::min(vmin, values[i]);
            vmax = std::max(vmax, values[i]);
        }
        const bool degenerate = vmin == vmax;

        auto [low, high] = extreme_indices(values, pool, r_low, r_high);
        for (int i : low) {
            out.rows.push_back(i);
            out.provenance.push_back({col, RowTag::Side::low, degenerate});
            available[i] = 0;
        }
        for (int i : high) {
            out.rows.push_back(i);
            out.provenance.push_back({col, RowTag::Side::high, degenerate});
            available[i] = 0;
        }
    }
    return out;
}

// G <- G + ridge when the factorization looks rank-deficient.
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

Eigen::MatrixXd design_with_intercept(const Dataset& d, const std::vector<int>& vars,
                                      bool include_intercept) {
    const int n = d.n();
    const int q = static_cast<int>(vars.size());
    Eigen::MatrixXd z(n, q + (include_intercept ? 1 : 0));
    int c = 0;
    if (include_intercept) z.col(c++).setOnes();
    for (int v : vars) {
        if (v < 0 || v >= d.p()) throw std::out_of_range("leverage: variable index out of range");
        z.col(c++) = d.x.col(v);
    }
    return z;
}

std::vector<int> all_vars(int p) {
    std::vector<int> v(p);
    for (int j = 0; j < p; ++j) v[j] = j;
    return v;
}

// Prefix-sum tree over row weights; supports draw-and-remove in O(log n).
class WeightTree {
public:
    explicit WeightTree(const Eigen::VectorXd& w) : n_(static_cast<int>(w.size())), tree_(n_ + 1, 0.0) {
        for (int i = 0; i < n_; ++i) tree_[i + 1] = w[i];
        for (int i = 1; i <= n_; ++i) {
            int parent = i + (i & -i);
            if (parent <= n_) tree_[parent] += tree_[i];
        }
    }
    void add(int i, double delta) {
        for (++i; i <= n_; i += i & -i) tree_[i] += delta;
    }
    double total() const {
        double s = 0.0;
        for (int i = n_; i > 0; i -= i & -i) s += tree_[i];
        return s;
    }
    // Smallest index with prefix sum strictly greater than u.
    int find(double u) const {
        int pos = 0;
        int bit = 1;
        while ((bit << 1) <= n_) bit <<= 1;
        for (; bit > 0; bit >>= 1) {
            int next = pos + bit;
            if (next <= n_ && tree_[next] <= u) {
                pos = next;
                u -= tree_[next];
            }
        }
        return pos;  // 0-based row index
    }

private:
    int n_;
    std::vector<double> tree_;
};

}  // namespace

std::pair<std::vector<int>, std::vector<int>>
partial_extremes(const Eigen::VectorXd& values, int r, const std::vector<int>& excluded) {
    const int n = static_cast<int>(values.size());
    if (r < 1) throw std::invalid_argument("partial_extremes: r must be >= 1");
    std::vector<char> skip(n, 0);
    for (int i : excluded) {
        if (i < 0 || i >= n) throw std::out_of_range("partial_extremes: excluded index out of range");
        skip[i] = 1;
    }
    std::vector<int> pool;
    pool.reserve(n);
    for (int i = 0; i < n; ++i)
        if (!skip[i]) pool.push_back(i);
    if (static_cast<int>(pool.size()) < 2 * r)
        throw std::invalid_argument("partial_extremes: insufficient available points");
    return extreme_indices(values.data(), std::move(pool), r, r);
}

SubdataIndex iboss_select(const Dataset& d, int k) {
    return iboss_over_columns(d, k, all_vars(d.p()), "d-opt");
}

ScreenResult sis_screen(const Dataset& d, int s) {
    const int n = d.n(), p = d.p();
    if (s < 1 || s > p) throw std::invalid_argument("sis_screen: s must be in [1, p]");
    if (n < 2) throw std::invalid_argument("sis_screen: need at least 2 rows");

    const double ymean = d.y.mean();
    const Eigen::ArrayXd yc = d.y.array() - ymean;
    const double yss = (yc * yc).sum();
    if (yss <= 0.0) throw std::invalid_argument("sis_screen: constant response, correlations undefined");

    ScreenResult res;
    res.correlations.resize(p);
    for (int j = 0; j < p; ++j) {
        const double xmean = d.x.col(j).mean();
        const Eigen::ArrayXd xc = d.x.col(j).array() - xmean;
        const double xss = (xc * xc).sum();
        res.correlations[j] = xss > 0.0 ? (xc * yc).sum() / std::sqrt(xss * yss) : 0.0;
    }

    std::vector<int> order = all_vars(p);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        const double fa = std::abs(res.correlations[a]), fb = std::abs(res.correlations[b]);
        return fa > fb || (fa == fb && a < b);
    });
    res.selected_vars.assign(order.begin(), order.begin() + s);
    return res;
}

std::pair<SubdataIndex, ScreenResult> sis_iboss_select(const Dataset& d, int k, int s) {
    ScreenResult screen = sis_screen(d, s);
    SubdataIndex idx = iboss_over_columns(d, k, screen.selected_vars, "sis-iboss");
    return {std::move(idx), std::move(screen)};
}

SubdataIndex uniform_select(int n, int k, std::uint64_t seed) {
    if (k < 0 || k > n) throw std::invalid_argument("uniform_select: k must be in [0, n]");
    RngEngine rng(seed);
    SubdataIndex out;
    out.k = k;
    out.selector = "uniform";
    out.rows = sample_without_replacement(n, k, rng);
    return out;
}

Eigen::VectorXd exact_leverage_scores(const Dataset& d, const std::optional<std::vector<int>>& vars,
                                      bool include_intercept, bool* jitter_warning) {
    const std::vector<int> v = vars ? *vars : all_vars(d.p());
    if (!include_intercept && v.empty())
        throw std::invalid_argument("exact_leverage_scores: empty design");
    Eigen::MatrixXd z = design_with_intercept(d, v, include_intercept);
    const int n = static_cast<int>(z.rows());
    const int m = static_cast<int>(z.cols());

    Eigen::MatrixXd g = z.transpose() * z;
    Eigen::LDLT<Eigen::MatrixXd> ldlt;
    const bool jittered = ldlt_with_jitter(g, ldlt);
    if (jitter_warning) *jitter_warning = jittered;

    Eigen::VectorXd h(n);
    const int block = std::max(1, (1 << 22) / std::max(1, m));  // ~32MB of doubles per block
    for (int start = 0; start < n; start += block) {
        const int len = std::min(block, n - start);
        Eigen::MatrixXd zb = z.middleRows(start, len);
        Eigen::MatrixXd solved = ldlt.solve(zb.transpose());  // m x len
        h.segment(start, len) = (zb.array() * solved.transpose().array()).rowwise().sum();
    }
    return h;
}

Eigen::VectorXd approx_leverage_scores(const Dataset& d, const std::vector<int>& vars,
                                       int sketch_rows, std::uint64_t seed,
                                       bool include_intercept) {
    Eigen::MatrixXd z = design_with_intercept(d, vars, include_intercept);
    const int n = static_cast<int>(z.rows());
    const int q = static_cast<int>(z.cols());
    if (sketch_rows < q)
        throw std::invalid_argument("approx_leverage_scores: sketch_rows too small");

    Eigen::MatrixXd sz;
    if (sketch_rows >= n) {
        sz = z;  // identity sketch, scores become exact
    } else {
        // Accumulate S*Z in row blocks; sign entries are +-1/sqrt(m), 64
        // signs harvested per engine draw.
        const double scale = 1.0 / std::sqrt(static_cast<double>(sketch_rows));
        RngEngine rng(seed);
        sz.setZero(sketch_rows, q);
        const int block = std::max(1, (1 << 21) / sketch_rows);
        Eigen::MatrixXd s_block(sketch_rows, block);
        std::uint64_t bits = 0;
        int bits_left = 0;
        for (int start = 0; start < n; start += block) {
            const int len = std::min(block, n - start);
            for (int c = 0; c < len; ++c)
                for (int r = 0; r < sketch_rows; ++r) {
                    if (bits_left == 0) {
                        bits = rng();
                        bits_left = 64;
                    }
                    s_block(r, c) = (bits & 1) ? scale : -scale;
                    bits >>= 1;
                    --bits_left;
                }
            sz.noalias() += s_block.leftCols(len) * z.middleRows(start, len);
        }
    }

    Eigen::HouseholderQR<Eigen::MatrixXd> qr(sz);
    Eigen::MatrixXd r = qr.matrixQR().topRows(q).triangularView<Eigen::Upper>();
    // Guard exactly singular sketches so the triangular solve stays finite.
    const double dmax = r.diagonal().cwiseAbs().maxCoeff();
    const double floor_val = std::max(dmax, 1.0) * 1e-14;
    for (int j = 0; j < q; ++j)
        if (std::abs(r(j, j)) < floor_val) r(j, j) = r(j, j) < 0 ? -floor_val : floor_val;

    Eigen::VectorXd h(n);
    const int block = std::max(1, (1 << 22) / std::max(1, q));
    for (int start = 0; start < n; start += block) {
        const int len = std::min(block, n - start);
        // rows of Z R^{-1}: solve R^T W = Z_b^T
        Eigen::MatrixXd w = r.transpose().triangularView<Eigen::Lower>().solve(
            Eigen::MatrixXd(z.middleRows(start, len).transpose()));
        h.segment(start, len) = w.colwise().squaredNorm();
    }
    return h;
}

SubdataIndex leverage_select(const Eigen::VectorXd& scores, int k, std::uint64_t seed) {
    const int n = static_cast<int>(scores.size());
    if (k < 0 || k > n) throw std::invalid_argument("leverage_select: k must be in [0, n]");
    int positive = 0;
    for (int i = 0; i < n; ++i) {
        if (!(scores[i] >= 0.0))
            throw std::invalid_argument("leverage_select: scores must be nonnegative");
        if (scores[i] > 0.0) ++positive;
    }
    if (positive < k)
        throw std::invalid_argument("leverage_select: fewer than k rows with positive score");

    WeightTree tree(scores);
    RngEngine rng(seed);
    std::vector<char> drawn(n, 0);
    SubdataIndex out;
    out.k = k;
    out.selector = "leverage";
    out.rows.reserve(k);
    for (int t = 0; t < k; ++t) {
        const double total = tree.total();
        std::uniform_real_distribution<double> unif(0.0, total);
        double u = unif(rng);
        if (u >= total) u = std::nextafter(total, 0.0);
        int i = tree.find(u);
        if (i >= n) i = n - 1;
        // Roundoff in the tree can leave dust on removed rows; step to the
        // nearest still-available positive-score row.
        for (int probe = 0; (drawn[i] || scores[i] <= 0.0) && probe < n; ++probe)
            i = (i + 1) % n;
        out.rows.push_back(i);
        drawn[i] = 1;
        tree.add(i, -scores[i]);
    }
    return out;
}

InfoMatrix information_matrix(const Dataset& d, const SubdataIndex& idx, double sigma_sq) {
    if (idx.rows.empty()) throw std::invalid_argument("information_matrix: empty subdata");
    if (!(sigma_sq > 0.0)) throw std::invalid_argument("information_matrix: sigma_sq must be > 0");
    const int p = d.p();
    const int k = idx.size();
    Eigen::MatrixXd z(k, p + 1);
    for (int i = 0; i < k; ++i) {
        const int r = idx.rows[i];
        if (r < 0 || r >= d.n()) throw std::out_of_range("information_matrix: row index out of range");
        z(i, 0) = 1.0;
        z.row(i).tail(p) = d.x.row(r);
    }
    InfoMatrix m;
    m.sigma_sq = sigma_sq;
    m.m = (z.transpose() * z) / sigma_sq;
    return m;
}

double d_criterion(const InfoMatrix& m) {
    Eigen::LDLT<Eigen::MatrixXd> ldlt(m.m);
    if (ldlt.info() != Eigen::Success)
        return -std::numeric_limits<double>::infinity();
    double logdet = 0.0;
    for (int i = 0; i < m.m.rows(); ++i) {
        const double di = ldlt.vectorD()[i];
        if (di <= 0.0) return -std::numeric_limits<double>::infinity();
        logdet += std::log(di);
    }
    return logdet;
}

std::string row_tag_text(const SubdataIndex& idx, int position) {
    if (idx.provenance.empty()) return idx.selector;
    const RowTag& tag = idx.provenance.at(position);
    if (tag.column < 0) return idx.selector;
    std::string s = idx.selector + ":c" + std::to_string(tag.column) + ":" +
                    (tag.side == RowTag::Side::low ? "min" : "max");
    if (tag.degenerate) s += ":tie";
    return s;
}

}  // namespace subdata
