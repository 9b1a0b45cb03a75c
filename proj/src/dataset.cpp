#include "subdata/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "subdata/rng.hpp"

namespace subdata {

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            cells.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    cells.push_back(cur);
    return cells;
}

std::string trim(const std::string& s) {
    size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

bool parse_cell(const std::string& raw, double& out) {
    std::string s = trim(raw);
    if (s.empty()) return false;
    const char* begin = s.data();
    const char* end = s.data() + s.size();
    if (*begin == '+') ++begin;  // from_chars rejects a leading plus
    auto [ptr, ec] = std::from_chars(begin, end, out);
    return ec == std::errc() && ptr == end;
}

}  // namespace

Dataset Dataset::subset(const std::vector<int>& rows) const {
    Dataset out;
    out.x.resize(static_cast<int>(rows.size()), p());
    out.y.resize(static_cast<int>(rows.size()));
    for (size_t i = 0; i < rows.size(); ++i) {
        int r = rows[i];
        if (r < 0 || r >= n()) throw std::out_of_range("Dataset::subset: row index out of range");
        out.x.row(static_cast<int>(i)) = x.row(r);
        out.y[static_cast<int>(i)] = y[r];
    }
    return out;
}

Dataset load_csv(const std::string& path, const std::string& response_column, bool header) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("load_csv: cannot open file: " + path);

    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() && in.peek() == std::char_traits<char>::eof()) break;
        lines.push_back(line);
    }
    if (lines.empty()) throw std::runtime_error("load_csv: empty file: " + path);

    std::vector<std::string> names;
    size_t first_data = 0;
    if (header) {
        for (auto& c : split_line(lines[0])) names.push_back(trim(c));
        first_data = 1;
    }
    if (first_data >= lines.size()) throw std::runtime_error("load_csv: no data rows in " + path);

    const int ncols = static_cast<int>(split_line(lines[first_data]).size());
    if (!header) names.assign(ncols, "");
    if (static_cast<int>(names.size()) != ncols)
        throw std::runtime_error("load_csv: header has " + std::to_string(names.size()) +
                                 " columns but row 1 has " + std::to_string(ncols));

    // Resolve the response column: header name first, then 0-based index.
    int rcol = -1;
    if (header) {
        for (int j = 0; j < ncols; ++j)
            if (names[j] == response_column) { rcol = j; break; }
    }
    if (rcol < 0) {
        int idx = -1;
        auto t = trim(response_column);
        auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), idx);
        if (ec == std::errc() && ptr == t.data() + t.size() && idx >= 0 && idx < ncols) rcol = idx;
    }
    if (rcol < 0)
        throw std::runtime_error("load_csv: response column '" + response_column + "' not found");
    if (ncols < 2)
        throw std::runtime_error("load_csv: need at least one predictor besides the response");

    auto column_label = [&](int j) {
        return header && !names[j].empty() ? "\"" + names[j] + "\"" : std::to_string(j + 1);
    };

    const int n = static_cast<int>(lines.size() - first_data);
    const int p = ncols - 1;
    Dataset d;
    d.x.resize(n, p);
    d.y.resize(n);

    for (int i = 0; i < n; ++i) {
        auto cells = split_line(lines[first_data + i]);
        if (static_cast<int>(cells.size()) != ncols)
            throw std::runtime_error("load_csv: ragged row " + std::to_string(i + 1) + " has " +
                                     std::to_string(cells.size()) + " cells, expected " +
                                     std::to_string(ncols));
        int jj = 0;
        for (int j = 0; j < ncols; ++j) {
            double v = 0.0;
            if (!parse_cell(cells[j], v) || !std::isfinite(v))
                throw std::runtime_error("load_csv: non-numeric cell at row " + std::to_string(i + 1) +
                                         ", column " + column_label(j) + ": '" + trim(cells[j]) + "'");
            if (j == rcol)
                d.y[i] = v;
            else
                d.x(i, jj++) = v;
        }
    }
    return d;
}

std::pair<Dataset, ScalingInfo> standardize(const Dataset& d) {
    const int n = d.n(), p = d.p();
    if (n < 2) throw std::invalid_argument("standardize: need at least 2 rows");

    ScalingInfo info;
    info.column_means.resize(p);
    info.column_sds.resize(p);
    Dataset out;
    out.x.resize(n, p);
    out.y.resize(n);

    for (int j = 0; j < p; ++j) {
        const double mean = d.x.col(j).mean();
        const double sd = std::sqrt((d.x.col(j).array() - mean).square().sum() / n);
        info.column_means[j] = mean;
        if (sd > 0.0) {
            info.column_sds[j] = sd;
            out.x.col(j) = (d.x.col(j).array() - mean) / sd;
        } else {
            info.column_sds[j] = 0.0;
            out.x.col(j).setZero();
        }
    }
    info.response_mean = d.y.mean();
    out.y = d.y.array() - info.response_mean;
    return {out, info};
}

Dataset destandardize(const Dataset& d, const ScalingInfo& info) {
    Dataset out;
    out.x.resize(d.n(), d.p());
    for (int j = 0; j < d.p(); ++j)
        out.x.col(j) = d.x.col(j).array() * info.column_sds[j] + info.column_means[j];
    out.y = d.y.array() + info.response_mean;
    return out;
}

SplitSpec train_test_split(const Dataset& d, int n_test, std::uint64_t seed) {
    const int n = d.n();
    if (n_test <= 0 || n_test >= n)
        throw std::invalid_argument("train_test_split: n_test must be in (0, n)");

    RngEngine rng(seed);
    std::vector<int> picks = sample_without_replacement(n, n_test, rng);

    std::vector<char> is_test(n, 0);
    for (int i : picks) is_test[i] = 1;

    SplitSpec s;
    s.seed = seed;
    s.test_indices.reserve(n_test);
    s.train_indices.reserve(n - n_test);
    for (int i = 0; i < n; ++i)
        (is_test[i] ? s.test_indices : s.train_indices).push_back(i);
    return s;
}

}  // namespace subdata
