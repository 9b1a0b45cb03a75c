#include "subdata/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "subdata/rng.hpp"
#include "subdata/selectors.hpp"
#include "subdata/split_conquer.hpp"

namespace subdata {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string upper(std::string s) {
    for (auto& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return s;
}

std::string trim(const std::string& s) {
    size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

}  // namespace

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

MethodSpec parse_method(const std::string& text) {
    const std::string t = trim(text);
    MethodSpec m;
    const auto open = t.find('(');
    std::string name = open == std::string::npos ? t : t.substr(0, open);
    m.name = upper(trim(name));
    if (m.name.empty()) throw std::invalid_argument("empty method descriptor");

    if (open != std::string::npos) {
        if (t.back() != ')')
            throw std::invalid_argument("method descriptor missing ')': " + text);
        std::string args = t.substr(open + 1, t.size() - open - 2);
        std::string cur;
        auto flush = [&] {
            const std::string a = trim(cur);
            if (a.empty()) throw std::invalid_argument("empty argument in method: " + text);
            size_t used = 0;
            int v = std::stoi(a, &used);
            if (used != a.size() || v < 0)
                throw std::invalid_argument("bad method argument '" + a + "' in: " + text);
            m.args.push_back(v);
            cur.clear();
        };
        for (char c : args) {
            if (c == ',' || c == '/') flush();
            else cur.push_back(c);
        }
        flush();
    }

    static const std::set<std::string> known = {"FULL", "UNIF", "LEV", "ALEV", "D-OPT",
                                                "SIS-IBOSS", "SPC"};
    if (!known.count(m.name)) throw std::invalid_argument("unknown method: " + m.name);
    if (m.name == "SPC") {
        if (m.args.size() != 2 || m.args[0] < 1 || m.args[1] < 1 || m.args[0] > m.args[1])
            throw std::invalid_argument("SPC needs (w/K) with 1 <= w <= K: " + text);
    } else if (m.name == "SIS-IBOSS" || m.name == "ALEV") {
        if (m.args.size() != 1) throw std::invalid_argument(m.name + " needs one argument: " + text);
    } else if (m.name == "LEV") {
        if (m.args.size() > 1) throw std::invalid_argument("LEV takes at most one argument: " + text);
    } else if (!m.args.empty()) {
        throw std::invalid_argument(m.name + " takes no arguments: " + text);
    }

    m.display = m.name;
    if (!m.args.empty()) {
        m.display += "(";
        for (size_t i = 0; i < m.args.size(); ++i) {
            if (i) m.display += m.name == "SPC" ? "/" : ",";
            m.display += std::to_string(m.args[i]);
        }
        m.display += ")";
    }
    return m;
}

std::vector<MethodSpec> parse_method_list(const std::string& text) {
    std::vector<MethodSpec> out;
    std::string cur;
    int depth = 0;
    auto flush = [&] {
        const std::string t = trim(cur);
        if (!t.empty()) out.push_back(parse_method(t));
        cur.clear();
    };
    for (char c : text) {
        if (c == '(') ++depth;
        if (c == ')') --depth;
        if (c == ',' && depth == 0) flush();
        else cur.push_back(c);
    }
    flush();
    if (out.empty()) throw std::invalid_argument("no methods given");
    return out;
}

MethodResult apply_method(const Dataset& d, const MethodSpec& method, const MethodConfig& cfg) {
    MethodResult res;
    const int p = d.p();

    if (method.is("SPC")) {
        SpcConfig sc;
        sc.vote_threshold = method.args[0];
        sc.k_chunks = method.args[1];
        sc.seed = cfg.seed;
        sc.folds = cfg.folds;
        sc.path = cfg.path;
        sc.solver = cfg.solver;
        sc.workers = cfg.workers;
        SpcFit fit = spc_fit(d, sc);
        res.beta_hat.resize(p + 1);
        res.beta_hat[0] = fit.intercept;
        res.beta_hat.tail(p) = fit.coefficients;
        res.fit_time_s = fit.parallel_seconds;
        double lam = 0.0;
        int iters = 0;
        for (const auto& c : fit.chunks) {
            lam += c.lambda;
            iters = std::max(iters, c.iterations);
        }
        res.chosen_lambda = lam / static_cast<double>(fit.chunks.size());
        res.iterations = iters;
        return res;
    }

    // Selection phase.
    const auto t_select = Clock::now();
    SubdataIndex idx;
    bool subdata = true;
    if (method.is("FULL")) {
        subdata = false;
    } else if (method.is("UNIF")) {
        idx = uniform_select(d.n(), cfg.k, mix_seed(cfg.seed, 11));
    } else if (method.is("D-OPT")) {
        idx = iboss_select(d, cfg.k);
    } else if (method.is("SIS-IBOSS")) {
        idx = sis_iboss_select(d, cfg.k, method.args[0]).first;
    } else if (method.is("LEV") || method.is("ALEV")) {
        std::optional<std::vector<int>> vars;
        if (!method.args.empty()) {
            const int s = method.args[0];
            vars = sis_screen(d, s).selected_vars;
        }
        Eigen::VectorXd scores;
        if (method.is("LEV")) {
            scores = exact_leverage_scores(d, vars);
        } else {
            const int q = static_cast<int>(vars->size()) + 1;
            int m = cfg.sketch_rows > 0 ? cfg.sketch_rows : 20 * q;
            m = std::min(m, d.n());
            scores = approx_leverage_scores(d, *vars, m, mix_seed(cfg.seed, 13));
        }
        idx = leverage_select(scores, cfg.k, mix_seed(cfg.seed, 17));
    } else {
        throw std::invalid_argument("apply_method: unhandled method " + method.name);
    }
    res.select_time_s = subdata ? seconds_since(t_select) : 0.0;
    res.subdata_rows = subdata ? idx.size() : 0;

    // Fitting phase: cross-validated lasso on the (sub)data.
    const auto t_fit = Clock::now();
    Dataset work = subdata ? d.subset(idx.rows) : d;
    CvFit cf = cv_fit(work, cfg.folds, cfg.path, mix_seed(cfg.seed, 23), cfg.solver);
    res.fit_time_s = seconds_since(t_fit);

    res.beta_hat.resize(p + 1);
    res.beta_hat[0] = cf.fit.intercept;
    res.beta_hat.tail(p) = cf.fit.coefficients;
    res.chosen_lambda = cf.fit.lambda;
    res.iterations = cf.fit.iterations;
    return res;
}

namespace {

void run_one_replication(const Scenario& sc, int rep, std::vector<RunRecord>& records) {
    const std::uint64_t rep_seed = mix_seed(sc.seed, rep);

    TrueModel model = gen_true_model(sc.p, mix_seed(rep_seed, 0xA));
    Eigen::MatrixXd x = gen_design({sc.dist, sc.n, sc.p, mix_seed(rep_seed, 0xB)});
    Eigen::VectorXd y = gen_response(x, model, mix_seed(rep_seed, 0xC));
    Dataset d{std::move(x), std::move(y)};

    Eigen::MatrixXd x_test = gen_design({sc.dist, sc.n_test, sc.p, mix_seed(rep_seed, 0xD)});
    Eigen::VectorXd y_test = gen_response(x_test, model, mix_seed(rep_seed, 0xE));

    for (size_t mi = 0; mi < sc.methods.size(); ++mi) {
        const MethodSpec& method = sc.methods[mi];
        RunRecord rec;
        rec.scenario_id = sc.id;
        rec.method = method.display;
        rec.replication = rep;
        rec.n = sc.n;
        rec.p = sc.p;
        rec.k = sc.k;

        const auto t0 = Clock::now();
        try {
            MethodConfig cfg;
            cfg.k = sc.k;
            cfg.folds = sc.folds;
            cfg.path = sc.path;
            cfg.solver = sc.solver;
            cfg.sketch_rows = sc.sketch_rows;
            cfg.workers = sc.workers;
            cfg.seed = mix_seed(rep_seed, 0x100 + mi);
            MethodResult mr = apply_method(d, method, cfg);

            rec.select_time_s = mr.select_time_s;
            rec.fit_time_s = mr.fit_time_s;
            rec.mse = mse(x_test, model.beta, mr.beta_hat);
            rec.mspe = mspe(x_test, y_test, mr.beta_hat);
            const SelectionMetrics sm = selection_metrics(model.beta, mr.beta_hat);
            rec.sensitivity = sm.sensitivity;
            rec.specificity = sm.specificity;
            rec.chosen_lambda = mr.chosen_lambda;
            rec.iterations = mr.iterations;
        } catch (const std::exception& e) {
            rec.ok = false;
            rec.error = e.what();
        }
        rec.total_time_s = seconds_since(t0);
        records[rep * sc.methods.size() + mi] = std::move(rec);
    }
}

}  // namespace

std::vector<RunRecord> run_scenario(const Scenario& sc) {
    if (sc.reps < 1) throw std::invalid_argument("run_scenario: reps must be >= 1");
    if (sc.methods.empty()) throw std::invalid_argument("run_scenario: no methods");
    for (const auto& m : sc.methods)
        if (!m.is("FULL") && !m.is("SPC") && (sc.k < 1 || sc.k > sc.n))
            throw std::invalid_argument("run_scenario: subdata size k must be in [1, n]");

    std::vector<RunRecord> records(sc.reps * sc.methods.size());
    // Replication 0 runs first alone: it is the timing warm-up, and SPC
    // chunks may already use the worker pool inside a replication.
    run_one_replication(sc, 0, records);
    if (sc.reps > 1) {
        if (sc.workers <= 1) {
            for (int rep = 1; rep < sc.reps; ++rep) run_one_replication(sc, rep, records);
        } else {
            std::atomic<int> next{1};
            std::vector<std::thread> pool;
            const int w = std::min(sc.workers, sc.reps - 1);
            pool.reserve(w);
            for (int t = 0; t < w; ++t)
                pool.emplace_back([&] {
                    for (int rep = next.fetch_add(1); rep < sc.reps; rep = next.fetch_add(1))
                        run_one_replication(sc, rep, records);
                });
            for (auto& th : pool) th.join();
        }
    }
    return records;
}

namespace {

struct Stats {
    double mean = 0.0, sd = 0.0;
    int count = 0;
};

Stats stats_of(const std::vector<double>& v) {
    Stats s;
    s.count = static_cast<int>(v.size());
    if (v.empty()) return s;
    double sum = 0.0;
    for (double x : v) sum += x;
    s.mean = sum / v.size();
    if (v.size() > 1) {
        double ss = 0.0;
        for (double x : v) ss += (x - s.mean) * (x - s.mean);
        s.sd = std::sqrt(ss / (v.size() - 1));
    }
    return s;
}

}  // namespace

std::vector<SummaryRow> aggregate(const std::vector<RunRecord>& records) {
    if (records.empty()) throw std::invalid_argument("aggregate: no records");

    std::vector<std::pair<std::string, std::string>> order;
    std::map<std::pair<std::string, std::string>, std::vector<const RunRecord*>> groups;
    for (const auto& r : records) {
        auto key = std::make_pair(r.scenario_id, r.method);
        if (!groups.count(key)) order.push_back(key);
        groups[key].push_back(&r);
    }

    std::vector<SummaryRow> rows;
    for (const auto& key : order) {
        const auto& recs = groups[key];
        SummaryRow row;
        row.scenario_id = key.first;
        row.method = key.second;
        row.n = recs.front()->n;
        row.p = recs.front()->p;
        row.k = recs.front()->k;

        std::vector<double> v_mse, v_mspe, v_sens, v_spec, v_lam, v_iter;
        std::vector<double> v_sel, v_fit, v_tot;
        bool has_later_rep = false;
        for (const auto* r : recs)
            if (r->ok && r->replication > 0) has_later_rep = true;
        for (const auto* r : recs) {
            if (!r->ok) {
                ++row.reps_failed;
                continue;
            }
            ++row.reps_ok;
            v_mse.push_back(r->mse);
            v_mspe.push_back(r->mspe);
            v_sens.push_back(r->sensitivity);
            v_spec.push_back(r->specificity);
            v_lam.push_back(r->chosen_lambda);
            v_iter.push_back(r->iterations);
            if (!(has_later_rep && r->replication == 0)) {  // warm-up excluded from timings
                v_sel.push_back(r->select_time_s);
                v_fit.push_back(r->fit_time_s);
                v_tot.push_back(r->total_time_s);
            }
        }
        auto s_mse = stats_of(v_mse);
        row.mse_mean = s_mse.mean;
        row.mse_sd = s_mse.sd;
        row.log10_mse_mean = s_mse.mean > 0.0 ? std::log10(s_mse.mean)
                                              : -std::numeric_limits<double>::infinity();
        auto s = stats_of(v_mspe);
        row.mspe_mean = s.mean;
        row.mspe_sd = s.sd;
        s = stats_of(v_sens);
        row.sensitivity_mean = s.mean;
        row.sensitivity_sd = s.sd;
        s = stats_of(v_spec);
        row.specificity_mean = s.mean;
        row.specificity_sd = s.sd;
        s = stats_of(v_sel);
        row.select_time_mean = s.mean;
        row.select_time_sd = s.sd;
        s = stats_of(v_fit);
        row.fit_time_mean = s.mean;
        row.fit_time_sd = s.sd;
        s = stats_of(v_tot);
        row.total_time_mean = s.mean;
        row.total_time_sd = s.sd;
        row.lambda_mean = stats_of(v_lam).mean;
        row.iterations_mean = stats_of(v_iter).mean;
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<ScalingRow> scaling_report(const std::vector<RunRecord>& records,
                                       const std::vector<Scenario>& scenarios,
                                       const std::string& axis) {
    if (axis != "n" && axis != "k") throw std::invalid_argument("scaling_report: axis must be n or k");

    std::map<std::string, double> axis_of;
    for (const auto& sc : scenarios)
        axis_of[sc.id] = axis == "n" ? sc.n : sc.k;

    auto rows = aggregate(records);

    // method -> sorted (x, mean phase time)
    std::map<std::string, std::vector<std::pair<double, const SummaryRow*>>> by_method;
    std::vector<std::string> method_order;
    std::set<double> xs;
    for (const auto& row : rows) {
        if (!axis_of.count(row.scenario_id))
            throw std::invalid_argument("scaling_report: record from unknown scenario " + row.scenario_id);
        const double x = axis_of[row.scenario_id];
        xs.insert(x);
        if (!by_method.count(row.method)) method_order.push_back(row.method);
        by_method[row.method].push_back({x, &row});
    }
    if (xs.size() < 3)
        throw std::invalid_argument("scaling_report: need at least 3 distinct sweep points");

    auto loglog_fit = [](std::vector<std::pair<double, double>>& pts, ScalingRow& out) {
        // least squares on (log10 x, log10 t)
        const int m = static_cast<int>(pts.size());
        double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
        for (auto& [x, t] : pts) {
            const double lx = std::log10(x), ly = std::log10(t);
            sx += lx;
            sy += ly;
            sxx += lx * lx;
            sxy += lx * ly;
            syy += ly * ly;
        }
        const double denom = m * sxx - sx * sx;
        out.slope = (m * sxy - sx * sy) / denom;
        const double ss_tot = syy - sy * sy / m;
        const double intercept = (sy - out.slope * sx) / m;
        double ss_res = 0;
        for (auto& [x, t] : pts) {
            const double e = std::log10(t) - (intercept + out.slope * std::log10(x));
            ss_res += e * e;
        }
        out.r2 = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
        out.points = m;
    };

    std::vector<ScalingRow> out;
    for (const auto& method : method_order) {
        auto& entries = by_method[method];
        std::sort(entries.begin(), entries.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        for (const std::string phase : {"select", "fit"}) {
            std::vector<std::pair<double, double>> pts;
            for (auto& [x, row] : entries) {
                const double t = phase == "select" ? row->select_time_mean : row->fit_time_mean;
                if (t > 0.0) pts.push_back({x, t});
            }
            if (pts.size() < 3) continue;  // e.g. FULL has no selection phase
            ScalingRow row;
            row.method = method;
            row.phase = phase;
            loglog_fit(pts, row);
            out.push_back(row);
        }
    }
    return out;
}

namespace {

struct KeyValue {
    std::string key, value;
    int line = 0;
};

void apply_key(Scenario& sc, const KeyValue& kv) {
    const std::string& k = kv.key;
    auto as_int = [&] {
        size_t used = 0;
        int v = std::stoi(kv.value, &used);
        if (used != kv.value.size())
            throw std::invalid_argument("line " + std::to_string(kv.line) + ": bad integer for " + k);
        return v;
    };
    auto as_double = [&] {
        size_t used = 0;
        double v = std::stod(kv.value, &used);
        if (used != kv.value.size())
            throw std::invalid_argument("line " + std::to_string(kv.line) + ": bad number for " + k);
        return v;
    };

    if (k == "dist") sc.dist = parse_design_dist(kv.value);
    else if (k == "n") sc.n = as_int();
    else if (k == "p") sc.p = as_int();
    else if (k == "k") sc.k = as_int();
    else if (k == "methods") sc.methods = parse_method_list(kv.value);
    else if (k == "reps") sc.reps = as_int();
    else if (k == "seed") sc.seed = static_cast<std::uint64_t>(std::stoull(kv.value));
    else if (k == "n_test") sc.n_test = as_int();
    else if (k == "folds") sc.folds = as_int();
    else if (k == "epsilon") sc.path.epsilon = as_double();
    else if (k == "c_count") sc.path.c_count = as_int();
    else if (k == "tol") sc.solver.tol = as_double();
    else if (k == "max_iter") sc.solver.max_iter = as_int();
    else if (k == "active_set") sc.solver.active_set = as_int() != 0;
    else if (k == "sketch_rows") sc.sketch_rows = as_int();
    else if (k == "workers") sc.workers = as_int();
    else
        throw std::invalid_argument("line " + std::to_string(kv.line) + ": unknown key '" + k + "'");
}

}  // namespace

std::vector<Scenario> parse_scenarios(std::istream& in) {
    std::vector<Scenario> out;
    Scenario cur;
    bool open = false;
    std::string line;
    int lineno = 0;
    auto close = [&] {
        if (!open) return;
        if (cur.n < 1 || cur.p < 1)
            throw std::invalid_argument("scenario '" + cur.id + "' needs n and p");
        if (cur.methods.empty())
            throw std::invalid_argument("scenario '" + cur.id + "' needs methods");
        out.push_back(cur);
    };
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw std::invalid_argument("line " + std::to_string(lineno) + ": bad section header");
            close();
            cur = Scenario{};
            cur.id = trim(line.substr(1, line.size() - 2));
            if (cur.id.empty())
                throw std::invalid_argument("line " + std::to_string(lineno) + ": empty scenario id");
            open = true;
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos || !open)
            throw std::invalid_argument("line " + std::to_string(lineno) + ": expected key = value");
        KeyValue kv{trim(line.substr(0, eq)), trim(line.substr(eq + 1)), lineno};
        apply_key(cur, kv);
    }
    close();
    if (out.empty()) throw std::invalid_argument("config contains no scenarios");
    return out;
}

std::vector<Scenario> load_scenarios(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config: " + path);
    return parse_scenarios(in);
}

namespace {

double masked(double v, bool deterministic) { return deterministic ? 0.0 : v; }

}  // namespace

void write_records_csv(std::ostream& out, const std::vector<RunRecord>& records, bool deterministic) {
    out << "scenario,method,replication,n,p,k,select_time_s,fit_time_s,total_time_s,"
           "mse,mspe,sensitivity,specificity,chosen_lambda,iterations,ok,error\n";
    for (const auto& r : records) {
        out << r.scenario_id << ',' << r.method << ',' << r.replication << ',' << r.n << ',' << r.p
            << ',' << r.k << ',' << format_double(masked(r.select_time_s, deterministic)) << ','
            << format_double(masked(r.fit_time_s, deterministic)) << ','
            << format_double(masked(r.total_time_s, deterministic)) << ',' << format_double(r.mse)
            << ',' << format_double(r.mspe) << ',' << format_double(r.sensitivity) << ','
            << format_double(r.specificity) << ',' << format_double(r.chosen_lambda) << ','
            << r.iterations << ',' << (r.ok ? 1 : 0) << ',' << r.error << '\n';
    }
}

void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows, bool deterministic) {
    out << "scenario,method,n,p,k,reps_ok,reps_failed,mse_mean,mse_sd,log10_mse_mean,"
           "mspe_mean,mspe_sd,sensitivity_mean,sensitivity_sd,specificity_mean,specificity_sd,"
           "select_time_mean,select_time_sd,fit_time_mean,fit_time_sd,total_time_mean,"
           "total_time_sd,lambda_mean,iterations_mean\n";
    for (const auto& r : rows) {
        out << r.scenario_id << ',' << r.method << ',' << r.n << ',' << r.p << ',' << r.k << ','
            << r.reps_ok << ',' << r.reps_failed << ',' << format_double(r.mse_mean) << ','
            << format_double(r.mse_sd) << ',' << format_double(r.log10_mse_mean) << ','
            << format_double(r.mspe_mean) << ',' << format_double(r.mspe_sd) << ','
            << format_double(r.sensitivity_mean) << ',' << format_double(r.sensitivity_sd) << ','
            << format_double(r.specificity_mean) << ',' << format_double(r.specificity_sd) << ','
            << format_double(masked(r.select_time_mean, deterministic)) << ','
            << format_double(masked(r.select_time_sd, deterministic)) << ','
            << format_double(masked(r.fit_time_mean, deterministic)) << ','
            << format_double(masked(r.fit_time_sd, deterministic)) << ','
            << format_double(masked(r.total_time_mean, deterministic)) << ','
            << format_double(masked(r.total_time_sd, deterministic)) << ','
            << format_double(r.lambda_mean) << ',' << format_double(r.iterations_mean) << '\n';
    }
}

void write_summary_table(std::ostream& out, const std::vector<SummaryRow>& rows, bool deterministic) {
    char buf[256];
    std::snprintf(buf, sizeof(buf), "%-24s %-16s %10s %10s %10s %10s %10s %10s %10s\n", "scenario",
                  "method", "mse", "log10mse", "mspe", "sens", "spec", "sel_s", "fit_s");
    out << buf;
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof(buf), "%-24s %-16s %10.4g %10.4g %10.4g %10.4f %10.4f %10.4g %10.4g\n",
                      r.scenario_id.c_str(), r.method.c_str(), r.mse_mean, r.log10_mse_mean,
                      r.mspe_mean, r.sensitivity_mean, r.specificity_mean,
                      masked(r.select_time_mean, deterministic), masked(r.fit_time_mean, deterministic));
        out << buf;
    }
}

void write_scaling_csv(std::ostream& out, const std::vector<ScalingRow>& rows) {
    out << "method,phase,slope,r2,points\n";
    for (const auto& r : rows)
        out << r.method << ',' << r.phase << ',' << format_double(r.slope) << ','
            << format_double(r.r2) << ',' << r.points << '\n';
}

}  // namespace subdata
