// Command-line front end: scenario sweeps, subdata selection, lasso fits,
// and the generic train/test CSV workflow.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "subdata/bench.hpp"
#include "subdata/dataset.hpp"
#include "subdata/lasso.hpp"
#include "subdata/rng.hpp"
#include "subdata/selectors.hpp"
#include "subdata/simulate.hpp"
#include "subdata/split_conquer.hpp"

namespace fs = std::filesystem;
using namespace subdata;

namespace {

struct GlobalOpts {
    std::int64_t seed = -1;  // -1: keep per-scenario seeds
    int workers = 0;         // 0: keep per-scenario workers
    std::string out_dir = "out";
    bool deterministic_paths = false;
};

std::string timestamp_tag() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::tm tm_buf{};
    localtime_r(&t, &tm_buf);
    std::strftime(buf, sizeof(buf), "%Y%m%d-%H%M%S", &tm_buf);
    return buf;
}

fs::path scenario_dir(const GlobalOpts& g, const std::string& id) {
    std::string leaf = id;
    if (!g.deterministic_paths) leaf += "_" + timestamp_tag();
    fs::path dir = fs::path(g.out_dir) / leaf;
    fs::create_directories(dir);
    return dir;
}

void apply_overrides(Scenario& sc, const GlobalOpts& g) {
    if (g.seed >= 0) sc.seed = static_cast<std::uint64_t>(g.seed);
    if (g.workers > 0) sc.workers = g.workers;
}

std::vector<Scenario> select_scenarios(const std::string& config,
                                       const std::vector<std::string>& only) {
    auto all = load_scenarios(config);
    if (only.empty()) return all;
    std::vector<Scenario> out;
    for (const auto& id : only) {
        bool found = false;
        for (const auto& sc : all)
            if (sc.id == id) {
                out.push_back(sc);
                found = true;
            }
        if (!found) throw std::runtime_error("scenario not found in config: " + id);
    }
    return out;
}

void emit_scenario_outputs(const fs::path& dir, const std::vector<RunRecord>& records,
                           bool deterministic) {
    auto rows = aggregate(records);
    {
        std::ofstream f(dir / "records.csv");
        write_records_csv(f, records, deterministic);
    }
    {
        std::ofstream f(dir / "summary.csv");
        write_summary_csv(f, rows, deterministic);
    }
    {
        std::ofstream f(dir / "summary.txt");
        write_summary_table(f, rows, deterministic);
    }
    write_summary_table(std::cout, rows, deterministic);
}

int cmd_simulate(const GlobalOpts& g, const std::string& config,
                 const std::vector<std::string>& only) {
    for (Scenario sc : select_scenarios(config, only)) {
        apply_overrides(sc, g);
        std::cout << "== scenario " << sc.id << " ==\n";
        auto records = run_scenario(sc);
        emit_scenario_outputs(scenario_dir(g, sc.id), records, g.deterministic_paths);
    }
    return 0;
}

int cmd_bench(const GlobalOpts& g, const std::string& config, const std::vector<std::string>& only,
              const std::string& axis) {
    auto scenarios = select_scenarios(config, only);
    std::vector<RunRecord> all_records;
    for (Scenario sc : scenarios) {
        apply_overrides(sc, g);
        std::cout << "== scenario " << sc.id << " ==\n";
        auto records = run_scenario(sc);
        emit_scenario_outputs(scenario_dir(g, sc.id), records, g.deterministic_paths);
        all_records.insert(all_records.end(), records.begin(), records.end());
    }
    auto slopes = scaling_report(all_records, scenarios, axis);
    fs::path dir = scenario_dir(g, "scaling");
    std::ofstream f(dir / "scaling.csv");
    write_scaling_csv(f, slopes);
    write_scaling_csv(std::cout, slopes);
    return 0;
}

Dataset load_input(const std::string& path, const std::string& response, bool no_header) {
    return load_csv(path, response, !no_header);
}

int cmd_select(const GlobalOpts& g, const std::string& data, const std::string& response,
               bool no_header, const std::string& method_text, int k, int sketch_rows,
               const std::string& out_file) {
    Dataset d = load_input(data, response, no_header);
    MethodSpec method = parse_method(method_text);
    const std::uint64_t seed = g.seed >= 0 ? static_cast<std::uint64_t>(g.seed) : 0;

    SubdataIndex idx;
    if (method.is("UNIF")) {
        idx = uniform_select(d.n(), k, seed);
    } else if (method.is("D-OPT")) {
        idx = iboss_select(d, k);
    } else if (method.is("SIS-IBOSS")) {
        idx = sis_iboss_select(d, k, method.args[0]).first;
    } else if (method.is("LEV") || method.is("ALEV")) {
        std::optional<std::vector<int>> vars;
        if (!method.args.empty()) vars = sis_screen(d, method.args[0]).selected_vars;
        Eigen::VectorXd scores;
        if (method.is("LEV")) {
            scores = exact_leverage_scores(d, vars);
        } else {
            const int q = static_cast<int>(vars->size()) + 1;
            int m = sketch_rows > 0 ? sketch_rows : 20 * q;
            scores = approx_leverage_scores(d, *vars, std::min(m, d.n()), mix_seed(seed, 13));
        }
        idx = leverage_select(scores, k, mix_seed(seed, 17));
    } else {
        throw std::runtime_error("select: method must be a subdata selector, got " + method.display);
    }

    std::ofstream f(out_file);
    if (!f) throw std::runtime_error("cannot write " + out_file);
    f << "row,provenance\n";
    for (int i = 0; i < idx.size(); ++i) f << idx.rows[i] << ',' << row_tag_text(idx, i) << '\n';
    std::cout << "wrote " << idx.size() << " rows to " << out_file << "\n";
    return 0;
}

std::vector<int> read_index_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open index file: " + path);
    std::vector<int> rows;
    std::string line;
    while (std::getline(f, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto comma = line.find(',');
        const std::string cell = comma == std::string::npos ? line : line.substr(0, comma);
        try {
            rows.push_back(std::stoi(cell));
        } catch (...) {
            if (rows.empty()) continue;  // header line
            throw std::runtime_error("bad row index in " + path + ": " + cell);
        }
    }
    return rows;
}

int cmd_fit(const GlobalOpts& g, const std::string& data, const std::string& response,
            bool no_header, const std::string& index_file, int folds, double epsilon, int c_count,
            double tol, int max_iter, const std::string& out_prefix) {
    Dataset d = load_input(data, response, no_header);
    if (!index_file.empty()) d = d.subset(read_index_csv(index_file));

    PathParams pp{epsilon, c_count};
    SolverOptions opts;
    opts.tol = tol;
    opts.max_iter = max_iter;
    const std::uint64_t seed = g.seed >= 0 ? static_cast<std::uint64_t>(g.seed) : 0;

    CvFit cf = cv_fit(d, folds, pp, seed, opts);

    {
        std::ofstream f(out_prefix + "_coefficients.csv");
        f << "term,value\n";
        f << "intercept," << format_double(cf.fit.intercept) << '\n';
        for (int j = 0; j < d.p(); ++j)
            f << 'x' << j << ',' << format_double(cf.fit.coefficients[j]) << '\n';
    }
    {
        nlohmann::json j;
        j["lambda"] = cf.fit.lambda;
        j["iterations"] = cf.fit.iterations;
        j["converged"] = cf.fit.converged;
        j["objective"] = cf.fit.objective;
        j["n"] = d.n();
        j["p"] = d.p();
        j["folds"] = folds;
        j["nonzero"] = (cf.fit.coefficients.array() != 0.0).count();
        j["cv_error_at_lambda"] = [&] {
            for (int t = 0; t < cf.cv.path.c_count; ++t)
                if (cf.cv.path.lambdas[t] == cf.cv.chosen_lambda) return cf.cv.cv_errors[t];
            return 0.0;
        }();
        std::ofstream f(out_prefix + "_summary.json");
        f << j.dump(2) << '\n';
    }
    std::cout << "lambda=" << cf.fit.lambda << " nonzero="
              << (cf.fit.coefficients.array() != 0.0).count() << " iterations="
              << cf.fit.iterations << "\n";
    return 0;
}

int cmd_real(const GlobalOpts& g, const std::string& data, const std::string& response,
             bool no_header, int k, int n_test, const std::string& methods_text, int reps,
             int folds, double epsilon, int c_count) {
    Dataset full = load_input(data, response, no_header);
    auto methods = parse_method_list(methods_text);
    const std::uint64_t seed = g.seed >= 0 ? static_cast<std::uint64_t>(g.seed) : 0;

    fs::path dir = scenario_dir(g, "real");
    std::ofstream recf(dir / "records.csv");
    recf << "method,replication,select_time_s,fit_time_s,mspe,chosen_lambda,iterations\n";

    struct Cell {
        std::vector<double> mspe;
    };
    std::map<std::string, Cell> cells;

    for (int rep = 0; rep < reps; ++rep) {
        const std::uint64_t rep_seed = mix_seed(seed, rep);
        SplitSpec split = train_test_split(full, n_test, rep_seed);
        Dataset train = full.subset(split.train_indices);
        Dataset test = full.subset(split.test_indices);

        for (size_t mi = 0; mi < methods.size(); ++mi) {
            MethodConfig cfg;
            cfg.k = k;
            cfg.folds = folds;
            cfg.path = PathParams{epsilon, c_count};
            cfg.workers = g.workers > 0 ? g.workers : 1;
            cfg.seed = mix_seed(rep_seed, 0x100 + mi);
            MethodResult mr = apply_method(train, methods[mi], cfg);
            const double err = mspe(test.x, test.y, mr.beta_hat);
            cells[methods[mi].display].mspe.push_back(err);
            recf << methods[mi].display << ',' << rep << ','
                 << format_double(g.deterministic_paths ? 0.0 : mr.select_time_s) << ','
                 << format_double(g.deterministic_paths ? 0.0 : mr.fit_time_s) << ','
                 << format_double(err) << ',' << format_double(mr.chosen_lambda) << ','
                 << mr.iterations << '\n';
        }
    }

    std::ofstream sumf(dir / "mspe.csv");
    sumf << "method,reps,mspe_mean,mspe_sd\n";
    std::cout << "method           mspe_mean    mspe_sd\n";
    for (const auto& m : methods) {
        const auto& v = cells[m.display].mspe;
        double mean = 0;
        for (double x : v) mean += x;
        mean /= v.empty() ? 1 : v.size();
        double sd = 0;
        if (v.size() > 1) {
            for (double x : v) sd += (x - mean) * (x - mean);
            sd = std::sqrt(sd / (v.size() - 1));
        }
        sumf << m.display << ',' << v.size() << ',' << format_double(mean) << ','
             << format_double(sd) << '\n';
        char buf[128];
        std::snprintf(buf, sizeof(buf), "%-16s %10.4f %10.4f\n", m.display.c_str(), mean, sd);
        std::cout << buf;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"subdata: informative subdata selection and sparse regression benchmarks"};
    app.require_subcommand(1);

    GlobalOpts g;
    app.add_option("--seed", g.seed, "override every seed (default: keep per-scenario seeds)");
    app.add_option("--workers", g.workers, "override worker pool width");
    app.add_option("--out-dir", g.out_dir, "output directory")->capture_default_str();
    app.add_flag("--deterministic-paths", g.deterministic_paths,
                 "no timestamps in paths; zero wall-clock columns in CSVs");

    // simulate
    auto* sim = app.add_subcommand("simulate", "run scenarios from a config file");
    std::string config;
    std::vector<std::string> only;
    sim->add_option("--config", config, "scenario config file")->required();
    sim->add_option("--scenario", only, "run only the named scenarios");

    // bench
    auto* bench = app.add_subcommand("bench", "scenario sweep plus scaling slopes");
    std::string bench_config, axis = "n";
    std::vector<std::string> bench_only;
    bench->add_option("--config", bench_config, "scenario config file")->required();
    bench->add_option("--scenario", bench_only, "run only the named scenarios");
    bench->add_option("--axis", axis, "sweep axis: n or k")->capture_default_str();

    // select
    auto* sel = app.add_subcommand("select", "emit a subdata index CSV for a dataset");
    std::string sel_data, sel_response = "0", sel_method = "D-OPT", sel_out = "subdata.csv";
    bool sel_no_header = false;
    int sel_k = 0, sel_sketch = 0;
    sel->add_option("--data", sel_data, "input CSV")->required();
    sel->add_option("--response", sel_response, "response column name or 0-based index")
        ->capture_default_str();
    sel->add_flag("--no-header", sel_no_header, "input has no header row");
    sel->add_option("--method", sel_method, "UNIF | D-OPT | SIS-IBOSS(s) | LEV | LEV(s) | ALEV(s)")
        ->capture_default_str();
    sel->add_option("--k", sel_k, "subdata size")->required();
    sel->add_option("--sketch-rows", sel_sketch, "sketch size for ALEV (default 20*(s+1))");
    sel->add_option("--out", sel_out, "output CSV")->capture_default_str();

    // fit
    auto* fit = app.add_subcommand("fit", "cross-validated lasso fit on a dataset or subdata");
    std::string fit_data, fit_response = "0", fit_index, fit_prefix = "fit";
    bool fit_no_header = false;
    int fit_folds = 10, fit_c = 100, fit_maxit = 100000;
    double fit_eps = 1e-3, fit_tol = 1e-7;
    fit->add_option("--data", fit_data, "input CSV")->required();
    fit->add_option("--response", fit_response, "response column name or 0-based index")
        ->capture_default_str();
    fit->add_flag("--no-header", fit_no_header, "input has no header row");
    fit->add_option("--index", fit_index, "restrict to rows from this index CSV");
    fit->add_option("--folds", fit_folds, "cross-validation folds")->capture_default_str();
    fit->add_option("--epsilon", fit_eps, "lambda_min / lambda_max")->capture_default_str();
    fit->add_option("--c-count", fit_c, "lambda grid size")->capture_default_str();
    fit->add_option("--tol", fit_tol, "coordinate-sweep tolerance")->capture_default_str();
    fit->add_option("--max-iter", fit_maxit, "sweep budget")->capture_default_str();
    fit->add_option("--out-prefix", fit_prefix, "output file prefix")->capture_default_str();

    // real
    auto* real = app.add_subcommand("real", "train/test workflow on a real CSV: MSPE per method");
    std::string real_data, real_response = "0", real_methods = "FULL,D-OPT,LEV,UNIF";
    bool real_no_header = false;
    int real_k = 0, real_ntest = 1000, real_reps = 1, real_folds = 10, real_c = 100;
    double real_eps = 1e-3;
    real->add_option("--data", real_data, "input CSV")->required();
    real->add_option("--response", real_response, "response column name or 0-based index")
        ->capture_default_str();
    real->add_flag("--no-header", real_no_header, "input has no header row");
    real->add_option("--k", real_k, "subdata size")->required();
    real->add_option("--n-test", real_ntest, "test rows per replication")->capture_default_str();
    real->add_option("--methods", real_methods, "comma list of method descriptors")
        ->capture_default_str();
    real->add_option("--reps", real_reps, "random train/test replications")->capture_default_str();
    real->add_option("--folds", real_folds, "cross-validation folds")->capture_default_str();
    real->add_option("--epsilon", real_eps, "lambda_min / lambda_max")->capture_default_str();
    real->add_option("--c-count", real_c, "lambda grid size")->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim->parsed()) return cmd_simulate(g, config, only);
        if (bench->parsed()) return cmd_bench(g, bench_config, bench_only, axis);
        if (sel->parsed())
            return cmd_select(g, sel_data, sel_response, sel_no_header, sel_method, sel_k,
                              sel_sketch, sel_out);
        if (fit->parsed())
            return cmd_fit(g, fit_data, fit_response, fit_no_header, fit_index, fit_folds, fit_eps,
                           fit_c, fit_tol, fit_maxit, fit_prefix);
        if (real->parsed())
            return cmd_real(g, real_data, real_response, real_no_header, real_k, real_ntest,
                            real_methods, real_reps, real_folds, real_eps, real_c);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
