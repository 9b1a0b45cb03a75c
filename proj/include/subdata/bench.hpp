#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "subdata/dataset.hpp"
#include "subdata/lasso.hpp"
#include "subdata/simulate.hpp"

namespace subdata {

// Method descriptor: NAME or NAME(args) with comma/slash-separated integers.
// Registered names: FULL, UNIF, LEV, LEV(s), ALEV(s), D-OPT, SIS-IBOSS(s), SPC(w/K).
struct MethodSpec {
    std::string name;       // canonical upper-case name
    std::vector<int> args;  // parsed arguments, if any
    std::string display;    // original text, normalized

    bool is(const std::string& n) const { return name == n; }
};

MethodSpec parse_method(const std::string& text);
std::vector<MethodSpec> parse_method_list(const std::string& text);

struct Scenario {
    std::string id;
    DesignDist dist = DesignDist::standard_normal;
    int n = 0;
    int p = 0;
    int k = 0;
    std::vector<MethodSpec> methods;
    int reps = 1;
    std::uint64_t seed = 0;
    int n_test = 1000;
    int folds = 10;
    PathParams path;
    SolverOptions solver;
    int sketch_rows = 0;  // 0: 20 * (vars + 1)
    int workers = 1;
};

struct RunRecord {
    std::string scenario_id;
    std::string method;
    int replication = 0;
    int n = 0, p = 0, k = 0;
    double select_time_s = 0.0;
    double fit_time_s = 0.0;
    double total_time_s = 0.0;
    double mse = 0.0;
    double mspe = 0.0;
    double sensitivity = 0.0;
    double specificity = 0.0;
    double chosen_lambda = 0.0;
    int iterations = 0;
    bool ok = true;
    std::string error;
};

// Everything a method application needs besides the data itself.
struct MethodConfig {
    int k = 0;
    int folds = 10;
    PathParams path;
    SolverOptions solver;
    int sketch_rows = 0;
    int workers = 1;
    std::uint64_t seed = 0;
};

struct MethodResult {
    Eigen::VectorXd beta_hat;  // length p+1, intercept first
    double select_time_s = 0.0;
    double fit_time_s = 0.0;
    double chosen_lambda = 0.0;
    int iterations = 0;
    int subdata_rows = 0;  // 0 when the method uses the full data
};

// Runs one method end to end on raw data: selection phase (if any), then a
// cross-validated fit. The engine behind both the simulation sweep and the
// real-data pipeline.
MethodResult apply_method(const Dataset& d, const MethodSpec& method, const MethodConfig& cfg);

// reps x |methods| records; all methods inside a replication share the
// generated data, true model, and test set.
std::vector<RunRecord> run_scenario(const Scenario& sc);

struct SummaryRow {
    std::string scenario_id;
    std::string method;
    int n = 0, p = 0, k = 0;
    int reps_ok = 0;
    int reps_failed = 0;
    double mse_mean = 0.0, mse_sd = 0.0, log10_mse_mean = 0.0;
    double mspe_mean = 0.0, mspe_sd = 0.0;
    double sensitivity_mean = 0.0, sensitivity_sd = 0.0;
    double specificity_mean = 0.0, specificity_sd = 0.0;
    double select_time_mean = 0.0, select_time_sd = 0.0;
    double fit_time_mean = 0.0, fit_time_sd = 0.0;
    double total_time_mean = 0.0, total_time_sd = 0.0;
    double lambda_mean = 0.0;
    double iterations_mean = 0.0;
};

// Mean/sd per (scenario, method). Replication 0 is a warm-up for the time
// columns (excluded when other replications exist) but counts toward every
// metric column.
std::vector<SummaryRow> aggregate(const std::vector<RunRecord>& records);

struct ScalingRow {
    std::string method;
    std::string phase;  // "select" or "fit"
    double slope = 0.0;
    double r2 = 0.0;
    int points = 0;
};

// Log-log regression of per-scenario mean phase time against the sweep
// axis ("n" or "k"). Needs >= 3 distinct axis values.
std::vector<ScalingRow> scaling_report(const std::vector<RunRecord>& records,
                                       const std::vector<Scenario>& scenarios,
                                       const std::string& axis);

// Plain-text config: one [section] per scenario, key = value lines,
// '#' comments. Unknown keys are errors.
std::vector<Scenario> load_scenarios(const std::string& path);
std::vector<Scenario> parse_scenarios(std::istream& in);

// CSV / table emission. `deterministic` zeroes wall-clock columns so that
// same-seed runs are byte-identical.
void write_records_csv(std::ostream& out, const std::vector<RunRecord>& records, bool deterministic);
void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows, bool deterministic);
void write_summary_table(std::ostream& out, const std::vector<SummaryRow>& rows, bool deterministic);
void write_scaling_csv(std::ostream& out, const std::vector<ScalingRow>& rows);

std::string format_double(double v);

}  // namespace subdata
