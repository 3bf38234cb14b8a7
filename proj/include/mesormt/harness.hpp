#pragma once
// Monte Carlo orchestration: CLT runs, sigma-transition sweeps, matrix
// Ornstein-Uhlenbeck time sweeps, and the normality checks on the sampled
// linear statistics. Sample i always draws from RNG stream i no matter
// which worker executes it, and all reductions use fixed-order trees, so a
// (config, seed) pair produces identical output for any worker count.

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mesormt/accumulator.hpp"
#include "mesormt/ensembles.hpp"
#include "mesormt/spectral.hpp"
#include "mesormt/vendor_json_fwd.hpp"

namespace mesormt {

struct SweepSpec {
    enum class Kind { none, sigma, dbm_time };
    Kind kind = Kind::none;
    std::vector<double> values; // sigma grid, or t grid (inf allowed)
    int beta = 2;               // dbm sweeps only
};

struct ExperimentConfig {
    EnsembleSpec ensemble;
    MesoWindow window;
    std::vector<std::string> functions; // 1 or 2 catalog names
    int samples = 0;
    SweepSpec sweep;
    uint64_t seed = 0;
    std::string output_path; // base name; writers add .csv / .json
    int workers = 1;

    void validate() const;
};

struct WickCheckResult {
    double lhs = 0.0;
    double rhs = 0.0;
    double gap = 0.0; // lhs - rhs
    double se = 0.0;  // bootstrap, fixed internal seed
};

// lhs = empirical n-th central moment, rhs = (n-1) V (n-2)-th central
// moment: the recursion that pins the limiting normal law. n in 2..6,
// at least 100 samples.
WickCheckResult wick_check(std::span<const double> samples, double V, int n);

// Kolmogorov-Smirnov distance between the sample and a normal with the
// sample's own mean and variance. The 1% critical value for the fitted
// case is about 1.031/sqrt(M).
double ks_fitted_normal(std::span<const double> samples);
double ks_critical_1pct(int M);

struct FunctionStats {
    std::string name;
    double mean = 0.0, var = 0.0, skew = 0.0, ex_kurt = 0.0;
    double se_mean = 0.0, se_var = 0.0, se_skew = 0.0, se_kurt = 0.0;
    double predicted_var = 0.0;
    bool mean_within_3se = true; // advisory, never fatal
};

struct StatReport {
    std::vector<FunctionStats> fn;
    double covariance = 0.0, se_cov = 0.0, predicted_cov = 0.0;
    double mu_star = 0.0; // may be +inf
    double ks_stat = 0.0; // first statistic
    std::map<int, WickCheckResult> wick; // n = 3, 4
    int failed_samples = 0;
    // per-sample statistic values in sample order, one row per function;
    // failed samples hold NaN and are excluded from the moments
    std::vector<std::vector<double>> values;
    double sweep_value = 0.0; // sigma or t for sweep rows; else unused
};

StatReport run_clt(const ExperimentConfig& cfg);
std::vector<StatReport> run_transition_sweep(const ExperimentConfig& cfg);
std::vector<StatReport> run_dbm_sweep(const ExperimentConfig& cfg);

// sample_index,statistic_f[,statistic_g] with %.17g values, sample order.
void write_report_csv(const std::string& path, const StatReport& rep);

nlohmann::json report_json(const ExperimentConfig& cfg, const StatReport& rep);

void to_json(nlohmann::json& j, const ExperimentConfig& cfg);
void from_json(const nlohmann::json& j, ExperimentConfig& cfg);

// Caps BLAS at one thread; called by every entry point above so worker
// parallelism stays the only concurrency and timings stay reproducible.
void pin_blas_single_thread();

} // namespace mesormt
