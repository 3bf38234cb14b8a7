#include "mesormt/harness.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <limits>
#include <mutex>
#include <thread>

#include "json.hpp"

#include "mesormt/errors.hpp"
#include "mesormt/linear_stats.hpp"
#include "mesormt/quadrature.hpp"
#include "mesormt/rng.hpp"
#include "mesormt/test_functions.hpp"
#include "mesormt/variance_kernel.hpp"

extern "C" void openblas_set_num_threads(int);

namespace mesormt {

using json = nlohmann::json;

void pin_blas_single_thread() {
    static std::once_flag flag;
    std::call_once(flag, [] { openblas_set_num_threads(1); });
}

void ExperimentConfig::validate() const {
    ensemble.validate();
    window.validate();
    if (ensemble.N != window.N)
        throw ParameterError("ensemble and window disagree about N");
    if (samples < 2) throw ParameterError("need at least 2 samples");
    if (functions.empty() || functions.size() > 2)
        throw ParameterError("need 1 or 2 test functions");
    for (const auto& name : functions) builtin(name); // throws on unknown
    if (workers < 1) throw ParameterError("workers must be >= 1");
    switch (sweep.kind) {
        case SweepSpec::Kind::none:
            break;
        case SweepSpec::Kind::sigma:
            if (sweep.values.empty()) throw ParameterError("empty sigma grid");
            for (double s : sweep.values)
                if (!(s >= -1.0 && s <= 1.0))
                    throw ParameterError("sweep sigma outside [-1, 1]");
            break;
        case SweepSpec::Kind::dbm_time:
            if (sweep.values.empty()) throw ParameterError("empty time grid");
            for (double t : sweep.values)
                if (std::isnan(t) || t < 0.0)
                    throw ParameterError("sweep time must be >= 0");
            if (sweep.beta != 1 && sweep.beta != 2)
                throw ParameterError("beta must be 1 or 2");
            break;
    }
}

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Runs body(i) for i in [0, M) on `workers` threads. Sample index, not
// worker identity, keys all randomness, so the partition is irrelevant.
void parallel_for(int M, int workers, const std::function<void(int)>& body) {
    workers = std::max(1, std::min(workers, M));
    if (workers == 1) {
        for (int i = 0; i < M; ++i) body(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr first_error;
    std::mutex error_guard;
    auto drain = [&] {
        for (;;) {
            int i = next.fetch_add(1);
            if (i >= M) return;
            try {
                body(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_guard);
                if (!first_error) first_error = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) pool.emplace_back(drain);
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

double pairwise_mean(std::span<const double> v) {
    return pairwise_sum(v) / double(v.size());
}

std::vector<double> clean_values(const std::vector<double>& v,
                                 const std::vector<uint8_t>& failed) {
    std::vector<double> out;
    out.reserve(v.size());
    for (size_t i = 0; i < v.size(); ++i)
        if (!failed[i]) out.push_back(v[i]);
    return out;
}

struct JackknifeStats {
    double var_se = 0.0, skew_se = 0.0, kurt_se = 0.0;
};

double jackknife_se(const std::vector<double>& theta) {
    const double n = double(theta.size());
    const double bar = pairwise_mean(theta);
    double acc = 0.0;
    for (double t : theta) acc += (t - bar) * (t - bar);
    return std::sqrt((n - 1.0) / n * acc);
}

// Leave-one-out second/third/fourth central moments from the total power
// sums; O(1) per left-out sample.
JackknifeStats jackknife_moments(const std::vector<double>& x) {
    const size_t n = x.size();
    double s[5] = {double(n), 0, 0, 0, 0};
    for (double v : x) {
        double p = v;
        for (int k = 1; k <= 4; ++k, p *= v) s[k] += p;
    }
    std::vector<double> jvar(n), jskew(n), jkurt(n);
    for (size_t i = 0; i < n; ++i) {
        double t[5];
        double p = x[i];
        t[0] = double(n) - 1.0;
        for (int k = 1; k <= 4; ++k, p *= x[i]) t[k] = s[k] - p;
        const double m = t[1] / t[0];
        const double mu2 = t[2] / t[0] - m * m;
        const double mu3 = (t[3] - 3.0 * m * t[2]) / t[0] + 2.0 * m * m * m;
        const double mu4 = (t[4] - 4.0 * m * t[3] + 6.0 * m * m * t[2]) / t[0] -
                           3.0 * m * m * m * m;
        jvar[i] = t[0] / (t[0] - 1.0) * mu2;
        jskew[i] = mu3 / std::pow(mu2, 1.5);
        jkurt[i] = mu4 / (mu2 * mu2) - 3.0;
    }
    JackknifeStats out;
    out.var_se = jackknife_se(jvar);
    out.skew_se = jackknife_se(jskew);
    out.kurt_se = jackknife_se(jkurt);
    return out;
}

double jackknife_cov_se(const std::vector<double>& x,
                        const std::vector<double>& y) {
    const size_t n = x.size();
    double sx = 0, sy = 0, sxy = 0;
    for (size_t i = 0; i < n; ++i) {
        sx += x[i];
        sy += y[i];
        sxy += x[i] * y[i];
    }
    std::vector<double> jcov(n);
    for (size_t i = 0; i < n; ++i) {
        const double m = double(n) - 1.0;
        const double ax = sx - x[i], ay = sy - y[i], axy = sxy - x[i] * y[i];
        jcov[i] = (axy - ax * ay / m) / (m - 1.0);
    }
    return jackknife_se(jcov);
}

// One grid point: how to draw sample i, which mu to predict with, and the
// sweep annotation.
struct RunTask {
    std::function<HermitianMatrix(int)> draw;
    double mu = 0.0;
    double sweep_value = 0.0;
};

StatReport run_core(const ExperimentConfig& cfg, const RunTask& task) {
    pin_blas_single_thread();
    const int M = cfg.samples;
    const size_t nf = cfg.functions.size();
    std::vector<const TestFunction*> fns;
    for (const auto& name : cfg.functions) fns.push_back(&builtin(name));

    StatReport rep;
    rep.sweep_value = task.sweep_value;
    rep.mu_star = task.mu;
    rep.values.assign(nf, std::vector<double>(M, kNaN));
    std::vector<uint8_t> failed(M, 0);

    parallel_for(M, cfg.workers, [&](int i) {
        try {
            HermitianMatrix H = task.draw(i);
            SpectrumSample spec = eigenvalues(H);
            for (size_t f = 0; f < nf; ++f)
                rep.values[f][i] = linear_statistic(spec, *fns[f], cfg.window);
        } catch (const NumericalError&) {
            failed[i] = 1;
        }
    });

    for (uint8_t f : failed) rep.failed_samples += f;
    if (rep.failed_samples * 100 > M)
        throw NumericalError("more than 1% of samples failed (" +
                                 std::to_string(rep.failed_samples) + " of " +
                                 std::to_string(M) + ")",
                             rep.failed_samples);

    // predictions at this grid point's mu
    KernelParams kp;
    kp.mu = task.mu;
    std::vector<double> predicted(nf);
    for (size_t f = 0; f < nf; ++f)
        predicted[f] = covariance(*fns[f], *fns[f], kp).value;
    if (nf == 2) rep.predicted_cov = covariance(*fns[0], *fns[1], kp).value;

    // moments through the accumulator's fixed merge tree
    std::vector<std::vector<double>> clean(nf);
    for (size_t f = 0; f < nf; ++f)
        clean[f] = clean_values(rep.values[f], failed);
    const size_t n = clean[0].size();
    if (n < 2) throw NumericalError("fewer than 2 usable samples", double(n));

    std::vector<SampleAccumulator> leaves;
    leaves.reserve(n);
    for (size_t i = 0; i < n; ++i) {
        SampleAccumulator leaf{int(nf)};
        if (nf == 1)
            leaf.add(clean[0][i]);
        else
            leaf.add(clean[0][i], clean[1][i]);
        leaves.push_back(leaf);
    }
    const SampleAccumulator acc = tree_merge(std::move(leaves));

    for (size_t f = 0; f < nf; ++f) {
        FunctionStats fs;
        fs.name = cfg.functions[f];
        fs.predicted_var = predicted[f];
        fs.mean = acc.mean(int(f));
        fs.var = acc.sample_variance(int(f));
        const double mu2 = acc.central_moment(int(f), 2);
        fs.skew = acc.central_moment(int(f), 3) / std::pow(mu2, 1.5);
        fs.ex_kurt = acc.central_moment(int(f), 4) / (mu2 * mu2) - 3.0;
        fs.se_mean = std::sqrt(fs.var / double(n));
        JackknifeStats js = jackknife_moments(clean[f]);
        fs.se_var = js.var_se;
        fs.se_skew = js.skew_se;
        fs.se_kurt = js.kurt_se;
        fs.mean_within_3se = std::abs(fs.mean) <= 3.0 * fs.se_mean;
        rep.fn.push_back(fs);
    }
    if (nf == 2) {
        rep.covariance = acc.sample_covariance();
        rep.se_cov = jackknife_cov_se(clean[0], clean[1]);
    }
    rep.ks_stat = ks_fitted_normal(clean[0]);
    if (clean[0].size() >= 100) // wick_check's own minimum
        for (int order : {3, 4})
            rep.wick.emplace(order, wick_check(clean[0], predicted[0], order));
    return rep;
}

ExperimentConfig with_seed(const ExperimentConfig& cfg) {
    ExperimentConfig out = cfg;
    out.ensemble.master_seed = cfg.seed;
    return out;
}

} // namespace

StatReport run_clt(const ExperimentConfig& cfg_in) {
    cfg_in.validate();
    if (cfg_in.sweep.kind != SweepSpec::Kind::none)
        throw ParameterError("plain run must not carry a sweep");
    const ExperimentConfig cfg = with_seed(cfg_in);
    RunTask task;
    task.draw = [&cfg](int i) {
        return sample_wigner(cfg.ensemble, uint64_t(i));
    };
    task.mu = mu_star(cfg.window.E, cfg.ensemble.sigma, cfg.window.eta,
                      MuStarMode::static_sigma);
    task.sweep_value = cfg.ensemble.sigma;
    return run_core(cfg, task);
}

std::vector<StatReport> run_transition_sweep(const ExperimentConfig& cfg_in) {
    cfg_in.validate();
    if (cfg_in.sweep.kind != SweepSpec::Kind::sigma)
        throw ParameterError("transition sweep needs a sigma grid");
    std::vector<StatReport> rows;
    for (double sigma : cfg_in.sweep.values) {
        ExperimentConfig cfg = with_seed(cfg_in);
        cfg.ensemble.sigma = sigma;
        cfg.sweep.kind = SweepSpec::Kind::none;
        RunTask task;
        task.draw = [cfg](int i) {
            return sample_wigner(cfg.ensemble, uint64_t(i));
        };
        task.mu = mu_star(cfg.window.E, sigma, cfg.window.eta,
                          MuStarMode::static_sigma);
        task.sweep_value = sigma;
        rows.push_back(run_core(cfg, task));
    }
    return rows;
}

std::vector<StatReport> run_dbm_sweep(const ExperimentConfig& cfg_in) {
    cfg_in.validate();
    if (cfg_in.sweep.kind != SweepSpec::Kind::dbm_time)
        throw ParameterError("time sweep needs a time grid");
    const int beta = cfg_in.sweep.beta;
    if (beta == 2 && cfg_in.ensemble.sigma != 1.0)
        throw ParameterError("beta=2 flow starts from a sigma=1 (real) law");
    if (beta == 1 && cfg_in.ensemble.sigma != 0.0)
        throw ParameterError("beta=1 flow starts from a sigma=0 law");

    std::vector<StatReport> rows;
    for (double t : cfg_in.sweep.values) {
        ExperimentConfig cfg = with_seed(cfg_in);
        cfg.sweep.kind = SweepSpec::Kind::none;
        RunTask task;
        task.draw = [cfg, t, beta](int i) {
            HermitianMatrix h0 = sample_wigner(cfg.ensemble, uint64_t(i));
            return dbm_matrix(h0, t, beta, uint64_t(i), cfg.seed);
        };
        task.mu = mu_star(cfg.window.E, t, cfg.window.eta,
                          beta == 2 ? MuStarMode::dbm_beta2
                                    : MuStarMode::dbm_beta1);
        task.sweep_value = t;
        rows.push_back(run_core(cfg, task));
    }
    return rows;
}

WickCheckResult wick_check(std::span<const double> samples, double V, int n) {
    if (n < 2 || n > 6)
        throw ParameterError("recursion order must be in 2..6");
    const int M = int(samples.size());
    if (M < 100) throw ParameterError("need at least 100 samples");

    auto gap_of = [n, V](std::span<const double> xs) {
        const double mean = pairwise_mean(xs);
        auto central = [&](int k) {
            if (k == 0) return 1.0;
            if (k == 1) return 0.0;
            double acc = 0.0;
            for (double x : xs) acc += std::pow(x - mean, k);
            return acc / double(xs.size());
        };
        const double lhs = central(n);
        const double rhs = (n - 1.0) * V * central(n - 2);
        return std::array<double, 3>{lhs, rhs, lhs - rhs};
    };

    WickCheckResult out;
    auto base = gap_of(samples);
    out.lhs = base[0];
    out.rhs = base[1];
    out.gap = base[2];

    // bootstrap SE of the gap, fixed internal seed
    const int B = 200;
    std::vector<double> gaps(B);
    std::vector<double> resample(M);
    for (int b = 0; b < B; ++b) {
        CounterRng rng(derive_key(0x9e3779b97f4a7c15ULL, 0xB007u, uint64_t(b),
                                  uint64_t(n)));
        for (int i = 0; i < M; ++i) {
            int idx = std::min(M - 1, int(rng.next_uniform() * M));
            resample[i] = samples[idx];
        }
        gaps[b] = gap_of(resample)[2];
    }
    const double gbar = pairwise_mean(gaps);
    double acc = 0.0;
    for (double g : gaps) acc += (g - gbar) * (g - gbar);
    out.se = std::sqrt(acc / (B - 1.0));
    return out;
}

double ks_fitted_normal(std::span<const double> samples) {
    const size_t n = samples.size();
    if (n < 2) throw ParameterError("KS needs at least 2 samples");
    std::vector<double> x(samples.begin(), samples.end());
    std::sort(x.begin(), x.end());
    const double mean = pairwise_mean(x);
    double ss = 0.0;
    for (double v : x) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / (double(n) - 1.0));
    if (!(sd > 0.0)) return 1.0;
    double d = 0.0;
    for (size_t i = 0; i < n; ++i) {
        const double phi = 0.5 * std::erfc(-(x[i] - mean) / (sd * M_SQRT2));
        d = std::max(d, std::abs(double(i + 1) / n - phi));
        d = std::max(d, std::abs(double(i) / n - phi));
    }
    return d;
}

double ks_critical_1pct(int M) {
    if (M < 2) throw ParameterError("KS critical value needs M >= 2");
    // asymptotic 1% point of the fitted-normal (Lilliefors) statistic
    return 1.031 / std::sqrt(double(M));
}

void write_report_csv(const std::string& path, const StatReport& rep) {
    FILE* out = std::fopen(path.c_str(), "wb");
    if (!out) throw ParameterError("cannot open output file: " + path);
    std::fputs("sample_index,statistic_f", out);
    if (rep.values.size() == 2) std::fputs(",statistic_g", out);
    std::fputc('\n', out);
    const size_t M = rep.values[0].size();
    for (size_t i = 0; i < M; ++i) {
        if (std::isnan(rep.values[0][i])) continue; // failed sample, logged
        std::fprintf(out, "%zu,%.17g", i, rep.values[0][i]);
        if (rep.values.size() == 2)
            std::fprintf(out, ",%.17g", rep.values[1][i]);
        std::fputc('\n', out);
    }
    std::fclose(out);
}

namespace {

json finite_or_inf(double v) {
    if (std::isinf(v)) return "inf";
    return v;
}

} // namespace

json report_json(const ExperimentConfig& cfg, const StatReport& rep) {
    json j;
    j["config_echo"] = cfg;
    j["mu_star"] = finite_or_inf(rep.mu_star);
    j["sweep_value"] = finite_or_inf(rep.sweep_value);
    json pv = json::array();
    for (const auto& f : rep.fn) pv.push_back(f.predicted_var);
    j["predicted_variance"] = pv;
    json emp, se;
    for (const char* key : {"mean", "var", "skew", "kurt"}) {
        emp[key] = json::array();
        se[key] = json::array();
    }
    json flags = json::array();
    for (const auto& f : rep.fn) {
        emp["mean"].push_back(f.mean);
        emp["var"].push_back(f.var);
        emp["skew"].push_back(f.skew);
        emp["kurt"].push_back(f.ex_kurt);
        se["mean"].push_back(f.se_mean);
        se["var"].push_back(f.se_var);
        se["skew"].push_back(f.se_skew);
        se["kurt"].push_back(f.se_kurt);
        flags.push_back(f.mean_within_3se);
    }
    if (rep.fn.size() == 2) {
        j["predicted_covariance"] = rep.predicted_cov;
        emp["cov"] = rep.covariance;
        se["cov"] = rep.se_cov;
    }
    j["empirical"] = emp;
    j["se"] = se;
    j["mean_within_3se"] = flags;
    j["ks_stat"] = rep.ks_stat;
    json wick;
    for (const auto& [order, w] : rep.wick)
        wick[std::to_string(order)] = {
            {"lhs", w.lhs}, {"rhs", w.rhs}, {"gap", w.gap}, {"se", w.se}};
    j["wick"] = wick;
    j["failed_samples"] = rep.failed_samples;
    return j;
}

void to_json(json& j, const ExperimentConfig& cfg) {
    j = json{{"ensemble", cfg.ensemble},
             {"window", {{"E", cfg.window.E}, {"eta", cfg.window.eta}}},
             {"functions", cfg.functions},
             {"samples", cfg.samples},
             {"seed", cfg.seed},
             {"workers", cfg.workers},
             {"output_path", cfg.output_path}};
    if (cfg.sweep.kind != SweepSpec::Kind::none) {
        json values = json::array();
        for (double v : cfg.sweep.values) values.push_back(finite_or_inf(v));
        json sw{{"kind", cfg.sweep.kind == SweepSpec::Kind::sigma
                             ? "sigma"
                             : "dbm_time"},
                {"values", values}};
        if (cfg.sweep.kind == SweepSpec::Kind::dbm_time)
            sw["beta"] = cfg.sweep.beta;
        j["sweep"] = sw;
    }
}

void from_json(const json& j, ExperimentConfig& cfg) {
    j.at("ensemble").get_to(cfg.ensemble);
    const json& w = j.at("window");
    const double E = w.at("E").get<double>();
    if (w.contains("eta"))
        cfg.window = MesoWindow::from_eta(E, w.at("eta").get<double>(),
                                          cfg.ensemble.N);
    else
        cfg.window = MesoWindow::from_alpha(E, w.at("alpha").get<double>(),
                                            cfg.ensemble.N);
    j.at("functions").get_to(cfg.functions);
    j.at("samples").get_to(cfg.samples);
    cfg.seed = j.value("seed", uint64_t(0));
    cfg.workers = j.value("workers", 1);
    cfg.output_path = j.value("output_path", std::string());
    cfg.sweep = SweepSpec{};
    if (j.contains("sweep")) {
        const json& sw = j.at("sweep");
        const std::string kind = sw.at("kind").get<std::string>();
        if (kind == "sigma")
            cfg.sweep.kind = SweepSpec::Kind::sigma;
        else if (kind == "dbm_time")
            cfg.sweep.kind = SweepSpec::Kind::dbm_time;
        else
            throw ParameterError("unknown sweep kind: " + kind);
        for (const json& v : sw.at("values")) {
            if (v.is_string()) {
                if (v.get<std::string>() != "inf")
                    throw ParameterError("sweep values must be numbers or \"inf\"");
                cfg.sweep.values.push_back(
                    std::numeric_limits<double>::infinity());
            } else {
                cfg.sweep.values.push_back(v.get<double>());
            }
        }
        cfg.sweep.beta = sw.value("beta", 2);
    }
}

} // namespace mesormt
