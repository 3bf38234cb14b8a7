#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "mesormt/errors.hpp"
#include "mesormt/harness.hpp"
#include "mesormt/rng.hpp"

using namespace mesormt;

namespace {

const double kInf = std::numeric_limits<double>::infinity();

std::vector<double> normal_draws(int n, double mean, double sd, uint64_t key) {
    CounterRng rng(key);
    std::vector<double> v(n);
    for (double& x : v) x = mean + sd * rng.next_normal_pair().first;
    return v;
}

ExperimentConfig tiny_config() {
    ExperimentConfig cfg;
    cfg.ensemble.N = 50;
    cfg.ensemble.sigma = 0.0;
    cfg.window = MesoWindow::from_alpha(0.0, 0.4, 50);
    cfg.functions = {"gauss"};
    cfg.samples = 24;
    cfg.seed = 5;
    cfg.workers = 1;
    return cfg;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

TEST_SUITE("harness") {

TEST_CASE("wick recursion accepts normal data and rejects skewed data") {
    std::vector<double> normal = normal_draws(4000, 0.0, 1.3, 99);
    const double V = 1.3 * 1.3;
    for (int order : {3, 4}) {
        WickCheckResult r = wick_check(normal, V, order);
        INFO("order ", order, " gap ", r.gap, " se ", r.se);
        CHECK(r.se > 0.0);
        CHECK(std::abs(r.gap) < 4.0 * r.se);
        CHECK(r.gap == r.lhs - r.rhs);
    }

    // exponential data: third central moment 2, wick value 0
    CounterRng rng(7);
    std::vector<double> expo(4000);
    for (double& x : expo) x = -std::log(rng.next_uniform());
    WickCheckResult bad = wick_check(expo, 1.0, 3);
    CHECK(std::abs(bad.gap) > 4.0 * bad.se);

    // n = 2 is the plain variance identity: lhs is the sample variance
    WickCheckResult base = wick_check(normal, V, 2);
    CHECK(base.rhs == V);
    CHECK(std::abs(base.gap) < 4.0 * base.se);

    CHECK_THROWS_AS(wick_check(normal, V, 1), ParameterError);
    CHECK_THROWS_AS(wick_check(normal, V, 7), ParameterError);
    std::vector<double> few(normal.begin(), normal.begin() + 50);
    CHECK_THROWS_AS(wick_check(few, V, 3), ParameterError);

    // fixed bootstrap seed: byte-stable standard errors
    CHECK(wick_check(normal, V, 3).se == wick_check(normal, V, 3).se);
}

TEST_CASE("ks distance separates normal from uniform samples") {
    std::vector<double> normal = normal_draws(2000, 0.4, 2.0, 31);
    CHECK(ks_fitted_normal(normal) < ks_critical_1pct(2000));

    CounterRng rng(8);
    std::vector<double> uni(2000);
    for (double& x : uni) x = rng.next_uniform();
    CHECK(ks_fitted_normal(uni) > ks_critical_1pct(2000));

    CHECK(ks_critical_1pct(400) == doctest::Approx(1.031 / 20.0).epsilon(1e-12));
}

TEST_CASE("config json round trip keeps sweep grids and windows") {
    ExperimentConfig cfg = tiny_config();
    cfg.sweep.kind = SweepSpec::Kind::dbm_time;
    cfg.sweep.values = {0.1, 1.0, kInf};
    cfg.sweep.beta = 2;
    cfg.ensemble.sigma = 1.0;
    cfg.output_path = "somewhere";
    cfg.workers = 4;

    nlohmann::json j = cfg;
    CHECK(j.at("sweep").at("values")[2] == "inf");
    ExperimentConfig back = j.get<ExperimentConfig>();
    CHECK(back.ensemble.N == cfg.ensemble.N);
    CHECK(back.window.eta == doctest::Approx(cfg.window.eta).epsilon(1e-15));
    CHECK(back.sweep.kind == SweepSpec::Kind::dbm_time);
    REQUIRE(back.sweep.values.size() == 3);
    CHECK(back.sweep.values[1] == 1.0);
    CHECK(std::isinf(back.sweep.values[2]));
    CHECK(back.workers == 4);
    CHECK(back.output_path == "somewhere");
}

TEST_CASE("config validation rejects inconsistent runs") {
    ExperimentConfig cfg = tiny_config();
    CHECK_NOTHROW(cfg.validate());

    ExperimentConfig bad = cfg;
    bad.window.N = 49; // must match the ensemble dimension
    CHECK_THROWS_AS(bad.validate(), ParameterError);

    bad = cfg;
    bad.functions = {};
    CHECK_THROWS_AS(bad.validate(), ParameterError);
    bad.functions = {"gauss", "poisson", "bump"};
    CHECK_THROWS_AS(bad.validate(), ParameterError);
    bad.functions = {"unknown"};
    CHECK_THROWS_AS(bad.validate(), ParameterError);

    bad = cfg;
    bad.samples = 1;
    CHECK_THROWS_AS(bad.validate(), ParameterError);

    bad = cfg;
    bad.sweep.kind = SweepSpec::Kind::sigma;
    bad.sweep.values = {0.0, 1.5};
    CHECK_THROWS_AS(bad.validate(), ParameterError);

    bad = cfg;
    bad.sweep.kind = SweepSpec::Kind::dbm_time;
    bad.sweep.values = {0.5};
    bad.sweep.beta = 3;
    CHECK_THROWS_AS(bad.validate(), ParameterError);
}

TEST_CASE("clt run produces a complete, reproducible report") {
    ExperimentConfig cfg = tiny_config();
    StatReport rep = run_clt(cfg);

    REQUIRE(rep.fn.size() == 1);
    REQUIRE(rep.values.size() == 1);
    REQUIRE(int(rep.values[0].size()) == cfg.samples);
    CHECK(rep.failed_samples == 0);
    for (double v : rep.values[0]) CHECK(std::isfinite(v));
    CHECK(rep.fn[0].predicted_var > 0.0);
    CHECK(rep.fn[0].var > 0.0);
    CHECK(rep.fn[0].se_var > 0.0);
    CHECK(rep.mu_star == doctest::Approx(2.0 / cfg.window.eta).epsilon(1e-12));
    CHECK(rep.wick.empty()); // below the 100-sample minimum

    // a second identical run is bitwise identical
    StatReport again = run_clt(cfg);
    CHECK(again.values[0] == rep.values[0]);

    // worker count must not change anything
    ExperimentConfig par = cfg;
    par.workers = 3;
    StatReport rep3 = run_clt(par);
    CHECK(rep3.values[0] == rep.values[0]);
    CHECK(rep3.fn[0].var == rep.fn[0].var);

    // two statistics fill the covariance block
    ExperimentConfig two = cfg;
    two.functions = {"gauss", "poisson"};
    StatReport rep2 = run_clt(two);
    REQUIRE(rep2.values.size() == 2);
    CHECK(rep2.se_cov > 0.0);
    CHECK(rep2.predicted_cov != 0.0);

    // sweeps are rejected on the single-run entry point
    ExperimentConfig sw = cfg;
    sw.sweep.kind = SweepSpec::Kind::sigma;
    sw.sweep.values = {0.0, 0.5};
    CHECK_THROWS_AS(run_clt(sw), ParameterError);
}

TEST_CASE("sigma sweep shares draws across the grid") {
    ExperimentConfig cfg = tiny_config();
    cfg.sweep.kind = SweepSpec::Kind::sigma;
    cfg.sweep.values = {1.0, 0.5};
    std::vector<StatReport> rows = run_transition_sweep(cfg);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].sweep_value == 1.0);
    CHECK(rows[1].sweep_value == 0.5);
    for (const auto& r : rows) {
        CHECK(int(r.values[0].size()) == cfg.samples);
        CHECK(r.fn[0].predicted_var > 0.0);
    }
    // same sample index, different sigma: correlated but not equal values
    CHECK(rows[0].values[0][0] != rows[1].values[0][0]);
}

TEST_CASE("time sweep validates the class pairing") {
    ExperimentConfig cfg = tiny_config();
    cfg.ensemble.sigma = 1.0;
    cfg.sweep.kind = SweepSpec::Kind::dbm_time;
    cfg.sweep.values = {0.2, kInf};
    cfg.sweep.beta = 2;
    std::vector<StatReport> rows = run_dbm_sweep(cfg);
    REQUIRE(rows.size() == 2);
    CHECK(std::isinf(rows[1].mu_star));
    CHECK(rows[1].sweep_value == kInf);

    // beta=2 flow must start from the orthogonal class
    ExperimentConfig bad = cfg;
    bad.ensemble.sigma = 0.5;
    CHECK_THROWS_AS(run_dbm_sweep(bad), ParameterError);
    // beta=1 flow starts from the unitary class
    bad.sweep.beta = 1;
    CHECK_THROWS_AS(run_dbm_sweep(bad), ParameterError);
    bad.ensemble.sigma = 0.0;
    CHECK_NOTHROW(run_dbm_sweep(bad));
}

TEST_CASE("csv writer is byte-stable and json report is complete") {
    ExperimentConfig cfg = tiny_config();
    cfg.functions = {"gauss", "poisson"};
    StatReport rep = run_clt(cfg);

    const std::string path = "harness_test_out.csv";
    write_report_csv(path, rep);
    std::string first = slurp(path);
    write_report_csv(path, rep);
    CHECK(first == slurp(path));
    CHECK(first.rfind("sample_index,statistic_f,statistic_g\n", 0) == 0);
    int lines = 0;
    for (char c : first) lines += c == '\n';
    CHECK(lines == cfg.samples + 1);
    std::remove(path.c_str());

    nlohmann::json j = report_json(cfg, rep);
    CHECK(j.contains("config_echo"));
    CHECK(j.contains("empirical"));
    CHECK(j.contains("predicted_variance"));
    CHECK(j.at("failed_samples") == 0);
    CHECK(j.at("empirical").at("var").size() == 2);
    CHECK(j.at("empirical").contains("cov"));

    // infinite transition parameter serializes as a string
    StatReport inf_rep = rep;
    inf_rep.mu_star = kInf;
    CHECK(report_json(cfg, inf_rep).at("mu_star") == "inf");
}

} // TEST_SUITE
