// Command-line driver: Monte Carlo runs, predicted-variance evaluation,
// resolvent diagnostics, and the self-check batteries for the cumulant and
// contour identities. Exit codes: 0 completed, 2 parameter error, 3
// numerical failure.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "mesormt/contour.hpp"
#include "mesormt/cumulants.hpp"
#include "mesormt/ensembles.hpp"
#include "mesormt/errors.hpp"
#include "mesormt/harness.hpp"
#include "mesormt/linear_stats.hpp"
#include "mesormt/resolvent.hpp"
#include "mesormt/test_functions.hpp"
#include "mesormt/variance_kernel.hpp"

using json = nlohmann::json;
using namespace mesormt;

namespace {

double parse_extended(const std::string& s, const char* what) {
    if (s == "inf" || s == "+inf")
        return std::numeric_limits<double>::infinity();
    try {
        size_t used = 0;
        double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ParameterError(std::string(what) + ": expected a number or inf, got '" + s + "'");
    }
}

std::vector<double> parse_grid(const std::vector<std::string>& items,
                               const char* what) {
    std::vector<double> out;
    for (const auto& s : items) out.push_back(parse_extended(s, what));
    return out;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParameterError("cannot open output file: " + path);
    out << text;
}

struct CommonArgs {
    std::string config_path;
    std::optional<uint64_t> seed;
    std::optional<int> workers;
    std::string out_path;
};

// Builds the experiment config from --config plus flag overrides.
struct RunArgs {
    CommonArgs common;
    int N = 200;
    double sigma = 0.0;
    std::optional<double> eta;
    double alpha = 0.5;
    double E = 0.0;
    std::string law = "gaussian";
    double zeta = -1.0;
    std::vector<std::string> functions{"gauss"};
    int samples = 100;

    ExperimentConfig build() const {
        ExperimentConfig cfg;
        if (!common.config_path.empty()) {
            std::ifstream in(common.config_path);
            if (!in)
                throw ParameterError("cannot read config: " + common.config_path);
            json j = json::parse(in);
            cfg = j.get<ExperimentConfig>();
        } else {
            cfg.ensemble.N = N;
            cfg.ensemble.sigma = sigma;
            cfg.ensemble.entry_law = entry_law_from_string(law);
            cfg.ensemble.diag_second_moment = zeta;
            cfg.window = eta ? MesoWindow::from_eta(E, *eta, N)
                             : MesoWindow::from_alpha(E, alpha, N);
            cfg.functions = functions;
            cfg.samples = samples;
        }
        if (common.seed) cfg.seed = *common.seed;
        if (common.workers) cfg.workers = *common.workers;
        if (!common.out_path.empty()) cfg.output_path = common.out_path;
        if (cfg.output_path.empty()) cfg.output_path = "run";
        return cfg;
    }
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path,
                    "JSON config file (flags override)");
    cmd->add_option("--seed", args.seed, "master seed");
    cmd->add_option("--workers", args.workers, "sampling threads")
        ->envname("MESORMT_WORKERS");
    cmd->add_option("--out", args.out_path, "output base path");
}

void add_run_flags(CLI::App* cmd, RunArgs& args) {
    add_common(cmd, args.common);
    cmd->add_option("--N", args.N, "matrix dimension");
    cmd->add_option("--sigma", args.sigma, "symmetry parameter");
    cmd->add_option("--eta", args.eta, "window width");
    cmd->add_option("--alpha", args.alpha, "window exponent, eta = N^-alpha");
    cmd->add_option("--E", args.E, "window center");
    cmd->add_option("--law", args.law, "entry law: gaussian|rademacher_mix|uniform");
    cmd->add_option("--zeta", args.zeta, "diagonal second moment (default 1+sigma)");
    cmd->add_option("--functions", args.functions, "1 or 2 catalog names")
        ->delimiter(',');
    cmd->add_option("--samples", args.samples, "Monte Carlo samples");
}

void emit_report(const ExperimentConfig& cfg, const StatReport& rep) {
    write_report_csv(cfg.output_path + ".csv", rep);
    json j = report_json(cfg, rep);
    write_text(cfg.output_path + ".json", j.dump(2) + "\n");
    std::cout << j.dump(2) << "\n";
}

void emit_sweep(const ExperimentConfig& cfg,
                const std::vector<StatReport>& rows) {
    json arr = json::array();
    for (size_t i = 0; i < rows.size(); ++i) {
        write_report_csv(cfg.output_path + "_" + std::to_string(i) + ".csv",
                         rows[i]);
        arr.push_back(report_json(cfg, rows[i]));
    }
    json j{{"rows", arr}};
    write_text(cfg.output_path + ".json", j.dump(2) + "\n");
    std::cout << j.dump(2) << "\n";
}

int cmd_variance(const std::string& f_name, const std::string& g_name,
                 const std::string& mu_text, const std::string& kernel,
                 const std::string& out_path) {
    KernelParams p;
    p.mu = parse_extended(mu_text, "--mu");
    const TestFunction& f = builtin(f_name);
    CovarianceResult r;
    if (kernel == "interp")
        r = covariance(f, builtin(g_name.empty() ? f_name : g_name), p);
    else if (kernel == "alt")
        r = covariance_alt(f, p);
    else if (kernel == "comparison")
        r = comparison_covariance(f, p);
    else
        throw ParameterError("unknown kernel: " + kernel);
    json j{{"f", f_name},
           {"g", g_name.empty() ? f_name : g_name},
           {"mu", std::isinf(p.mu) ? json("inf") : json(p.mu)},
           {"kernel", kernel},
           {"value", r.value},
           {"est_error", r.est_error}};
    std::cout << j.dump(2) << "\n";
    if (!out_path.empty()) write_text(out_path, j.dump(2) + "\n");
    return 0;
}

int cmd_diagnose(int N, double sigma, double alpha, double E, double Eprime,
                 int samples, std::vector<std::string> checks,
                 const CommonArgs& common) {
    pin_blas_single_thread();
    if (checks.empty()) checks = {"local_law", "powers", "products"};
    const double eta = std::pow(double(N), -alpha);
    const cplx z(E, eta), zp(Eprime, eta);
    EnsembleSpec spec;
    spec.N = N;
    spec.sigma = sigma;
    spec.master_seed = common.seed.value_or(0);

    const bool want_local =
        std::count(checks.begin(), checks.end(), "local_law") > 0;
    const bool want_powers =
        std::count(checks.begin(), checks.end(), "powers") > 0;
    const bool want_products =
        std::count(checks.begin(), checks.end(), "products") > 0;

    std::string csv = "sample_index,check,value,control,ratio\n";
    char line[256];

    // raw product traces per sample; bound rows need batch centering
    const std::vector<ProductKind> kinds = {
        ProductKind::G2Fbar, ProductKind::GFbar,  ProductKind::GFt,
        ProductKind::G2Ft,   ProductKind::G2F,    ProductKind::G2Fstar};
    std::vector<std::vector<ProductTraceResult>> traces(samples);

    for (int i = 0; i < samples; ++i) {
        HermitianMatrix H = sample_wigner(spec, uint64_t(i));
        Eigensystem es = eigensystem(H);
        auto append = [&](const DiagnosticsReport& rep) {
            for (const auto& row : rep.rows) {
                std::snprintf(line, sizeof line, "%d,%s,%.17g,%.17g,%.17g\n",
                              i, row.label.c_str(), row.value, row.control,
                              row.ratio);
                csv += line;
            }
        };
        if (want_local) append(local_law_residuals(es, z));
        if (want_powers)
            for (int k = 1; k <= 3; ++k)
                append(power_trace_bound_check(es, z, k));
        if (want_products) {
            ResolventProducts rp(std::move(es));
            for (ProductKind kind : kinds)
                traces[i].push_back(
                    rp.trace_vs_prediction(z, zp, kind, sigma));
        }
    }

    if (want_products && samples > 0) {
        for (size_t k = 0; k < kinds.size(); ++k) {
            cplx mean = 0.0;
            for (int i = 0; i < samples; ++i) mean += traces[i][k].empirical;
            mean /= double(samples);
            for (int i = 0; i < samples; ++i) {
                const ProductTraceResult& t = traces[i][k];
                double value;
                if (t.predicted)
                    value = std::abs(t.empirical - *t.predicted);
                else if (t.centered_bound)
                    value = std::abs(t.empirical - mean);
                else
                    value = std::abs(t.empirical);
                std::snprintf(line, sizeof line, "%d,%s,%.17g,%.17g,%.17g\n",
                              i, product_kind_name(t.kind), value, t.scale,
                              value / t.scale);
                csv += line;
            }
        }
    }
    std::cout << csv;
    if (!common.out_path.empty()) write_text(common.out_path, csv);
    return 0;
}

int cmd_verify_cumulants(const std::string& out_path) {
    json checks = json::array();
    auto push = [&checks](const std::string& name, double gap, double tol) {
        checks.push_back({{"check", name},
                          {"gap", gap},
                          {"tolerance", tol},
                          {"pass", gap <= tol}});
    };

    // complex Gaussian: C11 = 1, C20 = 0, all higher cumulants vanish
    {
        GaussianLaw gl{0.5, 0.5};
        CumulantTable c = moments_to_cumulants(law_moments(gl, 6));
        double worst = std::abs(c.at(1, 1) - 1.0) + std::abs(c.at(2, 0));
        for (int p = 0; p <= 6; ++p)
            for (int q = 0; p + q <= 6; ++q)
                if (p + q >= 3) worst = std::max(worst, std::abs(c.at(p, q)));
        push("gaussian_cumulants", worst, 1e-10);
    }
    // symmetric +-1 variable: C20 = C11 = 1, fourth cumulant -2
    {
        DiscreteLaw rad{{{cplx(1, 0), 0.5}, {cplx(-1, 0), 0.5}}};
        CumulantTable c = moments_to_cumulants(law_moments(rad, 4));
        double worst = std::abs(c.at(2, 0) - 1.0) + std::abs(c.at(1, 1) - 1.0) +
                       std::abs(c.at(2, 2) - (-2.0));
        push("rademacher_fourth_cumulant", worst, 0.0);
    }
    // round trip on a genuinely complex law
    {
        DiscreteLaw law{{{cplx(0.3, 0.4), 0.25},
                         {cplx(-0.5, 0.1), 0.35},
                         {cplx(0.1, -0.6), 0.4}}};
        MomentTable m = law_moments(law, 6);
        MomentTable back = cumulants_to_moments(moments_to_cumulants(m));
        double worst = 0.0;
        for (int p = 0; p <= 6; ++p)
            for (int q = 0; p + q <= 6; ++q)
                worst = std::max(worst, std::abs(m.at(p, q) - back.at(p, q)));
        push("round_trip_order6", worst, 1e-12);
    }
    // expansion identities on a 3-point complex law, increasing order
    {
        DiscreteLaw law{{{cplx(0.6, 0.2), 0.3},
                         {cplx(-0.4, 0.5), 0.3},
                         {cplx(-0.15, -0.525), 0.4}}};
        WirtingerFunction f = z_polynomial(
            {{cplx(0.2, 0), cplx(1, 0.5)}, {cplx(0, 1), cplx(0.7, 0)}});
        for (int ell : {1, 2, 3, 4}) {
            auto std_r = expansion_check(f, law, ell, ExpansionMode::standard);
            auto im_r = expansion_check(f, law, ell, ExpansionMode::imaginary);
            push("expansion_standard_ell" + std::to_string(ell), std_r.gap,
                 ell >= 3 ? 1e-12 : 1.0);
            push("expansion_imaginary_ell" + std::to_string(ell), im_r.gap,
                 ell >= 3 ? 1e-12 : 1.0);
        }
    }
    // real law, imaginary mode: exactly zero on both sides
    {
        DiscreteLaw real_law{{{cplx(1, 0), 0.5}, {cplx(-1, 0), 0.5}}};
        WirtingerFunction f = z_polynomial({{cplx(1, 0), cplx(0.3, 0)},
                                            {cplx(0.5, 0), cplx(0.2, 0)}});
        auto r = expansion_check(f, real_law, 3, ExpansionMode::imaginary);
        push("real_law_imaginary_zero",
             std::abs(r.lhs) + std::abs(r.rhs), 0.0);
    }
    // entry cumulant closed forms vs an empirical table
    {
        EnsembleSpec spec;
        spec.N = 50;
        spec.sigma = 0.5;
        spec.master_seed = 7;
        EntryCumulantPrediction pred = entry_cumulant_predictions(0.5, 50);
        EntryMomentReport emp = entry_moment_report(spec, 400);
        double scale = double(spec.N);
        double gap = std::abs(emp.e_sq.real() - emp.e_abs2 -
                              scale * pred.c20_minus_c11) /
                     (3.0 * (emp.se_sq + emp.se_abs2) + 1e-300);
        push("entry_c20_minus_c11_zscore_over3", gap, 1.0);
    }

    json j{{"identity_checks", checks}};
    std::cout << j.dump(2) << "\n";
    if (!out_path.empty()) write_text(out_path, j.dump(2) + "\n");
    bool all = true;
    for (const auto& c : checks) all = all && c.at("pass").get<bool>();
    return all ? 0 : 3;
}

int cmd_verify_cauchy(const std::string& out_path) {
    std::string csv = "function,lambda,a,k,resolution,error,boundary,area\n";
    char line[256];
    for (const char* name : {"gauss", "bump", "poisson"}) {
        const TestFunction& f = builtin(name);
        for (double lambda : {-1.0, 0.0, 0.7}) {
            for (double a : {0.05, 0.2}) {
                for (int k : {1, 2, 3}) {
                    for (int res : {1, 2, 4}) {
                        CauchyReconstruction r =
                            cauchy_reconstruct(f, lambda, a, k, res);
                        double err = std::abs(r.value - f.eval(lambda));
                        std::snprintf(line, sizeof line,
                                      "%s,%g,%g,%d,%d,%.17g,%.17g,%.17g\n",
                                      name, lambda, a, k, res, err, r.boundary,
                                      r.area);
                        csv += line;
                    }
                }
            }
        }
    }
    std::cout << csv;
    if (!out_path.empty()) write_text(out_path, csv);
    return 0;
}

int cmd_sample_stats(int N, double sigma, const std::string& law, double zeta,
                     int samples, std::optional<double> dbm_t, int beta,
                     const CommonArgs& common) {
    EnsembleSpec spec;
    spec.N = N;
    spec.sigma = sigma;
    spec.entry_law = entry_law_from_string(law);
    spec.diag_second_moment = zeta;
    spec.master_seed = common.seed.value_or(0);

    json j;
    if (dbm_t) {
        EntryMomentReport rep =
            dbm_entry_moment_report(spec, *dbm_t, beta, samples);
        j = json{{"t", *dbm_t},
                 {"beta", beta},
                 {"entry_count", rep.entry_count},
                 {"e_abs2", rep.e_abs2},
                 {"se_abs2", rep.se_abs2},
                 {"e_sq_re", rep.e_sq.real()},
                 {"e_sq_im", rep.e_sq.imag()},
                 {"se_sq", rep.se_sq}};
    } else {
        EntryMomentReport rep = entry_moment_report(spec, samples);
        j = json{{"entry_count", rep.entry_count},
                 {"e_abs2", rep.e_abs2},
                 {"se_abs2", rep.se_abs2},
                 {"e_sq_re", rep.e_sq.real()},
                 {"e_sq_im", rep.e_sq.imag()},
                 {"se_sq", rep.se_sq},
                 {"e_abs_p", rep.e_abs_p},
                 {"se_abs_p", rep.se_abs_p}};
    }
    j["config"] = spec;
    std::cout << j.dump(2) << "\n";
    if (!common.out_path.empty()) write_text(common.out_path, j.dump(2) + "\n");
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"mesoscopic linear-statistics toolkit"};
    app.require_subcommand(1);

    RunArgs clt_args;
    CLI::App* clt = app.add_subcommand("clt", "single CLT run");
    add_run_flags(clt, clt_args);

    RunArgs ssig_args;
    std::vector<std::string> sigma_grid;
    CLI::App* ssig = app.add_subcommand("sweep-sigma", "sigma transition sweep");
    add_run_flags(ssig, ssig_args);
    ssig->add_option("--values", sigma_grid, "sigma grid")->delimiter(',');

    RunArgs sdbm_args;
    std::vector<std::string> t_grid;
    int dbm_beta = 2;
    CLI::App* sdbm = app.add_subcommand("sweep-dbm", "relaxation time sweep");
    add_run_flags(sdbm, sdbm_args);
    sdbm->add_option("--values", t_grid, "time grid (inf allowed)")
        ->delimiter(',');
    sdbm->add_option("--beta", dbm_beta, "target ensemble class: 1 or 2");

    std::string var_f = "gauss", var_g, var_mu = "0", var_kernel = "interp",
                var_out;
    CLI::App* var = app.add_subcommand("variance", "predicted covariance");
    var->add_option("--f", var_f, "first function");
    var->add_option("--g", var_g, "second function (defaults to --f)");
    var->add_option("--mu", var_mu, "kernel parameter (number or inf)");
    var->add_option("--kernel", var_kernel, "interp|alt|comparison");
    var->add_option("--out", var_out, "also write JSON here");

    CommonArgs diag_common;
    int diag_N = 300, diag_samples = 5;
    double diag_sigma = 0.0, diag_alpha = 0.5, diag_E = 0.0, diag_Ep = 0.0;
    std::vector<std::string> diag_checks;
    CLI::App* diag = app.add_subcommand("diagnose", "resolvent residual table");
    add_common(diag, diag_common);
    diag->add_option("--N", diag_N, "matrix dimension");
    diag->add_option("--sigma", diag_sigma, "symmetry parameter");
    diag->add_option("--alpha", diag_alpha, "eta = N^-alpha");
    diag->add_option("--E", diag_E, "first spectral point");
    diag->add_option("--Eprime", diag_Ep, "second spectral point");
    diag->add_option("--samples", diag_samples, "matrices to draw");
    diag->add_option("--checks", diag_checks,
                     "subset of local_law,powers,products")
        ->delimiter(',');

    CLI::App* verify = app.add_subcommand("verify", "identity self-checks");
    verify->require_subcommand(1);
    std::string vcum_out, vcau_out;
    CLI::App* vcum = verify->add_subcommand("cumulants", "cumulant identities");
    vcum->add_option("--out", vcum_out, "also write JSON here");
    CLI::App* vcau = verify->add_subcommand("cauchy", "reconstruction battery");
    vcau->add_option("--out", vcau_out, "also write CSV here");

    CommonArgs stats_common;
    int stats_N = 200, stats_samples = 100, stats_beta = 2;
    double stats_sigma = 0.0, stats_zeta = -1.0;
    std::string stats_law = "gaussian";
    std::optional<double> stats_dbm_t;
    CLI::App* stats = app.add_subcommand("sample-stats", "entry moment table");
    add_common(stats, stats_common);
    stats->add_option("--N", stats_N, "matrix dimension");
    stats->add_option("--sigma", stats_sigma, "symmetry parameter");
    stats->add_option("--law", stats_law, "entry law");
    stats->add_option("--zeta", stats_zeta, "diagonal second moment");
    stats->add_option("--samples", stats_samples, "matrices to draw");
    stats->add_option("--dbm-t", stats_dbm_t,
                      "report the interpolated matrix at this time");
    stats->add_option("--beta", stats_beta, "interpolation class: 1 or 2");

    try {
        app.parse(argc, argv);

        if (clt->parsed()) {
            ExperimentConfig cfg = clt_args.build();
            StatReport rep = run_clt(cfg);
            emit_report(cfg, rep);
            return 0;
        }
        if (ssig->parsed()) {
            ExperimentConfig cfg = ssig_args.build();
            if (!sigma_grid.empty()) {
                cfg.sweep.kind = SweepSpec::Kind::sigma;
                cfg.sweep.values = parse_grid(sigma_grid, "--values");
            }
            emit_sweep(cfg, run_transition_sweep(cfg));
            return 0;
        }
        if (sdbm->parsed()) {
            ExperimentConfig cfg = sdbm_args.build();
            if (!t_grid.empty()) {
                cfg.sweep.kind = SweepSpec::Kind::dbm_time;
                cfg.sweep.values = parse_grid(t_grid, "--values");
                cfg.sweep.beta = dbm_beta;
            }
            emit_sweep(cfg, run_dbm_sweep(cfg));
            return 0;
        }
        if (var->parsed())
            return cmd_variance(var_f, var_g, var_mu, var_kernel, var_out);
        if (diag->parsed())
            return cmd_diagnose(diag_N, diag_sigma, diag_alpha, diag_E,
                                diag_Ep, diag_samples, diag_checks,
                                diag_common);
        if (verify->parsed()) {
            if (vcum->parsed()) return cmd_verify_cumulants(vcum_out);
            if (vcau->parsed()) return cmd_verify_cauchy(vcau_out);
        }
        if (stats->parsed())
            return cmd_sample_stats(stats_N, stats_sigma, stats_law,
                                    stats_zeta, stats_samples, stats_dbm_t,
                                    stats_beta, stats_common);
        return 0;
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const ParameterError& e) {
        std::cerr << "parameter error: " << e.what() << "\n";
        return 2;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
