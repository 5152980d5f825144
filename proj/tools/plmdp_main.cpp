#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "plmdp/csv.hpp"
#include "plmdp/experiment.hpp"
#include "plmdp/solver.hpp"
#include "plmdp/tuning.hpp"

namespace {

using namespace plmdp;

struct GlobalFlags {
    std::optional<std::uint64_t> seed;
    int threads = 0;
    bool strict = false;
    bool timing = false;
    std::string out_dir;
    double lambda_scale = 2.0;
    std::optional<double> lambda;
    std::optional<double> mu_sq;
    double c = 1e-3;
    bool g_zero = false;
};

int cmd_run(const std::string& config_path, const GlobalFlags& flags) {
    ExperimentConfig cfg;
    try {
        cfg = parse_experiment_config(config_path);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    }
    if (flags.lambda_scale != 2.0) cfg.lambda_scale = flags.lambda_scale;
    if (flags.mu_sq) cfg.mu_sq = flags.mu_sq;
    if (flags.c != 1e-3) cfg.c = flags.c;

    RunOptions opts;
    opts.threads = flags.threads;
    opts.strict = flags.strict;
    opts.timing = flags.timing;
    opts.seed_override = flags.seed;
    opts.out_dir_override = flags.out_dir;
    try {
        return run_experiment(cfg, opts, std::cerr);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}

int cmd_fit(const std::string& x_path, const std::string& z_path, const std::string& y_path,
            const GlobalFlags& flags) {
    DesignData data;
    try {
        data.X = read_csv_matrix(x_path);
        data.z = read_csv_vector(z_path);
        data.y = read_csv_vector(y_path);
        data.validate();
    } catch (const std::exception& e) {
        std::cerr << "input error: " << e.what() << '\n';
        return 2;
    }

    PenaltyConfig cfg;
    cfg.c = flags.c;
    const double mu = mu_default(data.n());
    cfg.mu_sq = flags.mu_sq ? *flags.mu_sq : mu * mu;
    try {
        if (flags.lambda) {
            cfg.lambda = *flags.lambda;
        } else {
            const double sigma_hat = sigma_estimate(data, cfg);
            cfg.lambda = lambda_default(data.n(), data.p(), sigma_hat, flags.lambda_scale);
        }

        const std::optional<Vector> frozen =
            flags.g_zero ? std::optional<Vector>(Vector::Zero(data.n())) : std::nullopt;
        const PartialLinearFit fit = dp_fit(data, cfg, frozen);

        const std::string dir = flags.out_dir.empty() ? "." : flags.out_dir;
        std::filesystem::create_directories(dir);

        std::ofstream beta_out(dir + "/beta.csv");
        beta_out << "# schema_version=1\nindex,beta,nonzero\n";
        for (Index j = 0; j < fit.beta.size(); ++j)
            beta_out << j << ',' << format_full(fit.beta[j]) << ','
                     << (std::abs(fit.beta[j]) > kSupportThreshold ? 1 : 0) << '\n';

        std::ofstream g_out(dir + "/gknots.csv");
        g_out << "# schema_version=1\nz_knot,g\n";
        for (Index k = 0; k < fit.spline.num_knots(); ++k)
            g_out << format_full(fit.spline.knots[k]) << ','
                  << format_full(fit.spline.coeffs[k]) << '\n';

        std::ofstream fit_out(dir + "/fit.csv");
        fit_out << "# schema_version=1\n"
                << "objective,kkt_beta,kkt_g,outer_iters,converged,lambda,mu_sq,c\n"
                << format_full(fit.objective) << ',' << format_full(fit.kkt_beta) << ','
                << format_full(fit.kkt_g) << ',' << fit.outer_iters << ','
                << (fit.converged ? 1 : 0) << ',' << format_full(cfg.lambda) << ','
                << format_full(cfg.mu_sq) << ',' << format_full(cfg.c) << '\n';

        Index nonzero = 0;
        for (Index j = 0; j < fit.beta.size(); ++j)
            if (std::abs(fit.beta[j]) > kSupportThreshold) ++nonzero;
        std::cout << "n=" << data.n() << " p=" << data.p() << " lambda=" << cfg.lambda
                  << " mu_sq=" << cfg.mu_sq << " c=" << cfg.c << '\n'
                  << "objective=" << fit.objective << " nonzero=" << nonzero
                  << " outer_iters=" << fit.outer_iters
                  << " kkt=" << fit.kkt_max_residual
                  << " converged=" << (fit.converged ? "yes" : "no") << '\n'
                  << "wrote " << dir << "/beta.csv, gknots.csv, fit.csv\n";
        return 0;
    } catch (const std::invalid_argument& e) {
        std::cerr << "input error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return flags.strict ? 1 : 0;
    }
}

int cmd_tune(Index n, Index p, double sigma_hat, double scale) {
    try {
        const double lambda = lambda_default(n, p, sigma_hat, scale);
        const double mu = mu_default(n);
        std::cout << "lambda=" << format_full(lambda) << '\n'
                  << "mu=" << format_full(mu) << '\n'
                  << "mu_sq=" << format_full(mu * mu) << '\n';
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Doubly penalised least squares for high-dimensional partial linear "
                 "models: lasso on the linear part, smoothing spline on the nuisance."};
    app.require_subcommand(1);

    GlobalFlags flags;

    auto* run = app.add_subcommand("run", "Run a config-driven simulation study");
    std::string config_path;
    run->add_option("config", config_path, "JSON experiment config")->required();
    run->add_option("--seed", flags.seed, "Override the config base seed");
    run->add_option("--threads", flags.threads,
                    "Worker threads (default: PLM_DP_THREADS or hardware)");
    run->add_flag("--strict", flags.strict, "Exit nonzero if any replicate fails");
    run->add_flag("--timing", flags.timing,
                  "Include runtime_ms in replicates.csv (breaks byte determinism)");
    run->add_option("--out-dir", flags.out_dir, "Output directory");
    run->add_option("--lambda-scale", flags.lambda_scale, "Multiplier of the lambda rule");
    run->add_option("--mu-sq", flags.mu_sq, "Override mu^2");
    run->add_option("--c", flags.c, "Ridge weight inside J^2");

    auto* fit = app.add_subcommand("fit", "Fit one dataset from CSV files");
    std::string x_path, z_path, y_path;
    fit->add_option("x", x_path, "Design matrix CSV (rows = samples)")->required();
    fit->add_option("z", z_path, "Nuisance covariate CSV (one column)")->required();
    fit->add_option("y", y_path, "Response CSV (one column)")->required();
    fit->add_option("--lambda", flags.lambda, "Explicit l1 weight");
    fit->add_option("--lambda-scale", flags.lambda_scale,
                    "Multiplier of the lambda rule (default 2)");
    fit->add_option("--mu-sq", flags.mu_sq, "Smoothness weight mu^2");
    fit->add_option("--c", flags.c, "Ridge weight inside J^2");
    fit->add_flag("--g-zero", flags.g_zero, "Freeze g at zero (standard lasso)");
    fit->add_option("--out-dir", flags.out_dir, "Output directory");
    fit->add_flag("--strict", flags.strict, "Exit nonzero on numerical failure");

    auto* tune = app.add_subcommand("tune", "Print default lambda and mu for (n, p)");
    Index tune_n = 0, tune_p = 0;
    double tune_sigma = 1.0;
    tune->add_option("--n", tune_n, "Sample count")->required();
    tune->add_option("--p", tune_p, "Number of covariates")->required();
    tune->add_option("--sigma-hat", tune_sigma, "Noise scale estimate (default 1)");
    tune->add_option("--lambda-scale", flags.lambda_scale, "Multiplier (default 2)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    if (run->parsed()) return cmd_run(config_path, flags);
    if (fit->parsed()) return cmd_fit(x_path, z_path, y_path, flags);
    return cmd_tune(tune_n, tune_p, tune_sigma, flags.lambda_scale);
}
