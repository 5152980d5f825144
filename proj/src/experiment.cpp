#include "plmdp/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <thread>

#include <json.hpp>

#include "plmdp/csv.hpp"
#include "plmdp/solver.hpp"
#include "plmdp/tuning.hpp"

namespace plmdp {

namespace {

using nlohmann::json;

[[noreturn]] void config_fail(const std::string& path, const std::string& what) {
    throw ConfigError(path + ": " + what);
}

NuisanceId parse_nuisance(const std::string& s) {
    if (s == "G1" || s == "g1") return NuisanceId::G1;
    if (s == "G2" || s == "g2") return NuisanceId::G2;
    if (s == "G3" || s == "g3") return NuisanceId::G3;
    throw ConfigError("unknown nuisance function '" + s + "' (expected G1, G2 or G3)");
}

}  // namespace

ExperimentConfig parse_experiment_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config '" + path + "'");
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        // Report the line of the parse failure.
        size_t line = 1;
        for (size_t i = 0; i + 1 < e.byte && i < text.size(); ++i)
            if (text[i] == '\n') ++line;
        config_fail(path, "line " + std::to_string(line) + ": " + e.what());
    }

    ExperimentConfig cfg;
    try {
        if (!doc.is_object()) config_fail(path, "top level must be an object");
        cfg.base_seed = doc.value("base_seed", std::uint64_t(0));
        cfg.lambda_scale = doc.value("lambda_scale", 2.0);
        const std::string ls = doc.value("lambda_sigma", std::string("oracle"));
        if (ls == "unit")
            cfg.lambda_sigma = LambdaSigma::Unit;
        else if (ls == "oracle")
            cfg.lambda_sigma = LambdaSigma::Oracle;
        else
            config_fail(path, "'lambda_sigma' must be \"unit\" or \"oracle\"");
        cfg.c = doc.value("c", 1e-3);
        if (doc.contains("mu_sq") && !doc["mu_sq"].is_null())
            cfg.mu_sq = doc["mu_sq"].get<double>();
        cfg.out_dir = doc.value("out_dir", std::string("."));
        if (!doc.contains("designs") || !doc["designs"].is_array() || doc["designs"].empty())
            config_fail(path, "missing non-empty 'designs' array");
        for (const auto& d : doc["designs"]) {
            ExperimentDesign ed;
            ed.spec.p = d.value("p", Index(250));
            ed.spec.s0 = d.value("s0", Index(5));
            ed.spec.lsnr = d.value("lsnr", 8.0);
            ed.spec.g_id = parse_nuisance(d.value("g", std::string("G1")));
            ed.spec.n = d.value("n", Index(72));
            ed.spec.replicates = d.value("replicates", Index(1));
            ed.spec.csv_path = d.value("csv", std::string());
            if (d.contains("dependent")) {
                const auto& dep = d["dependent"];
                if (dep.is_boolean()) {
                    ed.run_independent = !dep.get<bool>();
                    ed.run_dependent = dep.get<bool>();
                } else if (dep.is_string() && dep.get<std::string>() == "both") {
                    ed.run_independent = ed.run_dependent = true;
                } else {
                    config_fail(path, "'dependent' must be true, false or \"both\"");
                }
            }
            cfg.designs.push_back(std::move(ed));
        }
    } catch (const json::exception& e) {
        config_fail(path, e.what());
    }
    return cfg;
}

namespace {

struct Task {
    Index design_id;
    char variant;
    Index replicate;
    size_t slot;
};

int resolve_threads(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("PLM_DP_THREADS")) {
        const int v = std::atoi(env);
        if (v > 0) return v;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

Vector plot_grid() {
    Vector g(kPlotGridSize);
    for (Index i = 0; i < kPlotGridSize; ++i)
        g[i] = -0.5 + static_cast<double>(i) / static_cast<double>(kPlotGridSize - 1);
    return g;
}

ReplicateOutcome run_one(const ExperimentConfig& cfg, const ExperimentDesign& design,
                         Index design_id, char variant, Index replicate,
                         const Matrix* csv_matrix, const Vector& grid) {
    ReplicateOutcome out;
    out.design_id = design_id;
    out.variant = variant;
    out.replicate = replicate;
    try {
        DesignSpec spec = design.spec;
        spec.base_seed = cfg.base_seed;
        spec.dependent = variant == 'd';
        const SimulatedData sim = gen_design(spec, design_id, replicate, csv_matrix);
        const Index n = sim.data.n();

        PenaltyConfig pc;
        const double sigma_for_lambda =
            cfg.lambda_sigma == LambdaSigma::Oracle && sim.sigma > 0 ? sim.sigma : 1.0;
        pc.lambda = lambda_default(n, spec.p, sigma_for_lambda, cfg.lambda_scale);
        const double mu = mu_default(n);
        pc.mu_sq = cfg.mu_sq ? *cfg.mu_sq : mu * mu;
        pc.c = cfg.c;

        using clock = std::chrono::steady_clock;
        auto timed = [&](auto&& fn) {
            const auto t0 = clock::now();
            auto value = fn();
            const double ms =
                std::chrono::duration<double, std::milli>(clock::now() - t0).count();
            return std::make_pair(std::move(value), ms);
        };

        auto [beta_lk, ms_lk] = timed([&] { return fit_lk(sim.data, sim.g0_values, pc); });
        ReplicateResult lk = metrics(beta_lk, std::nullopt, EstimatorId::LK, sim);
        lk.runtime_ms = ms_lk;

        auto [beta_ln, ms_ln] = timed([&] { return fit_ln(sim.data, pc); });
        ReplicateResult ln = metrics(beta_ln, std::nullopt, EstimatorId::LN, sim);
        ln.runtime_ms = ms_ln;

        auto [dp, ms_dp] = timed([&] { return dp_fit(sim.data, pc); });
        const Vector ghat = spline_eval(dp.spline, sim.data.z);
        ReplicateResult dpr = metrics(
            dp.beta, ghat, variant == 'd' ? EstimatorId::DPd : EstimatorId::DPi, sim);
        dpr.runtime_ms = ms_dp;

        for (ReplicateResult* r : {&lk, &ln, &dpr}) {
            r->design_id = design_id;
            r->replicate = replicate;
        }
        out.rows = {lk, ln, dpr};
        out.g_grid = spline_eval(dp.spline, grid);
    } catch (const std::exception& e) {
        out.ok = false;
        out.error = e.what();
    }
    return out;
}

std::string opt_field(const std::optional<double>& v) {
    return v ? format_full(*v) : std::string();
}

}  // namespace

ExperimentResult run_replicates(const ExperimentConfig& cfg, int threads, std::ostream* log) {
    // Load CSV design matrices once per design.
    std::vector<std::shared_ptr<Matrix>> csv_cache(cfg.designs.size());
    for (size_t d = 0; d < cfg.designs.size(); ++d) {
        if (!cfg.designs[d].spec.synthetic())
            csv_cache[d] = std::make_shared<Matrix>(
                read_csv_matrix(cfg.designs[d].spec.csv_path));
    }

    std::vector<Task> tasks;
    for (size_t d = 0; d < cfg.designs.size(); ++d) {
        const ExperimentDesign& ed = cfg.designs[d];
        for (char variant : {'i', 'd'}) {
            if (variant == 'i' && !ed.run_independent) continue;
            if (variant == 'd' && !ed.run_dependent) continue;
            for (Index r = 0; r < ed.spec.replicates; ++r)
                tasks.push_back({static_cast<Index>(d), variant, r, tasks.size()});
        }
    }

    ExperimentResult result;
    result.outcomes.resize(tasks.size());
    const Vector grid = plot_grid();

    std::atomic<size_t> next{0};
    auto worker = [&] {
        for (;;) {
            const size_t t = next.fetch_add(1);
            if (t >= tasks.size()) return;
            const Task& task = tasks[t];
            result.outcomes[task.slot] =
                run_one(cfg, cfg.designs[static_cast<size_t>(task.design_id)],
                        task.design_id, task.variant, task.replicate,
                        csv_cache[static_cast<size_t>(task.design_id)].get(), grid);
        }
    };

    const int nthreads = std::min<int>(resolve_threads(threads),
                                       static_cast<int>(std::max<size_t>(tasks.size(), 1)));
    if (nthreads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    for (const auto& o : result.outcomes) {
        if (!o.ok) {
            ++result.failures;
            if (log)
                (*log) << "replicate failed: design " << o.design_id << " variant "
                       << o.variant << " replicate " << o.replicate << ": " << o.error
                       << '\n';
        }
    }
    return result;
}

namespace {

struct SummaryAccum {
    Index count = 0;
    double pred = 0, est = 0, tsnr_sum = 0;
    double tpr = 0, fpr = 0, g_err = 0;
    Index tpr_n = 0, fpr_n = 0, g_n = 0, tsnr_n = 0;

    void add(const ReplicateResult& r) {
        ++count;
        pred += r.pred_error;
        est += r.est_error_l1;
        if (r.tpr) { tpr += *r.tpr; ++tpr_n; }
        if (r.fpr) { fpr += *r.fpr; ++fpr_n; }
        if (r.g_error) { g_err += *r.g_error; ++g_n; }
        if (r.tsnr) { tsnr_sum += *r.tsnr; ++tsnr_n; }
    }
};

void write_replicates_csv(const std::string& path, const ExperimentResult& res,
                          bool timing) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << "# schema_version=1\n";
    out << "design_id,variant,replicate,estimator,status,pred_error,est_error_l1,tpr,fpr,"
           "g_error,tsnr";
    if (timing) out << ",runtime_ms";
    out << '\n';
    for (const auto& o : res.outcomes) {
        if (!o.ok) {
            out << o.design_id << ',' << o.variant << ',' << o.replicate
                << ",,error,,,,,,";
            if (timing) out << ',';
            out << '\n';
            continue;
        }
        for (const auto& r : o.rows) {
            out << o.design_id << ',' << o.variant << ',' << o.replicate << ','
                << to_string(r.estimator) << ",ok," << format_full(r.pred_error) << ','
                << format_full(r.est_error_l1) << ',' << opt_field(r.tpr) << ','
                << opt_field(r.fpr) << ',' << opt_field(r.g_error) << ','
                << opt_field(r.tsnr);
            if (timing) out << ',' << format_full(r.runtime_ms);
            out << '\n';
        }
    }
}

void write_summary_csv(const std::string& path, const ExperimentConfig& cfg,
                       const ExperimentResult& res) {
    std::map<std::pair<Index, EstimatorId>, SummaryAccum> acc;
    for (const auto& o : res.outcomes) {
        if (!o.ok) continue;
        for (const auto& r : o.rows) acc[{o.design_id, r.estimator}].add(r);
    }
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << "# schema_version=1\n";
    out << "design_id,estimator,replicates,mean_pred_error,mean_est_error_l1,mean_tpr,"
           "mean_fpr,mean_g_error,mean_tsnr\n";
    const EstimatorId order[] = {EstimatorId::DPi, EstimatorId::DPd, EstimatorId::LK,
                                 EstimatorId::LN};
    for (Index d = 0; d < static_cast<Index>(cfg.designs.size()); ++d) {
        for (EstimatorId est : order) {
            const auto it = acc.find({d, est});
            if (it == acc.end()) continue;
            const SummaryAccum& a = it->second;
            const double cnt = static_cast<double>(a.count);
            out << d << ',' << to_string(est) << ',' << a.count << ','
                << format_full(a.pred / cnt) << ',' << format_full(a.est / cnt) << ','
                << (a.tpr_n ? format_full(a.tpr / a.tpr_n) : std::string()) << ','
                << (a.fpr_n ? format_full(a.fpr / a.fpr_n) : std::string()) << ','
                << (a.g_n ? format_full(a.g_err / a.g_n) : std::string()) << ','
                << (a.tsnr_n ? format_full(a.tsnr_sum / a.tsnr_n) : std::string()) << '\n';
        }
    }
}

void write_plot_csv(const std::string& dir, const ExperimentConfig& cfg,
                    const ExperimentResult& res) {
    const Vector grid = plot_grid();
    for (Index d = 0; d < static_cast<Index>(cfg.designs.size()); ++d) {
        for (char variant : {'i', 'd'}) {
            std::vector<const ReplicateOutcome*> dps;
            for (const auto& o : res.outcomes)
                if (o.ok && o.design_id == d && o.variant == variant &&
                    o.g_grid.size() == kPlotGridSize)
                    dps.push_back(&o);
            if (dps.empty()) continue;
            const Vector g_true =
                gen_nuisance(cfg.designs[static_cast<size_t>(d)].spec.g_id, grid);
            std::ofstream out(dir + "/gplot_design" + std::to_string(d) + "_" + variant +
                              ".csv");
            out << "# schema_version=1\n";
            out << "z,g_true,g_mean,g_q05,g_q95\n";
            std::vector<double> vals(dps.size());
            for (Index i = 0; i < kPlotGridSize; ++i) {
                double mean = 0;
                for (size_t k = 0; k < dps.size(); ++k) {
                    vals[k] = dps[k]->g_grid[i];
                    mean += vals[k];
                }
                mean /= static_cast<double>(dps.size());
                std::sort(vals.begin(), vals.end());
                // Type-7 quantile (linear interpolation of order stats).
                auto quantile = [&](double q) {
                    const double pos = q * static_cast<double>(vals.size() - 1);
                    const size_t lo = static_cast<size_t>(pos);
                    const size_t hi = std::min(lo + 1, vals.size() - 1);
                    const double frac = pos - static_cast<double>(lo);
                    return vals[lo] * (1.0 - frac) + vals[hi] * frac;
                };
                out << format_full(grid[i]) << ',' << format_full(g_true[i]) << ','
                    << format_full(mean) << ',' << format_full(quantile(0.05)) << ','
                    << format_full(quantile(0.95)) << '\n';
            }
        }
    }
}

}  // namespace

int run_experiment(const ExperimentConfig& cfg_in, const RunOptions& opts,
                   std::ostream& log) {
    ExperimentConfig cfg = cfg_in;
    if (opts.seed_override) cfg.base_seed = *opts.seed_override;
    if (!opts.out_dir_override.empty()) cfg.out_dir = opts.out_dir_override;
    for (auto& d : cfg.designs) d.spec.validate();

    std::filesystem::create_directories(cfg.out_dir);
    const ExperimentResult res = run_replicates(cfg, opts.threads, &log);

    write_replicates_csv(cfg.out_dir + "/replicates.csv", res, opts.timing);
    write_summary_csv(cfg.out_dir + "/summary.csv", cfg, res);
    write_plot_csv(cfg.out_dir, cfg, res);

    if (res.failures > 0) {
        log << res.failures << " replicate(s) failed\n";
        if (opts.strict) return 1;
    }
    return 0;
}

}  // namespace plmdp
