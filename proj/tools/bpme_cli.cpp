// Command-line front end: load a model file, run analysis / extinction /
// simulation / validation / conjecture exploration, emit JSON or CSV.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "bpme/bpme.hpp"

namespace {

using bpme::json;

struct RunConfig {
    std::string model_path;
    std::uint64_t seed = 0;
    long long t_max = 10'000;
    long long samples = 0;  // per-command default applied after parsing
    double tol = 1e-12;
    long long max_iter = 1'000'000;
    int depth_cap = 0;  // 0: use the model-derived default
    int workers = 0;    // 0: hardware concurrency
    long long init_pop = 1;
    std::string init_state = "";  // empty: first state
    int n_max = 0;                // per-command default applied after parsing
    std::string mode = "bpme";
    std::string out;
    std::string format = "json";
    std::string dump_dir;
    long long dump_limit = 100;
};

void add_common_options(CLI::App* cmd, RunConfig& cfg) {
    cmd->add_option("--model", cfg.model_path, "path to a model JSON file")->required();
    cmd->add_option("--seed", cfg.seed, "master seed (default 0)");
    cmd->add_option("--t-max", cfg.t_max, "time horizon per trajectory")->check(CLI::PositiveNumber);
    cmd->add_option("--samples", cfg.samples, "ensemble size")->check(CLI::PositiveNumber);
    cmd->add_option("--tol", cfg.tol, "fixed-point tolerance")->check(CLI::PositiveNumber);
    cmd->add_option("--max-iter", cfg.max_iter, "fixed-point iteration cap")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--depth-cap", cfg.depth_cap, "viability search depth cap")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--workers", cfg.workers, "Monte Carlo worker threads (default: all cores)")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--init-pop", cfg.init_pop, "initial population");
    cmd->add_option("--init-state", cfg.init_state, "initial state (label or index)");
    cmd->add_option("--out", cfg.out, "output path (default stdout)");
    cmd->add_option("--format", cfg.format, "json or csv (csv: matrices only)")
        ->check(CLI::IsMember({"json", "csv"}));
}

int resolve_state(const bpme::BpmeModel& model, const std::string& spec) {
    if (spec.empty()) return 0;
    for (int i = 0; i < model.size(); ++i)
        if (model.chain.states[static_cast<std::size_t>(i)] == spec) return i;
    try {
        const int idx = std::stoi(spec);
        if (idx >= 0 && idx < model.size()) return idx;
    } catch (...) {
    }
    throw bpme::ValidationError("unknown state \"" + spec + "\"");
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

json config_json(const RunConfig& cfg, const std::string& command) {
    return json{{"command", command},
                {"seed", cfg.seed},
                {"t_max", cfg.t_max},
                {"samples", cfg.samples},
                {"tol", cfg.tol},
                {"max_iter", cfg.max_iter},
                {"depth_cap", cfg.depth_cap},
                {"workers", cfg.workers},
                {"init_pop", cfg.init_pop},
                {"init_state", cfg.init_state},
                {"n_max", cfg.n_max},
                {"mode", cfg.mode},
                {"format", cfg.format}};
}

json envelope(const RunConfig& cfg, const std::string& command, const bpme::LoadedModel& loaded,
              json result) {
    return json{{"schema_version", bpme::kReportSchemaVersion},
                {"library_version", bpme::kLibraryVersion},
                {"rng",
                 json{{"algorithm", bpme::kRngAlgorithm},
                      {"version", bpme::kRngVersion},
                      {"seeding", bpme::kRngSeeding}}},
                {"model",
                 json{{"path", loaded.path},
                      {"hash", "fnv1a64:" + hex64(loaded.file_hash)},
                      {"states", loaded.model.chain.states}}},
                {"config", config_json(cfg, command)},
                {"result", std::move(result)}};
}

void emit(const RunConfig& cfg, const std::string& text) {
    if (cfg.out.empty()) {
        std::cout << text << '\n';
    } else {
        std::ofstream f(cfg.out, std::ios::binary);
        if (!f) throw bpme::ValidationError("cannot open output file " + cfg.out);
        f << text << '\n';
    }
}

json vector_json(const bpme::RowVector& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
}

json vector_json(const bpme::Vector& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
}

const char* class_name(bpme::CriticalityClass c) {
    switch (c) {
        case bpme::CriticalityClass::Subcritical: return "Subcritical";
        case bpme::CriticalityClass::Critical: return "Critical";
        default: return "Supercritical";
    }
}

const char* ternary_name(bpme::Ternary t) {
    switch (t) {
        case bpme::Ternary::no: return "false";
        case bpme::Ternary::yes: return "true";
        default: return "unknown";
    }
}

int run_analyze(RunConfig& cfg) {
    if (cfg.format != "json")
        throw bpme::ValidationError("analyze supports only --format json");
    const auto loaded = bpme::load_model_file(cfg.model_path);
    const auto& model = loaded.model;
    const int depth_cap = cfg.depth_cap > 0 ? cfg.depth_cap : bpme::default_depth_cap(model);

    const auto cls = bpme::classify(model, depth_cap);
    const auto phi = bpme::phi_vector(model);
    const auto vr = bpme::sigma_m_squared(model);

    json classification{{"class", class_name(cls.cls)}};
    if (cls.cls == bpme::CriticalityClass::Critical)
        classification["delta_variance_positive"] = ternary_name(cls.delta_variance_positive);

    json excursion_means = json::object();
    json viability = json::object();
    for (int i = 0; i < model.size(); ++i) {
        const auto& label = model.chain.states[static_cast<std::size_t>(i)];
        excursion_means[label] = bpme::excursion_mean(model, i);
        const auto cert = bpme::viability_certificate(model, i, depth_cap);
        if (cert) {
            json steps = json::array();
            for (const auto& s : cert->excursion)
                steps.push_back(
                    json{{"state", model.chain.states[static_cast<std::size_t>(s.state)]},
                         {"offspring", s.offspring}});
            viability[label] = json{{"population", cert->population}, {"excursion", steps}};
        } else {
            viability[label] = "not_found_within_cap";
        }
    }

    json result{{"pi", vector_json(model.chain.pi)},
                {"period", model.chain.period},
                {"mu", model.mu},
                {"max_support", model.max_support},
                {"classification", classification},
                {"phi", vector_json(phi)},
                {"variance",
                 json{{"sigma2", vr.sigma2},
                      {"tau2", vr.tau2},
                      {"cross", vr.cross},
                      {"sigma2_m", vr.sigma2_m}}},
                {"excursion_means", excursion_means},
                {"viability", viability}};
    emit(cfg, envelope(cfg, "analyze", loaded, std::move(result)).dump(2));
    return 0;
}

int run_extinction(RunConfig& cfg) {
    if (cfg.n_max == 0) cfg.n_max = 10;
    const auto loaded = bpme::load_model_file(cfg.model_path);
    const auto& model = loaded.model;
    const auto ext = bpme::extinction_matrix(model, cfg.tol, cfg.max_iter);

    if (cfg.format == "csv") {
        emit(cfg, bpme::matrix_to_csv(model.chain.states, ext.E.entries()));
        return 0;
    }

    json survival = json::array();
    if (ext.converged) {
        for (int n = 1; n <= cfg.n_max; ++n) {
            json by_state = json::object();
            for (int i = 0; i < model.size(); ++i)
                by_state[model.chain.states[static_cast<std::size_t>(i)]] =
                    bpme::survival_probability(ext, n, i);
            survival.push_back(json{{"population", n}, {"by_state", by_state}});
        }
    }

    json perron;
    std::string perron_error;
    try {
        const auto pv = bpme::perron_left_vector(ext.E);
        perron = json{{"vector", vector_json(pv.v)},
                      {"lambda", pv.lambda},
                      {"residual", pv.residual}};
    } catch (const bpme::NumericError& e) {
        perron = nullptr;
        perron_error = e.what();
    }

    json result{{"extinction_matrix", bpme::matrix_to_json(model.chain.states, ext.E.entries())},
                {"converged", ext.converged},
                {"iterations", ext.iterations},
                {"residual", ext.residual},
                {"max_clamp", ext.max_clamp},
                {"survival", survival},
                {"perron", perron}};
    if (!perron_error.empty()) result["perron_error"] = perron_error;
    emit(cfg, envelope(cfg, "extinction", loaded, std::move(result)).dump(2));
    return 0;
}

int run_simulate(RunConfig& cfg) {
    if (cfg.samples == 0) cfg.samples = 1000;
    if (cfg.format != "json")
        throw bpme::ValidationError("simulate emits a JSON summary; trajectories dump as CSV");
    const auto loaded = bpme::load_model_file(cfg.model_path);
    const auto& model = loaded.model;
    const int init_state = resolve_state(model, cfg.init_state);
    const auto mode =
        cfg.mode == "z" ? bpme::ProcessMode::ZValued : bpme::ProcessMode::Bpme;
    const bpme::TotalState init{cfg.init_pop, init_state};

    const auto summary = bpme::monte_carlo(model, init, mode, cfg.t_max, cfg.samples, cfg.seed,
                                           cfg.workers);

    if (!cfg.dump_dir.empty()) {
        std::filesystem::create_directories(cfg.dump_dir);
        const long long n_dump = std::min(cfg.dump_limit, cfg.samples);
        for (long long k = 0; k < n_dump; ++k) {
            const auto traj = bpme::run(model, init, mode, cfg.t_max,
                                        bpme::splitmix64_at(cfg.seed, static_cast<std::uint64_t>(k)));
            char name[32];
            std::snprintf(name, sizeof(name), "traj_%06lld.csv", k);
            std::ofstream f(std::filesystem::path(cfg.dump_dir) / name, std::ios::binary);
            f << bpme::trajectory_to_csv(model.chain.states, traj);
        }
    }

    json result{{"trajectories_run", summary.trajectories_run},
                {"survivors_at_cap", summary.survivors_at_cap},
                {"survivor_fraction", static_cast<double>(summary.survivors_at_cap) /
                                          static_cast<double>(summary.trajectories_run)},
                {"endpoint_populations", summary.endpoint_populations},
                {"master_seed", summary.master_seed},
                {"t_max", summary.t_max}};
    emit(cfg, envelope(cfg, "simulate", loaded, std::move(result)).dump(2));
    return 0;
}

int run_validate(RunConfig& cfg) {
    if (cfg.samples == 0) cfg.samples = 100'000;
    if (cfg.format != "json")
        throw bpme::ValidationError("validate supports only --format json");
    const auto loaded = bpme::load_model_file(cfg.model_path);
    const auto& model = loaded.model;
    const int init_state = resolve_state(model, cfg.init_state);
    const bpme::TotalState init{cfg.init_pop, init_state};

    std::vector<bpme::CheckReport> checks;
    json skipped = json::array();

    for (const auto& r :
         bpme::lln_check(model, init, 10 * cfg.t_max, 1'000, cfg.seed, cfg.workers))
        checks.push_back(r);
    try {
        for (const auto& r :
             bpme::clt_check(model, init, cfg.t_max, 10'000, cfg.seed, cfg.workers))
            checks.push_back(r);
    } catch (const bpme::DegenerateVarianceError& e) {
        skipped.push_back(json{{"name", "clt"}, {"reason", e.what()}});
    }
    if (cfg.init_pop >= 1)
        checks.push_back(bpme::survival_mc_vs_analytic(model, static_cast<int>(cfg.init_pop),
                                                       init_state, cfg.t_max, cfg.samples,
                                                       cfg.seed, cfg.workers));
    const auto delta = bpme::delta_mean_check(model, init_state, 10'000, cfg.seed);
    checks.push_back(delta.report);

    bool all_passed = true;
    json reports = json::array();
    for (const auto& r : checks) {
        all_passed = all_passed && r.passed;
        reports.push_back(bpme::check_report_to_json(r));
    }
    json result{{"checks", reports},
                {"skipped", skipped},
                {"all_passed", all_passed},
                {"delta_variance_estimate", delta.delta_variance}};
    emit(cfg, envelope(cfg, "validate", loaded, std::move(result)).dump(2));
    return all_passed ? 0 : 1;
}

int run_conjecture(RunConfig& cfg) {
    if (cfg.n_max == 0) cfg.n_max = 50;
    if (cfg.format != "json")
        throw bpme::ValidationError("conjecture supports only --format json");
    const auto loaded = bpme::load_model_file(cfg.model_path);
    const auto& model = loaded.model;
    const auto report =
        bpme::generation_environment_conjecture(model, cfg.n_max, cfg.tol, cfg.max_iter);

    json gaps = json::array();
    for (std::size_t k = 0; k < report.gap_by_generation.size(); ++k)
        gaps.push_back(json{{"n", k + 1}, {"gap", report.gap_by_generation[k]}});

    json result{
        {"extinction_matrix",
         bpme::matrix_to_json(model.chain.states, report.extinction.entries())},
        {"perron", json{{"vector", vector_json(report.perron)}, {"lambda", report.perron_lambda}}},
        {"conjectured_limit", bpme::matrix_to_json(model.chain.states, report.conjectured_limit)},
        {"gap_by_generation", gaps}};
    emit(cfg, envelope(cfg, "conjecture", loaded, std::move(result)).dump(2));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"branching processes in a Markovian environment"};
    app.require_subcommand(1);

    RunConfig cfg;
    auto* analyze = app.add_subcommand("analyze", "exact analytics: pi, mu, phi, sigma^2_M");
    auto* extinction = app.add_subcommand("extinction", "extinction matrix fixed point");
    auto* simulate = app.add_subcommand("simulate", "Monte Carlo trajectory ensemble");
    auto* validate = app.add_subcommand("validate", "statistical checks against theory");
    auto* conjecture =
        app.add_subcommand("conjecture", "generation-environment limit exploration");
    for (auto* cmd : {analyze, extinction, simulate, validate, conjecture})
        add_common_options(cmd, cfg);
    extinction->add_option("--n-max", cfg.n_max, "largest initial population reported");
    conjecture->add_option("--n-max", cfg.n_max, "number of generating-function iterates");
    simulate->add_option("--mode", cfg.mode, "bpme or z")->check(CLI::IsMember({"bpme", "z"}));
    simulate->add_option("--dump-dir", cfg.dump_dir, "write per-trajectory CSV files here");
    simulate->add_option("--dump-limit", cfg.dump_limit, "max trajectories to dump");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 3;
    }

    try {
        if (analyze->parsed()) return run_analyze(cfg);
        if (extinction->parsed()) return run_extinction(cfg);
        if (simulate->parsed()) return run_simulate(cfg);
        if (validate->parsed()) return run_validate(cfg);
        if (conjecture->parsed()) return run_conjecture(cfg);
    } catch (const bpme::ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const bpme::ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const bpme::NumericError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 4;
    }
    return 0;
}
