#include "meglab/harness.hpp"
#include "meglab/io.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

namespace {

using meglab::io::json;
namespace fs = std::filesystem;

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

template <typename T>
T require_field(const json& j, const std::string& path) {
    const json* cur = &j;
    std::string walked = "config";
    std::size_t start = 0;
    while (start <= path.size()) {
        const std::size_t dotpos = path.find('.', start);
        const std::string key = path.substr(start, dotpos == std::string::npos
                                                       ? std::string::npos
                                                       : dotpos - start);
        if (!cur->is_object() || !cur->contains(key))
            throw ConfigError(walked + "." + key + ": required field missing");
        cur = &(*cur)[key];
        walked += "." + key;
        if (dotpos == std::string::npos) break;
        start = dotpos + 1;
    }
    try {
        return cur->get<T>();
    } catch (const json::exception&) {
        throw ConfigError(walked + ": wrong type");
    }
}

template <typename T>
T field_or(const json& j, const std::string& key, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError("config." + key + ": wrong type");
    }
}

meglab::ExplorationSchedule schedule_from_config(const json& config, int horizon) {
    if (!config.contains("schedule")) throw ConfigError("config.schedule: required field missing");
    const json& sj = config.at("schedule");
    if (sj.contains("variant")) {
        const std::string variant = sj.at("variant").get<std::string>();
        if (variant == "thm2")
            return meglab::default_schedule(horizon, meglab::ScheduleVariant::Thm2);
        if (variant == "propC" || variant == "propc")
            return meglab::default_schedule(horizon, meglab::ScheduleVariant::PropC);
        throw ConfigError("config.schedule.variant: must be thm2 or propC");
    }
    if (sj.contains("constant_eps"))
        return meglab::constant_schedule(horizon, sj.at("constant_eps").get<double>());
    meglab::ExplorationSchedule sched = meglab::io::schedule_from_json(sj);
    if (sched.horizon() != horizon)
        throw ConfigError("config.schedule.eps: length must equal the environment horizon");
    return sched;
}

meglab::TaskSet tasks_from_config(const json& config, bool single_task) {
    const json& env = config.contains("env") ? config.at("env") : json::object();
    if (env.contains("generator")) {
        const std::string generator = env.at("generator").get<std::string>();
        if (generator != "hallway")
            throw ConfigError("config.env.generator: unknown generator " + generator);
        const int n = require_field<int>(config, "env.n");
        if (n < 1) throw ConfigError("config.env.n: must be >= 1");
        meglab::HallwayInstance hallway = meglab::gen_hallway(n);
        if (!single_task) return hallway.diverse;
        meglab::TaskSet single;
        single.tasks = {hallway.diverse.tasks.back()};
        single.ids = {hallway.diverse.ids.back()};
        single.shared_transitions = true;
        return single;
    }
    if (env.contains("files")) {
        meglab::TaskSet tasks;
        for (const auto& file : env.at("files")) {
            const std::string path = file.get<std::string>();
            tasks.tasks.push_back(
                meglab::io::mdp_from_json(json::parse(meglab::io::read_file(path))));
            tasks.ids.push_back(fs::path(path).stem().string());
        }
        tasks.validate();
        return tasks;
    }
    if (env.contains("file")) {
        meglab::TaskSet tasks;
        const std::string path = env.at("file").get<std::string>();
        tasks.tasks.push_back(meglab::io::mdp_from_json(json::parse(meglab::io::read_file(path))));
        tasks.ids.push_back(fs::path(path).stem().string());
        return tasks;
    }
    throw ConfigError("config.env: needs generator, file, or files");
}

std::vector<std::uint64_t> seeds_from_config(const json& config) {
    if (!config.contains("seeds")) throw ConfigError("config.seeds: required field missing");
    std::vector<std::uint64_t> seeds;
    for (const auto& s : config.at("seeds")) seeds.push_back(s.get<std::uint64_t>());
    if (seeds.empty()) throw ConfigError("config.seeds: must be nonempty");
    return seeds;
}

int emit_audit(const meglab::harness::AuditReport& report, const fs::path& out_dir) {
    std::fputs(report.to_text().c_str(), stdout);
    if (!out_dir.empty())
        meglab::io::atomic_write(out_dir / (report.kind + "_report.json"),
                                 report.to_json().dump(2) + "\n");
    return report.all_pass() ? 0 : 1;
}

int run_audit_kind(const std::string& kind, const json& config) {
    using namespace meglab::harness;
    const fs::path out_dir = field_or<std::string>(config, "out_dir", "");
    const int workers = env_worker_count();
    if (kind == "meg_audit") {
        int status = 0;
        status |= emit_audit(
            audit_hallway_meg(field_or<std::vector<int>>(config, "hallway_sizes", {6, 8, 10}),
                              field_or<std::uint64_t>(config, "cap", std::uint64_t{1} << 20)),
            out_dir);
        status |= emit_audit(audit_prop1(field_or<int>(config, "prop1_instances", 50),
                                         field_or<std::uint64_t>(config, "master_seed", 101)),
                             out_dir);
        status |= emit_audit(audit_prop2(field_or<int>(config, "prop2_instances", 30),
                                         field_or<std::uint64_t>(config, "master_seed", 202)),
                             out_dir);
        status |= emit_audit(
            audit_sparse_lower_bound(field_or<int>(config, "sparse_instances", 10),
                                     field_or<std::uint64_t>(config, "master_seed", 303)),
            out_dir);
        status |= emit_audit(
            audit_value_difference(field_or<int>(config, "value_difference_triples", 100),
                                   field_or<std::uint64_t>(config, "master_seed", 404)),
            out_dir);
        return status;
    }
    if (kind == "separation") {
        const SeparationReport report = audit_separation(
            field_or<std::vector<int>>(config, "sizes", {4, 6, 8, 10}),
            field_or<int>(config, "num_seeds", 10), field_or<int>(config, "rounds", 10000),
            field_or<double>(config, "beta", 0.05), out_dir, workers);
        return emit_audit(report.audit, out_dir);
    }
    if (kind == "lemma_linear2") {
        if (!out_dir.empty()) {
            // Spectrum export for the canonical instance family: the one-hot
            // hallway embedding under the 1/(h+1) schedule.
            const int n = field_or<int>(config, "spectra_hallway_n", 4);
            const meglab::LinearMDP lm = meglab::embed_tabular(meglab::gen_hallway(n).base);
            meglab::io::atomic_write(
                out_dir / "covariance_spectra.csv",
                linear_mixture_spectra_csv(
                    lm, meglab::default_schedule(n, meglab::ScheduleVariant::Thm2)));
        }
        return emit_audit(audit_lemma_linear2(field_or<int>(config, "instances", 20),
                                              field_or<std::uint64_t>(config, "master_seed", 606)),
                          out_dir);
    }
    if (kind == "lqr_suite") {
        if (!out_dir.empty()) {
            // Contractive demo dynamics keep the diverse tasks' one-step
            // positive rewards inside the posedness region.
            meglab::rng::Stream stream(field_or<std::uint64_t>(config, "master_seed", 707));
            meglab::LQRSystem sys = random_wellposed_lqr(3, 2, 4, stream);
            for (auto& m : sys.A)
                for (auto& v : m.a) v *= 0.4;
            for (auto& m : sys.B)
                for (auto& v : m.a) v *= 0.4;
            const auto sched = meglab::gaussian_schedule(4, std::vector<double>(4, 0.3),
                                                         std::vector<double>(4, 0.5));
            meglab::io::atomic_write(out_dir / "covariance_spectra.csv",
                                     lqr_mixture_spectra_csv(sys, sched));
        }
        return emit_audit(audit_lqr(field_or<int>(config, "systems", 50),
                                    field_or<int>(config, "gain_trials", 100),
                                    field_or<std::uint64_t>(config, "master_seed", 707)),
                          out_dir);
    }
    if (kind == "mirror_audit") {
        return emit_audit(
            audit_mirror(field_or<int>(config, "bases", 20),
                         field_or<std::vector<double>>(config, "betas", {0.05, 0.2}),
                         field_or<int>(config, "policies_per_instance", 100),
                         field_or<std::uint64_t>(config, "master_seed", 505)),
            out_dir);
    }
    if (kind == "curriculum_audit") {
        return emit_audit(audit_curriculum(field_or<int>(config, "n", 12),
                                           field_or<double>(config, "delta", 0.1),
                                           field_or<int>(config, "num_seeds", 20),
                                           field_or<int>(config, "min_successes", 18), out_dir,
                                           workers),
                          out_dir);
    }
    throw ConfigError("config.kind: unknown audit kind " + kind);
}

int run_config(const json& config) {
    using namespace meglab::harness;
    const std::string kind = require_field<std::string>(config, "kind");
    const int workers = env_worker_count();
    if (kind == "mtrl_run" || kind == "single_task_run") {
        const meglab::TaskSet tasks = tasks_from_config(config, kind == "single_task_run");
        const int horizon = tasks.tasks.front().horizon;
        const meglab::ExplorationSchedule sched = schedule_from_config(config, horizon);
        const int rounds = require_field<int>(config, "rounds");
        if (rounds < 1) throw ConfigError("config.rounds: must be >= 1");
        const double beta = require_field<double>(config, "beta");
        if (beta <= 0.0) throw ConfigError("config.beta: must be positive");
        const auto seeds = seeds_from_config(config);
        const fs::path out_dir = require_field<std::string>(config, "out_dir");
        const auto summary =
            run_mtrl(tasks, sched, rounds, beta, seeds, out_dir, workers, config.dump(),
                     field_or<bool>(config, "early_stop", true),
                     field_or<int>(config, "eval_every", 1),
                     field_or<bool>(config, "export_datasets", false));
        std::printf("%s: median complexity %s, success fraction %g\n", kind.c_str(),
                    summary.median_complexity
                        ? meglab::io::format_double(*summary.median_complexity).c_str()
                        : "not reached",
                    summary.success_fraction);
        return 0;
    }
    if (kind == "curriculum_run") {
        const meglab::TaskSet tasks = tasks_from_config(config, false);
        const double delta = require_field<double>(config, "delta");
        if (delta <= 0.0 || delta >= 1.0) throw ConfigError("config.delta: must be in (0,1)");
        const auto seeds = seeds_from_config(config);
        const fs::path out_dir = require_field<std::string>(config, "out_dir");
        const auto summary = run_curriculum_sweep(tasks, delta, seeds, out_dir, workers);
        std::printf("curriculum_run: success fraction %g\n", summary.success_fraction);
        return 0;
    }
    return run_audit_kind(kind, config);
}

int run_gen(const std::string& generator, const json& params, const fs::path& out_dir) {
    using meglab::io::atomic_write;
    using meglab::io::to_json;
    if (generator == "hallway") {
        const int n = require_field<int>(params, "n");
        const meglab::HallwayInstance hallway = meglab::gen_hallway(n);
        atomic_write(out_dir / "hallway_base.json", to_json(hallway.base).dump() + "\n");
        for (std::size_t i = 0; i < hallway.diverse.tasks.size(); ++i)
            atomic_write(out_dir / (hallway.diverse.ids[i] + ".json"),
                         to_json(hallway.diverse.tasks[i]).dump() + "\n");
        std::printf("gen hallway: wrote 1 base + %d task files to %s\n", hallway.diverse.size(),
                    out_dir.string().c_str());
        return 0;
    }
    if (generator == "sparse") {
        const std::string input = require_field<std::string>(params, "input");
        const meglab::TabularMDP base =
            meglab::io::mdp_from_json(json::parse(meglab::io::read_file(input)));
        const meglab::TaskSet tasks = meglab::gen_sparse_set(base);
        for (std::size_t i = 0; i < tasks.tasks.size(); ++i)
            atomic_write(out_dir / (tasks.ids[i] + ".json"), to_json(tasks.tasks[i]).dump() + "\n");
        std::printf("gen sparse: wrote %d task files to %s\n", tasks.size(),
                    out_dir.string().c_str());
        return 0;
    }
    if (generator == "diverse-linear") {
        const std::string input = require_field<std::string>(params, "input");
        const meglab::LinearMDP lm =
            meglab::io::linear_from_json(json::parse(meglab::io::read_file(input)));
        const meglab::LinearTaskSet tasks = meglab::gen_diverse_linear(lm);
        for (std::size_t i = 0; i < tasks.tasks.size(); ++i)
            atomic_write(out_dir / (tasks.ids[i] + ".json"), to_json(tasks.tasks[i]).dump() + "\n");
        std::printf("gen diverse-linear: wrote %zu task files to %s\n", tasks.tasks.size(),
                    out_dir.string().c_str());
        return 0;
    }
    if (generator == "diverse-lqr") {
        const std::string input = require_field<std::string>(params, "input");
        const meglab::LQRSystem sys =
            meglab::io::lqr_from_json(json::parse(meglab::io::read_file(input)));
        const meglab::LQRTaskSet tasks =
            meglab::gen_diverse_lqr(sys.A, sys.B, sys.horizon, sys.initial_state);
        for (std::size_t i = 0; i < tasks.tasks.size(); ++i)
            atomic_write(out_dir / (tasks.ids[i] + ".json"), to_json(tasks.tasks[i]).dump() + "\n");
        std::printf("gen diverse-lqr: wrote %zu task files to %s\n", tasks.tasks.size(),
                    out_dir.string().c_str());
        return 0;
    }
    if (generator == "mirror") {
        const std::string input = require_field<std::string>(params, "input");
        const double beta = require_field<double>(params, "beta");
        const meglab::TabularMDP base =
            meglab::io::mdp_from_json(json::parse(meglab::io::read_file(input)));
        const meglab::TabularMDP mirrored = meglab::mirror_transform(base, beta);
        atomic_write(out_dir / "mirror.json", to_json(mirrored).dump() + "\n");
        std::printf("gen mirror: wrote mirror.json to %s\n", out_dir.string().c_str());
        return 0;
    }
    throw ConfigError("gen: unknown generator " + generator);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"meglab: multitask myopic-exploration laboratory"};
    app.require_subcommand(1);

    std::string config_path;
    auto* run_cmd = app.add_subcommand("run", "run an experiment or audit from a config file");
    run_cmd->add_option("config", config_path, "experiment config JSON")->required();

    std::string audit_kind, audit_config_path;
    auto* audit_cmd = app.add_subcommand("audit", "run a verification suite");
    audit_cmd->add_option("kind", audit_kind, "audit kind")->required();
    audit_cmd->add_option("config", audit_config_path, "optional config JSON");

    std::string generator, gen_input, gen_out = ".";
    int gen_n = 0;
    double gen_beta = 0.0;
    auto* gen_cmd = app.add_subcommand("gen", "write environment files");
    gen_cmd->add_option("generator", generator, "hallway | sparse | diverse-linear | diverse-lqr | mirror")
        ->required();
    gen_cmd->add_option("--n", gen_n, "hallway length");
    gen_cmd->add_option("--input", gen_input, "input environment file");
    gen_cmd->add_option("--beta", gen_beta, "mirror threshold");
    gen_cmd->add_option("-o,--out", gen_out, "output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run_cmd->parsed()) {
            const json config = json::parse(meglab::io::read_file(config_path));
            return run_config(config);
        }
        if (audit_cmd->parsed()) {
            json config = json::object();
            if (!audit_config_path.empty())
                config = json::parse(meglab::io::read_file(audit_config_path));
            return run_audit_kind(audit_kind, config);
        }
        if (gen_cmd->parsed()) {
            json params = json::object();
            if (gen_n > 0) params["n"] = gen_n;
            if (!gen_input.empty()) params["input"] = gen_input;
            if (gen_beta > 0.0) params["beta"] = gen_beta;
            return run_gen(generator, params, gen_out);
        }
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const meglab::EnumerationCapError& e) {
        std::fprintf(stderr, "%s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}
