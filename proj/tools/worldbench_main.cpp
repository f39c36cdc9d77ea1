// worldbench: single entry point for task generation, execution, verifier
// self-test, verifier evolution and agreement reporting.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <future>
#include <iostream>

#include <CLI11.hpp>

#include "worldbench/evolve.hpp"
#include "worldbench/harness.hpp"
#include "worldbench/synth.hpp"
#include "worldbench/verifier.hpp"

namespace fs = std::filesystem;
using namespace wb;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitTaskFailure = 1;
constexpr int kExitUsage = 2;
constexpr int kExitInternal = 3;

struct CliConfig {
    std::string workspace_root = ".";
    int default_budget = 80;
    uint64_t default_seed = 42;
    std::vector<std::string> apps_enabled = {"vault", "workbook", "media"};
    int evolution_budget = 3;
    double qc_sample_rate = 0.0;  // opt-in quality control sampling
};

CliConfig load_cli_config() {
    CliConfig c;
    if (const char* ws = std::getenv("WORLD_WORKSPACE")) c.workspace_root = ws;
    fs::path cfg_path = fs::path(c.workspace_root) / "opencomputer.config.json";
    if (fs::exists(cfg_path)) {
        Json j = Json::parse(read_file(cfg_path.string()));
        c.default_budget = j.value("default_budget", c.default_budget);
        c.default_seed = j.value("default_seed", c.default_seed);
        if (j.contains("apps_enabled")) {
            c.apps_enabled = j["apps_enabled"].get<std::vector<std::string>>();
        }
        c.evolution_budget = j.value("evolution_budget", c.evolution_budget);
        c.qc_sample_rate = j.value("qc_sample_rate", c.qc_sample_rate);
        if (c.evolution_budget < 1) throw Error("BadConfig", "evolution_budget must be >= 1");
        if (c.qc_sample_rate < 0 || c.qc_sample_rate > 1) {
            throw Error("BadConfig", "qc_sample_rate must be in [0,1]");
        }
    }
    return c;
}

std::string timestamp_slug() {
    auto now = std::chrono::system_clock::now().time_since_epoch();
    return std::to_string(std::chrono::duration_cast<std::chrono::milliseconds>(now).count());
}

int cmd_generate(const std::string& app, int count, uint64_t seed, const std::string& out_dir,
                 const std::string& templates_dir) {
    auto templates = synth::load_templates(templates_dir, app);
    synth::GenerationManifest m = synth::generate_tasks(templates, count, seed, out_dir);
    std::cout << m.to_json().dump(2) << "\n";
    return kExitOk;
}

harness::RunArtifact run_one(const task::TaskInstance& t, const harness::ScriptedAgent& agent,
                             const verify::VerifierConfig& cfg, const std::string& out_dir,
                             int step_budget, int64_t seed) {
    harness::SandboxSpec spec;
    spec.app_id = t.app_id;
    spec.step_budget = step_budget;
    spec.run_seed = seed;
    spec.root = (fs::path(out_dir) / t.task_id / (timestamp_slug() + "-" + std::to_string(seed)))
                    .string();
    return harness::run_task(t, agent, cfg, spec);
}

int cmd_run(const std::vector<std::string>& task_paths, const std::string& agent_path,
            const std::string& cfg_path, const std::string& out_dir, int step_budget,
            int64_t seed, int jobs) {
    verify::VerifierConfig cfg = verify::VerifierConfig::load(cfg_path);
    struct Item {
        task::TaskInstance task;
        harness::ScriptedAgent agent;
    };
    std::vector<Item> items;
    for (const auto& tp : task_paths) {
        Item it;
        it.task = task::parse_task_instance(read_file(tp));
        // per-task agent lives next to the task unless one was given explicitly
        std::string ap = agent_path;
        if (ap.empty()) {
            fs::path guess = fs::path(tp).parent_path() /
                             (fs::path(tp).stem().string() + ".agent.json");
            ap = guess.string();
        }
        it.agent = harness::ScriptedAgent::load(ap);
        items.push_back(std::move(it));
    }

    std::vector<harness::RunArtifact> results(items.size());
    if (jobs <= 1 || items.size() <= 1) {
        for (size_t i = 0; i < items.size(); ++i) {
            results[i] = run_one(items[i].task, items[i].agent, cfg, out_dir, step_budget,
                                 seed + static_cast<int64_t>(i));
        }
    } else {
        std::vector<std::future<harness::RunArtifact>> futs;
        for (size_t i = 0; i < items.size(); ++i) {
            futs.push_back(std::async(std::launch::async, [&, i] {
                return run_one(items[i].task, items[i].agent, cfg, out_dir, step_budget,
                               seed + static_cast<int64_t>(i));
            }));
        }
        for (size_t i = 0; i < items.size(); ++i) results[i] = futs[i].get();
    }

    bool any_failure = false;
    Json out = Json::array();
    for (const auto& r : results) {
        any_failure = any_failure || r.reward.n_pass < r.reward.n_total;
        out.push_back(Json{{"task_id", r.task.task_id},
                           {"run_dir", r.run_dir},
                           {"reward", r.reward.reward_text()},
                           {"n_pass", r.reward.n_pass},
                           {"n_total", r.reward.n_total}});
    }
    std::cout << (out.size() == 1 ? out[0] : out).dump(2) << "\n";
    return any_failure ? kExitTaskFailure : kExitOk;
}

int cmd_evolve(const std::string& run_dir, const std::string& cfg_path, int budget) {
    verify::VerifierConfig cfg = verify::VerifierConfig::load(cfg_path);
    harness::RunArtifact run = harness::load_run_artifact(run_dir);
    auto [repaired, report] = evolve::evolve_verifier(run, cfg, budget);
    repaired.save((fs::path(run_dir) / "cfg.evolved.json").string());
    evolve::append_lessons((fs::path(run_dir) / "lessons.jsonl").string(), report.repairs);
    std::cout << report.to_json().dump(2) << "\n";
    return report.outcome == "not_fixed_within_budget" ? kExitTaskFailure : kExitOk;
}

int cmd_report(const std::string& runs_dir, bool pretty) {
    if (!fs::is_directory(runs_dir)) {
        std::cerr << "report: not a directory: " << runs_dir << "\n";
        return kExitUsage;
    }
    std::vector<std::string> run_dirs;
    for (const auto& e : fs::recursive_directory_iterator(runs_dir)) {
        if (e.is_regular_file() && e.path().filename() == "verdicts.json") {
            run_dirs.push_back(e.path().parent_path().string());
        }
    }
    std::sort(run_dirs.begin(), run_dirs.end());
    if (run_dirs.empty()) {
        std::cerr << "report: no runs under " << runs_dir << "\n";
        return kExitUsage;
    }
    std::vector<evolve::RunForReport> rows;
    double reward_sum = 0;
    for (const auto& rd : run_dirs) {
        harness::RunArtifact run = harness::load_run_artifact(rd);
        evolve::RunForReport row;
        row.verdicts = run.verdicts;
        row.references =
            evolve::reference_evaluate(run.task, (fs::path(rd) / "final_state").string());
        rows.push_back(std::move(row));
        reward_sum += run.reward.reward();
    }
    evolve::AgreementSummary summary = evolve::agreement_report(rows);
    if (pretty) {
        std::cout << summary.to_table();
        std::printf("runs: %d  mean reward: %.4f\n", summary.task_count,
                    reward_sum / summary.task_count);
    } else {
        Json j = summary.to_json();
        j["mean_reward"] = reward_sum / summary.task_count;
        std::cout << j.dump(2) << "\n";
    }
    return kExitOk;
}

int cmd_selftest(const std::string& app, const std::string& cfg_path) {
    verify::VerifierConfig cfg = cfg_path.empty() ? verify::default_config(app)
                                                  : verify::VerifierConfig::load(cfg_path);
    fs::path scratch = fs::temp_directory_path() / ("wb_selftest_" + app + "_" + timestamp_slug());
    verify::SelftestReport report =
        verify::run_verifier_selftest(cfg, verify::shipped_fixture_plan(app), scratch.string());
    std::error_code ec;
    fs::remove_all(scratch, ec);
    std::cout << report.to_json().dump(2) << "\n";
    return report.gated ? kExitOk : kExitTaskFailure;
}

int cmd_verifier(const std::string& app, const std::string& endpoint, const std::string& state,
                 const std::string& cfg_path, const std::vector<std::string>& extras) {
    verify::VerifierConfig cfg = cfg_path.empty() ? verify::default_config(app)
                                                  : verify::VerifierConfig::load(cfg_path);
    std::map<std::string, std::string> args;
    for (size_t i = 0; i < extras.size(); ++i) {
        std::string key = extras[i];
        if (key.rfind("--", 0) != 0 || i + 1 >= extras.size()) {
            Json err{{"endpoint", endpoint}, {"ok", false},          {"passed", nullptr},
                     {"evidence", Json::object()},
                     {"error", "malformed endpoint argument: " + key},
                     {"bindings", Json::object()},
                     {"revision", cfg.revision}};
            std::cout << err.dump() << "\n";
            return kExitUsage;
        }
        args[key.substr(2)] = extras[++i];
    }
    try {
        verify::VerdictRecord v = endpoint.rfind("get-", 0) == 0
                                      ? verify::run_query(cfg, endpoint, args, state)
                                      : verify::run_check(cfg, endpoint, args, state);
        std::cout << v.to_json().dump() << "\n";
        return kExitOk;
    } catch (const Error& e) {
        // protocol error: still verdict-shaped, but exit 2
        Json err{{"endpoint", endpoint}, {"ok", false},          {"passed", nullptr},
                 {"evidence", Json::object()},
                 {"error", std::string(e.what())},
                 {"bindings", Json::object()},
                 {"revision", cfg.revision}};
        std::cout << err.dump() << "\n";
        return kExitUsage;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"desk-scale verifier-grounded agent harness", "worldbench"};
    app.require_subcommand(1);

    CliConfig cfg;
    try {
        cfg = load_cli_config();
    } catch (const std::exception& e) {
        std::cerr << "config: " << e.what() << "\n";
        return kExitUsage;
    }

    // generate
    auto* gen = app.add_subcommand("generate", "emit tasks from templates");
    std::string gen_app, gen_out = "tasks";
    std::string gen_templates = (fs::path(cfg.workspace_root) / "templates").string();
    int gen_count = 15;
    uint64_t gen_seed = cfg.default_seed;
    gen->add_option("--app", gen_app, "app id")->required();
    gen->add_option("--count", gen_count, "tasks to emit");
    gen->add_option("--seed", gen_seed, "generation seed");
    gen->add_option("--out", gen_out, "output directory");
    gen->add_option("--templates", gen_templates, "templates root");

    // run
    auto* run = app.add_subcommand("run", "execute agents against tasks and score them");
    std::vector<std::string> run_tasks;
    std::string run_agent, run_cfg, run_out = "run";
    int run_budget = cfg.default_budget, run_jobs = 1;
    int64_t run_seed = static_cast<int64_t>(cfg.default_seed);
    run->add_option("--task", run_tasks, "task.json path (repeatable)")->required();
    run->add_option("--agent", run_agent, "agent.json path (default: <task>.agent.json)");
    run->add_option("--cfg", run_cfg, "verifier config path")->required();
    run->add_option("--out", run_out, "runs output directory");
    run->add_option("--budget", run_budget, "step budget per run");
    run->add_option("--seed", run_seed, "run seed");
    run->add_option("--jobs", run_jobs, "parallel task batches");

    // evolve
    auto* evo = app.add_subcommand("evolve", "repair verifier bindings against a frozen run");
    std::string evo_run, evo_cfg;
    int evo_budget = cfg.evolution_budget;
    evo->add_option("--run", evo_run, "run directory")->required();
    evo->add_option("--cfg", evo_cfg, "verifier config path")->required();
    evo->add_option("--budget", evo_budget, "max repair rounds");

    // report
    auto* rep = app.add_subcommand("report", "agreement and reward summary over a runs directory");
    std::string rep_dir;
    bool rep_pretty = false;
    rep->add_option("--runs", rep_dir, "runs directory")->required();
    rep->add_flag("--pretty", rep_pretty, "fixed-width table instead of JSON");

    // selftest
    auto* st = app.add_subcommand("selftest", "run an app verifier against its fixture plan");
    std::string st_app, st_cfg;
    st->add_option("--app", st_app, "app id")->required();
    st->add_option("--cfg", st_cfg, "verifier config path (default: canonical)");

    // verifier
    auto* ver = app.add_subcommand("verifier", "invoke one endpoint; prints a single verdict");
    std::string ver_app, ver_endpoint, ver_state, ver_cfg;
    ver->add_option("app", ver_app, "app id")->required();
    ver->add_option("endpoint", ver_endpoint, "endpoint name")->required();
    ver->add_option("--state", ver_state, "sandbox root to inspect")->required();
    ver->add_option("--cfg", ver_cfg, "verifier config path (default: canonical)");
    ver->allow_extras();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (gen->parsed()) {
            if (!apps::is_known_app(gen_app)) {
                std::cerr << "generate: unknown app '" << gen_app << "'; valid apps:";
                for (const auto& a : apps::known_apps()) std::cerr << " " << a;
                std::cerr << "\n";
                return kExitUsage;
            }
            return cmd_generate(gen_app, gen_count, gen_seed, gen_out, gen_templates);
        }
        if (run->parsed()) {
            for (const auto& tp : run_tasks) {
                if (!fs::exists(tp)) {
                    std::cerr << "run: no such task file: " << tp << "\n";
                    return kExitUsage;
                }
            }
            if (!run_agent.empty() && !fs::exists(run_agent)) {
                std::cerr << "run: no such agent file: " << run_agent << "\n";
                return kExitUsage;
            }
            if (!fs::exists(run_cfg)) {
                std::cerr << "run: no such config file: " << run_cfg << "\n";
                return kExitUsage;
            }
            return cmd_run(run_tasks, run_agent, run_cfg, run_out, run_budget, run_seed,
                           run_jobs);
        }
        if (evo->parsed()) {
            if (!fs::is_directory(evo_run)) {
                std::cerr << "evolve: no such run directory: " << evo_run << "\n";
                return kExitUsage;
            }
            return cmd_evolve(evo_run, evo_cfg, evo_budget);
        }
        if (rep->parsed()) return cmd_report(rep_dir, rep_pretty);
        if (st->parsed()) {
            if (!apps::is_known_app(st_app)) {
                std::cerr << "selftest: unknown app '" << st_app << "'\n";
                return kExitUsage;
            }
            return cmd_selftest(st_app, st_cfg);
        }
        if (ver->parsed()) {
            if (!apps::is_known_app(ver_app)) {
                std::cerr << "verifier: unknown app '" << ver_app << "'\n";
                return kExitUsage;
            }
            return cmd_verifier(ver_app, ver_endpoint, ver_state, ver_cfg, ver->remaining());
        }
    } catch (const Error& e) {
        std::string kind = e.kind();
        std::cerr << "worldbench: " << e.what() << "\n";
        if (kind == "MalformedDocument" || kind == "SchemaViolation" || kind == "NoTemplates" ||
            kind == "UnknownApp" || kind == "BadConfig") {
            return kExitUsage;
        }
        return kExitInternal;
    } catch (const std::exception& e) {
        std::cerr << "worldbench: internal error: " << e.what() << "\n";
        return kExitInternal;
    }
    return kExitUsage;
}
