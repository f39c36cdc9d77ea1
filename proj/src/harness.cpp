#include "worldbench/harness.hpp"

#include <filesystem>

namespace fs = std::filesystem;

namespace wb::harness {

Json FaultProfile::to_json() const {
    Json j{{"kind", kind}, {"step", step}};
    if (kind == "corrupt_param") {
        j["param"] = param;
        j["value"] = value;
    }
    return j;
}

FaultProfile FaultProfile::from_json(const Json& j) {
    FaultProfile f;
    f.kind = j.at("kind").get<std::string>();
    f.step = j.at("step").get<int>();
    f.param = j.value("param", "");
    f.value = j.value("value", "");
    if (f.kind != "drop_step" && f.kind != "corrupt_param" && f.kind != "duplicate_step") {
        throw Error("SchemaViolation", "unknown fault profile kind: " + f.kind);
    }
    return f;
}

Json ScriptedAgent::to_json() const {
    Json script_json = Json::array();
    for (const auto& a : script) script_json.push_back(a.to_json());
    return Json{{"agent_id", agent_id},
                {"script", script_json},
                {"fault_profile", fault_profile ? fault_profile->to_json() : Json(nullptr)}};
}

ScriptedAgent ScriptedAgent::from_json(const Json& j) {
    ScriptedAgent a;
    a.agent_id = j.at("agent_id").get<std::string>();
    for (const auto& ja : j.at("script")) a.script.push_back(apps::AppAction::from_json(ja));
    if (j.contains("fault_profile") && !j["fault_profile"].is_null()) {
        a.fault_profile = FaultProfile::from_json(j["fault_profile"]);
    }
    return a;
}

ScriptedAgent ScriptedAgent::load(const std::string& path) {
    try {
        return from_json(Json::parse(read_file(path)));
    } catch (const Json::exception& e) {
        throw Error("MalformedDocument", path + ": " + e.what());
    }
}

std::vector<apps::AppAction> effective_script(const ScriptedAgent& agent) {
    if (!agent.fault_profile) return agent.script;
    const FaultProfile& f = *agent.fault_profile;
    std::vector<apps::AppAction> out;
    for (size_t i = 0; i < agent.script.size(); ++i) {
        if (f.kind == "drop_step" && static_cast<int>(i) == f.step) continue;
        apps::AppAction a = agent.script[i];
        if (f.kind == "corrupt_param" && static_cast<int>(i) == f.step) {
            a.params[f.param] = Scalar(f.value);
        }
        out.push_back(a);
        if (f.kind == "duplicate_step" && static_cast<int>(i) == f.step) {
            out.push_back(agent.script[i]);
        }
    }
    return out;
}

Json TrajectoryRecord::to_json() const {
    Json steps_json = Json::array();
    for (const auto& s : steps) {
        Json js{{"index", s.index},
                {"action", s.action.to_json()},
                {"post_action_digest", s.post_action_digest}};
        if (!s.error.empty()) js["error"] = s.error;
        steps_json.push_back(js);
    }
    return Json{{"task_id", task_id},
                {"agent_id", agent_id},
                {"steps", steps_json},
                {"final_digest", final_digest},
                {"frozen", frozen}};
}

TrajectoryRecord TrajectoryRecord::from_json(const Json& j) {
    TrajectoryRecord t;
    t.task_id = j.at("task_id").get<std::string>();
    t.agent_id = j.at("agent_id").get<std::string>();
    for (const auto& js : j.at("steps")) {
        TrajectoryStep s;
        s.index = js.at("index").get<int>();
        s.action = apps::AppAction::from_json(js.at("action"));
        s.post_action_digest = js.at("post_action_digest").get<std::string>();
        s.error = js.value("error", "");
        t.steps.push_back(std::move(s));
    }
    t.final_digest = j.at("final_digest").get<std::string>();
    t.frozen = j.at("frozen").get<bool>();
    return t;
}

std::string init_sandbox(const task::TaskInstance& t, const SandboxSpec& spec) {
    fs::path root(spec.root);
    if (fs::exists(root) && !fs::is_empty(root)) {
        throw Error("DirtySandbox", "sandbox root not empty: " + spec.root);
    }
    fs::create_directories(root);

    for (const auto& seed : t.env_init.seed_artifacts) {
        try {
            write_file(safe_join(spec.root, seed.rel_path), seed.content);
        } catch (const Error& e) {
            throw Error("SeedWriteFailure", seed.rel_path + ": " + e.what());
        }
    }

    // Seeds may or may not include the app's state files; materialize the
    // empty state first when they don't.
    apps::AppState state;
    try {
        state = apps::load_app_state(t.app_id, spec.root);
    } catch (const Error& e) {
        if (e.kind() != "MissingState") throw;
        state = apps::empty_state(t.app_id);
    }

    for (size_t i = 0; i < t.env_init.init_actions.size(); ++i) {
        try {
            state = apps::apply_action(state, t.env_init.init_actions[i]);
        } catch (const Error& e) {
            throw Error("InitActionFailure",
                        "init action " + std::to_string(i) + ": " + e.what());
        }
    }
    apps::persist_app_state(state, spec.root);
    return apps::digest_state(state);
}

TrajectoryRecord execute_agent(const std::string& sandbox_root, const task::TaskInstance& t,
                               const ScriptedAgent& agent, int step_budget) {
    apps::AppState state = apps::load_app_state(t.app_id, sandbox_root);
    TrajectoryRecord record;
    record.task_id = t.task_id;
    record.agent_id = agent.agent_id;

    std::vector<apps::AppAction> script = effective_script(agent);
    int index = 0;
    for (const auto& action : script) {
        if (index >= step_budget) break;
        TrajectoryStep step;
        step.index = index;
        step.action = action;
        try {
            state = apps::apply_action(state, action);
        } catch (const Error& e) {
            step.error = e.what();  // invalid moves are recorded, not fatal
        }
        step.post_action_digest = apps::digest_state(state);
        record.steps.push_back(std::move(step));
        ++index;
    }
    record.final_digest = apps::digest_state(state);
    record.frozen = true;
    apps::persist_app_state(state, sandbox_root);
    return record;
}

void finalize_run(const std::string& sandbox_root, const std::string& app_id) {
    apps::AppState state = apps::load_app_state(app_id, sandbox_root);
    apps::persist_app_state(state, sandbox_root);
}

RunArtifact run_task(const task::TaskInstance& t, const ScriptedAgent& agent,
                     const verify::VerifierConfig& cfg, const SandboxSpec& spec) {
    RunArtifact artifact;
    artifact.task = t;
    artifact.verifier_revision = cfg.revision;
    fs::path run_dir(spec.root);
    fs::path sandbox = run_dir / "final_state";
    artifact.run_dir = run_dir.string();

    SandboxSpec inner = spec;
    inner.root = sandbox.string();
    try {
        init_sandbox(t, inner);
    } catch (const Error& e) {
        throw Error(e.kind(), std::string("stage init: ") + e.what());
    }
    try {
        artifact.trajectory = execute_agent(sandbox.string(), t, agent, spec.step_budget);
        finalize_run(sandbox.string(), t.app_id);
    } catch (const Error& e) {
        throw Error(e.kind(), std::string("stage execute: ") + e.what());
    }
    artifact.verdicts = verify::run_check_suite(cfg, t, sandbox.string());
    artifact.reward = verify::reward_from_verdicts(artifact.verdicts);
    persist_run_artifact(artifact, agent, spec);
    return artifact;
}

void persist_run_artifact(const RunArtifact& artifact, const ScriptedAgent& agent,
                          const SandboxSpec& spec) {
    fs::path dir(artifact.run_dir);
    fs::create_directories(dir);
    write_file((dir / "task.json").string(), task::task_to_json(artifact.task).dump(2) + "\n");
    write_file((dir / "trajectory.json").string(), artifact.trajectory.to_json().dump(2) + "\n");
    Json verdicts = Json::array();
    for (const auto& v : artifact.verdicts) verdicts.push_back(v.to_json());
    write_file((dir / "verdicts.json").string(), verdicts.dump(2) + "\n");
    write_file((dir / "reward.json").string(), artifact.reward.to_json().dump(2) + "\n");
    Json meta{{"agent_id", agent.agent_id},
              {"verifier_revision", artifact.verifier_revision},
              {"budget", spec.step_budget},
              {"seed", spec.run_seed}};
    write_file((dir / "meta.json").string(), meta.dump(2) + "\n");
}

RunArtifact load_run_artifact(const std::string& run_dir) {
    fs::path dir(run_dir);
    RunArtifact artifact;
    artifact.run_dir = run_dir;
    artifact.task = task::parse_task_instance(read_file((dir / "task.json").string()));
    artifact.trajectory =
        TrajectoryRecord::from_json(Json::parse(read_file((dir / "trajectory.json").string())));
    for (const auto& jv : Json::parse(read_file((dir / "verdicts.json").string()))) {
        artifact.verdicts.push_back(verify::VerdictRecord::from_json(jv));
    }
    artifact.reward =
        task::RewardReport::from_json(Json::parse(read_file((dir / "reward.json").string())));
    Json meta = Json::parse(read_file((dir / "meta.json").string()));
    artifact.verifier_revision = meta.value("verifier_revision", 0);
    return artifact;
}

std::string replay_trajectory(const task::TaskInstance& t, const TrajectoryRecord& trajectory,
                              const std::string& fresh_root) {
    SandboxSpec spec;
    spec.root = fresh_root;
    spec.app_id = t.app_id;
    init_sandbox(t, spec);
    apps::AppState state = apps::load_app_state(t.app_id, fresh_root);
    for (const auto& step : trajectory.steps) {
        if (!step.error.empty()) continue;  // rejected steps were no-ops
        state = apps::apply_action(state, step.action);
    }
    return apps::digest_state(state);
}

}  // namespace wb::harness
