#pragma once

#include <optional>
#include <string>
#include <vector>

#include "worldbench/task.hpp"
#include "worldbench/verifier.hpp"

namespace wb::harness {

struct SandboxSpec {
    std::string root;       // must be empty (or absent) at init
    std::string app_id;
    int step_budget = 80;
    int64_t run_seed = 0;
};

// Deterministic mutation of a script, for producing genuine agent failures.
struct FaultProfile {
    std::string kind;  // drop_step | corrupt_param | duplicate_step
    int step = 0;      // 0-based index into the script
    std::string param;   // corrupt_param only
    std::string value;   // corrupt_param only

    Json to_json() const;
    static FaultProfile from_json(const Json& j);
};

struct ScriptedAgent {
    std::string agent_id;
    std::vector<apps::AppAction> script;
    std::optional<FaultProfile> fault_profile;

    Json to_json() const;
    static ScriptedAgent from_json(const Json& j);
    static ScriptedAgent load(const std::string& path);
};

struct TrajectoryStep {
    int index = 0;
    apps::AppAction action;
    std::string post_action_digest;
    std::string error;  // non-empty when the action was rejected (no-op step)
};

struct TrajectoryRecord {
    std::string task_id;
    std::string agent_id;
    std::vector<TrajectoryStep> steps;
    std::string final_digest;
    bool frozen = false;

    Json to_json() const;
    static TrajectoryRecord from_json(const Json& j);
};

struct RunArtifact {
    task::TaskInstance task;
    TrajectoryRecord trajectory;
    std::vector<verify::VerdictRecord> verdicts;
    task::RewardReport reward;
    int verifier_revision = 0;
    std::string run_dir;
};

// Writes seeds, applies init actions, persists, returns the initial digest.
std::string init_sandbox(const task::TaskInstance& t, const SandboxSpec& spec);

// Applies the (possibly fault-mutated) script against the sandbox state,
// recording a post-action digest per step. Rejected actions are recorded
// with an error note and skipped; execution continues.
TrajectoryRecord execute_agent(const std::string& sandbox_root, const task::TaskInstance& t,
                               const ScriptedAgent& agent, int step_budget);

// Persists the in-memory state reached by replaying the trajectory. Idempotent.
void finalize_run(const std::string& sandbox_root, const std::string& app_id);

// init -> execute -> finalize -> check suite -> reward; artifacts persisted
// under run_dir (the spec.root's parent layout: see persist_run_artifact).
RunArtifact run_task(const task::TaskInstance& t, const ScriptedAgent& agent,
                     const verify::VerifierConfig& cfg, const SandboxSpec& spec);

// Run directory layout:
//   <run_dir>/task.json, trajectory.json, final_state/, verdicts.json,
//   reward.json, meta.json
void persist_run_artifact(const RunArtifact& artifact, const ScriptedAgent& agent,
                          const SandboxSpec& spec);
RunArtifact load_run_artifact(const std::string& run_dir);

// Re-applies trajectory actions from a fresh init; returns the replayed
// final digest (must equal trajectory.final_digest).
std::string replay_trajectory(const task::TaskInstance& t, const TrajectoryRecord& trajectory,
                              const std::string& fresh_root);

std::vector<apps::AppAction> effective_script(const ScriptedAgent& agent);

}  // namespace wb::harness
