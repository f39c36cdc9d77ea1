#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "worldbench/evolve.hpp"
#include "worldbench/harness.hpp"
#include "worldbench/task.hpp"

namespace wb::synth {

// Slot value generator: either an explicit choice list or an integer range.
struct SlotDomain {
    std::vector<std::string> choices;
    std::optional<std::pair<long, long>> int_range;  // inclusive
};

// Parameterized task recipe. Every `${slot}` in the instruction, criteria,
// seed and solution patterns must name an entry of slot_domains.
struct GoalTemplate {
    std::string template_id;
    std::string app_id;
    std::string feature_area;
    std::string instruction_pattern;
    int base_difficulty = 1;
    std::map<std::string, SlotDomain> slot_domains;
    Json criteria_pattern = Json::array();  // CheckSpec objects with ${slot}s
    Json seed_pattern = Json::object();     // {artifacts:[...], init_actions:[...]}
    Json solution_pattern = Json::array();  // AppAction objects with ${slot}s

    static GoalTemplate from_json(const Json& j);
};

// One JSON file per template under <dir>/<app_id>/*.json.
std::vector<GoalTemplate> load_templates(const std::string& templates_dir,
                                         const std::string& app_id);

struct TaskProposal {
    std::string template_id;
    std::map<std::string, std::string> slot_values;
    task::TaskInstance task;                 // drafted instance
    std::vector<apps::AppAction> solution;   // scripted reference agent
    int difficulty_score = 0;                // set by filter_proposal
    std::string generatability;              // ok | no_coherent_artifacts
    std::string verifier_match;              // retain | extend | reject
    std::string match_detail;

    bool emittable() const {
        return difficulty_score >= 3 && generatability == "ok" && verifier_match == "retain";
    }
};

// Deterministic slot instantiation, round-robin over templates.
std::vector<TaskProposal> propose_goals(const std::vector<GoalTemplate>& templates, int count,
                                        uint64_t seed);

// Difficulty rubric + scratch materialization; annotates, never throws.
TaskProposal filter_proposal(TaskProposal p);

// retain / extend / reject against the app's endpoint registry; lessons flag
// criteria whose resources carry unresolved repair history.
TaskProposal match_verifier(TaskProposal p, const std::vector<evolve::Lesson>& lessons);

// Recipe for a retained proposal; validated by actually initializing it.
task::EnvInitRecipe materialize_environment(const TaskProposal& p);

struct CoverageGap {
    std::string app_id;
    std::string feature_area;
    int existing_task_count = 0;
    bool has_reliable_verification_path = true;
    int priority = 0;  // 1 = most urgent

    Json to_json() const;
};

std::vector<CoverageGap> review_coverage(const std::vector<task::TaskInstance>& task_set,
                                         const std::vector<GoalTemplate>& templates,
                                         const std::vector<evolve::Lesson>& lessons = {});

struct GenerationManifest {
    std::string app_id;
    uint64_t seed = 0;
    int task_count = 0;
    double mean_criteria_per_task = 0;
    double mean_seed_artifacts_per_task = 0;
    std::vector<std::string> task_ids;

    Json to_json() const;
};

// Emits task_NNNN.json plus task_NNNN.agent.json per accepted proposal and a
// manifest.json; bytes are a pure function of (templates, count, seed).
GenerationManifest generate_tasks(const std::vector<GoalTemplate>& templates, int count,
                                  uint64_t seed, const std::string& out_dir);

}  // namespace wb::synth
