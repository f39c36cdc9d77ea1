#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "worldbench/apps/app_state.hpp"
#include "worldbench/common.hpp"

namespace wb::task {

struct SeedArtifact {
    std::string rel_path;
    std::string content;  // raw bytes; base64 on the wire
    std::string kind;     // vault_note | workbook_file | store_file | plain_file
};

struct EnvInitRecipe {
    std::vector<SeedArtifact> seed_artifacts;
    std::vector<apps::AppAction> init_actions;
};

// Expected-value mini-language applied to query-endpoint evidence.
struct ExpectPredicate {
    std::string op;            // equals | contains | count_eq | count_ge | within_abs
    std::string target_field;  // dotted path into verdict evidence
    Scalar operand = 0.0;
    double tolerance = 0.0;    // within_abs only

    Json to_json() const;
    static ExpectPredicate from_json(const Json& j, const std::string& path);
};

struct CheckSpec {
    std::string criterion_id;
    std::string endpoint;
    std::vector<std::pair<std::string, std::string>> args;  // order preserved
    std::optional<ExpectPredicate> expect;                  // required for get-* endpoints
};

struct TaskInstance {
    std::string task_id;
    std::string app_id;
    std::string instruction;
    int difficulty = 1;
    EnvInitRecipe env_init;
    std::vector<CheckSpec> criteria;
    std::map<std::string, std::string> metadata;
};

TaskInstance parse_task_instance(const std::string& raw);
Json task_to_json(const TaskInstance& t);

struct Finding {
    std::string path;     // location of the violated invariant
    std::string message;
};

struct ValidationReport {
    std::vector<Finding> findings;
    bool ok() const { return findings.empty(); }
};

// forward declared here to avoid a verifier include cycle; the registry is
// just the endpoint spec list for the task's app.
struct EndpointSummary {
    std::string name;
    std::vector<std::string> required_params;
    std::vector<std::string> all_params;
};

ValidationReport validate_task_instance(const TaskInstance& t,
                                        const std::vector<EndpointSummary>& registry);

struct CriterionOutcome {
    std::string criterion_id;
    bool passed = false;
    std::string evidence_digest;
};

struct RewardReport {
    int n_pass = 0;
    int n_total = 0;
    std::vector<CriterionOutcome> per_criterion;

    double reward() const { return n_total == 0 ? 0.0 : static_cast<double>(n_pass) / n_total; }
    // decimal with 4 places, the report rendering
    std::string reward_text() const;
    Json to_json() const;
    static RewardReport from_json(const Json& j);
};

struct VerdictLite {
    std::string criterion_id;
    bool passed = false;
    Json evidence;
};

RewardReport compute_reward(const std::vector<VerdictLite>& verdicts);

// Evidence-path lookup + predicate evaluation, shared by verifier and tests.
std::optional<Json> evidence_field(const Json& evidence, const std::string& dotted_path);
bool expect_matches(const ExpectPredicate& p, const Json& evidence, std::string* why);

}  // namespace wb::task
