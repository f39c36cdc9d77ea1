#pragma once

#include <optional>
#include <string>
#include <vector>

#include "worldbench/harness.hpp"
#include "worldbench/task.hpp"
#include "worldbench/verifier.hpp"

namespace wb::evolve {

// Criterion-level judgment from the ground-truth inspector: direct,
// schema-aware state access, never routed through VerifierConfig bindings.
struct ReferenceVerdict {
    std::string criterion_id;
    bool passed = false;
    Json basis = Json::object();
};

struct DisagreementRecord {
    std::string criterion_id;
    bool verifier_passed = false;
    bool reference_passed = false;
    std::string classification;  // verifier_wrong | agent_failure | reference_wrong
    std::string rationale;
};

// Binding delta that repaired a failed verifier assumption; replayable.
struct Lesson {
    std::string app_id;
    std::string failed_assumption;
    std::string resource;
    std::string old_location;
    std::string new_location;
    std::string source_task_id;
    int revision_from = 0;
    int revision_to = 0;

    Json to_json() const;
    static Lesson from_json(const Json& j);
};

struct EvolutionReport {
    std::string task_id;
    int rounds_used = 0;
    int divergences_before = 0;
    int divergences_after = 0;
    std::vector<Lesson> repairs;
    std::string outcome;  // fixed | not_fixed_within_budget | no_disagreement

    Json to_json() const;
};

// One verdict per criterion, computed from the frozen final state only.
std::vector<ReferenceVerdict> reference_evaluate(const task::TaskInstance& t,
                                                 const std::string& final_state_dir);

// id-keyed join; one record per criterion whose passed flags differ.
// Classification here uses the reference as ground truth (the production
// path); classify_disagreement exposes the three-way rule for callers that
// hold an independent ground truth.
std::vector<DisagreementRecord> align_verdicts(const std::vector<verify::VerdictRecord>& verifier,
                                               const std::vector<ReferenceVerdict>& reference);

DisagreementRecord classify_disagreement(const std::string& criterion_id, bool verifier_passed,
                                         bool reference_passed,
                                         const ReferenceVerdict& ground_truth);

// Bounded, evidence-guided binding repair over a frozen run. Never touches
// task, trajectory or state bytes; re-verifies the final-state digest.
std::pair<verify::VerifierConfig, EvolutionReport> evolve_verifier(
    const harness::RunArtifact& run, const verify::VerifierConfig& cfg, int budget = 3);

struct AgreementSummary {
    int task_count = 0;
    double task_level = 0;        // fraction of tasks with matching aggregate verdicts
    double checklist = 0;         // fraction of matching per-criterion flags
    std::optional<double> task_level_after;
    std::optional<double> checklist_after;

    Json to_json() const;
    std::string to_table() const;  // fixed-width before/after text table
};

struct RunForReport {
    std::vector<verify::VerdictRecord> verdicts;
    std::vector<ReferenceVerdict> references;
    std::optional<std::vector<verify::VerdictRecord>> verdicts_after;
};

AgreementSummary agreement_report(const std::vector<RunForReport>& runs);

// --- fault catalog -----------------------------------------------------------

struct FaultSpec {
    std::string fault_id;
    std::string app_id;
    std::string binding;   // binding the fault rewrites
    std::string bad_value;
    bool operator_covered = true;  // has a registered repair operator
};

std::vector<FaultSpec> fault_catalog();
std::vector<FaultSpec> fault_catalog(const std::string& app_id);
verify::VerifierConfig inject_fault(const verify::VerifierConfig& cfg, const FaultSpec& fault);

// append-only per-app ledger (lessons.jsonl)
void append_lessons(const std::string& path, const std::vector<Lesson>& lessons);
std::vector<Lesson> load_lessons(const std::string& path);

}  // namespace wb::evolve
