#include "worldbench/evolve.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <map>
#include <set>
#include <sstream>

namespace fs = std::filesystem;

namespace wb::evolve {

namespace {

// ---------------------------------------------------------------------------
// Ground-truth inspector. Direct, schema-aware typed-state access; the
// independent half of every verifier-vs-reference comparison. Keep this free
// of VerifierConfig and binding lookups.

Json reference_check(const apps::AppState& state, const task::CheckSpec& c, bool& passed) {
    Json basis = Json::object();
    std::map<std::string, std::string> args(c.args.begin(), c.args.end());
    auto arg_int = [&](const std::string& key) { return std::stoi(args.at(key)); };
    const std::string& ep = c.endpoint;

    if (std::holds_alternative<apps::VaultState>(state)) {
        const auto& v = std::get<apps::VaultState>(state);
        if (ep == "check-folder-exists") {
            passed = v.folder_exists(args.at("path"));
            return basis;
        }
        if (ep == "check-note-count") {
            basis["count"] = v.note_count();
            passed = v.note_count() == arg_int("count");
            return basis;
        }
        if (ep == "get-vault-stats") {
            basis["note_count"] = v.note_count();
            basis["folder_count"] = v.folder_count();
            passed = true;  // evidence endpoint; expect applied by caller
            return basis;
        }
        if (ep == "check-note-in-folder" || ep == "check-folder-note-count") {
            const apps::VaultFolder* cur = &v.root;
            std::stringstream ss(args.at("folder"));
            std::string part;
            while (std::getline(ss, part, '/')) {
                if (part.empty()) continue;
                auto it = cur->folders.find(part);
                if (it == cur->folders.end()) {
                    passed = false;
                    basis["error"] = "folder not found";
                    return basis;
                }
                cur = &it->second;
            }
            if (ep == "check-note-in-folder") {
                passed = cur->notes.count(args.at("name")) > 0;
            } else {
                basis["count"] = cur->notes.size();
                passed = static_cast<int>(cur->notes.size()) == arg_int("count");
            }
            return basis;
        }
        const apps::Note* note = v.find_note(args.at("path"));
        if (!note) {
            passed = false;
            basis["error"] = "note not found";
            return basis;
        }
        if (ep == "check-note-exists") passed = true;
        else if (ep == "check-note-links-to") passed = note->links.count(args.at("target")) > 0;
        else if (ep == "check-note-has-tag") passed = note->tags.count(args.at("tag")) > 0;
        else if (ep == "check-body-contains") {
            passed = note->body.find(args.at("text")) != std::string::npos;
        } else if (ep == "check-frontmatter-field") {
            auto it = note->frontmatter.find(args.at("key"));
            passed = it != note->frontmatter.end() && it->second == args.at("value");
        } else if (ep == "get-note") {
            Json fm = Json::object();
            for (const auto& [k, val] : note->frontmatter) fm[k] = val;
            basis["body"] = note->body;
            basis["frontmatter"] = fm;
            basis["tags"] = std::vector<std::string>(note->tags.begin(), note->tags.end());
            basis["links"] = std::vector<std::string>(note->links.begin(), note->links.end());
            passed = true;
        } else {
            passed = false;
            basis["error"] = "inspector has no rule for " + ep;
        }
        return basis;
    }

    if (std::holds_alternative<apps::WorkbookState>(state)) {
        const auto& w = std::get<apps::WorkbookState>(state);
        if (ep == "check-sheet-exists") {
            passed = w.find_sheet(args.at("name")) != nullptr;
            return basis;
        }
        if (ep == "check-sheet-count") {
            basis["count"] = w.sheets.size();
            passed = static_cast<int>(w.sheets.size()) == arg_int("count");
            return basis;
        }
        if (ep == "get-sheet-names") {
            std::vector<std::string> names;
            for (const auto& s : w.sheets) names.push_back(s.name);
            basis["sheets"] = names;
            passed = true;
            return basis;
        }
        const std::string& sheet = args.at("sheet");
        const std::string& addr = args.at("addr");
        if (!w.find_sheet(sheet)) {
            passed = false;
            basis["error"] = "sheet not found";
            return basis;
        }
        const apps::Cell* cell = w.find_cell(sheet, addr);
        auto displayed = [&]() -> std::optional<Scalar> {
            if (!cell) return std::nullopt;
            if (cell->formula) {
                apps::EvalOutcome out = apps::eval_formula(w, sheet, addr);
                if (!out.ok()) return std::nullopt;
                return out.value;
            }
            return cell->value;
        };
        if (ep == "check-cell-empty") {
            passed = !cell || (!cell->value && !cell->formula);
        } else if (ep == "check-cell-is-formula") {
            passed = cell && cell->formula.has_value();
        } else if (ep == "check-cell-bold") {
            passed = cell && cell->bold;
        } else if (ep == "check-cell-formula-contains") {
            passed = cell && cell->formula &&
                     cell->formula->find(args.at("text")) != std::string::npos;
        } else if (ep == "check-cell-value") {
            auto got = displayed();
            passed = false;
            if (got) {
                basis["value"] = scalar_to_json(*got);
                std::string got_text = scalar_to_string(*got);
                const std::string& want = args.at("value");
                try {
                    size_t ia = 0, ib = 0;
                    double da = std::stod(got_text, &ia);
                    double db = std::stod(want, &ib);
                    passed = ia == got_text.size() && ib == want.size()
                                 ? numbers_equal(da, db)
                                 : got_text == want;
                } catch (...) {
                    passed = got_text == want;
                }
            }
        } else if (ep == "check-cell-value-within") {
            auto got = displayed();
            passed = got && std::holds_alternative<double>(*got) &&
                     std::abs(std::get<double>(*got) - std::stod(args.at("value"))) <=
                         std::stod(args.at("tolerance"));
        } else if (ep == "get-cell") {
            auto got = displayed();
            basis["value"] = got ? scalar_to_json(*got) : Json(nullptr);
            basis["bold"] = cell && cell->bold;
            basis["kind"] = !cell || (!cell->value && !cell->formula) ? "empty"
                            : cell->formula                           ? "formula"
                                                                      : "literal";
            if (cell && cell->formula) basis["formula"] = *cell->formula;
            passed = true;
        } else {
            passed = false;
            basis["error"] = "inspector has no rule for " + ep;
        }
        return basis;
    }

    const auto& m = std::get<apps::MediaLibraryState>(state);
    if (ep == "check-image-present") {
        passed = m.find_image(args.at("filename")) != nullptr;
        return basis;
    }
    if (ep == "check-tag-exists") {
        passed = m.find_tag(args.at("name")) != nullptr;
        return basis;
    }
    if (ep == "check-image-count") {
        size_t n = m.library_store.table("images").size();
        basis["count"] = n;
        passed = static_cast<int>(n) == arg_int("count");
        return basis;
    }
    if (ep == "check-tag-count") {
        basis["count"] = m.tags_table().size();
        passed = static_cast<int>(m.tags_table().size()) == arg_int("count");
        return basis;
    }
    if (ep == "get-tag-list") {
        std::vector<std::string> names;
        for (const auto& row : m.tags_table()) names.push_back(row.value("name", ""));
        std::sort(names.begin(), names.end());
        basis["tags"] = names;
        passed = true;
        return basis;
    }
    if (ep == "get-library-stats") {
        basis["images"] = m.library_store.table("images").size();
        basis["tags"] = m.tags_table().size();
        basis["schema_version"] = m.schema_version;
        passed = true;
        return basis;
    }
    const Json* img = m.find_image(args.at("filename"));
    if (!img) {
        passed = false;
        basis["error"] = "image not found";
        return basis;
    }
    std::vector<std::string> tags = m.image_tags(args.at("filename"));
    if (ep == "check-image-has-tag") {
        basis["tags"] = tags;
        passed = std::find(tags.begin(), tags.end(), args.at("tag")) != tags.end();
    } else if (ep == "check-image-rating") {
        basis["rating"] = (*img)["rating"];
        passed = (*img)["rating"].get<int>() == arg_int("rating");
    } else if (ep == "check-rating-at-least") {
        basis["rating"] = (*img)["rating"];
        passed = (*img)["rating"].get<int>() >= arg_int("rating");
    } else if (ep == "check-image-tag-count") {
        basis["count"] = tags.size();
        passed = static_cast<int>(tags.size()) == arg_int("count");
    } else if (ep == "get-image-info") {
        basis["rating"] = (*img)["rating"];
        basis["tags"] = tags;
        passed = true;
    } else {
        passed = false;
        basis["error"] = "inspector has no rule for " + ep;
    }
    return basis;
}

}  // namespace

std::vector<ReferenceVerdict> reference_evaluate(const task::TaskInstance& t,
                                                 const std::string& final_state_dir) {
    apps::AppState state = apps::load_app_state(t.app_id, final_state_dir);
    std::vector<ReferenceVerdict> out;
    for (const auto& c : t.criteria) {
        ReferenceVerdict rv;
        rv.criterion_id = c.criterion_id;
        bool passed = false;
        try {
            rv.basis = reference_check(state, c, passed);
        } catch (const Error& e) {
            passed = false;
            rv.basis["error"] = e.what();
        }
        if (c.expect) {
            std::string why;
            bool hit = task::expect_matches(*c.expect, rv.basis, &why);
            passed = passed && hit;
            if (!hit) rv.basis["expect_failure"] = why;
        } else if (c.endpoint.rfind("get-", 0) == 0) {
            passed = false;
        }
        rv.passed = passed;
        out.push_back(std::move(rv));
    }
    return out;
}

DisagreementRecord classify_disagreement(const std::string& criterion_id, bool verifier_passed,
                                         bool reference_passed,
                                         const ReferenceVerdict& ground_truth) {
    DisagreementRecord d;
    d.criterion_id = criterion_id;
    d.verifier_passed = verifier_passed;
    d.reference_passed = reference_passed;
    if (ground_truth.passed != verifier_passed) {
        d.classification = "verifier_wrong";
        d.rationale = "verifier contradicts directly inspected state";
    } else if (!ground_truth.passed) {
        d.classification = "agent_failure";
        d.rationale = "criterion genuinely unsatisfied by the run; divergence is not verifier-side";
    } else {
        d.classification = "reference_wrong";
        d.rationale = "inspector defect: reference disagrees with both verifier and ground truth";
    }
    return d;
}

std::vector<DisagreementRecord> align_verdicts(const std::vector<verify::VerdictRecord>& verifier,
                                               const std::vector<ReferenceVerdict>& reference) {
    std::map<std::string, const verify::VerdictRecord*> by_id;
    for (const auto& v : verifier) by_id[v.criterion_id] = &v;
    std::map<std::string, const ReferenceVerdict*> ref_by_id;
    for (const auto& r : reference) ref_by_id[r.criterion_id] = &r;
    if (by_id.size() != verifier.size() || ref_by_id.size() != reference.size() ||
        by_id.size() != ref_by_id.size()) {
        throw Error("CriterionMismatch", "criterion id sets differ or contain duplicates");
    }
    std::vector<DisagreementRecord> out;
    for (const auto& [id, v] : by_id) {
        auto it = ref_by_id.find(id);
        if (it == ref_by_id.end()) {
            throw Error("CriterionMismatch", "reference lacks criterion " + id);
        }
        bool vp = v->effective_passed();
        if (vp != it->second->passed) {
            out.push_back(classify_disagreement(id, vp, it->second->passed, *it->second));
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Repair operators: auditable binding rewrites. Candidate selection is
// evidence-guided first (a missing-table error for table T proposes rebinding
// T to the other store), then exhaustive in registry order.

namespace {

struct RepairCandidate {
    std::string resource;
    std::string new_location;
    std::string failed_assumption;
};

std::string other_store(const std::string& s) { return s == "library" ? "data" : "library"; }

std::vector<RepairCandidate> repair_candidates(const verify::VerifierConfig& cfg,
                                               const std::vector<verify::VerdictRecord>& verdicts,
                                               const std::set<std::string>& disagreeing) {
    verify::VerifierConfig canon = verify::default_config(cfg.app_id);
    std::vector<RepairCandidate> out;
    auto add = [&](const std::string& resource, const std::string& location,
                   const std::string& assumption) {
        for (const auto& c : out) {
            if (c.resource == resource && c.new_location == location) return;
        }
        out.push_back({resource, location, assumption});
    };

    // evidence-guided proposals from execution errors on disagreeing criteria
    for (const auto& v : verdicts) {
        if (!disagreeing.count(v.criterion_id) || v.error.empty()) continue;
        size_t at = v.error.find("missing table: ");
        if (at != std::string::npos) {
            std::string rest = v.error.substr(at + 15);
            std::string table = rest.substr(0, rest.find(' '));
            std::string key = "table." + table + ".store";
            auto it = cfg.bindings.find(key);
            if (it != cfg.bindings.end()) {
                add(key, other_store(it->second),
                    "assumed table " + table + " lives in store " + it->second);
            }
        }
        if (v.error.find("MissingState") != std::string::npos ||
            v.error.find("not found at") != std::string::npos ||
            v.error.find("missing store file") != std::string::npos ||
            v.error.find("missing ") != std::string::npos) {
            for (const auto& [key, loc] : cfg.bindings) {
                bool is_path = key == "vault.root" || key == "workbook.path" ||
                               key.rfind("store.", 0) == 0;
                if (is_path && canon.bindings.count(key) && canon.bindings.at(key) != loc) {
                    add(key, canon.bindings.at(key), "assumed state lives at " + loc);
                }
            }
        }
        if (v.error.find("missing column: ") != std::string::npos) {
            for (const auto& [key, loc] : cfg.bindings) {
                if (key.rfind("column.", 0) == 0 && canon.bindings.count(key) &&
                    canon.bindings.at(key) != loc) {
                    add(key, canon.bindings.at(key), "assumed column mapping " + loc);
                }
            }
        }
    }
    // error-free divergences confined to join-reading endpoints
    bool all_join = !disagreeing.empty();
    for (const auto& v : verdicts) {
        if (!disagreeing.count(v.criterion_id)) continue;
        const verify::EndpointSpec* spec = verify::find_endpoint(cfg.app_id, v.endpoint);
        bool reads_join =
            spec && std::find(spec->reads.begin(), spec->reads.end(), "join.image_tag") !=
                        spec->reads.end();
        if (!reads_join) all_join = false;
    }
    if (all_join && cfg.bindings.count("join.image_tag") &&
        canon.bindings.count("join.image_tag") &&
        cfg.bindings.at("join.image_tag") != canon.bindings.at("join.image_tag")) {
        add("join.image_tag", canon.bindings.at("join.image_tag"),
            "assumed join path " + cfg.bindings.at("join.image_tag"));
    }

    // exhaustive registry order: path templates, join path, column mappings,
    // store toggles
    for (const auto& [key, loc] : cfg.bindings) {
        bool is_path =
            key == "vault.root" || key == "workbook.path" || key.rfind("store.", 0) == 0;
        if (is_path && canon.bindings.count(key) && canon.bindings.at(key) != loc) {
            add(key, canon.bindings.at(key), "assumed state lives at " + loc);
        }
    }
    if (cfg.bindings.count("join.image_tag") &&
        cfg.bindings.at("join.image_tag") != canon.bindings["join.image_tag"]) {
        add("join.image_tag", canon.bindings["join.image_tag"],
            "assumed join path " + cfg.bindings.at("join.image_tag"));
    }
    for (const auto& [key, loc] : cfg.bindings) {
        if (key.rfind("column.", 0) == 0 && canon.bindings.count(key) &&
            canon.bindings.at(key) != loc) {
            add(key, canon.bindings.at(key), "assumed column mapping " + loc);
        }
    }
    for (const char* table : {"tags", "tagged_images", "images"}) {
        std::string key = std::string("table.") + table + ".store";
        auto it = cfg.bindings.find(key);
        if (it != cfg.bindings.end()) {
            add(key, other_store(it->second),
                std::string("assumed table ") + table + " lives in store " + it->second);
        }
    }
    return out;
}

int count_verifier_wrong(const std::vector<DisagreementRecord>& ds) {
    return static_cast<int>(std::count_if(ds.begin(), ds.end(), [](const DisagreementRecord& d) {
        return d.classification == "verifier_wrong";
    }));
}

std::string bindings_fingerprint(const verify::VerifierConfig& cfg) {
    Json b = Json::object();
    for (const auto& [k, v] : cfg.bindings) b[k] = v;
    return b.dump();
}

}  // namespace

std::pair<verify::VerifierConfig, EvolutionReport> evolve_verifier(
    const harness::RunArtifact& run, const verify::VerifierConfig& cfg, int budget) {
    if (!run.trajectory.frozen) {
        throw Error("FrozenStateViolation", "trajectory is not frozen");
    }
    fs::path state_dir = fs::path(run.run_dir) / "final_state";
    apps::AppState state = apps::load_app_state(run.task.app_id, state_dir.string());
    if (apps::digest_state(state) != run.trajectory.final_digest) {
        throw Error("FrozenStateViolation",
                    "final state digest does not match the frozen trajectory");
    }
    std::string task_bytes_before = digest_directory(run.run_dir + "/final_state");
    std::string task_json_before = sha256_hex(read_file(run.run_dir + "/task.json"));
    std::string traj_json_before = sha256_hex(read_file(run.run_dir + "/trajectory.json"));

    std::vector<ReferenceVerdict> reference = reference_evaluate(run.task, state_dir.string());

    verify::VerifierConfig current = cfg;
    EvolutionReport report;
    report.task_id = run.task.task_id;

    auto evaluate = [&](const verify::VerifierConfig& c) {
        std::vector<verify::VerdictRecord> verdicts =
            verify::run_check_suite(c, run.task, state_dir.string());
        std::vector<DisagreementRecord> ds = align_verdicts(verdicts, reference);
        return std::make_pair(std::move(verdicts), std::move(ds));
    };

    auto [verdicts, disagreements] = evaluate(current);
    report.divergences_before = static_cast<int>(disagreements.size());
    report.divergences_after = report.divergences_before;

    std::set<std::string> tried = {bindings_fingerprint(current)};

    while (report.rounds_used < budget && count_verifier_wrong(disagreements) > 0) {
        std::set<std::string> disagreeing;
        for (const auto& d : disagreements) {
            if (d.classification == "verifier_wrong") disagreeing.insert(d.criterion_id);
        }
        std::vector<RepairCandidate> candidates =
            repair_candidates(current, verdicts, disagreeing);
        const RepairCandidate* chosen = nullptr;
        verify::VerifierConfig next;
        for (const auto& cand : candidates) {
            verify::VerifierConfig trial = current;
            trial.bindings[cand.resource] = cand.new_location;
            if (tried.count(bindings_fingerprint(trial))) continue;
            chosen = &cand;
            next = std::move(trial);
            break;
        }
        if (!chosen) break;  // NoApplicableOperator: recorded as not_fixed

        ++report.rounds_used;
        tried.insert(bindings_fingerprint(next));
        next.revision = current.revision + 1;
        auto [next_verdicts, next_ds] = evaluate(next);
        if (next_ds.size() < disagreements.size()) {
            Lesson lesson;
            lesson.app_id = cfg.app_id;
            lesson.failed_assumption = chosen->failed_assumption;
            lesson.resource = chosen->resource;
            lesson.old_location = current.bindings.at(chosen->resource);
            lesson.new_location = chosen->new_location;
            lesson.source_task_id = run.task.task_id;
            lesson.revision_from = current.revision;
            lesson.revision_to = next.revision;
            report.repairs.push_back(std::move(lesson));
            current = std::move(next);
            verdicts = std::move(next_verdicts);
            disagreements = std::move(next_ds);
        }
        // otherwise revert: `current` stays, the candidate is remembered as tried
    }

    report.divergences_after = static_cast<int>(disagreements.size());
    if (report.divergences_before == 0) {
        report.outcome = "no_disagreement";
    } else if (count_verifier_wrong(disagreements) == 0) {
        report.outcome = "fixed";
    } else {
        report.outcome = "not_fixed_within_budget";
    }

    // evolution must leave the frozen run untouched
    if (digest_directory(run.run_dir + "/final_state") != task_bytes_before ||
        sha256_hex(read_file(run.run_dir + "/task.json")) != task_json_before ||
        sha256_hex(read_file(run.run_dir + "/trajectory.json")) != traj_json_before) {
        throw Error("FrozenStateViolation", "evolution modified frozen run bytes");
    }
    return {current, report};
}

Json Lesson::to_json() const {
    return Json{{"app_id", app_id},
                {"failed_assumption", failed_assumption},
                {"corrective_action",
                 Json{{"resource", resource}, {"old", old_location}, {"new", new_location}}},
                {"source_task_id", source_task_id},
                {"revision_from", revision_from},
                {"revision_to", revision_to}};
}

Lesson Lesson::from_json(const Json& j) {
    Lesson l;
    l.app_id = j.at("app_id").get<std::string>();
    l.failed_assumption = j.at("failed_assumption").get<std::string>();
    const Json& ca = j.at("corrective_action");
    l.resource = ca.at("resource").get<std::string>();
    l.old_location = ca.at("old").get<std::string>();
    l.new_location = ca.at("new").get<std::string>();
    l.source_task_id = j.at("source_task_id").get<std::string>();
    l.revision_from = j.at("revision_from").get<int>();
    l.revision_to = j.at("revision_to").get<int>();
    return l;
}

Json EvolutionReport::to_json() const {
    Json repairs_json = Json::array();
    for (const auto& l : repairs) repairs_json.push_back(l.to_json());
    return Json{{"task_id", task_id},
                {"rounds_used", rounds_used},
                {"divergences_before", divergences_before},
                {"divergences_after", divergences_after},
                {"repairs", repairs_json},
                {"outcome", outcome}};
}

AgreementSummary agreement_report(const std::vector<RunForReport>& runs) {
    if (runs.empty()) throw Error("EmptyInput", "agreement report needs at least one run");
    AgreementSummary s;
    s.task_count = static_cast<int>(runs.size());

    auto compute = [&](bool use_after, double& task_level, double& checklist) {
        int task_matches = 0;
        int criterion_matches = 0, criterion_total = 0;
        for (const auto& r : runs) {
            const std::vector<verify::VerdictRecord>& verdicts =
                use_after && r.verdicts_after ? *r.verdicts_after : r.verdicts;
            std::map<std::string, bool> ref;
            for (const auto& rv : r.references) ref[rv.criterion_id] = rv.passed;
            bool agg_v = true, agg_r = true;
            for (const auto& v : verdicts) {
                bool vp = v.effective_passed();
                bool rp = ref.count(v.criterion_id) ? ref[v.criterion_id] : false;
                agg_v = agg_v && vp;
                agg_r = agg_r && rp;
                ++criterion_total;
                if (vp == rp) ++criterion_matches;
            }
            if (agg_v == agg_r) ++task_matches;
        }
        task_level = static_cast<double>(task_matches) / runs.size();
        checklist = criterion_total == 0
                        ? 1.0
                        : static_cast<double>(criterion_matches) / criterion_total;
    };

    compute(false, s.task_level, s.checklist);
    bool any_after = std::any_of(runs.begin(), runs.end(),
                                 [](const RunForReport& r) { return r.verdicts_after.has_value(); });
    if (any_after) {
        double tl = 0, cl = 0;
        compute(true, tl, cl);
        s.task_level_after = tl;
        s.checklist_after = cl;
    }
    return s;
}

namespace {
std::string pct(double v) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%.2f%%", v * 100.0);
    return buf;
}
}  // namespace

Json AgreementSummary::to_json() const {
    Json j{{"task_count", task_count},
           {"task_level", task_level},
           {"checklist", checklist}};
    if (task_level_after) j["task_level_after"] = *task_level_after;
    if (checklist_after) j["checklist_after"] = *checklist_after;
    return j;
}

std::string AgreementSummary::to_table() const {
    std::ostringstream out;
    char line[96];
    std::snprintf(line, sizeof(line), "%-10s %12s %12s\n", "", "task-level", "checklist");
    out << line;
    std::snprintf(line, sizeof(line), "%-10s %12s %12s\n", "before", pct(task_level).c_str(),
                  pct(checklist).c_str());
    out << line;
    if (task_level_after && checklist_after) {
        std::snprintf(line, sizeof(line), "%-10s %12s %12s\n", "after",
                      pct(*task_level_after).c_str(), pct(*checklist_after).c_str());
        out << line;
    }
    return out.str();
}

std::vector<FaultSpec> fault_catalog() {
    return {
        {"wrong_store_binding", "media", "table.tags.store", "library", true},
        {"wrong_join_path", "media", "join.image_tag", "tagged_images.imgid->tags.id", true},
        {"wrong_column_mapping", "media", "column.images.rating", "stars", true},
        {"wrong_path_template", "vault", "vault.root", "notes", true},
        {"wrong_path_template", "workbook", "workbook.path", "book.json", true},
        {"inverted_comparison", "media", "compare.rating.mode", "inverted", false},
        {"off_by_one_count", "vault", "count.offset", "1", false},
        {"off_by_one_count", "workbook", "count.offset", "1", false},
        {"off_by_one_count", "media", "count.offset", "1", false},
    };
}

std::vector<FaultSpec> fault_catalog(const std::string& app_id) {
    std::vector<FaultSpec> out;
    for (const auto& f : fault_catalog()) {
        if (f.app_id == app_id) out.push_back(f);
    }
    return out;
}

verify::VerifierConfig inject_fault(const verify::VerifierConfig& cfg, const FaultSpec& fault) {
    if (cfg.app_id != fault.app_id) {
        throw Error("InvalidParams", "fault " + fault.fault_id + " targets app " + fault.app_id);
    }
    verify::VerifierConfig out = cfg;
    out.bindings[fault.binding] = fault.bad_value;
    return out;
}

void append_lessons(const std::string& path, const std::vector<Lesson>& lessons) {
    if (lessons.empty()) return;
    std::string existing;
    if (fs::exists(path)) existing = read_file(path);
    for (const auto& l : lessons) existing += l.to_json().dump() + "\n";
    write_file(path, existing);
}

std::vector<Lesson> load_lessons(const std::string& path) {
    std::vector<Lesson> out;
    if (!fs::exists(path)) return out;
    std::stringstream ss(read_file(path));
    std::string line;
    while (std::getline(ss, line)) {
        if (line.empty()) continue;
        out.push_back(Lesson::from_json(Json::parse(line)));
    }
    return out;
}

}  // namespace wb::evolve
