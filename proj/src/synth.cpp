#include "worldbench/synth.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <set>

#include "worldbench/verifier.hpp"

namespace fs = std::filesystem;

namespace wb::synth {

namespace {

std::string substitute(const std::string& pattern,
                       const std::map<std::string, std::string>& slots) {
    std::string out;
    size_t i = 0;
    while (i < pattern.size()) {
        size_t at = pattern.find("${", i);
        if (at == std::string::npos) {
            out += pattern.substr(i);
            break;
        }
        size_t end = pattern.find('}', at);
        if (end == std::string::npos) {
            throw Error("MalformedTemplate", "unterminated slot in: " + pattern);
        }
        out += pattern.substr(i, at - i);
        std::string name = pattern.substr(at + 2, end - at - 2);
        auto it = slots.find(name);
        if (it == slots.end()) {
            throw Error("MalformedTemplate", "unknown slot ${" + name + "}");
        }
        out += it->second;
        i = end + 1;
    }
    return out;
}

// Bare `${slot}` strings whose domain is an int_range become numbers; all
// other strings substitute textually.
Scalar substitute_param(const Json& value, const GoalTemplate& tpl,
                        const std::map<std::string, std::string>& slots) {
    if (value.is_string()) {
        std::string raw = value.get<std::string>();
        std::string text = substitute(raw, slots);
        if (raw.size() > 3 && raw.rfind("${", 0) == 0 && raw.back() == '}') {
            std::string name = raw.substr(2, raw.size() - 3);
            auto dom = tpl.slot_domains.find(name);
            if (dom != tpl.slot_domains.end() && dom->second.int_range) {
                return static_cast<double>(std::stol(text));
            }
        }
        return text;
    }
    return scalar_from_json(value);
}

apps::AppAction action_from_pattern(const Json& j, const GoalTemplate& tpl,
                                    const std::map<std::string, std::string>& slots) {
    apps::AppAction a;
    a.app_id = tpl.app_id;
    a.verb = substitute(j.at("verb").get<std::string>(), slots);
    if (j.contains("params")) {
        for (auto it = j.at("params").begin(); it != j.at("params").end(); ++it) {
            a.params[it.key()] = substitute_param(it.value(), tpl, slots);
        }
    }
    return a;
}

// Endpoint surface buckets for the cross-surface rubric term.
std::string endpoint_surface(const std::string& ep) {
    static const std::map<std::string, std::string> surfaces = {
        {"check-folder-exists", "structure"},   {"check-note-exists", "structure"},
        {"check-note-in-folder", "structure"},  {"check-note-count", "structure"},
        {"check-folder-note-count", "structure"}, {"get-vault-stats", "structure"},
        {"check-note-links-to", "content"},     {"check-note-has-tag", "content"},
        {"check-body-contains", "content"},     {"get-note", "content"},
        {"check-frontmatter-field", "metadata"},
        {"check-sheet-exists", "structure"},    {"check-sheet-count", "structure"},
        {"get-sheet-names", "structure"},       {"check-cell-value", "values"},
        {"check-cell-value-within", "values"},  {"check-cell-empty", "values"},
        {"get-cell", "values"},                 {"check-cell-is-formula", "formulas"},
        {"check-cell-formula-contains", "formulas"}, {"check-cell-bold", "formatting"},
        {"check-image-present", "catalog"},     {"check-image-count", "catalog"},
        {"get-image-info", "catalog"},          {"get-library-stats", "catalog"},
        {"check-tag-exists", "tags"},           {"check-image-has-tag", "tags"},
        {"check-tag-count", "tags"},            {"check-image-tag-count", "tags"},
        {"get-tag-list", "tags"},               {"check-image-rating", "ratings"},
        {"check-rating-at-least", "ratings"},
    };
    auto it = surfaces.find(ep);
    return it == surfaces.end() ? "other" : it->second;
}

std::string scratch_dir() {
    static std::atomic<int> counter{0};
    fs::path p = fs::temp_directory_path() /
                 ("wb_scratch_" + std::to_string(::getpid()) + "_" +
                  std::to_string(counter.fetch_add(1)));
    return p.string();
}

}  // namespace

GoalTemplate GoalTemplate::from_json(const Json& j) {
    GoalTemplate t;
    t.template_id = j.at("template_id").get<std::string>();
    t.app_id = j.at("app_id").get<std::string>();
    t.feature_area = j.at("feature_area").get<std::string>();
    t.instruction_pattern = j.at("instruction_pattern").get<std::string>();
    t.base_difficulty = j.at("base_difficulty").get<int>();
    if (t.base_difficulty < 1 || t.base_difficulty > 5) {
        throw Error("MalformedTemplate", t.template_id + ": base_difficulty out of range");
    }
    for (auto it = j.at("slot_domains").begin(); it != j.at("slot_domains").end(); ++it) {
        SlotDomain d;
        if (it.value().contains("choices")) {
            d.choices = it.value().at("choices").get<std::vector<std::string>>();
            if (d.choices.empty()) {
                throw Error("MalformedTemplate", "empty choice list for slot " + it.key());
            }
        } else if (it.value().contains("int_range")) {
            auto r = it.value().at("int_range").get<std::vector<long>>();
            if (r.size() != 2 || r[0] > r[1]) {
                throw Error("MalformedTemplate", "bad int_range for slot " + it.key());
            }
            d.int_range = {r[0], r[1]};
        } else {
            throw Error("MalformedTemplate", "slot " + it.key() + " has no generator");
        }
        t.slot_domains[it.key()] = d;
    }
    t.criteria_pattern = j.at("criteria_pattern");
    t.seed_pattern = j.value("seed_pattern", Json::object());
    t.solution_pattern = j.at("solution_pattern");
    return t;
}

std::vector<GoalTemplate> load_templates(const std::string& templates_dir,
                                         const std::string& app_id) {
    fs::path dir = fs::path(templates_dir) / app_id;
    if (!fs::is_directory(dir)) {
        throw Error("NoTemplates", "no template directory at " + dir.string());
    }
    std::vector<std::string> files;
    for (const auto& e : fs::directory_iterator(dir)) {
        if (e.path().extension() == ".json") files.push_back(e.path().string());
    }
    std::sort(files.begin(), files.end());
    std::vector<GoalTemplate> out;
    for (const auto& f : files) {
        GoalTemplate t = GoalTemplate::from_json(Json::parse(read_file(f)));
        if (t.app_id != app_id) {
            throw Error("MalformedTemplate", f + ": app_id mismatch");
        }
        out.push_back(std::move(t));
    }
    if (out.empty()) throw Error("NoTemplates", "no templates under " + dir.string());
    return out;
}

std::vector<TaskProposal> propose_goals(const std::vector<GoalTemplate>& templates, int count,
                                        uint64_t seed) {
    if (templates.empty()) throw Error("NoTemplates", "no templates to propose from");
    if (count < 1) throw Error("InvalidParams", "count must be >= 1");
    Rng rng(seed);
    std::vector<TaskProposal> out;
    for (int i = 0; i < count; ++i) {
        const GoalTemplate& tpl = templates[i % templates.size()];
        TaskProposal p;
        p.template_id = tpl.template_id;
        for (const auto& [name, dom] : tpl.slot_domains) {
            if (dom.int_range) {
                p.slot_values[name] =
                    std::to_string(rng.range(dom.int_range->first, dom.int_range->second));
            } else {
                p.slot_values[name] = dom.choices[rng.below(dom.choices.size())];
            }
        }
        char suffix[16];
        std::snprintf(suffix, sizeof(suffix), "_%04d", i + 1);
        task::TaskInstance t;
        t.task_id = tpl.template_id + suffix;
        t.app_id = tpl.app_id;
        t.instruction = substitute(tpl.instruction_pattern, p.slot_values);
        t.difficulty = tpl.base_difficulty;
        t.metadata["template_id"] = tpl.template_id;
        t.metadata["feature_area"] = tpl.feature_area;
        for (const Json& cj : tpl.criteria_pattern) {
            task::CheckSpec c;
            c.criterion_id = substitute(cj.at("criterion_id").get<std::string>(), p.slot_values);
            c.endpoint = cj.at("endpoint").get<std::string>();
            for (auto it = cj.at("args").begin(); it != cj.at("args").end(); ++it) {
                std::string v = it.value().is_string()
                                    ? substitute(it.value().get<std::string>(), p.slot_values)
                                    : it.value().dump();
                c.args.emplace_back(it.key(), v);
            }
            if (cj.contains("expect")) {
                Json ej = cj.at("expect");
                if (ej.contains("operand") && ej.at("operand").is_string()) {
                    ej["operand"] = substitute(ej.at("operand").get<std::string>(), p.slot_values);
                }
                c.expect = task::ExpectPredicate::from_json(ej, "criteria/" + c.criterion_id);
            }
            t.criteria.push_back(std::move(c));
        }
        if (tpl.seed_pattern.contains("artifacts")) {
            for (const Json& aj : tpl.seed_pattern.at("artifacts")) {
                task::SeedArtifact a;
                a.rel_path = substitute(aj.at("rel_path").get<std::string>(), p.slot_values);
                a.kind = aj.at("kind").get<std::string>();
                a.content = substitute(aj.at("content").get<std::string>(), p.slot_values);
                t.env_init.seed_artifacts.push_back(std::move(a));
            }
        }
        if (tpl.seed_pattern.contains("init_actions")) {
            for (const Json& ij : tpl.seed_pattern.at("init_actions")) {
                t.env_init.init_actions.push_back(action_from_pattern(ij, tpl, p.slot_values));
            }
        }
        for (const Json& sj : tpl.solution_pattern) {
            p.solution.push_back(action_from_pattern(sj, tpl, p.slot_values));
        }
        p.task = std::move(t);
        out.push_back(std::move(p));
    }
    return out;
}

task::EnvInitRecipe materialize_environment(const TaskProposal& p) {
    fs::path scratch = scratch_dir();
    auto cleanup = [&]() { std::error_code ec; fs::remove_all(scratch, ec); };
    try {
        harness::SandboxSpec spec;
        spec.app_id = p.task.app_id;
        spec.root = (scratch / "a").string();
        std::string d1 = harness::init_sandbox(p.task, spec);
        spec.root = (scratch / "b").string();
        std::string d2 = harness::init_sandbox(p.task, spec);
        if (d1 != d2) {
            throw Error("MaterializationFailure", "double-init digests differ");
        }
        verify::VerifierConfig cfg = verify::default_config(p.task.app_id);
        auto verdicts = verify::run_check_suite(cfg, p.task, (scratch / "a").string());
        bool any_fail = false;
        for (const auto& v : verdicts) any_fail = any_fail || !v.effective_passed();
        if (!any_fail) {
            throw Error("MaterializationFailure", "task is pre-solved at init");
        }
        // the drafted solution must actually complete the task
        harness::ScriptedAgent agent;
        agent.agent_id = p.task.task_id + "_agent";
        agent.script = p.solution;
        harness::execute_agent((scratch / "a").string(), p.task, agent, 200);
        auto solved = verify::run_check_suite(cfg, p.task, (scratch / "a").string());
        for (const auto& v : solved) {
            if (!v.effective_passed()) {
                throw Error("MaterializationFailure",
                            "solution leaves criterion failing: " + v.criterion_id);
            }
        }
        cleanup();
        return p.task.env_init;
    } catch (...) {
        cleanup();
        throw;
    }
}

TaskProposal filter_proposal(TaskProposal p) {
    std::set<std::string> verbs;
    for (const auto& a : p.solution) verbs.insert(a.verb);
    std::set<std::string> surfaces;
    for (const auto& c : p.task.criteria) surfaces.insert(endpoint_surface(c.endpoint));
    int score = 1 + static_cast<int>(verbs.size());
    if (surfaces.size() >= 2) ++score;
    if (p.task.criteria.size() >= 6) ++score;
    p.difficulty_score = std::min(5, score);
    p.task.difficulty = std::max(1, p.difficulty_score);
    try {
        materialize_environment(p);
        p.generatability = "ok";
    } catch (const Error& e) {
        p.generatability = "no_coherent_artifacts";
        p.match_detail = e.what();
    }
    return p;
}

TaskProposal match_verifier(TaskProposal p, const std::vector<evolve::Lesson>& lessons) {
    std::vector<std::string> extends, rejects, flagged;
    for (const auto& c : p.task.criteria) {
        const verify::EndpointSpec* spec = verify::find_endpoint(p.task.app_id, c.endpoint);
        if (!spec) {
            bool well_formed = c.endpoint.rfind("check-", 0) == 0 || c.endpoint.rfind("get-", 0) == 0;
            (well_formed ? extends : rejects)
                .push_back(c.criterion_id + ": " +
                           (well_formed ? "needs endpoint " + c.endpoint
                                        : "not state-inspectable: " + c.endpoint));
            continue;
        }
        std::set<std::string> declared;
        for (const auto& param : spec->params) declared.insert(param.name);
        std::set<std::string> given;
        for (const auto& [k, v] : c.args) given.insert(k);
        for (const auto& param : spec->params) {
            if (param.required && !given.count(param.name)) {
                rejects.push_back(c.criterion_id + ": missing arg " + param.name);
            }
        }
        for (const auto& k : given) {
            if (!declared.count(k)) {
                rejects.push_back(c.criterion_id + ": undeclared arg " + k);
            }
        }
        for (const auto& l : lessons) {
            if (l.app_id != p.task.app_id) continue;
            if (std::find(spec->reads.begin(), spec->reads.end(), l.resource) !=
                spec->reads.end()) {
                flagged.push_back(c.criterion_id + ": repair history on " + l.resource);
            }
        }
    }
    if (!rejects.empty()) {
        p.verifier_match = "reject";
        p.match_detail = rejects.front();
    } else if (!extends.empty()) {
        p.verifier_match = "extend";
        p.match_detail = extends.front();
    } else {
        p.verifier_match = "retain";
        if (!flagged.empty()) p.match_detail = "flagged: " + flagged.front();
    }
    return p;
}

Json CoverageGap::to_json() const {
    return Json{{"app_id", app_id},
                {"feature_area", feature_area},
                {"existing_task_count", existing_task_count},
                {"has_reliable_verification_path", has_reliable_verification_path},
                {"priority", priority}};
}

std::vector<CoverageGap> review_coverage(const std::vector<task::TaskInstance>& task_set,
                                         const std::vector<GoalTemplate>& templates,
                                         const std::vector<evolve::Lesson>& lessons) {
    std::map<std::pair<std::string, std::string>, int> counts;  // (app, area) -> tasks
    std::map<std::pair<std::string, std::string>, bool> reliable;
    for (const auto& tpl : templates) {
        auto key = std::make_pair(tpl.app_id, tpl.feature_area);
        counts.emplace(key, 0);
        bool clean = true;
        for (const Json& cj : tpl.criteria_pattern) {
            const verify::EndpointSpec* spec =
                verify::find_endpoint(tpl.app_id, cj.at("endpoint").get<std::string>());
            if (!spec) continue;
            for (const auto& l : lessons) {
                if (l.app_id == tpl.app_id &&
                    std::find(spec->reads.begin(), spec->reads.end(), l.resource) !=
                        spec->reads.end()) {
                    clean = false;
                }
            }
        }
        auto it = reliable.find(key);
        // an area is reliable if any of its templates avoids lesson-flagged resources
        reliable[key] = (it != reliable.end() && it->second) || clean;
    }
    for (const auto& t : task_set) {
        auto area = t.metadata.find("feature_area");
        if (area == t.metadata.end()) continue;
        auto key = std::make_pair(t.app_id, area->second);
        if (counts.count(key)) ++counts[key];
    }
    std::vector<CoverageGap> gaps;
    for (const auto& [key, n] : counts) {
        if (n > 0) continue;
        CoverageGap g;
        g.app_id = key.first;
        g.feature_area = key.second;
        g.existing_task_count = n;
        g.has_reliable_verification_path = reliable[key];
        gaps.push_back(std::move(g));
    }
    std::stable_sort(gaps.begin(), gaps.end(), [](const CoverageGap& a, const CoverageGap& b) {
        return a.has_reliable_verification_path > b.has_reliable_verification_path;
    });
    for (size_t i = 0; i < gaps.size(); ++i) gaps[i].priority = static_cast<int>(i) + 1;
    return gaps;
}

Json GenerationManifest::to_json() const {
    return Json{{"app_id", app_id},
                {"seed", seed},
                {"task_count", task_count},
                {"mean_criteria_per_task", mean_criteria_per_task},
                {"mean_seed_artifacts_per_task", mean_seed_artifacts_per_task},
                {"task_ids", task_ids}};
}

GenerationManifest generate_tasks(const std::vector<GoalTemplate>& templates, int count,
                                  uint64_t seed, const std::string& out_dir) {
    // the proposal stream is prefix-stable in count, so widening the draw
    // after rejections keeps output a pure function of (templates, count, seed)
    std::vector<TaskProposal> accepted;
    int draw = count;
    const int cap = count * 8;
    while (true) {
        std::vector<TaskProposal> proposals = propose_goals(templates, draw, seed);
        accepted.clear();
        for (auto& p : proposals) {
            p = match_verifier(std::move(p), {});
            p = filter_proposal(std::move(p));
            if (p.emittable()) accepted.push_back(std::move(p));
            if (static_cast<int>(accepted.size()) == count) break;
        }
        if (static_cast<int>(accepted.size()) == count || draw >= cap) break;
        draw = std::min(cap, draw * 2);
    }
    if (static_cast<int>(accepted.size()) < count) {
        throw Error("GenerationExhausted",
                    "only " + std::to_string(accepted.size()) + " of " + std::to_string(count) +
                        " proposals were emittable");
    }

    fs::create_directories(out_dir);
    GenerationManifest m;
    m.app_id = templates.front().app_id;
    m.seed = seed;
    m.task_count = count;
    size_t total_criteria = 0, total_seeds = 0;
    for (size_t i = 0; i < accepted.size(); ++i) {
        const TaskProposal& p = accepted[i];
        auto registry = verify::endpoint_summaries(p.task.app_id);
        task::ValidationReport report = task::validate_task_instance(p.task, registry);
        if (!report.ok()) {
            throw Error("GenerationExhausted",
                        p.task.task_id + " failed validation: " + report.findings[0].message);
        }
        char stem[32];
        std::snprintf(stem, sizeof(stem), "task_%04zu", i + 1);
        write_file((fs::path(out_dir) / (std::string(stem) + ".json")).string(),
                   task::task_to_json(p.task).dump(2) + "\n");
        harness::ScriptedAgent agent;
        agent.agent_id = p.task.task_id + "_agent";
        agent.script = p.solution;
        write_file((fs::path(out_dir) / (std::string(stem) + ".agent.json")).string(),
                   agent.to_json().dump(2) + "\n");
        m.task_ids.push_back(p.task.task_id);
        total_criteria += p.task.criteria.size();
        total_seeds += p.task.env_init.seed_artifacts.size();
    }
    m.mean_criteria_per_task = static_cast<double>(total_criteria) / count;
    m.mean_seed_artifacts_per_task = static_cast<double>(total_seeds) / count;
    write_file((fs::path(out_dir) / "manifest.json").string(), m.to_json().dump(2) + "\n");
    return m;
}

}  // namespace wb::synth
