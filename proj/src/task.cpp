#include "worldbench/task.hpp"

#include <algorithm>
#include <cstdio>
#include <set>
#include <sstream>

namespace wb::task {

namespace {

const std::set<std::string> kExpectOps = {"equals", "contains", "count_eq", "count_ge",
                                          "within_abs"};
const std::set<std::string> kSeedKinds = {"vault_note", "workbook_file", "store_file",
                                          "plain_file"};
const std::set<std::string> kTopLevelKeys = {"task_id", "app_id",   "instruction", "difficulty",
                                             "env_init", "criteria", "metadata"};

[[noreturn]] void schema_error(const std::string& path, const std::string& msg) {
    throw Error("SchemaViolation", path + ": " + msg);
}

std::string require_string(const Json& j, const std::string& key, const std::string& path) {
    if (!j.contains(key)) schema_error(path + "." + key, "missing required field");
    if (!j[key].is_string()) schema_error(path + "." + key, "expected string");
    return j[key].get<std::string>();
}

}  // namespace

Json ExpectPredicate::to_json() const {
    Json j{{"op", op}, {"target_field", target_field}, {"operand", scalar_to_json(operand)}};
    if (op == "within_abs") j["tolerance"] = tolerance;
    return j;
}

ExpectPredicate ExpectPredicate::from_json(const Json& j, const std::string& path) {
    if (!j.is_object()) schema_error(path, "expect must be an object");
    ExpectPredicate p;
    p.op = require_string(j, "op", path);
    if (!kExpectOps.count(p.op)) schema_error(path + ".op", "unknown op '" + p.op + "'");
    p.target_field = require_string(j, "target_field", path);
    if (!j.contains("operand")) schema_error(path + ".operand", "missing required field");
    p.operand = scalar_from_json(j["operand"]);
    if (p.op == "within_abs") {
        if (!j.contains("tolerance") || !j["tolerance"].is_number()) {
            schema_error(path + ".tolerance", "within_abs requires a numeric tolerance");
        }
        p.tolerance = j["tolerance"].get<double>();
        if (p.tolerance <= 0) schema_error(path + ".tolerance", "tolerance must be > 0");
    } else if (j.contains("tolerance")) {
        schema_error(path + ".tolerance", "tolerance only valid for within_abs");
    }
    return p;
}

TaskInstance parse_task_instance(const std::string& raw) {
    Json j;
    try {
        j = Json::parse(raw);
    } catch (const Json::parse_error& e) {
        throw Error("MalformedDocument",
                    std::string("byte offset ") + std::to_string(e.byte) + ": " + e.what());
    }
    if (!j.is_object()) throw Error("MalformedDocument", "top level must be a JSON object");

    for (const auto& [k, v] : j.items()) {
        (void)v;
        if (!kTopLevelKeys.count(k)) schema_error(k, "unknown top-level field");
    }

    TaskInstance t;
    t.task_id = require_string(j, "task_id", "task");
    t.app_id = require_string(j, "app_id", "task");
    t.instruction = require_string(j, "instruction", "task");
    if (!j.contains("difficulty") || !j["difficulty"].is_number_integer()) {
        schema_error("task.difficulty", "missing or non-integer");
    }
    t.difficulty = j["difficulty"].get<int>();

    if (!j.contains("env_init") || !j["env_init"].is_object()) {
        schema_error("task.env_init", "missing or not an object");
    }
    const Json& env = j["env_init"];
    if (env.contains("seed_artifacts")) {
        if (!env["seed_artifacts"].is_array()) {
            schema_error("task.env_init.seed_artifacts", "expected array");
        }
        size_t i = 0;
        for (const auto& js : env["seed_artifacts"]) {
            std::string path = "task.env_init.seed_artifacts[" + std::to_string(i++) + "]";
            SeedArtifact s;
            s.rel_path = require_string(js, "rel_path", path);
            s.kind = require_string(js, "kind", path);
            s.content = b64_decode(require_string(js, "content_b64", path));
            t.env_init.seed_artifacts.push_back(std::move(s));
        }
    }
    if (env.contains("init_actions")) {
        if (!env["init_actions"].is_array()) {
            schema_error("task.env_init.init_actions", "expected array");
        }
        size_t i = 0;
        for (const auto& ja : env["init_actions"]) {
            std::string path = "task.env_init.init_actions[" + std::to_string(i++) + "]";
            try {
                t.env_init.init_actions.push_back(apps::AppAction::from_json(ja));
            } catch (const Json::exception&) {
                schema_error(path, "malformed action object");
            }
        }
    }

    if (!j.contains("criteria") || !j["criteria"].is_array()) {
        schema_error("task.criteria", "missing or not an array");
    }
    size_t i = 0;
    for (const auto& jc : j["criteria"]) {
        std::string path = "task.criteria[" + std::to_string(i++) + "]";
        CheckSpec c;
        c.criterion_id = require_string(jc, "criterion_id", path);
        c.endpoint = require_string(jc, "endpoint", path);
        if (jc.contains("args")) {
            if (!jc["args"].is_object()) schema_error(path + ".args", "expected object");
            for (const auto& [k, v] : jc["args"].items()) {
                if (!v.is_string() && !v.is_number() && !v.is_boolean()) {
                    schema_error(path + ".args." + k, "arg values must be scalars");
                }
                c.args.emplace_back(k, v.is_string() ? v.get<std::string>()
                                                     : scalar_to_string(scalar_from_json(v)));
            }
        }
        if (jc.contains("expect") && !jc["expect"].is_null()) {
            c.expect = ExpectPredicate::from_json(jc["expect"], path + ".expect");
        }
        t.criteria.push_back(std::move(c));
    }

    if (j.contains("metadata")) {
        if (!j["metadata"].is_object()) schema_error("task.metadata", "expected object");
        for (const auto& [k, v] : j["metadata"].items()) {
            // unknown metadata keys are preserved verbatim
            t.metadata[k] = v.is_string() ? v.get<std::string>() : v.dump();
        }
    }
    return t;
}

Json task_to_json(const TaskInstance& t) {
    Json seeds = Json::array();
    for (const auto& s : t.env_init.seed_artifacts) {
        seeds.push_back(Json{{"rel_path", s.rel_path},
                             {"kind", s.kind},
                             {"content_b64", b64_encode(s.content)}});
    }
    Json actions = Json::array();
    for (const auto& a : t.env_init.init_actions) actions.push_back(a.to_json());
    Json criteria = Json::array();
    for (const auto& c : t.criteria) {
        Json args = Json::object();
        for (const auto& [k, v] : c.args) args[k] = v;
        Json jc{{"criterion_id", c.criterion_id}, {"endpoint", c.endpoint}, {"args", args}};
        if (c.expect) jc["expect"] = c.expect->to_json();
        criteria.push_back(jc);
    }
    Json meta = Json::object();
    for (const auto& [k, v] : t.metadata) meta[k] = v;
    return Json{{"task_id", t.task_id},     {"app_id", t.app_id},
                {"instruction", t.instruction}, {"difficulty", t.difficulty},
                {"env_init", Json{{"seed_artifacts", seeds}, {"init_actions", actions}}},
                {"criteria", criteria},     {"metadata", meta}};
}

ValidationReport validate_task_instance(const TaskInstance& t,
                                        const std::vector<EndpointSummary>& registry) {
    ValidationReport report;
    auto add = [&](std::string path, std::string msg) {
        report.findings.push_back({std::move(path), std::move(msg)});
    };

    if (t.criteria.empty()) add("task.criteria", "criteria must be non-empty");
    if (t.difficulty < 1 || t.difficulty > 5) add("task.difficulty", "must be in 1..5");
    if (!apps::is_known_app(t.app_id)) add("task.app_id", "unknown app '" + t.app_id + "'");

    std::set<std::string> seed_paths;
    size_t i = 0;
    for (const auto& s : t.env_init.seed_artifacts) {
        std::string path = "task.env_init.seed_artifacts[" + std::to_string(i++) + "]";
        if (!is_safe_rel_path(s.rel_path)) {
            add(path + ".rel_path",
                "path must be sandbox-relative without traversal: " + s.rel_path);
        }
        if (!seed_paths.insert(s.rel_path).second) {
            add(path + ".rel_path", "duplicate rel_path: " + s.rel_path);
        }
        if (s.kind == "workbook_file" || s.kind == "store_file") {
            try {
                Json parsed = Json::parse(s.content);
                if (s.kind == "workbook_file") apps::workbook_from_json(parsed);
                if (s.kind == "store_file") apps::table_store_from_json(parsed, s.rel_path);
            } catch (const std::exception& e) {
                add(path + ".content", std::string("content does not parse as ") + s.kind + ": " +
                                           e.what());
            }
        } else if (s.kind == "vault_note") {
            try {
                apps::parse_note(s.content);
            } catch (const std::exception& e) {
                add(path + ".content", std::string("content does not parse as vault_note: ") +
                                           e.what());
            }
        } else if (s.kind != "plain_file") {
            add(path + ".kind", "unknown seed kind '" + s.kind + "'");
        }
    }
    i = 0;
    for (const auto& a : t.env_init.init_actions) {
        std::string path = "task.env_init.init_actions[" + std::to_string(i++) + "]";
        if (a.app_id != t.app_id) add(path, "init action targets foreign app " + a.app_id);
        if (apps::is_known_app(a.app_id)) {
            auto vocab = apps::action_vocabulary(a.app_id);
            if (std::find(vocab.begin(), vocab.end(), a.verb) == vocab.end()) {
                add(path + ".verb", "unknown verb '" + a.verb + "'");
            }
        }
    }

    std::set<std::string> criterion_ids;
    i = 0;
    for (const auto& c : t.criteria) {
        std::string path = "task.criteria[" + std::to_string(i++) + "]";
        if (!criterion_ids.insert(c.criterion_id).second) {
            add(path, "duplicate criterion_id '" + c.criterion_id + "'");
        }
        bool is_check = c.endpoint.rfind("check-", 0) == 0;
        bool is_query = c.endpoint.rfind("get-", 0) == 0;
        if (!is_check && !is_query) {
            add(path + ".endpoint", "criterion '" + c.criterion_id +
                                        "': endpoint must match check-* or get-*");
        }
        if (is_query && !c.expect) {
            add(path + ".expect",
                "criterion '" + c.criterion_id + "': query endpoint requires expect predicate");
        }
        const EndpointSummary* spec = nullptr;
        for (const auto& e : registry) {
            if (e.name == c.endpoint) {
                spec = &e;
                break;
            }
        }
        if (!spec) {
            add(path + ".endpoint", "criterion '" + c.criterion_id +
                                        "': endpoint not in registry: " + c.endpoint);
            continue;
        }
        std::set<std::string> given;
        for (const auto& [k, v] : c.args) {
            (void)v;
            given.insert(k);
            if (std::find(spec->all_params.begin(), spec->all_params.end(), k) ==
                spec->all_params.end()) {
                add(path + ".args." + k,
                    "criterion '" + c.criterion_id + "': undeclared arg '" + k + "'");
            }
        }
        for (const auto& req : spec->required_params) {
            if (!given.count(req)) {
                add(path + ".args",
                    "criterion '" + c.criterion_id + "': missing required arg '" + req + "'");
            }
        }
    }
    return report;
}

std::string RewardReport::reward_text() const {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", reward());
    return buf;
}

Json RewardReport::to_json() const {
    Json per = Json::array();
    for (const auto& c : per_criterion) {
        per.push_back(Json{{"criterion_id", c.criterion_id},
                           {"passed", c.passed},
                           {"evidence_digest", c.evidence_digest}});
    }
    return Json{{"n_pass", n_pass},
                {"n_total", n_total},
                {"reward", reward_text()},
                {"per_criterion", per}};
}

RewardReport RewardReport::from_json(const Json& j) {
    RewardReport r;
    r.n_pass = j.at("n_pass").get<int>();
    r.n_total = j.at("n_total").get<int>();
    for (const auto& c : j.at("per_criterion")) {
        r.per_criterion.push_back({c.at("criterion_id").get<std::string>(),
                                   c.at("passed").get<bool>(),
                                   c.at("evidence_digest").get<std::string>()});
    }
    return r;
}

RewardReport compute_reward(const std::vector<VerdictLite>& verdicts) {
    if (verdicts.empty()) throw Error("EmptyVerdicts", "reward needs at least one verdict");
    RewardReport r;
    r.n_total = static_cast<int>(verdicts.size());
    for (const auto& v : verdicts) {
        if (v.passed) ++r.n_pass;
        r.per_criterion.push_back({v.criterion_id, v.passed, sha256_hex(v.evidence.dump())});
    }
    return r;
}

std::optional<Json> evidence_field(const Json& evidence, const std::string& dotted_path) {
    const Json* cur = &evidence;
    std::stringstream ss(dotted_path);
    std::string part;
    while (std::getline(ss, part, '.')) {
        if (!cur->is_object() || !cur->contains(part)) return std::nullopt;
        cur = &(*cur)[part];
    }
    return *cur;
}

bool expect_matches(const ExpectPredicate& p, const Json& evidence, std::string* why) {
    auto field = evidence_field(evidence, p.target_field);
    if (!field) {
        if (why) *why = "evidence field not found: " + p.target_field;
        return false;
    }
    const Json& v = *field;
    auto operand_num = [&]() -> double {
        if (std::holds_alternative<double>(p.operand)) return std::get<double>(p.operand);
        try {
            return std::stod(scalar_to_string(p.operand));
        } catch (...) {
            return std::numeric_limits<double>::quiet_NaN();
        }
    };
    if (p.op == "equals") {
        Json want = scalar_to_json(p.operand);
        bool eq;
        if (v.is_number() && want.is_number()) {
            eq = numbers_equal(v.get<double>(), want.get<double>());
        } else {
            eq = v == want;
        }
        if (!eq && why) *why = "expected " + want.dump() + ", got " + v.dump();
        return eq;
    }
    if (p.op == "contains") {
        std::string needle = scalar_to_string(p.operand);
        if (v.is_string()) {
            bool hit = v.get<std::string>().find(needle) != std::string::npos;
            if (!hit && why) *why = "string does not contain '" + needle + "'";
            return hit;
        }
        if (v.is_array()) {
            for (const auto& item : v) {
                if (item.is_string() && item.get<std::string>() == needle) return true;
                if (item == scalar_to_json(p.operand)) return true;
            }
            if (why) *why = "list does not contain '" + needle + "'";
            return false;
        }
        if (why) *why = "contains expects a string or list field";
        return false;
    }
    if (p.op == "count_eq" || p.op == "count_ge") {
        double count;
        if (v.is_array()) {
            count = static_cast<double>(v.size());
        } else if (v.is_number()) {
            count = v.get<double>();
        } else {
            if (why) *why = "count op expects a list or number field";
            return false;
        }
        double want = operand_num();
        bool hit = p.op == "count_eq" ? numbers_equal(count, want) : count >= want;
        if (!hit && why) {
            *why = "count " + format_number(count) + " vs expected " + format_number(want);
        }
        return hit;
    }
    // within_abs
    if (!v.is_number()) {
        if (why) *why = "within_abs expects a numeric field";
        return false;
    }
    double got = v.get<double>();
    double want = operand_num();
    bool hit = std::abs(got - want) <= p.tolerance;
    if (!hit && why) {
        *why = "|" + format_number(got) + " - " + format_number(want) + "| > " +
               format_number(p.tolerance);
    }
    return hit;
}

}  // namespace wb::task
