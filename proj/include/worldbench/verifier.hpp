#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "worldbench/common.hpp"
#include "worldbench/task.hpp"

namespace wb::verify {

struct EndpointParam {
    std::string name;
    std::string type;  // string | int | bool
    bool required = true;
};

struct EndpointSpec {
    std::string name;  // get-* or check-*
    std::vector<EndpointParam> params;
    std::string doc;
    std::vector<std::string> reads;  // logical state resources, resolved via bindings

    bool is_check() const { return name.rfind("check-", 0) == 0; }
};

// Bindings are the mutable half of a verifier: logical resource -> physical
// location. The evolution loop repairs these, never the checker code.
struct VerifierConfig {
    std::string app_id;
    int revision = 0;
    std::map<std::string, std::string> bindings;

    Json to_json() const;
    static VerifierConfig from_json(const Json& j);
    static VerifierConfig load(const std::string& path);
    void save(const std::string& path) const;
};

// Canonical (known-correct) bindings for an app.
VerifierConfig default_config(const std::string& app_id);
// The schema-v1 media bindings, wrong for a v2 library. Used by the shipped
// repair case and by fault injection.
VerifierConfig media_v1_config();

struct VerdictRecord {
    std::string criterion_id;  // empty for bare endpoint invocations
    std::string endpoint;
    bool ok = false;           // executed without execution error
    std::optional<bool> passed;  // null for query endpoints
    Json evidence = Json::object();
    std::string error;         // non-empty iff ok=false
    Json bindings_used = Json::object();
    int revision = 0;

    Json to_json() const;
    static VerdictRecord from_json(const Json& j);
    bool effective_passed() const { return passed.value_or(false); }
};

bool verdict_schema_valid(const Json& j, std::string* why = nullptr);

std::vector<EndpointSpec> list_endpoints(const std::string& app_id);
std::vector<task::EndpointSummary> endpoint_summaries(const std::string& app_id);
const EndpointSpec* find_endpoint(const std::string& app_id, const std::string& name);

// Protocol errors (unknown endpoint, missing required argument) throw
// Error{"UnknownEndpoint"|"MissingArgument"}; execution errors become
// ok=false verdicts.
VerdictRecord run_check(const VerifierConfig& cfg, const std::string& endpoint,
                        const std::map<std::string, std::string>& args,
                        const std::string& sandbox_root);
VerdictRecord run_query(const VerifierConfig& cfg, const std::string& endpoint,
                        const std::map<std::string, std::string>& args,
                        const std::string& sandbox_root);

// One verdict per criterion, criteria order, never stops early. Protocol
// errors surface as ok=false verdicts here.
std::vector<VerdictRecord> run_check_suite(const VerifierConfig& cfg, const task::TaskInstance& t,
                                           const std::string& sandbox_root);

task::RewardReport reward_from_verdicts(const std::vector<VerdictRecord>& verdicts);

// --- selftest ---------------------------------------------------------------

struct Fixture {
    std::string label;
    std::string endpoint;
    std::map<std::string, std::string> args;
    // seed applied to a scratch sandbox before invoking
    std::vector<apps::AppAction> seed_actions;
    bool seed_state = true;  // false exercises the nonexistent-path case
    // expectations
    bool expect_ok = true;
    std::optional<bool> expect_passed;
    bool expect_protocol_error = false;
};

struct FixturePlan {
    std::string app_id;
    std::vector<Fixture> fixtures;
};

struct SelftestEntry {
    std::string label;
    std::string endpoint;
    bool matched = false;
    std::string detail;
};

struct SelftestReport {
    std::string app_id;
    bool gated = false;
    std::vector<SelftestEntry> entries;
    std::vector<std::string> coverage_gaps;

    Json to_json() const;
};

FixturePlan shipped_fixture_plan(const std::string& app_id);
SelftestReport run_verifier_selftest(const VerifierConfig& cfg, const FixturePlan& plan,
                                     const std::string& scratch_dir);

}  // namespace wb::verify
