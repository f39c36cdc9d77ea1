// Python bindings. Everything crosses the boundary as JSON text; the
// package-level wrappers in worldbench/__init__.py decode it.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <filesystem>

#include "worldbench/evolve.hpp"
#include "worldbench/harness.hpp"
#include "worldbench/synth.hpp"
#include "worldbench/verifier.hpp"

namespace py = pybind11;
namespace fs = std::filesystem;
using namespace wb;

namespace {

std::string validate_task_json(const std::string& raw) {
    task::TaskInstance t = task::parse_task_instance(raw);
    task::ValidationReport r =
        task::validate_task_instance(t, verify::endpoint_summaries(t.app_id));
    Json findings = Json::array();
    for (const auto& f : r.findings) {
        findings.push_back(Json{{"path", f.path}, {"message", f.message}});
    }
    return Json{{"ok", r.ok()}, {"findings", findings}}.dump();
}

std::string run_task_json(const std::string& task_path, const std::string& agent_path,
                          const std::string& cfg_path, const std::string& out_dir,
                          int step_budget, int64_t seed) {
    task::TaskInstance t = task::parse_task_instance(read_file(task_path));
    harness::ScriptedAgent agent = harness::ScriptedAgent::load(agent_path);
    verify::VerifierConfig cfg = verify::VerifierConfig::load(cfg_path);
    harness::SandboxSpec spec;
    spec.app_id = t.app_id;
    spec.step_budget = step_budget;
    spec.run_seed = seed;
    spec.root = (fs::path(out_dir) / t.task_id / ("py-" + std::to_string(seed))).string();
    harness::RunArtifact r = harness::run_task(t, agent, cfg, spec);
    return Json{{"task_id", r.task.task_id},
                {"run_dir", r.run_dir},
                {"reward", r.reward.reward_text()},
                {"n_pass", r.reward.n_pass},
                {"n_total", r.reward.n_total}}
        .dump();
}

std::string check_json(const std::string& app, const std::string& endpoint,
                       const std::string& state_root,
                       const std::map<std::string, std::string>& args) {
    verify::VerifierConfig cfg = verify::default_config(app);
    verify::VerdictRecord v = endpoint.rfind("get-", 0) == 0
                                  ? verify::run_query(cfg, endpoint, args, state_root)
                                  : verify::run_check(cfg, endpoint, args, state_root);
    return v.to_json().dump();
}

std::string evolve_json(const std::string& run_dir, const std::string& cfg_path, int budget) {
    verify::VerifierConfig cfg = verify::VerifierConfig::load(cfg_path);
    harness::RunArtifact run = harness::load_run_artifact(run_dir);
    auto [repaired, report] = evolve::evolve_verifier(run, cfg, budget);
    Json j = report.to_json();
    j["repaired_config"] = repaired.to_json();
    return j.dump();
}

std::string selftest_json(const std::string& app) {
    fs::path scratch = fs::temp_directory_path() / ("wb_py_selftest_" + app);
    verify::SelftestReport r = verify::run_verifier_selftest(
        verify::default_config(app), verify::shipped_fixture_plan(app), scratch.string());
    std::error_code ec;
    fs::remove_all(scratch, ec);
    return r.to_json().dump();
}

std::string generate_json(const std::string& templates_dir, const std::string& app, int count,
                          uint64_t seed, const std::string& out_dir) {
    auto templates = synth::load_templates(templates_dir, app);
    return synth::generate_tasks(templates, count, seed, out_dir).to_json().dump();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "verifier-grounded task harness core";

    py::register_exception<Error>(m, "WorldbenchError");

    m.def("validate_task", &validate_task_json, py::arg("task_json"),
          "Parse and validate a task document; returns a findings report as JSON text.");
    m.def("run_task", &run_task_json, py::arg("task_path"), py::arg("agent_path"),
          py::arg("cfg_path"), py::arg("out_dir"), py::arg("step_budget") = 80,
          py::arg("seed") = 0, "Execute a scripted agent and score the run.");
    m.def("check", &check_json, py::arg("app"), py::arg("endpoint"), py::arg("state_root"),
          py::arg("args"), "Invoke one verifier endpoint with canonical bindings.");
    m.def("evolve", &evolve_json, py::arg("run_dir"), py::arg("cfg_path"), py::arg("budget") = 3,
          "Repair verifier bindings against a frozen run.");
    m.def("selftest", &selftest_json, py::arg("app"), "Run the shipped fixture plan.");
    m.def("generate", &generate_json, py::arg("templates_dir"), py::arg("app"), py::arg("count"),
          py::arg("seed"), py::arg("out_dir"), "Emit tasks from templates.");
    m.def("reward_text", [](int n_pass, int n_total) {
        task::RewardReport r;
        r.n_pass = n_pass;
        r.n_total = n_total;
        return r.reward_text();
    });
    m.def("digest_directory", [](const std::string& root) { return digest_directory(root); });
}
