#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>

#include "test_util.hpp"
#include "worldbench/harness.hpp"

using namespace wb;
using namespace wb::apps;
using namespace wb::harness;
using namespace wb::task;

namespace {

TaskInstance vault_task() {
    TaskInstance t;
    t.task_id = "vault_demo";
    t.app_id = "vault";
    t.instruction = "File the carbonara note under Recipes and tag it.";
    t.difficulty = 2;
    t.env_init.seed_artifacts.push_back(
        {"vault/Inbox/Carbonara.md", "Guanciale, eggs, pecorino.\n", "vault_note"});
    t.env_init.init_actions.push_back(
        AppAction{"vault", "create_note", {{"path", std::string("Index.md")}}});
    CheckSpec c1{"folder", "check-folder-exists", {{"path", "Recipes"}}, std::nullopt};
    CheckSpec c2{"moved", "check-note-exists", {{"path", "Recipes/Carbonara.md"}}, std::nullopt};
    CheckSpec c3{"tagged", "check-note-has-tag",
                 {{"path", "Recipes/Carbonara.md"}, {"tag", "recipe"}}, std::nullopt};
    CheckSpec c4{"gone", "check-note-count", {{"count", "2"}}, std::nullopt};
    t.criteria = {c1, c2, c3, c4};
    return t;
}

ScriptedAgent vault_agent() {
    ScriptedAgent a;
    a.agent_id = "vault_demo_agent";
    a.script = {
        AppAction{"vault", "create_folder", {{"path", std::string("Recipes")}}},
        AppAction{"vault", "create_note",
                  {{"path", std::string("Recipes/Carbonara.md")},
                   {"body", std::string("Guanciale, eggs, pecorino. #recipe")}}},
        AppAction{"vault", "delete_note", {{"path", std::string("Inbox/Carbonara.md")}}},
    };
    return a;
}

}  // namespace

TEST_CASE("init_sandbox writes seeds, applies init actions, is deterministic") {
    TempDir a, b;
    TaskInstance t = vault_task();
    std::string d1 = init_sandbox(t, {a.sub("s"), "vault", 80, 1});
    std::string d2 = init_sandbox(t, {b.sub("s"), "vault", 80, 2});
    CHECK(d1 == d2);
    CHECK(std::filesystem::exists(a.sub("s") + "/vault/Inbox/Carbonara.md"));
    CHECK(std::filesystem::exists(a.sub("s") + "/vault/Index.md"));
    CHECK(digest_directory(a.sub("s")) == digest_directory(b.sub("s")));
}

TEST_CASE("init_sandbox refuses a dirty sandbox") {
    TempDir tmp;
    std::filesystem::create_directories(tmp.sub("s"));
    write_file(tmp.sub("s/leftover.txt"), "x");
    try {
        init_sandbox(vault_task(), {tmp.sub("s"), "vault", 80, 1});
        FAIL("expected DirtySandbox");
    } catch (const Error& e) {
        CHECK(e.kind() == "DirtySandbox");
    }
}

TEST_CASE("seed artifacts may not escape the sandbox") {
    TempDir tmp;
    TaskInstance t = vault_task();
    t.env_init.seed_artifacts.push_back({"../outside.md", "oops", "plain_file"});
    CHECK_THROWS_AS(init_sandbox(t, {tmp.sub("s"), "vault", 80, 1}), Error);
    CHECK(!std::filesystem::exists(tmp.sub("outside.md")));
}

TEST_CASE("execute_agent records steps, rejections and a frozen final digest") {
    TempDir tmp;
    TaskInstance t = vault_task();
    init_sandbox(t, {tmp.sub("s"), "vault", 80, 1});
    ScriptedAgent a = vault_agent();
    // wedge in an invalid step; execution must continue past it
    a.script.insert(a.script.begin() + 2,
                    AppAction{"vault", "create_note",
                              {{"path", std::string("Recipes/Carbonara.md")}}});
    TrajectoryRecord tr = execute_agent(tmp.sub("s"), t, a, 80);
    CHECK(tr.frozen);
    CHECK(tr.task_id == "vault_demo");
    REQUIRE(tr.steps.size() == 4);
    CHECK(tr.steps[1].error.empty());
    CHECK(!tr.steps[2].error.empty());                                // duplicate note rejected
    CHECK(tr.steps[2].post_action_digest == tr.steps[1].post_action_digest);  // no-op
    CHECK(tr.steps[3].post_action_digest == tr.final_digest);
    for (size_t i = 0; i < tr.steps.size(); ++i) CHECK(tr.steps[i].index == static_cast<int>(i));
}

TEST_CASE("step budget truncates the script") {
    TempDir tmp;
    TaskInstance t = vault_task();
    init_sandbox(t, {tmp.sub("s"), "vault", 80, 1});
    TrajectoryRecord tr = execute_agent(tmp.sub("s"), t, vault_agent(), 2);
    CHECK(tr.steps.size() == 2);
}

TEST_CASE("fault profiles mutate the script deterministically") {
    ScriptedAgent a = vault_agent();
    a.fault_profile = FaultProfile{"drop_step", 1, "", ""};
    auto eff = effective_script(a);
    REQUIRE(eff.size() == 2);
    CHECK(eff[1].verb == "delete_note");

    a.fault_profile = FaultProfile{"duplicate_step", 0, "", ""};
    eff = effective_script(a);
    REQUIRE(eff.size() == 4);
    CHECK(eff[0].to_json() == eff[1].to_json());

    a.fault_profile = FaultProfile{"corrupt_param", 1, "path", "Recipes/Wrong.md"};
    eff = effective_script(a);
    CHECK(std::get<std::string>(eff[1].params.at("path")) == "Recipes/Wrong.md");

    Json j = a.fault_profile->to_json();
    CHECK(FaultProfile::from_json(j).to_json() == j);
}

TEST_CASE("run_task produces full artifacts with exact reward") {
    TempDir tmp;
    RunArtifact art = run_task(vault_task(), vault_agent(), verify::default_config("vault"),
                               {tmp.sub("run/sandbox"), "vault", 80, 7});
    CHECK(art.reward.n_pass == 4);
    CHECK(art.reward.n_total == 4);
    CHECK(art.reward.reward_text() == "1.0000");
    CHECK(art.trajectory.final_digest ==
          digest_state(load_app_state("vault", art.run_dir + "/final_state")));
    for (const auto& f : {"task.json", "trajectory.json", "verdicts.json", "reward.json",
                          "meta.json"}) {
        CHECK(std::filesystem::exists(art.run_dir + "/" + f));
    }

    RunArtifact back = load_run_artifact(art.run_dir);
    CHECK(task_to_json(back.task) == task_to_json(art.task));
    CHECK(back.trajectory.to_json() == art.trajectory.to_json());
    CHECK(back.reward.to_json() == art.reward.to_json());
    REQUIRE(back.verdicts.size() == art.verdicts.size());
    for (size_t i = 0; i < back.verdicts.size(); ++i) {
        CHECK(back.verdicts[i].to_json() == art.verdicts[i].to_json());
    }
}

TEST_CASE("a faulty agent earns partial reward") {
    TempDir tmp;
    ScriptedAgent a = vault_agent();
    a.fault_profile = FaultProfile{"drop_step", 2, "", ""};  // never deletes the inbox copy
    RunArtifact art = run_task(vault_task(), a, verify::default_config("vault"),
                               {tmp.sub("s"), "vault", 80, 7});
    CHECK(art.reward.n_pass == 3);
    CHECK(art.reward.reward_text() == "0.7500");
}

TEST_CASE("three runs are byte-identical and replayable") {
    std::vector<std::string> dir_digests, final_digests;
    std::vector<Json> verdicts;
    for (int i = 0; i < 3; ++i) {
        TempDir tmp;
        RunArtifact art = run_task(vault_task(), vault_agent(), verify::default_config("vault"),
                                   {tmp.sub("s"), "vault", 80, 42});
        dir_digests.push_back(digest_directory(art.run_dir + "/final_state"));
        final_digests.push_back(art.trajectory.final_digest);
        Json v = Json::array();
        for (const auto& r : art.verdicts) v.push_back(r.to_json());
        verdicts.push_back(v);

        TempDir fresh;
        CHECK(replay_trajectory(art.task, art.trajectory, fresh.sub("r")) ==
              art.trajectory.final_digest);
    }
    CHECK(dir_digests[0] == dir_digests[1]);
    CHECK(dir_digests[1] == dir_digests[2]);
    CHECK(final_digests[0] == final_digests[1]);
    CHECK(final_digests[1] == final_digests[2]);
    CHECK(verdicts[0] == verdicts[1]);
    CHECK(verdicts[1] == verdicts[2]);
}

TEST_CASE("scripted agent json round trip and file load") {
    TempDir tmp;
    ScriptedAgent a = vault_agent();
    a.fault_profile = FaultProfile{"drop_step", 0, "", ""};
    write_file(tmp.sub("agent.json"), a.to_json().dump(2));
    ScriptedAgent back = ScriptedAgent::load(tmp.sub("agent.json"));
    CHECK(back.to_json() == a.to_json());
}

TEST_CASE("shipped repair case artifacts load and run end to end") {
    std::string base = src_dir() + "/assets/cases/media_batch_rate_and_tag";
    TaskInstance t = parse_task_instance(read_file(base + "/task.json"));
    ScriptedAgent agent = ScriptedAgent::load(base + "/agent.json");
    CHECK(t.app_id == "media");
    CHECK(t.criteria.size() == 10);
    CHECK(agent.script.size() == 53);

    TempDir tmp;
    RunArtifact with_v1 = run_task(t, agent, verify::VerifierConfig::load(base + "/cfg.v1.json"),
                                   {tmp.sub("a"), "media", 200, 1});
    CHECK(with_v1.reward.n_pass == 6);
    CHECK(with_v1.reward.reward_text() == "0.6000");

    RunArtifact with_fixed =
        run_task(t, agent, verify::VerifierConfig::load(base + "/cfg.correct.json"),
                 {tmp.sub("b"), "media", 200, 1});
    CHECK(with_fixed.reward.n_pass == 10);
    CHECK(with_fixed.reward.reward_text() == "1.0000");
}
