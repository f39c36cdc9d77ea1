"""End-to-end smoke tests for the python bindings."""

import json
import os
import pathlib

import pytest

import worldbench

SRC = pathlib.Path(os.environ["WB_SOURCE_DIR"])
CASE = SRC / "assets" / "cases" / "media_batch_rate_and_tag"


def test_reward_text_formatting():
    assert worldbench.reward_text(3, 5) == "0.6000"
    assert worldbench.reward_text(10, 10) == "1.0000"
    assert worldbench.reward_text(1, 3) == "0.3333"


def test_validate_task_accepts_shipped_case():
    report = worldbench.validate_task((CASE / "task.json").read_text())
    assert report["ok"] is True
    assert report["findings"] == []


def test_validate_task_reports_findings():
    doc = json.loads((CASE / "task.json").read_text())
    doc["difficulty"] = 9
    report = worldbench.validate_task(json.dumps(doc))
    assert report["ok"] is False
    assert any("difficulty" in f["path"] for f in report["findings"])


def test_malformed_task_raises_worldbench_error():
    with pytest.raises(worldbench.WorldbenchError) as err:
        worldbench.validate_task('{"task_id": "x", "surprise": 1}')
    assert "surprise" in str(err.value)


def test_selftest_gates_all_apps():
    for app in ("vault", "workbook", "media"):
        report = worldbench.selftest(app)
        assert report["gated"] is True, report


def test_run_and_evolve_shipped_case(tmp_path):
    run = worldbench.run_task(CASE / "task.json", CASE / "agent.json",
                              CASE / "cfg.v1.json", tmp_path, step_budget=200, seed=1)
    assert run["n_pass"] == 6
    assert run["n_total"] == 10
    assert run["reward"] == "0.6000"

    report = worldbench.evolve(run["run_dir"], CASE / "cfg.v1.json")
    assert report["outcome"] == "fixed"
    assert report["rounds_used"] == 1
    assert report["divergences_before"] == 4
    assert report["divergences_after"] == 0
    cfg = report["repaired_config"]
    assert cfg["bindings"]["table.tags.store"] == "data"
    assert cfg["revision"] == 1

    # rerun with the repaired config: full reward
    cfg_path = tmp_path / "cfg.evolved.json"
    cfg_path.write_text(json.dumps(cfg))
    rerun = worldbench.run_task(CASE / "task.json", CASE / "agent.json",
                                cfg_path, tmp_path / "rerun", step_budget=200, seed=1)
    assert rerun["reward"] == "1.0000"


def test_run_is_deterministic(tmp_path):
    digests = []
    for sub in ("a", "b"):
        run = worldbench.run_task(CASE / "task.json", CASE / "agent.json",
                                  CASE / "cfg.correct.json", tmp_path / sub,
                                  step_budget=200, seed=7)
        digests.append(worldbench.digest_directory(
            str(pathlib.Path(run["run_dir"]) / "final_state")))
    assert digests[0] == digests[1]


def test_check_endpoint_and_protocol_error(tmp_path):
    run = worldbench.run_task(CASE / "task.json", CASE / "agent.json",
                              CASE / "cfg.correct.json", tmp_path, step_budget=200, seed=1)
    state = str(pathlib.Path(run["run_dir"]) / "final_state")
    verdict = worldbench.check("media", "check-image-present", state,
                               {"filename": "IMG_2401.CR2"})
    assert verdict["ok"] is True
    assert verdict["passed"] is True

    info = worldbench.check("media", "get-image-info", state, {"filename": "IMG_2401.CR2"})
    assert info["passed"] is None
    assert info["evidence"]["rating"] == 1

    with pytest.raises(worldbench.WorldbenchError):
        worldbench.check("media", "check-rotation", state)


def test_generate_tasks(tmp_path):
    manifest = worldbench.generate(SRC / "templates", "vault", 3, 5, tmp_path)
    assert manifest["task_count"] == 3
    assert len(manifest["task_ids"]) == 3
    assert 4.0 <= manifest["mean_criteria_per_task"] <= 10.0
    assert 0.5 <= manifest["mean_seed_artifacts_per_task"] <= 3.0
    emitted = sorted(p.name for p in tmp_path.glob("task_*.json"))
    assert "task_0001.json" in emitted
    assert "task_0001.agent.json" in emitted
    task = json.loads((tmp_path / "task_0001.json").read_text())
    report = worldbench.validate_task(json.dumps(task))
    assert report["ok"] is True
