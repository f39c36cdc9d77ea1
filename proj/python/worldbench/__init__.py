"""Verifier-grounded task harness: python access to the C++ core.

All core functions exchange JSON text; the wrappers here decode to dicts.
"""

import json

from worldbench import _core
from worldbench._core import WorldbenchError, reward_text, digest_directory

__all__ = [
    "WorldbenchError",
    "validate_task",
    "run_task",
    "check",
    "evolve",
    "selftest",
    "generate",
    "reward_text",
    "digest_directory",
]


def validate_task(task_json: str) -> dict:
    return json.loads(_core.validate_task(task_json))


def run_task(task_path, agent_path, cfg_path, out_dir, step_budget=80, seed=0) -> dict:
    return json.loads(
        _core.run_task(str(task_path), str(agent_path), str(cfg_path), str(out_dir),
                       step_budget, seed))


def check(app, endpoint, state_root, args=None) -> dict:
    return json.loads(_core.check(app, endpoint, str(state_root), args or {}))


def evolve(run_dir, cfg_path, budget=3) -> dict:
    return json.loads(_core.evolve(str(run_dir), str(cfg_path), budget))


def selftest(app) -> dict:
    return json.loads(_core.selftest(app))


def generate(templates_dir, app, count, seed, out_dir) -> dict:
    return json.loads(_core.generate(str(templates_dir), app, count, seed, str(out_dir)))
