"""
From a logged flight to an imitation-learning episode
=====================================================

Fly the point-to-point task, then turn the session into a step dataset:
per-step state (position, velocities, attitude, distance and bearing to
the landing target, frame references) paired with the pilot's normalized
stick actions from the same logger row.
"""

import tempfile
from pathlib import Path

from fpvgl.episodes import export_episode, read_dataset, write_dataset
from fpvgl.flightlog import read_session
from fpvgl.sim import SimConfig, builtin_scenario, simulate_session

out_root = Path(tempfile.mkdtemp(prefix="fpvgl-demo-"))

config = SimConfig(seed=21)
scenario = builtin_scenario(2)
_, session_dir = simulate_session(config, scenario, out_root)
session = read_session(session_dir)

# Rows before arming are dropped; each remaining row becomes one step.
dataset = export_episode(session, scenario)
print(f"{len(session.rows)} logged rows -> {len(dataset.steps)} steps")

first, last = dataset.steps[0], dataset.steps[-1]
print(f"first step: t={first.t:.1f}s dist_to_target={first.dist_to_target_m:.1f} m "
      f"action={tuple(round(a, 2) for a in first.action)}")
print(f"last step:  t={last.t:.1f}s dist_to_target={last.dist_to_target_m:.2f} m")

# Actions are (throttle, pitch, yaw, roll) from the RC channels, mapped
# (pwm - 1500) / 500 onto [-1, 1]; the flight ends on the landing target.
assert last.dist_to_target_m < 1.0

path = out_root / "task2_episode.json"
write_dataset(dataset, path)
assert read_dataset(path) == dataset
print(f"dataset written and verified: {path}")
