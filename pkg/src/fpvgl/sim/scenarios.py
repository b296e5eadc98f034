"""Task scenarios: course geometry for the four flying exercises.

Defaults put the start pad at the local origin, the landing pad 20 m due
east, and two 3 m obstacles on the line between them.  Scenario files are
plain ``key = value`` text so courses can be edited by hand; ``obstacle``
lines may repeat.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

TASK_NAMES = ("Task1", "Task2", "Task3", "Task4")

TASK_TITLES = {
    1: "Take off, hover, and land",
    2: "Flying from point A to B",
    3: "Obstacle avoidance",
    4: "Flying Figure 8",
}


@dataclass(frozen=True)
class Obstacle:
    e: float
    n: float
    height: float


@dataclass(frozen=True)
class Scenario:
    name: str
    start: tuple[float, float]
    landing: tuple[float, float]
    obstacles: tuple[Obstacle, ...]
    target_altitude: float

    def __post_init__(self):
        if self.name not in TASK_NAMES:
            raise ValueError(f"unknown task name {self.name!r}")
        task = self.task_number
        if task == 1:
            if self.target_altitude != 4.0:
                raise ValueError("Task1 target altitude must be 4.0 m")
        else:
            if self.target_altitude != 3.0:
                raise ValueError(f"{self.name} target altitude must be 3.0 m")
            if len(self.obstacles) != 2:
                raise ValueError(f"{self.name} needs exactly two obstacles")
            for obstacle in self.obstacles:
                if obstacle.height != 3.0:
                    raise ValueError("obstacle height must be 3.0 m")
                if not _on_segment(self.start, self.landing,
                                   (obstacle.e, obstacle.n)):
                    raise ValueError(
                        "obstacles must sit on the start-landing line")

    @property
    def task_number(self) -> int:
        return int(self.name[-1])


def _on_segment(a, b, p, tol=1e-6):
    ab = (b[0] - a[0], b[1] - a[1])
    ap = (p[0] - a[0], p[1] - a[1])
    length = math.hypot(*ab)
    if length == 0.0:
        return False
    cross = abs(ab[0] * ap[1] - ab[1] * ap[0]) / length
    along = (ab[0] * ap[0] + ab[1] * ap[1]) / (length * length)
    return cross <= tol and 0.0 <= along <= 1.0


def builtin_scenario(task: int) -> Scenario:
    if task not in (1, 2, 3, 4):
        raise ValueError("task must be 1..4")
    if task == 1:
        return Scenario(name="Task1", start=(0.0, 0.0), landing=(0.0, 0.0),
                        obstacles=(), target_altitude=4.0)
    obstacles = (Obstacle(7.0, 0.0, 3.0), Obstacle(13.0, 0.0, 3.0))
    return Scenario(name=f"Task{task}", start=(0.0, 0.0),
                    landing=(20.0, 0.0), obstacles=obstacles,
                    target_altitude=3.0)


class ScenarioFormatError(ValueError):
    pass


def save_scenario(scenario: Scenario, path: str | Path) -> None:
    lines = [
        f"name = {scenario.name}",
        f"start = {scenario.start[0]}, {scenario.start[1]}",
        f"landing = {scenario.landing[0]}, {scenario.landing[1]}",
        f"target_altitude = {scenario.target_altitude}",
    ]
    for obstacle in scenario.obstacles:
        lines.append(f"obstacle = {obstacle.e}, {obstacle.n}, {obstacle.height}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_scenario(path: str | Path) -> Scenario:
    name = None
    start = None
    landing = None
    target_altitude = None
    obstacles: list[Obstacle] = []
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8")
                                 .splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ScenarioFormatError(f"line {lineno}: expected 'key = value'")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        try:
            if key == "name":
                name = value
            elif key == "start":
                start = _pair(value)
            elif key == "landing":
                landing = _pair(value)
            elif key == "target_altitude":
                target_altitude = float(value)
            elif key == "obstacle":
                e, n, height = (float(part) for part in value.split(","))
                obstacles.append(Obstacle(e, n, height))
            else:
                raise ScenarioFormatError(f"line {lineno}: unknown key {key!r}")
        except ScenarioFormatError:
            raise
        except ValueError as exc:
            raise ScenarioFormatError(f"line {lineno}: {exc}") from exc
    missing = [label for label, item in
               (("name", name), ("start", start), ("landing", landing),
                ("target_altitude", target_altitude)) if item is None]
    if missing:
        raise ScenarioFormatError(f"missing keys: {', '.join(missing)}")
    return Scenario(name=name, start=start, landing=landing,
                    obstacles=tuple(obstacles), target_altitude=target_altitude)


def _pair(value: str) -> tuple[float, float]:
    parts = value.split(",")
    if len(parts) != 2:
        raise ValueError("expected two comma-separated numbers")
    return (float(parts[0]), float(parts[1]))
