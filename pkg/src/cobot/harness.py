"""Scenario runner: scripted hand trajectories driving the full pipeline.

A scenario is a timed list of steps (move the synthetic fingertip, switch
gesture, wait, assert on published state, or the press_button macro that
bundles the arm->press->release protocol).  Headless runs use the virtual
clock: every wall-time-free tick publishes clock/tick plus one synthetic
hand frame, so identical (scenario, seed, config) inputs give bit-identical
session logs.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from . import gesture as ges
from . import projection as proj
from .bus import Broker, SessionLog, replay_into
from .config import SystemConfig
from .errors import ScenarioError
from .nodes import launch_core_nodes

KNOWN_ACTIONS = ("move_tip", "set_gesture", "wait", "assert", "press_button")

OPS = {
    "==": lambda a, b, tol: abs(a - b) <= tol if isinstance(a, (int, float)) else a == b,
    "!=": lambda a, b, tol: abs(a - b) > tol if isinstance(a, (int, float)) else a != b,
    ">=": lambda a, b, tol: a >= b - tol,
    "<=": lambda a, b, tol: a <= b + tol,
    ">": lambda a, b, tol: a > b,
    "<": lambda a, b, tol: a < b,
}


@dataclass
class ScenarioStep:
    action: str
    params: dict
    at_s: float | None = None


@dataclass
class Scenario:
    name: str
    seed: int
    steps: list

    @staticmethod
    def from_dict(obj: dict) -> "Scenario":
        try:
            steps = []
            last_at = 0.0
            for raw in obj["steps"]:
                action = raw["action"]
                if action not in KNOWN_ACTIONS:
                    raise ScenarioError(f"unknown scenario action {action!r}")
                at_s = raw.get("at_s")
                if at_s is not None:
                    if at_s < last_at:
                        raise ScenarioError(f"at_s must be nondecreasing, got {at_s} after {last_at}")
                    last_at = at_s
                params = {k: v for k, v in raw.items() if k not in ("action", "at_s")}
                steps.append(ScenarioStep(action=action, params=params, at_s=at_s))
            return Scenario(name=str(obj.get("name", "unnamed")),
                            seed=int(obj.get("seed", 0)), steps=steps)
        except KeyError as exc:
            raise ScenarioError(f"bad scenario record: missing {exc}") from exc

    @staticmethod
    def load(path) -> "Scenario":
        with open(path) as fh:
            return Scenario.from_dict(json.load(fh))


@dataclass
class SessionReport:
    task_completed: bool
    elapsed_s: float
    press_event_count: int
    pour_events: int
    determinism_digest: str
    assertions: list = field(default_factory=list)
    conservation_max_dev: float = 0.0
    faults: int = 0

    def to_dict(self):
        return {
            "task_completed": self.task_completed,
            "elapsed_s": self.elapsed_s,
            "press_event_count": self.press_event_count,
            "pour_events": self.pour_events,
            "determinism_digest": self.determinism_digest,
            "assertions": self.assertions,
            "conservation_max_dev": self.conservation_max_dev,
            "faults": self.faults,
        }


def _resolve_path(data, path):
    cur = data
    for part in path.split("."):
        if isinstance(cur, list):
            cur = cur[int(part)]
        elif isinstance(cur, dict):
            if part not in cur:
                raise ScenarioError(f"path element {part!r} missing in {sorted(cur)}")
            cur = cur[part]
        else:
            raise ScenarioError(f"cannot descend into {type(cur).__name__} at {part!r}")
    return cur


class _Runner:
    def __init__(self, scenario: Scenario, config: SystemConfig, broker: Broker):
        self.scenario = scenario
        self.config = config
        self.broker = broker
        self.nodes = launch_core_nodes(broker, config)
        self.tip = (0.5, 0.5)        # camera-normalized
        self.gesture = None          # None = hand absent
        self.frame_index = 0
        self.latest = {}             # topic -> last payload
        self.press_count = 0
        self.pour_events = 0
        self._pouring = False
        self.conservation_max_dev = 0.0
        self.faults = 0
        self.assertions = []
        self.total_expected = None
        watcher = broker.client(name="harness", on_message=self._observe)
        watcher.subscribe("*")
        self.h_panel_to_cam = proj.invert_homography(config.camera_to_panel)

    def _observe(self, msg):
        self.latest[msg.topic] = msg.data
        if msg.topic == "gui/button_events" and msg.data.get("kind") == "press":
            self.press_count += 1
        elif msg.topic == "robot/fault":
            self.faults += 1
        elif msg.topic == "scene/state":
            pouring = bool(msg.data.get("pouring"))
            if pouring and not self._pouring:
                self.pour_events += 1
            self._pouring = pouring
            total = sum(c["fill_fraction"] for c in msg.data["containers"]) \
                + msg.data["box"]["content_fraction"]
            if self.total_expected is None:
                self.total_expected = total
            self.conservation_max_dev = max(self.conservation_max_dev,
                                            abs(total - self.total_expected))

    # -- core tick: one 20 ms step of the whole world -----------------------
    def tick(self):
        self.broker.tick(self.config.tick_us)
        if self.gesture is None:
            frame_payload = {"absent": True, "stamp_us": self.broker.now_us()}
        else:
            frame = ges.synth_frame(self.gesture, self.tip,
                                    seed=self.scenario.seed + self.frame_index,
                                    stamp_us=self.broker.now_us())
            frame_payload = ges.frame_to_dict(frame)
        self.frame_index += 1
        self.broker.publish("hand/frames", frame_payload)

    def run_until(self, t_s):
        target_us = int(round(t_s * 1e6))
        while self.broker.now_us() < target_us:
            self.tick()

    def wait(self, duration_s):
        ticks = int(round(duration_s * 1e6 / self.config.tick_us))
        for _ in range(ticks):
            self.tick()

    # -- step execution -------------------------------------------------------
    def execute(self, step: ScenarioStep):
        if step.at_s is not None:
            self.run_until(step.at_s)
        getattr(self, "_do_" + step.action)(step.params)

    def _set_tip_mm(self, x_mm, y_mm):
        cam = proj.project_point(self.h_panel_to_cam, (x_mm, y_mm))
        self.tip = (min(max(cam[0], 0.05), 0.95), min(max(cam[1], 0.05), 0.95))

    def _do_move_tip(self, params):
        if "button" in params:
            b = self.config.panel.button(int(params["button"]))
            x, y, w, h = b.rect_mm
            self._set_tip_mm(x + w / 2, y + h / 2)
        elif params.get("space", "camera") == "panel":
            self._set_tip_mm(float(params["x"]), float(params["y"]))
        else:
            self.tip = (float(params["x"]), float(params["y"]))

    def _do_set_gesture(self, params):
        g = params.get("gesture")
        self.gesture = None if g in (None, "none", "absent") else ges.GestureClass(g)

    def _do_wait(self, params):
        self.wait(float(params["s"]))

    def _do_press_button(self, params):
        """Arm with an open hand, press with the index gesture, release."""
        self._do_move_tip({"button": params["button"]})
        self.gesture = ges.GestureClass.Palm
        self.wait(2 * self.config.tick_us / 1e6)
        self.gesture = ges.GestureClass.One
        self.wait(float(params["hold_s"]))
        self.gesture = ges.GestureClass.Palm
        self.wait(2 * self.config.tick_us / 1e6)

    def _do_assert(self, params):
        topic = params["topic"]
        path = params.get("path", "")
        op = params.get("op", "==")
        tol = float(params.get("tol", 0.0))
        expected = params["value"]
        record = {"topic": topic, "path": path, "op": op, "value": expected,
                  "stamp_us": self.broker.now_us()}
        if topic not in self.latest:
            record.update(passed=False, error=f"no message seen on {topic!r}")
        else:
            try:
                actual = _resolve_path(self.latest[topic], path) if path else self.latest[topic]
                record.update(actual=actual, passed=bool(OPS[op](actual, expected, tol)))
            except (ScenarioError, KeyError, IndexError, TypeError) as exc:
                record.update(passed=False, error=str(exc))
        self.assertions.append(record)


def run_scenario(scenario: Scenario, config: SystemConfig | None = None,
                 log_path=None, max_virtual_s=600.0):
    """Execute a scenario headlessly; returns (SessionReport, SessionLog)."""
    config = config or SystemConfig()
    broker = Broker(clock_mode="virtual", config_digest=config.digest())
    runner = _Runner(scenario, config, broker)
    for step in scenario.steps:
        if broker.now_us() > max_virtual_s * 1e6:
            break
        runner.execute(step)
    log = broker.session_log()
    timed_out = broker.now_us() > max_virtual_s * 1e6
    completed = (
        not timed_out
        and bool(runner.assertions)
        and all(a["passed"] for a in runner.assertions)
    )
    report = SessionReport(
        task_completed=completed,
        elapsed_s=broker.now_us() / 1e6,
        press_event_count=runner.press_count,
        pour_events=runner.pour_events,
        determinism_digest=log.digest(),
        assertions=runner.assertions,
        conservation_max_dev=runner.conservation_max_dev,
        faults=runner.faults,
    )
    if log_path is not None:
        log.save(log_path)
    return report, log


def verify_log(path) -> dict:
    """Seq-continuity + digest report for a stored session log."""
    return SessionLog.load(path).verify()


def replay_log(path, config: SystemConfig | None = None, speed="fast", strict=False):
    """Replay a stored log into a fresh broker; returns (old log, new log)."""
    old = SessionLog.load(path)
    config = config or SystemConfig()
    broker = Broker(clock_mode=old.header.get("clock_mode", "virtual"),
                    config_digest=config.digest())
    replay_into(broker, old, speed=speed, strict=strict)
    return old, broker.session_log()
