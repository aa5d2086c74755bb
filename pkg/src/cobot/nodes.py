"""Bus-connected pipeline nodes.

Each node owns one piece of the pipeline and talks only through topics:

    hand/frames -> [gesture] -> gesture/state -> [projection] -> gui/button_events
                                                               -> gui/panel_state
    gui/button_events + clock/tick -> [robot] -> robot/state, scene/state,
                                                 haptics/trigger, robot/fault
    haptics/trigger, haptics/play + clock/tick -> [haptics] -> haptics/servo,
                                                               haptics/contact
    ui/cursor -> [ui adapter] -> hand/frames

Nodes are plain objects with synchronous callbacks; the broker's dispatch
loop serializes everything, so a single-threaded run is deterministic.
"""

from __future__ import annotations

import numpy as np

from . import gesture as ges
from . import haptics as hap
from . import projection as proj
from . import robot as rob
from .bus import TICK_TOPIC
from .config import SystemConfig
from .errors import CobotError, MalformedFrame


def jsonable(value):
    """Recursively convert numpy scalars/arrays for JSON payloads."""
    if isinstance(value, dict):
        return {k: jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [jsonable(v) for v in value.tolist()]
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    return value


class GestureNode:
    """hand/frames -> gesture/state (class, score, index tip)."""

    def __init__(self, broker):
        self.client = broker.client(name="gesture", on_message=self.on_message)
        self.client.subscribe("hand/frames")

    def on_message(self, msg):
        try:
            frame = ges.frame_from_dict(msg.data)
            cls, score = ges.classify(frame)
            tip = ges.index_tip_position(frame)
            payload = {"class": cls.value, "score": float(score),
                       "tip": [float(tip[0]), float(tip[1])]}
        except MalformedFrame as exc:
            payload = {"class": ges.GestureClass.Unknown.value, "score": 0.0,
                       "tip": None, "error": str(exc)}
        self.client.publish("gesture/state", payload)


class ProjectionNode:
    """gesture/state -> gui/button_events + gui/panel_state.

    Maps the camera-space tip through the calibration homography into panel
    millimeters, runs the press state machine, and republishes the display
    model whenever it changes.
    """

    def __init__(self, broker, config: SystemConfig):
        self.config = config
        self.layout = config.panel
        self.h_cam_to_panel = np.asarray(config.camera_to_panel, dtype=float)
        self.state = proj.PressState.idle()
        self.client = broker.client(name="projection", on_message=self.on_message)
        self.client.subscribe("gesture/state")
        self._last_model = None

    def on_message(self, msg):
        cls = ges.GestureClass(msg.data.get("class", "unknown"))
        tip = msg.data.get("tip")
        p_mm = None
        if tip is not None:
            p_mm = proj.project_point(self.h_cam_to_panel, (tip[0], tip[1]))
        self.state, events = proj.press_step(
            self.layout, self.state, cls, p_mm, stamp_us=msg.stamp_us
        )
        for e in events:
            self.client.publish("gui/button_events", {
                "kind": e.kind, "button": e.button,
                "action": self.layout.button(e.button).action,
                "stamp_us": e.stamp_us,
            })
        model = proj.render_panel_state(self.layout, self.state)
        if model != self._last_model:
            self._last_model = model
            self.client.publish("gui/panel_state", jsonable(model))


class RobotNode:
    """Integrates the held button action on every tick; owns robot + scene."""

    def __init__(self, broker, config: SystemConfig):
        self.config = config
        self.cfg = config.robot
        self.state = rob.make_state(self.cfg, np.asarray(config.home_joints, dtype=float))
        self.scene = rob.scene_from_dict(config.scene)
        self.active_action = None
        self.client = broker.client(name="robot", on_message=self.on_message)
        self.client.subscribe("gui/button_events")
        self.client.subscribe(TICK_TOPIC)

    def on_message(self, msg):
        if msg.topic == "gui/button_events":
            self._on_button(msg.data)
        else:
            self._on_tick(msg.data)

    def _on_button(self, data):
        if data.get("kind") == "press":
            self.active_action = data.get("action")
        else:
            if self.active_action == "Rotate":
                self.client.publish("haptics/trigger", {"direction": "cw", "active": False})
            self.active_action = None
            self.state.wrist_rotation_active = False

    def _on_tick(self, data):
        dt = data.get("advance_us", self.config.tick_us) / 1e6
        action = self.active_action
        if action in rob.JOG_AXES or (action and action.startswith("Jog")):
            axis = action[3:]  # "JogX+" -> "X+"
            cmd = rob.JogCommand(axis, self.cfg.jog_speed)
            self.state, fault = rob.jog_step(self.cfg, self.state, cmd, dt)
            if fault is not None:
                self.client.publish("robot/fault", jsonable(fault))
        elif action in ("Open", "Close"):
            self.state = rob.gripper_step(self.state, action, dt, scene=self.scene)
        elif action == "Rotate":
            self.state, trigger = rob.rotate_step(self.cfg, self.state, dt)
            self.client.publish("haptics/trigger", jsonable(trigger))
        self.scene = rob.scene_step(self.scene, self.state, dt)
        self.client.publish("robot/state", jsonable({
            "joints": self.state.joints.tolist(),
            "pose": rob.pose_to_dict(self.state.pose),
            "links": [p.tolist() for p in rob.link_points(self.cfg, self.state.joints)],
            "gripper": {"opening_mm": self.state.gripper.opening_mm,
                        "holding": self.state.gripper.holding},
            "wrist_rotation_active": self.state.wrist_rotation_active,
            "action": action,
        }))
        self.client.publish("scene/state", jsonable(rob.scene_to_dict(self.scene)))


class HapticsNode:
    """Plays patterns into servo/contact streams, one sample per tick."""

    def __init__(self, broker, config: SystemConfig):
        self.config = config
        self.patterns = {p.id: p for p in hap.default_pattern_set()}
        self.playing = None       # TactilePattern
        self.play_t = 0.0
        self.loop = False
        self.trigger_active = False
        self.client = broker.client(name="haptics", on_message=self.on_message)
        self.client.subscribe("haptics/trigger")
        self.client.subscribe("haptics/play")
        self.client.subscribe(TICK_TOPIC)

    def on_message(self, msg):
        if msg.topic == "haptics/trigger":
            self._on_trigger(msg.data)
        elif msg.topic == "haptics/play":
            self._on_play(msg.data)
        else:
            self._on_tick(msg.data)

    def _on_trigger(self, data):
        if data.get("active"):
            pattern = self.patterns[7 if data.get("direction") == "cw" else 8]
            if self.playing is not pattern:
                self.playing = pattern
                self.play_t = 0.0
                self.loop = True
                self._emit()
            self.trigger_active = True
        else:
            self.trigger_active = False
            self.playing = None
            self.loop = False

    def _on_play(self, data):
        pid = int(data.get("pattern", 0))
        if pid in self.patterns:
            self.playing = self.patterns[pid]
            self.play_t = 0.0
            self.loop = False
            self.trigger_active = False
            self._emit()

    def _on_tick(self, data):
        if self.playing is None:
            return
        dt = data.get("advance_us", self.config.tick_us) / 1e6
        self.play_t += dt
        if self.play_t > self.playing.duration_s + 1e-9:
            if self.loop:
                self.play_t %= self.playing.duration_s
            else:
                self.playing = None
                return
        self._emit()

    def _emit(self):
        t = min(self.play_t, self.playing.duration_s)
        contact = hap.pattern_sample(self.playing, t)
        thumb = hap.fivebar_ik(self.config.fivebar_thumb,
                               hap.contact_to_target(self.config.fivebar_thumb, contact["thumb"]))
        index = hap.fivebar_ik(self.config.fivebar_index,
                               hap.contact_to_target(self.config.fivebar_index, contact["index"]))
        self.client.publish("haptics/servo", {
            "thumb": {"theta1": thumb.theta1, "theta2": thumb.theta2},
            "index": {"theta1": index.theta1, "theta2": index.theta2},
            "t": t, "pattern": self.playing.id,
        })
        self.client.publish("haptics/contact", {
            "thumb": {"s": contact["thumb"].s, "f": contact["thumb"].f},
            "index": {"s": contact["index"].s, "f": contact["index"].f},
            "pattern": self.playing.id,
        })


class UiAdapterNode:
    """ui/cursor (panel mm + gesture toggle) -> hand/frames.

    The browser sends panel-space cursor positions; the inverse calibration
    homography runs here so the UI stays free of geometry.
    """

    def __init__(self, broker, config: SystemConfig):
        self.config = config
        self.h_panel_to_cam = proj.invert_homography(config.camera_to_panel)
        self.client = broker.client(name="ui_adapter", on_message=self.on_message)
        self.client.subscribe("ui/cursor")
        self._seq = 0

    def on_message(self, msg):
        data = msg.data
        try:
            gcls = ges.GestureClass(data.get("gesture", "palm"))
            tip_cam = proj.project_point(self.h_panel_to_cam,
                                         (float(data["x_mm"]), float(data["y_mm"])))
            clamped = (min(max(tip_cam[0], 0.05), 0.95), min(max(tip_cam[1], 0.05), 0.95))
            frame = ges.synth_frame(gcls, clamped, seed=self._seq,
                                    stamp_us=msg.stamp_us)
            self._seq += 1
            self.client.publish("hand/frames", ges.frame_to_dict(frame))
        except (CobotError, KeyError, ValueError):
            pass  # a bad cursor sample must not kill the adapter


def launch_core_nodes(broker, config: SystemConfig):
    """All primary nodes wired to a broker; returns them keyed by name."""
    return {
        "gesture": GestureNode(broker),
        "projection": ProjectionNode(broker, config),
        "robot": RobotNode(broker, config),
        "haptics": HapticsNode(broker, config),
        "ui_adapter": UiAdapterNode(broker, config),
    }
