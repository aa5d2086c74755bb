"""Single top-level configuration: ports, clock, robot, panel, haptics, scene.

One JSON file drives every node; its digest is embedded in session logs so
a replay can prove it ran under identical settings.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .bus import DEFAULT_TICK_US, canonical_json
from .errors import ValidationError
from .haptics import FiveBarConfig
from .projection import PanelLayout, default_layout, layout_from_dict, layout_to_dict
from .robot import RobotConfig, DhRow, forward_kinematics

DEFAULT_TCP_PORT = 7450
DEFAULT_WS_PORT = 7451

# tool axis horizontal here, so wrist rotation tilts a grasped container
DEFAULT_HOME = (0.0, -math.pi / 2, math.pi / 2, 0.0, math.pi / 2, 0.0)


@dataclass
class SystemConfig:
    host: str = "127.0.0.1"
    tcp_port: int = DEFAULT_TCP_PORT
    ws_port: int = DEFAULT_WS_PORT
    tick_us: int = DEFAULT_TICK_US
    ui_frame_hz: float = 30.0
    servo_rate_hz: float = 50.0
    robot: RobotConfig = field(default_factory=RobotConfig)
    home_joints: tuple = DEFAULT_HOME
    panel: PanelLayout = field(default_factory=default_layout)
    camera_to_panel: np.ndarray = None
    fivebar_thumb: FiveBarConfig = field(default_factory=FiveBarConfig)
    fivebar_index: FiveBarConfig = field(default_factory=FiveBarConfig)
    scene: dict = None

    def __post_init__(self):
        if self.camera_to_panel is None:
            w, h = self.panel.size_mm
            self.camera_to_panel = np.array([[w, 0.0, 0.0], [0.0, h, 0.0], [0.0, 0.0, 1.0]])
        else:
            self.camera_to_panel = np.asarray(self.camera_to_panel, dtype=float)
            if self.camera_to_panel.shape != (3, 3):
                raise ValidationError("camera_to_panel must be a 3x3 matrix")
        if self.scene is None:
            self.scene = default_scene(self.robot, self.home_joints)
        if self.tick_us <= 0 or self.servo_rate_hz <= 0 or self.ui_frame_hz <= 0:
            raise ValidationError("rates must be positive")

    def to_dict(self) -> dict:
        return {
            "host": self.host,
            "tcp_port": self.tcp_port,
            "ws_port": self.ws_port,
            "tick_us": self.tick_us,
            "ui_frame_hz": self.ui_frame_hz,
            "servo_rate_hz": self.servo_rate_hz,
            "robot": {
                "dh": [{"a": r.a, "alpha": r.alpha, "d": r.d, "theta_offset": r.theta_offset}
                       for r in self.robot.dh],
                "joint_limits": [list(l) for l in self.robot.joint_limits],
                "max_joint_speed": self.robot.max_joint_speed,
                "max_cart_speed": self.robot.max_cart_speed,
                "jog_speed": self.robot.jog_speed,
            },
            "home_joints": list(self.home_joints),
            "panel": layout_to_dict(self.panel),
            "camera_to_panel": self.camera_to_panel.tolist(),
            "fivebar_thumb": _fivebar_to_dict(self.fivebar_thumb),
            "fivebar_index": _fivebar_to_dict(self.fivebar_index),
            "scene": self.scene,
        }

    def digest(self) -> str:
        return hashlib.sha256(canonical_json(self.to_dict()).encode()).hexdigest()

    def save(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2)

    @staticmethod
    def from_dict(obj: dict) -> "SystemConfig":
        try:
            robot = RobotConfig(
                dh=[DhRow(**row) for row in obj["robot"]["dh"]],
                joint_limits=[tuple(l) for l in obj["robot"]["joint_limits"]],
                max_joint_speed=obj["robot"]["max_joint_speed"],
                max_cart_speed=obj["robot"]["max_cart_speed"],
                jog_speed=obj["robot"].get("jog_speed", 0.05),
            ) if "robot" in obj else RobotConfig()
            return SystemConfig(
                host=obj.get("host", "127.0.0.1"),
                tcp_port=obj.get("tcp_port", DEFAULT_TCP_PORT),
                ws_port=obj.get("ws_port", DEFAULT_WS_PORT),
                tick_us=obj.get("tick_us", DEFAULT_TICK_US),
                ui_frame_hz=obj.get("ui_frame_hz", 30.0),
                servo_rate_hz=obj.get("servo_rate_hz", 50.0),
                robot=robot,
                home_joints=tuple(obj.get("home_joints", DEFAULT_HOME)),
                panel=layout_from_dict(obj["panel"]) if "panel" in obj else default_layout(),
                camera_to_panel=obj.get("camera_to_panel"),
                fivebar_thumb=_fivebar_from_dict(obj.get("fivebar_thumb")),
                fivebar_index=_fivebar_from_dict(obj.get("fivebar_index")),
                scene=obj.get("scene"),
            )
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"bad config: {exc}") from exc

    @staticmethod
    def load(path) -> "SystemConfig":
        with open(path) as fh:
            return SystemConfig.from_dict(json.load(fh))


def _fivebar_to_dict(cfg: FiveBarConfig) -> dict:
    return {
        "base_width_mm": cfg.base_width_mm,
        "l1_mm": cfg.l1_mm,
        "l2_mm": cfg.l2_mm,
        "servo_limits_rad": list(cfg.servo_limits_rad),
        "finger_span_mm": cfg.finger_span_mm,
        "rest_height_mm": cfg.rest_height_mm,
        "depth_range_mm": cfg.depth_range_mm,
    }


def _fivebar_from_dict(obj) -> FiveBarConfig:
    if obj is None:
        return FiveBarConfig()
    return FiveBarConfig(
        base_width_mm=obj["base_width_mm"],
        l1_mm=obj["l1_mm"],
        l2_mm=obj["l2_mm"],
        servo_limits_rad=tuple(obj["servo_limits_rad"]),
        finger_span_mm=obj["finger_span_mm"],
        rest_height_mm=obj["rest_height_mm"],
        depth_range_mm=obj["depth_range_mm"],
    )


def default_scene(robot_cfg: RobotConfig, home_joints) -> dict:
    """Two full containers near the home tool point, box footprint alongside.

    Grasp points are one jog leg away from home (straight down 0.10 m, the
    second also 0.12 m along -y); the box sits 0.15 m along +x so a held
    container rotated past horizontal above it pours in.
    """
    tool = forward_kinematics(robot_cfg, np.asarray(home_joints, dtype=float)).position
    c1 = [float(tool[0]), float(tool[1]), float(tool[2] - 0.10)]
    c2 = [float(tool[0]), float(tool[1] - 0.12), float(tool[2] - 0.10)]
    return {
        "containers": [
            {"id": "container_1", "position": c1, "orientation": [1.0, 0.0, 0.0, 0.0],
             "fill_fraction": 1.0, "grasp_point": c1},
            {"id": "container_2", "position": c2, "orientation": [1.0, 0.0, 0.0, 0.0],
             "fill_fraction": 1.0, "grasp_point": c2},
        ],
        "box": {
            "footprint": [float(tool[0] + 0.10), float(tool[1] - 0.10), 0.10, 0.20],
            "content_fraction": 0.0,
        },
    }
