"""Desk-scale simulator for projected-GUI cobot control with fingertip haptics.

Modules map onto the pipeline: ``bus`` (pub/sub transport with
record/replay), ``gesture`` (landmark classification), ``projection``
(homography + panel + press protocol), ``robot`` (arm kinematics and the
pour scene), ``haptics`` (five-bar tactile display and pattern library),
``analytics`` (study statistics), ``harness`` (scenario runner), and
``bridge``/``cli`` (network endpoints and the command line).
"""

from .bus import Broker, BusMessage, SessionLog, replay_into
from .config import SystemConfig
from .errors import CobotError
from .gesture import GestureClass, HandFrame, classify, index_tip_position, synth_frame
from .haptics import (
    ContactState,
    FiveBarConfig,
    ServoPair,
    TactilePattern,
    contact_to_target,
    default_pattern_set,
    fivebar_fk,
    fivebar_ik,
    make_rotation_pattern,
    pattern_sample,
    servo_stream,
)
from .harness import Scenario, SessionReport, run_scenario, verify_log
from .projection import (
    PanelLayout,
    PressEvent,
    PressState,
    default_layout,
    estimate_homography,
    hit_test,
    press_step,
    project_point,
    render_panel_state,
)
from .robot import (
    JogCommand,
    Pose,
    RobotConfig,
    RobotState,
    SceneState,
    forward_kinematics,
    gripper_step,
    inverse_kinematics,
    jacobian,
    jog_step,
    rotate_step,
    scene_step,
)

__version__ = "0.1.0"
