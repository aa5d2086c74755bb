"""Hand-gesture classification over 21-landmark frames.

A deterministic geometric classifier stands in for a learned model behind
the same interface: landmark frame in, (gesture class, score) out.  Only
two classes carry control semantics downstream (open hand arms a button,
index-pointing presses it); the rest exist so streams can be labeled.

Landmark layout follows the common 21-point hand model: 0 wrist, then four
joints per digit in thumb, index, middle, ring, pinky order (base joint
first, fingertip last).  Classification uses x/y only, so depth scaling
never changes the outcome.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple

import numpy as np

from .errors import MalformedFrame, ParameterError, UnsupportedGesture

WRIST = 0
THUMB = (1, 2, 3, 4)
FINGERS = {"index": (5, 6, 7, 8), "middle": (9, 10, 11, 12),
           "ring": (13, 14, 15, 16), "pinky": (17, 18, 19, 20)}
INDEX_TIP = 8

EXTENSION_RATIO = 1.30
THUMB_ANGLE_RAD = math.radians(150.0)
OK_TIP_DISTANCE = 0.05


class GestureClass(Enum):
    Palm = "palm"
    One = "one"
    Two = "two"
    Three = "three"
    Four = "four"
    Fist = "fist"
    Thumb = "thumb"
    Ok = "ok"
    Unknown = "unknown"


class FingerState(NamedTuple):
    """Extension flags ordered thumb -> pinky."""

    thumb: bool
    index: bool
    middle: bool
    ring: bool
    pinky: bool


@dataclass
class HandFrame:
    landmarks: np.ndarray  # (21, 3) of x, y, z
    stamp_us: int = 0
    handedness: str = "right"
    confidence: float = 1.0

    def __post_init__(self):
        self.landmarks = np.asarray(self.landmarks, dtype=float)

    def validate(self):
        if self.landmarks.ndim != 2 or self.landmarks.shape != (21, 3):
            raise MalformedFrame(
                f"expected 21 landmarks of (x, y, z), got shape {self.landmarks.shape}"
            )
        xy = self.landmarks[:, :2]
        if np.any(xy < 0.0) or np.any(xy > 1.0):
            bad = int(np.argmax(np.any((xy < 0.0) | (xy > 1.0), axis=1)))
            raise MalformedFrame(f"landmark {bad} outside [0,1]^2: {xy[bad].tolist()}")
        if not (0.0 <= self.confidence <= 1.0):
            raise MalformedFrame(f"confidence {self.confidence} outside [0,1]")
        if self.handedness not in ("left", "right"):
            raise MalformedFrame(f"handedness must be left/right, got {self.handedness!r}")
        return self


def _xy(frame, i):
    return frame.landmarks[i, 0], frame.landmarks[i, 1]


def _dist(frame, i, j):
    ax, ay = _xy(frame, i)
    bx, by = _xy(frame, j)
    return math.hypot(ax - bx, ay - by)


def _thumb_angle(frame):
    # angle at the thumb MCP between rays to its base joint and to the IP
    mx, my = _xy(frame, THUMB[1])
    ax, ay = _xy(frame, THUMB[0])
    bx, by = _xy(frame, THUMB[2])
    v1 = (ax - mx, ay - my)
    v2 = (bx - mx, by - my)
    n1 = math.hypot(*v1)
    n2 = math.hypot(*v2)
    if n1 < 1e-12 or n2 < 1e-12:
        return 0.0
    c = (v1[0] * v2[0] + v1[1] * v2[1]) / (n1 * n2)
    return math.acos(max(-1.0, min(1.0, c)))


def finger_extensions(frame: HandFrame) -> FingerState:
    """Ratio test per finger: tip clearly farther from the wrist than the PIP."""
    frame.validate()
    flags = [_thumb_angle(frame) > THUMB_ANGLE_RAD]
    for name in ("index", "middle", "ring", "pinky"):
        mcp, pip, dip, tip = FINGERS[name]
        denom = max(_dist(frame, pip, WRIST), 1e-12)
        flags.append(_dist(frame, tip, WRIST) / denom > EXTENSION_RATIO)
    return FingerState(*flags)


def _structurally_plausible(frame) -> bool:
    # every digit's base joint must sit nearer the wrist than its middle
    # joint; true of any actual hand, vanishingly rare for landmark noise
    for base, mid in ((1, 2), (5, 6), (9, 10), (13, 14), (17, 18)):
        if _dist(frame, base, WRIST) >= _dist(frame, mid, WRIST):
            return False
    return True


def _margin_score(frame) -> float:
    margins = [abs(_thumb_angle(frame) - THUMB_ANGLE_RAD)]
    for name in ("index", "middle", "ring", "pinky"):
        mcp, pip, dip, tip = FINGERS[name]
        denom = max(_dist(frame, pip, WRIST), 1e-12)
        margins.append(abs(_dist(frame, tip, WRIST) / denom - EXTENSION_RATIO))
    return max(0.0, min(1.0, min(margins)))


def classify(frame: HandFrame):
    """Decision table over finger extensions -> (GestureClass, score).

    Frames failing the structural plausibility check (joint chains not
    radially ordered) classify as Unknown with score 0; a landmark model
    tracking a real hand never produces such frames.
    """
    frame.validate()
    if not _structurally_plausible(frame):
        return GestureClass.Unknown, 0.0
    state = finger_extensions(frame)
    score = _margin_score(frame)
    t, i, m, r, p = state
    fingers = (i, m, r, p)
    if t and all(fingers):
        return GestureClass.Palm, score
    if not t and fingers == (True, False, False, False):
        return GestureClass.One, score
    if not t and fingers == (True, True, False, False):
        return GestureClass.Two, score
    if not t and fingers == (True, True, True, False):
        return GestureClass.Three, score
    if not t and fingers == (True, True, True, True):
        return GestureClass.Four, score
    if not t and not any(fingers):
        return GestureClass.Fist, score
    if t and not any(fingers):
        return GestureClass.Thumb, score
    if t and fingers == (True, False, False, False):
        if _dist(frame, THUMB[3], INDEX_TIP) < OK_TIP_DISTANCE:
            return GestureClass.Ok, score
    return GestureClass.Unknown, score


def index_tip_position(frame: HandFrame):
    """x, y of the index fingertip (landmark 8)."""
    frame.validate()
    return _xy(frame, INDEX_TIP)


# ---------------------------------------------------------------------------
# synthetic frame generator

# hand scale as a fraction of the image; the wrist sits this far from the
# requested tip, toward the image center
_SCALE = 0.14
_TIP_MARGIN = 0.05

# radial chains (r, theta_deg) around the wrist, r in units of _SCALE along
# the wrist->tip direction; theta > 0 is the thumb side
_EXTENDED_R = (0.42, 0.65, 0.85, 1.0)
_FOLDED_R = (0.42, 0.90, 0.60, 0.35)
_FOLDED_INDEX = ((0.42, 0.0), (0.95, 30.0), (0.97, 15.0), (1.0, 0.0))
_FINGER_THETA = {"index": 0.0, "middle": -14.0, "ring": -28.0, "pinky": -42.0}
_THUMB_EXTENDED = ((0.35, 40.0), (0.55, 40.0), (0.75, 40.0), (0.95, 40.0))
_THUMB_FOLDED = ((0.35, 40.0), (0.55, 40.0), (0.45, 20.0), (0.40, 5.0))
# alpha/beta coordinates (along inward axis, along lateral axis): a straight
# thumb whose tip lands within the Ok pinch distance of the index tip
_THUMB_OK = ((0.72, -0.28), (0.53, -0.2367), (0.34, -0.1933), (0.15, -0.15))

_GESTURE_PLAN = {
    # (thumb_variant, index_extended, middle, ring, pinky)
    GestureClass.Palm: ("extended", True, True, True, True),
    GestureClass.One: ("folded", True, False, False, False),
    GestureClass.Two: ("folded", True, True, False, False),
    GestureClass.Three: ("folded", True, True, True, False),
    GestureClass.Four: ("folded", True, True, True, True),
    GestureClass.Fist: ("folded", False, False, False, False),
    GestureClass.Thumb: ("extended", False, False, False, False),
    GestureClass.Ok: ("ok", True, False, False, False),
}


def synth_frame(gesture: GestureClass, tip, seed=0, stamp_us=0, handedness="right") -> HandFrame:
    """Deterministic frame that classifies to ``gesture`` with landmark 8 at ``tip``.

    The construction needs a small border to fit the whole hand, so the tip
    must lie within [0.05, 0.95] on both axes.
    """
    if gesture not in _GESTURE_PLAN:
        raise UnsupportedGesture(f"cannot synthesize gesture {gesture}")
    tx, ty = float(tip[0]), float(tip[1])
    if not (_TIP_MARGIN <= tx <= 1.0 - _TIP_MARGIN and _TIP_MARGIN <= ty <= 1.0 - _TIP_MARGIN):
        raise ParameterError(
            f"tip {tip} outside synthesizable region [{_TIP_MARGIN}, {1.0 - _TIP_MARGIN}]^2"
        )
    rng = np.random.default_rng(seed)

    cx, cy = 0.5 - tx, 0.5 - ty
    norm = math.hypot(cx, cy)
    if norm < 1e-9:
        gx, gy = 0.0, 1.0
    else:
        gx, gy = cx / norm, cy / norm  # inward: tip -> image center
    nx, ny = -gy, gx

    def place(alpha, beta):
        return (tx + _SCALE * (alpha * gx + beta * nx),
                ty + _SCALE * (alpha * gy + beta * ny))

    def polar(r, theta_deg):
        th = math.radians(theta_deg)
        return (1.0 - r * math.cos(th), -r * math.sin(th))

    thumb_variant, *finger_plan = _GESTURE_PLAN[gesture]
    coords = {}  # landmark index -> (alpha, beta)
    coords[WRIST] = (1.0, 0.0)

    if thumb_variant == "extended":
        chain = [polar(r, th) for r, th in _THUMB_EXTENDED]
    elif thumb_variant == "folded":
        chain = [polar(r, th) for r, th in _THUMB_FOLDED]
    else:
        chain = list(_THUMB_OK)
    for idx, ab in zip(THUMB, chain):
        coords[idx] = ab

    for (name, indices), extended in zip(FINGERS.items(), finger_plan):
        theta = _FINGER_THETA[name]
        if name == "index" and not extended:
            chain = [polar(r, theta + dth) for r, dth in _FOLDED_INDEX]
        else:
            radii = _EXTENDED_R if extended else _FOLDED_R
            chain = [polar(r, theta) for r in radii]
        for idx, ab in zip(indices, chain):
            coords[idx] = ab

    jitter = rng.uniform(-0.01, 0.01, size=(21, 2))
    jitter[INDEX_TIP] = 0.0  # tip is pinned exactly
    z = rng.uniform(0.0, 0.05, size=21)

    landmarks = np.zeros((21, 3))
    for idx in range(21):
        a, b = coords[idx]
        x, y = place(a + jitter[idx, 0], b + jitter[idx, 1])
        landmarks[idx] = (x, y, z[idx])
    landmarks[INDEX_TIP, 0] = tx
    landmarks[INDEX_TIP, 1] = ty
    return HandFrame(landmarks=landmarks, stamp_us=stamp_us, handedness=handedness,
                     confidence=1.0)


# ---------------------------------------------------------------------------
# JSON-lines stream format

def frame_to_dict(frame: HandFrame) -> dict:
    return {
        "landmarks": [[float(v) for v in row] for row in frame.landmarks],
        "stamp_us": int(frame.stamp_us),
        "handedness": frame.handedness,
        "confidence": float(frame.confidence),
    }


def frame_from_dict(obj: dict) -> HandFrame:
    try:
        return HandFrame(
            landmarks=np.asarray(obj["landmarks"], dtype=float),
            stamp_us=int(obj.get("stamp_us", 0)),
            handedness=obj.get("handedness", "right"),
            confidence=float(obj.get("confidence", 1.0)),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise MalformedFrame(f"bad frame record: {exc}") from exc


def load_frames_jsonl(path):
    frames = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if line:
                frames.append(frame_from_dict(json.loads(line)))
    return frames


def save_frames_jsonl(path, frames):
    with open(path, "w") as fh:
        for frame in frames:
            fh.write(json.dumps(frame_to_dict(frame)) + "\n")
