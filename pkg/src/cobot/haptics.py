"""Fingertip tactile display built on a planar five-bar linkage.

Two grounded servos drive a closed 2-RR chain whose coupler point touches
the finger pad; position along the pad and pressing depth encode the cue.
This module provides closed-form FK/IK for that mechanism, the contact
parameterization, the eight-pattern library (including the two opposed
rotational patterns), and sampling into timed servo streams for a
thumb+index pair of devices.

Coordinate frame: x runs along the fingertip axis, y points away from the
finger pad; the two ground joints sit at (-d/2, 0) and (+d/2, 0) and the
coupler operates in y > 0.  All lengths in mm, angles in rad.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

from .errors import ParameterError, Unreachable, ValidationError

CW = "cw"
CCW = "ccw"

CHANNELS = ("thumb", "index")


@dataclass
class FiveBarConfig:
    base_width_mm: float = 30.0
    l1_mm: float = 25.0
    l2_mm: float = 25.0
    servo_limits_rad: tuple = (math.radians(10.0), math.radians(170.0))
    finger_span_mm: float = 20.0
    rest_height_mm: float = 40.0
    depth_range_mm: float = 8.0

    def __post_init__(self):
        for name in ("base_width_mm", "l1_mm", "l2_mm", "finger_span_mm", "depth_range_mm"):
            if getattr(self, name) <= 0:
                raise ValidationError(f"{name} must be positive")
        lo, hi = self.servo_limits_rad
        if not lo < hi:
            raise ValidationError("servo limits must satisfy min < max")


@dataclass
class ContactState:
    """Normalized pad position s and normal-force level f, both in [0, 1]."""

    s: float
    f: float

    def __post_init__(self):
        if not (0.0 <= self.s <= 1.0 and 0.0 <= self.f <= 1.0):
            raise ValidationError(f"contact state out of range: s={self.s}, f={self.f}")


@dataclass
class ServoPair:
    theta1: float
    theta2: float


@dataclass
class Keyframe:
    t: float
    s: float
    f: float


@dataclass
class TactilePattern:
    id: int
    name: str
    duration_s: float
    channels: dict

    def __post_init__(self):
        if self.duration_s <= 0:
            raise ValidationError("pattern duration must be positive")
        for ch in CHANNELS:
            frames = self.channels.get(ch)
            if not frames:
                raise ValidationError(f"channel {ch} needs at least one keyframe")
            times = [k.t for k in frames]
            if times != sorted(times):
                raise ValidationError(f"channel {ch} keyframes must be time-sorted")
            if times[0] < 0 or times[-1] > self.duration_s:
                raise ValidationError(f"channel {ch} keyframe times outside [0, duration]")


@dataclass
class ServoSample:
    t: float
    thumb: ServoPair
    index: ServoPair


# ---------------------------------------------------------------------------
# linkage kinematics

def _ground_joints(cfg):
    half = cfg.base_width_mm / 2.0
    return (-half, 0.0), (half, 0.0)


def _check_servo_limits(cfg, sp):
    lo, hi = cfg.servo_limits_rad
    for name, theta in (("theta1", sp.theta1), ("theta2", sp.theta2)):
        if not (lo <= theta <= hi):
            raise Unreachable(
                f"{name}={theta:.4f} rad outside servo limits [{lo:.4f}, {hi:.4f}]",
                angle=theta,
            )


def fivebar_fk(cfg: FiveBarConfig, sp: ServoPair):
    """Coupler point (x, y) for a servo angle pair; upper intersection branch."""
    _check_servo_limits(cfg, sp)
    (ax, ay), (bx, by) = _ground_joints(cfg)
    e1 = (ax + cfg.l1_mm * math.cos(sp.theta1), ay + cfg.l1_mm * math.sin(sp.theta1))
    e2 = (bx + cfg.l1_mm * math.cos(sp.theta2), by + cfg.l1_mm * math.sin(sp.theta2))
    dx, dy = e2[0] - e1[0], e2[1] - e1[1]
    dist = math.hypot(dx, dy)
    if dist == 0.0 or dist > 2.0 * cfg.l2_mm:
        raise Unreachable(
            f"elbows {dist:.3f} mm apart cannot be spanned by two {cfg.l2_mm} mm links",
            elbow_distance=dist,
        )
    half = dist / 2.0
    h = math.sqrt(cfg.l2_mm * cfg.l2_mm - half * half)
    mx, my = (e1[0] + e2[0]) / 2.0, (e1[1] + e2[1]) / 2.0
    # unit perpendicular to the elbow chord; pick the larger-y endpoint
    px, py = -dy / dist, dx / dist
    c1 = (mx + h * px, my + h * py)
    c2 = (mx - h * px, my - h * py)
    return c1 if c1[1] >= c2[1] else c2


def _elbow_for_side(cfg, ground, p, outward_sign):
    gx, gy = ground
    dx, dy = p[0] - gx, p[1] - gy
    dist = math.hypot(dx, dy)
    lo = abs(cfg.l1_mm - cfg.l2_mm)
    hi = cfg.l1_mm + cfg.l2_mm
    if dist < lo or dist > hi or dist == 0.0:
        clamped = min(max(dist, lo), hi) if dist > 0 else hi
        scale = clamped / dist if dist > 0 else 0.0
        nearest = (gx + dx * scale, gy + dy * scale)
        raise Unreachable(
            f"target {p} at {dist:.3f} mm from ground joint {ground}, "
            f"reachable annulus is [{lo:.3f}, {hi:.3f}] mm",
            nearest=nearest,
        )
    ux, uy = dx / dist, dy / dist
    a = (cfg.l1_mm**2 - cfg.l2_mm**2 + dist**2) / (2.0 * dist)
    h = math.sqrt(max(cfg.l1_mm**2 - a**2, 0.0))
    # elbow-out branch: left elbow on the CCW side of ground->target, right on CW
    px, py = -uy, ux
    return (gx + a * ux + outward_sign * h * px, gy + a * uy + outward_sign * h * py)


def fivebar_ik(cfg: FiveBarConfig, p):
    """Servo angles reaching coupler point p, elbow-out branch."""
    a0, b0 = _ground_joints(cfg)
    e1 = _elbow_for_side(cfg, a0, p, +1.0)
    e2 = _elbow_for_side(cfg, b0, p, -1.0)
    sp = ServoPair(
        theta1=math.atan2(e1[1] - a0[1], e1[0] - a0[0]),
        theta2=math.atan2(e2[1] - b0[1], e2[0] - b0[0]),
    )
    _check_servo_limits(cfg, sp)
    return sp


def contact_to_target(cfg: FiveBarConfig, c: ContactState):
    """Map a contact state to a coupler target; deeper press = larger f."""
    x = (c.s - 0.5) * cfg.finger_span_mm
    y = cfg.rest_height_mm - c.f * cfg.depth_range_mm
    fivebar_ik(cfg, (x, y))  # rejects contact rectangles that poke outside the workspace
    return (x, y)


# ---------------------------------------------------------------------------
# patterns

def pattern_sample(pattern: TactilePattern, t: float):
    """Contact state per channel at time t; linear between keyframes, clamped outside."""
    if not (0.0 <= t <= pattern.duration_s):
        raise ParameterError(f"t={t} outside [0, {pattern.duration_s}]")
    out = {}
    for ch in CHANNELS:
        frames = pattern.channels[ch]
        if t <= frames[0].t:
            k = frames[0]
            out[ch] = ContactState(k.s, k.f)
            continue
        if t >= frames[-1].t:
            k = frames[-1]
            out[ch] = ContactState(k.s, k.f)
            continue
        for prev, nxt in zip(frames, frames[1:]):
            if prev.t <= t <= nxt.t:
                span = nxt.t - prev.t
                w = 0.0 if span == 0.0 else (t - prev.t) / span
                out[ch] = ContactState(
                    prev.s + w * (nxt.s - prev.s),
                    prev.f + w * (nxt.f - prev.f),
                )
                break
    return out


def make_rotation_pattern(direction: str, duration_s: float, pattern_id=None, force=0.6):
    """Opposed sliding on thumb and index renders a rotation cue.

    Clockwise slides the thumb contact forward (s 0 -> 1) while the index
    contact slides back (1 -> 0); counterclockwise mirrors both channels.
    """
    if duration_s <= 0:
        raise ValidationError("duration must be positive")
    if direction not in (CW, CCW):
        raise ValidationError(f"direction must be '{CW}' or '{CCW}', got {direction!r}")
    if direction == CW:
        thumb = [Keyframe(0.0, 0.0, force), Keyframe(duration_s, 1.0, force)]
        index = [Keyframe(0.0, 1.0, force), Keyframe(duration_s, 0.0, force)]
    else:
        thumb = [Keyframe(0.0, 1.0, force), Keyframe(duration_s, 0.0, force)]
        index = [Keyframe(0.0, 0.0, force), Keyframe(duration_s, 1.0, force)]
    pid = pattern_id if pattern_id is not None else (7 if direction == CW else 8)
    return TactilePattern(
        id=pid,
        name=f"rotate_{direction}",
        duration_s=duration_s,
        channels={"thumb": thumb, "index": index},
    )


def default_pattern_set(duration_s=2.0, force=0.6):
    """The eight-pattern study set.

    1  both contacts slide forward together      5  index slides, then thumb
    2  both slide backward together              6  thumb slides, then index
    3  index only slides forward                 7  clockwise rotation cue
    4  thumb only slides forward                 8  counterclockwise rotation cue
    """
    half = duration_s / 2.0

    def slide(t0, t1, s0, s1):
        return [Keyframe(t0, s0, force), Keyframe(t1, s1, force)]

    def rest():
        return [Keyframe(0.0, 0.5, 0.0)]

    patterns = [
        TactilePattern(1, "both_forward", duration_s,
                       {"thumb": slide(0.0, duration_s, 0.0, 1.0),
                        "index": slide(0.0, duration_s, 0.0, 1.0)}),
        TactilePattern(2, "both_backward", duration_s,
                       {"thumb": slide(0.0, duration_s, 1.0, 0.0),
                        "index": slide(0.0, duration_s, 1.0, 0.0)}),
        TactilePattern(3, "index_forward", duration_s,
                       {"thumb": rest(),
                        "index": slide(0.0, duration_s, 0.0, 1.0)}),
        TactilePattern(4, "thumb_forward", duration_s,
                       {"thumb": slide(0.0, duration_s, 0.0, 1.0),
                        "index": rest()}),
        TactilePattern(5, "index_then_thumb", duration_s,
                       {"thumb": slide(half, duration_s, 0.0, 1.0),
                        "index": slide(0.0, half, 0.0, 1.0)}),
        TactilePattern(6, "thumb_then_index", duration_s,
                       {"thumb": slide(0.0, half, 0.0, 1.0),
                        "index": slide(half, duration_s, 0.0, 1.0)}),
        make_rotation_pattern(CW, duration_s, pattern_id=7, force=force),
        make_rotation_pattern(CCW, duration_s, pattern_id=8, force=force),
    ]
    return patterns


def swap_channels(pattern: TactilePattern) -> TactilePattern:
    return TactilePattern(
        id=pattern.id,
        name=pattern.name,
        duration_s=pattern.duration_s,
        channels={"thumb": pattern.channels["index"], "index": pattern.channels["thumb"]},
    )


# ---------------------------------------------------------------------------
# servo streaming

def servo_stream(cfg_thumb: FiveBarConfig, cfg_index: FiveBarConfig,
                 pattern: TactilePattern, rate_hz: float):
    """Sample a pattern into servo angle pairs at a fixed rate.

    Produces floor(duration * rate) + 1 samples covering t = 0 .. duration.
    """
    if rate_hz <= 0:
        raise ParameterError("rate must be positive")
    n = int(math.floor(pattern.duration_s * rate_hz))
    samples = []
    for k in range(n + 1):
        t = min(k / rate_hz, pattern.duration_s)
        try:
            contact = pattern_sample(pattern, t)
            samples.append(ServoSample(
                t=t,
                thumb=fivebar_ik(cfg_thumb, contact_to_target(cfg_thumb, contact["thumb"])),
                index=fivebar_ik(cfg_index, contact_to_target(cfg_index, contact["index"])),
            ))
        except Unreachable as exc:
            raise Unreachable(f"pattern {pattern.id} unreachable at t={t:.4f}s: {exc}",
                              t=t, **exc.details) from exc
    return samples


# ---------------------------------------------------------------------------
# pattern file format

def pattern_to_dict(pattern: TactilePattern) -> dict:
    return {
        "id": pattern.id,
        "name": pattern.name,
        "duration": pattern.duration_s,
        "channels": {
            ch: [{"t": k.t, "s": k.s, "f": k.f} for k in pattern.channels[ch]]
            for ch in CHANNELS
        },
    }


def pattern_from_dict(obj: dict) -> TactilePattern:
    try:
        channels = {
            ch: [Keyframe(k["t"], k["s"], k["f"]) for k in obj["channels"][ch]]
            for ch in CHANNELS
        }
        return TactilePattern(
            id=int(obj["id"]),
            name=str(obj["name"]),
            duration_s=float(obj["duration"]),
            channels=channels,
        )
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"bad pattern record: {exc}") from exc


def load_patterns(path):
    with open(path) as fh:
        data = json.load(fh)
    return [pattern_from_dict(obj) for obj in data]


def dump_patterns(patterns) -> str:
    return json.dumps([pattern_to_dict(p) for p in patterns], indent=2)
