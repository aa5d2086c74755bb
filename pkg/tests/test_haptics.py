import math

import numpy as np
import pytest

from cobot.errors import ParameterError, Unreachable, ValidationError
from cobot.haptics import (
    CCW,
    CW,
    ContactState,
    FiveBarConfig,
    Keyframe,
    ServoPair,
    TactilePattern,
    contact_to_target,
    default_pattern_set,
    dump_patterns,
    fivebar_fk,
    fivebar_ik,
    load_patterns,
    make_rotation_pattern,
    pattern_from_dict,
    pattern_sample,
    pattern_to_dict,
    servo_stream,
    swap_channels,
)

CFG = FiveBarConfig()  # d=30, l1=l2=25, span=20, y0=40, depth=8


def contact_grid(cfg, nx=25, ny=20):
    """500-point grid over the usable contact rectangle."""
    xs = np.linspace(-cfg.finger_span_mm / 2, cfg.finger_span_mm / 2, nx)
    ys = np.linspace(cfg.rest_height_mm - cfg.depth_range_mm, cfg.rest_height_mm, ny)
    return [(float(x), float(y)) for x in xs for y in ys]


# ---------------------------------------------------------------------------
# forward kinematics

def test_fk_symmetric_apex():
    # elbows (-15,25) and (15,25); apex = 25 + sqrt(25^2 - 15^2) = 45
    p = fivebar_fk(CFG, ServoPair(math.radians(90), math.radians(90)))
    assert p[0] == pytest.approx(0.0, abs=1e-12)
    assert p[1] == pytest.approx(45.0, abs=1e-12)


def test_fk_mirror_symmetry():
    sp = ServoPair(math.radians(70), math.radians(120))
    x, y = fivebar_fk(CFG, sp)
    xm, ym = fivebar_fk(CFG, ServoPair(math.pi - sp.theta2, math.pi - sp.theta1))
    assert xm == pytest.approx(-x, abs=1e-12)
    assert ym == pytest.approx(y, abs=1e-12)


def test_fk_unreachable_elbow_spread():
    # symmetric outward angles placing the elbows 51 mm apart (> 2*l2 = 50)
    theta = math.acos((51.0 / 2.0 - 15.0) / 25.0)
    sp = ServoPair(math.pi - theta, theta)
    e1x = -15.0 + 25.0 * math.cos(math.pi - theta)
    e2x = 15.0 + 25.0 * math.cos(theta)
    assert e2x - e1x == pytest.approx(51.0, abs=1e-9)
    with pytest.raises(Unreachable):
        fivebar_fk(CFG, sp)


def test_fk_rejects_out_of_limit_servos():
    with pytest.raises(Unreachable):
        fivebar_fk(CFG, ServoPair(math.radians(5), math.radians(90)))


# ---------------------------------------------------------------------------
# inverse kinematics

def test_ik_apex_recovers_right_angles():
    sp = fivebar_ik(CFG, (0.0, 45.0))
    assert sp.theta1 == pytest.approx(math.radians(90), abs=1e-9)
    assert sp.theta2 == pytest.approx(math.radians(90), abs=1e-9)


def test_ik_centerline_symmetry():
    for y in (34.0, 38.0, 42.0):
        sp = fivebar_ik(CFG, (0.0, y))
        assert sp.theta2 == pytest.approx(math.pi - sp.theta1, abs=1e-12)


def test_ik_fk_round_trip_grid():
    worst = 0.0
    for p in contact_grid(CFG):
        back = fivebar_fk(CFG, fivebar_ik(CFG, p))
        worst = max(worst, math.hypot(back[0] - p[0], back[1] - p[1]))
    assert worst < 1e-9


def test_ik_unreachable_reports_nearest():
    with pytest.raises(Unreachable) as exc:
        fivebar_ik(CFG, (0.0, 80.0))
    nearest = exc.value.details.get("nearest")
    assert nearest is not None
    # nearest point sits on the offending side's outer reach circle
    d = math.hypot(nearest[0] + 15.0, nearest[1])
    assert d == pytest.approx(50.0, abs=1e-9)


# ---------------------------------------------------------------------------
# contact mapping

def test_contact_rest_point():
    assert contact_to_target(CFG, ContactState(0.5, 0.0)) == pytest.approx((0.0, 40.0))


def test_contact_corner():
    x, y = contact_to_target(CFG, ContactState(1.0, 1.0))
    assert (x, y) == pytest.approx((10.0, 32.0))


def test_contact_sweep_monotone():
    xs = [contact_to_target(CFG, ContactState(s, 0.3))[0] for s in np.linspace(0, 1, 11)]
    ys = [contact_to_target(CFG, ContactState(s, 0.3))[1] for s in np.linspace(0, 1, 11)]
    assert all(b > a for a, b in zip(xs, xs[1:]))
    assert len(set(round(y, 12) for y in ys)) == 1


def test_contact_state_validation():
    with pytest.raises(ValidationError):
        ContactState(-0.1, 0.0)
    with pytest.raises(ValidationError):
        ContactState(0.0, 1.1)


def test_contact_outside_workspace_is_config_mismatch():
    tiny = FiveBarConfig(base_width_mm=30, l1_mm=10, l2_mm=10,
                         finger_span_mm=20, rest_height_mm=40, depth_range_mm=8)
    with pytest.raises(Unreachable):
        contact_to_target(tiny, ContactState(0.5, 0.0))


# ---------------------------------------------------------------------------
# pattern sampling

def two_frame_pattern():
    return TactilePattern(
        id=1, name="ramp", duration_s=2.0,
        channels={
            "thumb": [Keyframe(0.0, 0.0, 0.5), Keyframe(2.0, 1.0, 0.5)],
            "index": [Keyframe(0.0, 0.0, 0.5), Keyframe(2.0, 1.0, 0.5)],
        },
    )


def test_sample_endpoints_exact():
    p = two_frame_pattern()
    at0 = pattern_sample(p, 0.0)
    assert at0["thumb"].s == 0.0 and at0["index"].s == 0.0
    at_end = pattern_sample(p, 2.0)
    assert at_end["thumb"].s == 1.0 and at_end["index"].s == 1.0


def test_sample_linear_interp():
    p = two_frame_pattern()
    assert pattern_sample(p, 0.5)["thumb"].s == pytest.approx(0.25)


def test_sample_clamps_before_first_keyframe():
    p = TactilePattern(
        id=5, name="late", duration_s=2.0,
        channels={
            "thumb": [Keyframe(1.0, 0.2, 0.6), Keyframe(2.0, 0.9, 0.6)],
            "index": [Keyframe(0.0, 0.5, 0.0)],
        },
    )
    assert pattern_sample(p, 0.25)["thumb"].s == pytest.approx(0.2)
    assert pattern_sample(p, 1.5)["thumb"].s == pytest.approx(0.55)


def test_sample_out_of_range():
    p = two_frame_pattern()
    with pytest.raises(ParameterError):
        pattern_sample(p, -0.1)
    with pytest.raises(ParameterError):
        pattern_sample(p, 2.1)


def test_pattern_validation():
    with pytest.raises(ValidationError):
        TactilePattern(1, "bad", 2.0, {"thumb": [], "index": [Keyframe(0, 0, 0)]})
    with pytest.raises(ValidationError):
        TactilePattern(1, "bad", 2.0, {
            "thumb": [Keyframe(1.0, 0, 0), Keyframe(0.5, 0, 0)],
            "index": [Keyframe(0, 0, 0)],
        })
    with pytest.raises(ValidationError):
        TactilePattern(1, "bad", 2.0, {
            "thumb": [Keyframe(0, 0, 0), Keyframe(3.0, 0, 0)],
            "index": [Keyframe(0, 0, 0)],
        })


# ---------------------------------------------------------------------------
# rotation patterns

def test_rotation_cw_endpoints():
    p = make_rotation_pattern(CW, 2.0)
    at0 = pattern_sample(p, 0.0)
    assert at0["thumb"].s == 0.0 and at0["index"].s == 1.0
    assert at0["thumb"].f == pytest.approx(0.6)


def test_rotation_ccw_mirrors_cw():
    cw = make_rotation_pattern(CW, 2.0)
    ccw = make_rotation_pattern(CCW, 2.0)
    for t in np.linspace(0.0, 2.0, 21):
        a, b = pattern_sample(cw, float(t)), pattern_sample(ccw, float(t))
        for ch in ("thumb", "index"):
            assert b[ch].s == pytest.approx(1.0 - a[ch].s, abs=1e-12)


def test_cw_then_ccw_returns_to_start():
    cw = make_rotation_pattern(CW, 2.0)
    ccw = make_rotation_pattern(CCW, 2.0)
    start = pattern_sample(cw, 0.0)
    # run cw fully, then ccw fully: net displacement of each channel is zero
    mid = pattern_sample(cw, 2.0)
    assert pattern_sample(ccw, 0.0)["thumb"].s == pytest.approx(mid["thumb"].s, abs=1e-12)
    end = pattern_sample(ccw, 2.0)
    for ch in ("thumb", "index"):
        assert end[ch].s == pytest.approx(start[ch].s, abs=1e-12)


# ---------------------------------------------------------------------------
# default pattern set

def test_default_set_shape():
    patterns = default_pattern_set()
    assert len(patterns) == 8
    assert sorted(p.id for p in patterns) == list(range(1, 9))
    assert all(p.duration_s == 2.0 for p in patterns)


def test_patterns_3_and_4_are_channel_swaps():
    patterns = {p.id: p for p in default_pattern_set()}
    swapped = swap_channels(patterns[3])
    assert pattern_to_dict(swapped)["channels"] == pattern_to_dict(patterns[4])["channels"]
    swapped56 = swap_channels(patterns[5])
    assert pattern_to_dict(swapped56)["channels"] == pattern_to_dict(patterns[6])["channels"]


def test_pattern_1_swap_invariant():
    patterns = {p.id: p for p in default_pattern_set()}
    swapped = swap_channels(patterns[1])
    assert pattern_to_dict(swapped)["channels"] == pattern_to_dict(patterns[1])["channels"]


def test_patterns_7_8_delegate_to_rotation():
    patterns = {p.id: p for p in default_pattern_set()}
    assert pattern_to_dict(patterns[7]) == pattern_to_dict(make_rotation_pattern(CW, 2.0))
    assert pattern_to_dict(patterns[8]) == pattern_to_dict(make_rotation_pattern(CCW, 2.0))


# ---------------------------------------------------------------------------
# servo streaming

def test_stream_sample_count():
    p = make_rotation_pattern(CW, 2.0)
    stream = servo_stream(CFG, CFG, p, 50.0)
    assert len(stream) == 101
    assert stream[0].t == 0.0 and stream[-1].t == 2.0


def test_stream_constant_pattern_constant_servos():
    p = TactilePattern(
        id=1, name="hold", duration_s=1.0,
        channels={
            "thumb": [Keyframe(0.0, 0.3, 0.4)],
            "index": [Keyframe(0.0, 0.7, 0.2)],
        },
    )
    stream = servo_stream(CFG, CFG, p, 50.0)
    first = stream[0]
    for s in stream[1:]:
        assert s.thumb.theta1 == pytest.approx(first.thumb.theta1, abs=1e-12)
        assert s.thumb.theta2 == pytest.approx(first.thumb.theta2, abs=1e-12)
        assert s.index.theta1 == pytest.approx(first.index.theta1, abs=1e-12)


def test_stream_fk_round_trip_and_continuity():
    for pattern in default_pattern_set():
        stream = servo_stream(CFG, CFG, pattern, 50.0)
        prev = None
        for sample in stream:
            contact = pattern_sample(pattern, sample.t)
            for ch, sp in (("thumb", sample.thumb), ("index", sample.index)):
                target = contact_to_target(CFG, contact[ch])
                back = fivebar_fk(CFG, sp)
                assert math.hypot(back[0] - target[0], back[1] - target[1]) < 1e-9
            if prev is not None:
                # no elbow-branch flip: angles move smoothly at 50 Hz
                for a, b in ((prev.thumb, sample.thumb), (prev.index, sample.index)):
                    assert abs(b.theta1 - a.theta1) < 0.2
                    assert abs(b.theta2 - a.theta2) < 0.2
            prev = sample


def test_stream_propagates_unreachable_with_time():
    tiny = FiveBarConfig(l1_mm=18, l2_mm=18)
    # span 20 at y0=40: the far corners of the contact rectangle are out of reach
    with pytest.raises(Unreachable) as exc:
        servo_stream(tiny, tiny, make_rotation_pattern(CW, 2.0), 50.0)
    assert "t" in exc.value.details


# ---------------------------------------------------------------------------
# pattern files

def test_pattern_json_round_trip(tmp_path):
    patterns = default_pattern_set()
    path = tmp_path / "patterns.json"
    path.write_text(dump_patterns(patterns))
    loaded = load_patterns(path)
    assert [pattern_to_dict(p) for p in loaded] == [pattern_to_dict(p) for p in patterns]


def test_pattern_from_dict_rejects_garbage():
    with pytest.raises(ValidationError):
        pattern_from_dict({"id": 1, "name": "x"})
