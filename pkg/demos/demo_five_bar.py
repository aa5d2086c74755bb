"""Five-bar fingertip display walkthrough.

Sweeps the usable contact rectangle through IK, streams the rotation
patterns at 50 Hz, and (when matplotlib is importable) saves a workspace
plot next to this script.
"""

import math

import numpy as np

from cobot.haptics import (
    CW,
    ContactState,
    FiveBarConfig,
    ServoPair,
    contact_to_target,
    default_pattern_set,
    fivebar_fk,
    fivebar_ik,
    make_rotation_pattern,
    pattern_sample,
    servo_stream,
)

cfg = FiveBarConfig()
print(f"geometry: base {cfg.base_width_mm} mm, links {cfg.l1_mm}/{cfg.l2_mm} mm, "
      f"contact span {cfg.finger_span_mm} mm at height {cfg.rest_height_mm} mm")

# the symmetric pose: both servos straight up, coupler on the centerline
apex = fivebar_fk(cfg, ServoPair(math.radians(90), math.radians(90)))
print(f"FK(90deg, 90deg) = ({apex[0]:.3f}, {apex[1]:.3f}) mm")

# full contact rectangle round trip
worst = 0.0
for s in np.linspace(0, 1, 25):
    for f in np.linspace(0, 1, 20):
        target = contact_to_target(cfg, ContactState(float(s), float(f)))
        sp = fivebar_ik(cfg, target)
        back = fivebar_fk(cfg, sp)
        worst = max(worst, math.hypot(back[0] - target[0], back[1] - target[1]))
print(f"500-point contact grid, worst FK(IK(p)) error: {worst:.2e} mm")

# rotation cue: thumb and index slide in opposite directions
cw = make_rotation_pattern(CW, 2.0)
for t in (0.0, 0.5, 1.0, 1.5, 2.0):
    c = pattern_sample(cw, t)
    print(f"  cw t={t:.1f}s  thumb s={c['thumb'].s:.2f}  index s={c['index'].s:.2f}")

# servo streams for the whole study set
for pattern in default_pattern_set():
    stream = servo_stream(cfg, cfg, pattern, 50.0)
    step = max(
        max(abs(b.thumb.theta1 - a.thumb.theta1), abs(b.index.theta1 - a.index.theta1))
        for a, b in zip(stream, stream[1:])
    )
    print(f"pattern {pattern.id} ({pattern.name}): {len(stream)} samples, "
          f"max servo step {math.degrees(step):.2f} deg")

try:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(5, 4))
    thetas = np.linspace(*cfg.servo_limits_rad, 60)
    pts = []
    for t1 in thetas:
        for t2 in thetas:
            try:
                pts.append(fivebar_fk(cfg, ServoPair(float(t1), float(t2))))
            except Exception:
                pass
    pts = np.array(pts)
    ax.plot(pts[:, 0], pts[:, 1], ".", ms=1, alpha=0.2, label="reachable")
    rect_x = [-cfg.finger_span_mm / 2, cfg.finger_span_mm / 2,
              cfg.finger_span_mm / 2, -cfg.finger_span_mm / 2, -cfg.finger_span_mm / 2]
    rect_y = [cfg.rest_height_mm, cfg.rest_height_mm,
              cfg.rest_height_mm - cfg.depth_range_mm,
              cfg.rest_height_mm - cfg.depth_range_mm, cfg.rest_height_mm]
    ax.plot(rect_x, rect_y, "r-", label="contact rectangle")
    ax.set_xlabel("x [mm]")
    ax.set_ylabel("y [mm]")
    ax.legend()
    fig.tight_layout()
    fig.savefig(__file__.replace(".py", ".png"), dpi=120)
    print(f"workspace plot saved to {__file__.replace('.py', '.png')}")
except ImportError:
    print("matplotlib not available, skipping the workspace plot")
