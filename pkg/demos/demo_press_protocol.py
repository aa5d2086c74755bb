"""Gesture stream -> press events, replayed step by step.

Shows the arm/press/hold/release protocol on the default panel: an open
hand over a button arms it, switching to index-pointing presses, moving
away or relaxing the hand releases.
"""

from cobot.gesture import GestureClass, classify, index_tip_position, synth_frame
from cobot.projection import PressState, default_layout, press_step, project_point
import numpy as np

layout = default_layout()
h_cam_to_panel = np.array([[300.0, 0, 0], [0, 200.0, 0], [0, 0, 1.0]])

rotate = layout.button(9)
x, y, w, h = rotate.rect_mm
center_cam = ((x + w / 2) / 300.0, (y + h / 2) / 200.0)

# scripted stream: hover open-handed, point, hold, relax
script = (
    [("palm", center_cam)] * 3
    + [("one", center_cam)] * 5
    + [("palm", center_cam)] * 2
)

state = PressState.idle()
print(f"target: button {rotate.id} ({rotate.label}) at panel center "
      f"({x + w / 2:.0f}, {y + h / 2:.0f}) mm")
for i, (gesture_name, tip) in enumerate(script):
    frame = synth_frame(GestureClass(gesture_name), tip, seed=i)
    cls, score = classify(frame)
    tip_cam = index_tip_position(frame)
    p_mm = project_point(h_cam_to_panel, tip_cam)
    state, events = press_step(layout, state, cls, p_mm, stamp_us=i * 20000)
    line = f"frame {i:2d}: {cls.value:7s} -> {state.phase:7s}"
    for e in events:
        line += f"   ** {e.kind.upper()}({e.button}) **"
    print(line)

# the single-button rule: while one button is held, others are ignored
state = PressState.idle()
open_btn = layout.button(7)
ox, oy, ow, oh = open_btn.rect_mm
other_cam = ((ox + ow / 2) / 300.0, (oy + oh / 2) / 200.0)
state, _ = press_step(layout, state, GestureClass.Palm, project_point(h_cam_to_panel, center_cam))
state, ev = press_step(layout, state, GestureClass.One, project_point(h_cam_to_panel, center_cam))
print(f"\npressed {ev[0].button}; sliding to button {open_btn.id} while pointing:")
state, ev = press_step(layout, state, GestureClass.One, project_point(h_cam_to_panel, other_cam))
print("  events:", [(e.kind, e.button) for e in ev], "(no press without re-arming)")
