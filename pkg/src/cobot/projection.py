"""Plane-to-plane mapping and the projected control panel.

The camera observes the fingertip in normalized image coordinates; the
panel lives in millimeters on the projection surface.  A homography ties
the two planes together (estimated by normalized DLT from point pairs), a
3x3 button grid defines the panel, and a small state machine turns
gesture+position streams into press/release events: hovering with an open
hand arms a button, switching to index-pointing presses it, and any
departure releases it.  At most one button is ever pressed.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateConfiguration, ParameterError, PointAtInfinity, ValidationError
from .gesture import GestureClass

JOG_ACTIONS = ("JogX+", "JogX-", "JogY+", "JogY-", "JogZ+", "JogZ-")
ALL_ACTIONS = JOG_ACTIONS + ("Open", "Close", "Rotate")

# hit-region inflation while a button is held, to suppress jitter releases
PRESS_HYSTERESIS_MM = 3.0

COLOR_DEFAULT = "#3d4852"
COLOR_ARMED = "#d69e2e"
COLOR_PRESSED = "#38a169"


# ---------------------------------------------------------------------------
# homography

def estimate_homography(src_points, dst_points) -> np.ndarray:
    """Normalized DLT estimate of the 3x3 map src -> dst (least squares for >4 pairs)."""
    src = np.asarray(src_points, dtype=float)
    dst = np.asarray(dst_points, dtype=float)
    if src.shape != dst.shape or src.ndim != 2 or src.shape[1] != 2:
        raise ParameterError("need matching (n, 2) point arrays")
    n = src.shape[0]
    if n < 4:
        raise ParameterError(f"need at least 4 correspondences, got {n}")

    def normalizer(pts):
        centroid = pts.mean(axis=0)
        spread = np.mean(np.linalg.norm(pts - centroid, axis=1))
        if spread < 1e-12:
            raise DegenerateConfiguration("correspondence points are coincident")
        s = np.sqrt(2.0) / spread
        T = np.array([[s, 0, -s * centroid[0]],
                      [0, s, -s * centroid[1]],
                      [0, 0, 1.0]])
        return T

    Ts, Td = normalizer(src), normalizer(dst)
    sh = (Ts @ np.column_stack([src, np.ones(n)]).T).T
    dh = (Td @ np.column_stack([dst, np.ones(n)]).T).T

    A = np.zeros((2 * n, 9))
    for i in range(n):
        x, y, _ = sh[i]
        u, v, _ = dh[i]
        A[2 * i] = [-x, -y, -1, 0, 0, 0, u * x, u * y, u]
        A[2 * i + 1] = [0, 0, 0, -x, -y, -1, v * x, v * y, v]

    _, sigma, vt = np.linalg.svd(A)
    if sigma[7] < 1e-10 * sigma[0]:
        raise DegenerateConfiguration(
            "correspondences are rank deficient (collinear or repeated points)"
        )
    Hn = vt[-1].reshape(3, 3)
    H = np.linalg.inv(Td) @ Hn @ Ts
    if abs(H[2, 2]) < 1e-12:
        raise DegenerateConfiguration("homography has vanishing scale element")
    H = H / H[2, 2]
    if abs(np.linalg.det(H)) <= 1e-12:
        raise DegenerateConfiguration("estimated homography is singular")
    return H


def project_point(h: np.ndarray, p) -> tuple:
    """Apply the homogeneous transform with perspective divide."""
    x, y = float(p[0]), float(p[1])
    if not (np.isfinite(x) and np.isfinite(y)):
        raise ParameterError(f"point must be finite, got {p}")
    v = np.asarray(h, dtype=float) @ np.array([x, y, 1.0])
    if abs(v[2]) < 1e-12:
        raise PointAtInfinity(f"point {p} maps to infinity (w={v[2]:.3e})")
    return (v[0] / v[2], v[1] / v[2])


def invert_homography(h: np.ndarray) -> np.ndarray:
    h = np.asarray(h, dtype=float)
    if abs(np.linalg.det(h)) <= 1e-12:
        raise DegenerateConfiguration("homography not invertible")
    inv = np.linalg.inv(h)
    return inv / inv[2, 2]


# ---------------------------------------------------------------------------
# panel layout

@dataclass
class Button:
    id: int
    label: str
    action: str
    rect_mm: tuple  # (x, y, w, h)


@dataclass
class PanelLayout:
    size_mm: tuple
    buttons: list

    def __post_init__(self):
        if len(self.buttons) != 9:
            raise ValidationError(f"panel needs exactly 9 buttons, got {len(self.buttons)}")
        ids = [b.id for b in self.buttons]
        if sorted(ids) != list(range(1, 10)):
            raise ValidationError(f"button ids must be 1..9, got {sorted(ids)}")
        jog = [b for b in self.buttons if b.action in JOG_ACTIONS]
        if len(jog) != 6:
            raise ValidationError("panel needs the six jog actions")
        for b in self.buttons:
            if b.action not in ALL_ACTIONS:
                raise ValidationError(f"unknown action {b.action!r} on button {b.id}")
            x, y, w, h = b.rect_mm
            if w <= 0 or h <= 0:
                raise ValidationError(f"button {b.id} rect has nonpositive size")
        for i, a in enumerate(self.buttons):
            for b in self.buttons[i + 1:]:
                if _rects_overlap(a.rect_mm, b.rect_mm):
                    raise ValidationError(f"buttons {a.id} and {b.id} overlap")

    def button(self, button_id) -> Button:
        for b in self.buttons:
            if b.id == button_id:
                return b
        raise ParameterError(f"no button {button_id}")


def _rects_overlap(a, b):
    ax, ay, aw, ah = a
    bx, by, bw, bh = b
    return ax < bx + bw and bx < ax + aw and ay < by + bh and by < ay + ah


def _rect_contains(rect, p, inflate=0.0):
    x, y, w, h = rect
    return (x - inflate <= p[0] < x + w + inflate) and (y - inflate <= p[1] < y + h + inflate)


def default_layout() -> PanelLayout:
    """3x3 grid on a 300x200 mm panel with 10 mm gutters.

    Row-major actions: jog X+/Y+/Z+, jog X-/Y-/Z-, open/close/rotate.
    """
    panel_w, panel_h = 300.0, 200.0
    margin = 10.0
    cell_w = (panel_w - 4 * margin) / 3.0
    cell_h = (panel_h - 4 * margin) / 3.0
    plan = [
        ("X+", "JogX+"), ("Y+", "JogY+"), ("Z+", "JogZ+"),
        ("X-", "JogX-"), ("Y-", "JogY-"), ("Z-", "JogZ-"),
        ("Open", "Open"), ("Close", "Close"), ("Rotate", "Rotate"),
    ]
    buttons = []
    for i, (label, action) in enumerate(plan):
        row, col = divmod(i, 3)
        x = margin + col * (cell_w + margin)
        y = margin + row * (cell_h + margin)
        buttons.append(Button(id=i + 1, label=label, action=action,
                              rect_mm=(x, y, cell_w, cell_h)))
    return PanelLayout(size_mm=(panel_w, panel_h), buttons=buttons)


def hit_test(layout: PanelLayout, p):
    """Button id whose rect contains p (min edges inclusive, max exclusive), else None."""
    if p is None:
        return None
    for b in layout.buttons:
        if _rect_contains(b.rect_mm, p):
            return b.id
    return None


def layout_to_dict(layout: PanelLayout) -> dict:
    return {
        "panel_size_mm": list(layout.size_mm),
        "buttons": [
            {"id": b.id, "label": b.label, "action": b.action, "rect_mm": list(b.rect_mm)}
            for b in layout.buttons
        ],
    }


def layout_from_dict(obj: dict) -> PanelLayout:
    try:
        buttons = [
            Button(id=int(b["id"]), label=str(b["label"]), action=str(b["action"]),
                   rect_mm=tuple(float(v) for v in b["rect_mm"]))
            for b in obj["buttons"]
        ]
        return PanelLayout(size_mm=tuple(obj["panel_size_mm"]), buttons=buttons)
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"bad layout record: {exc}") from exc


def load_layout(path) -> PanelLayout:
    with open(path) as fh:
        return layout_from_dict(json.load(fh))


# ---------------------------------------------------------------------------
# press state machine

IDLE, ARMED, PRESSED = "idle", "armed", "pressed"


@dataclass(frozen=True)
class PressState:
    phase: str = IDLE
    button: int | None = None

    @staticmethod
    def idle():
        return PressState(IDLE, None)

    @staticmethod
    def armed(button):
        return PressState(ARMED, button)

    @staticmethod
    def pressed(button):
        return PressState(PRESSED, button)


@dataclass(frozen=True)
class PressEvent:
    kind: str  # "press" | "release"
    button: int
    stamp_us: int = 0


def press_step(layout: PanelLayout, state: PressState, gesture: GestureClass,
               p_mm, stamp_us=0):
    """One FSM transition; returns (new state, emitted events).

    Open-hand hover arms the hovered button; the arm follows the hover and
    drops when the hand leaves all buttons or shows any other gesture.
    Index-pointing over the armed button presses it; the press holds while
    the pointer stays inside the (slightly inflated) rect, and any
    departure releases.  Total function: no input raises.
    """
    hit = hit_test(layout, p_mm)

    if state.phase == IDLE:
        if gesture is GestureClass.Palm and hit is not None:
            return PressState.armed(hit), []
        return state, []

    if state.phase == ARMED:
        if gesture is GestureClass.Palm:
            if hit is None:
                return PressState.idle(), []
            return PressState.armed(hit), []
        if gesture is GestureClass.One and hit == state.button:
            return (PressState.pressed(state.button),
                    [PressEvent("press", state.button, stamp_us)])
        return PressState.idle(), []

    # pressed: other buttons are ignored entirely while this one is held
    held = layout.button(state.button)
    still_held = (
        gesture is GestureClass.One
        and p_mm is not None
        and _rect_contains(held.rect_mm, p_mm, inflate=PRESS_HYSTERESIS_MM)
    )
    if still_held:
        return state, []
    return PressState.idle(), [PressEvent("release", state.button, stamp_us)]


def render_panel_state(layout: PanelLayout, state: PressState) -> dict:
    """Display model for the UI and the projector image generator."""
    buttons = []
    for b in layout.buttons:
        if state.phase == PRESSED and state.button == b.id:
            color = COLOR_PRESSED
            bstate = PRESSED
        elif state.phase == ARMED and state.button == b.id:
            color = COLOR_ARMED
            bstate = ARMED
        else:
            color = COLOR_DEFAULT
            bstate = IDLE
        buttons.append({
            "id": b.id, "label": b.label, "action": b.action,
            "rect_mm": list(b.rect_mm), "color": color, "state": bstate,
        })
    return {"panel_size_mm": list(layout.size_mm), "buttons": buttons}
