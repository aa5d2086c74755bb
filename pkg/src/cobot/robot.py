"""Kinematic 6-DoF arm with jog control, gripper, wrist rotation, and the
two-container pour scene.

Pure kinematics only: no dynamics, no collision.  The arm is a standard DH
chain; Cartesian jogging solves position targets with damped least squares
while holding orientation, so the tool axis set by the start configuration
persists through a whole jog session.  The scene tracks a grasped
container rigidly with the tool and transfers content to the box while the
container hangs past horizontal over the box footprint.

Units: meters and radians for the arm, millimeters for the gripper stroke,
fractions for container content.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import JointLimitViolation, NoConvergence, ParameterError, Unreachable, ValidationError

GRIPPER_MAX_MM = 85.0      # two-finger stroke
GRIPPER_RATE_MM_S = 50.0
GRASP_RADIUS_M = 0.010
WRIST_RATE_RAD_S = 0.5
POUR_RATE_PER_S = 1.0
TILT_POUR_RAD = math.pi / 2

JOG_AXES = {
    "X+": np.array([1.0, 0.0, 0.0]), "X-": np.array([-1.0, 0.0, 0.0]),
    "Y+": np.array([0.0, 1.0, 0.0]), "Y-": np.array([0.0, -1.0, 0.0]),
    "Z+": np.array([0.0, 0.0, 1.0]), "Z-": np.array([0.0, 0.0, -1.0]),
}


# ---------------------------------------------------------------------------
# quaternion helpers (w, x, y, z)

def quat_from_matrix(R):
    t = np.trace(R)
    if t > 0:
        s = math.sqrt(t + 1.0) * 2
        w = 0.25 * s
        x = (R[2, 1] - R[1, 2]) / s
        y = (R[0, 2] - R[2, 0]) / s
        z = (R[1, 0] - R[0, 1]) / s
    elif R[0, 0] > R[1, 1] and R[0, 0] > R[2, 2]:
        s = math.sqrt(1.0 + R[0, 0] - R[1, 1] - R[2, 2]) * 2
        w = (R[2, 1] - R[1, 2]) / s
        x = 0.25 * s
        y = (R[0, 1] + R[1, 0]) / s
        z = (R[0, 2] + R[2, 0]) / s
    elif R[1, 1] > R[2, 2]:
        s = math.sqrt(1.0 + R[1, 1] - R[0, 0] - R[2, 2]) * 2
        w = (R[0, 2] - R[2, 0]) / s
        x = (R[0, 1] + R[1, 0]) / s
        y = 0.25 * s
        z = (R[1, 2] + R[2, 1]) / s
    else:
        s = math.sqrt(1.0 + R[2, 2] - R[0, 0] - R[1, 1]) * 2
        w = (R[1, 0] - R[0, 1]) / s
        x = (R[0, 2] + R[2, 0]) / s
        y = (R[1, 2] + R[2, 1]) / s
        z = 0.25 * s
    q = np.array([w, x, y, z])
    q /= np.linalg.norm(q)
    return q if q[0] >= 0 else -q


def quat_to_matrix(q):
    w, x, y, z = q
    return np.array([
        [1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w)],
        [2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w)],
        [2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y)],
    ])


def quat_mul(a, b):
    aw, ax, ay, az = a
    bw, bx, by, bz = b
    return np.array([
        aw * bw - ax * bx - ay * by - az * bz,
        aw * bx + ax * bw + ay * bz - az * by,
        aw * by - ax * bz + ay * bw + az * bx,
        aw * bz + ax * by - ay * bx + az * bw,
    ])


def quat_conj(q):
    return np.array([q[0], -q[1], -q[2], -q[3]])


def rotation_vector(R):
    """Axis*angle of a rotation matrix (matrix log, vee of the skew part)."""
    c = max(-1.0, min(1.0, (np.trace(R) - 1.0) / 2.0))
    angle = math.acos(c)
    if angle < 1e-12:
        return np.zeros(3)
    if abs(angle - math.pi) < 1e-6:
        # antipodal: extract axis from the symmetric part
        B = (R + np.eye(3)) / 2.0
        axis = np.sqrt(np.maximum(np.diag(B), 0.0))
        axis = axis / np.linalg.norm(axis)
        # fix signs from off-diagonal terms
        if B[0, 1] < 0:
            axis[1] = -axis[1]
        if B[0, 2] < 0:
            axis[2] = -axis[2]
        return axis * angle
    vee = np.array([R[2, 1] - R[1, 2], R[0, 2] - R[2, 0], R[1, 0] - R[0, 1]])
    return vee * (angle / (2.0 * math.sin(angle)))


# ---------------------------------------------------------------------------
# configuration and state

@dataclass
class DhRow:
    a: float
    alpha: float
    d: float
    theta_offset: float = 0.0


def ur10_dh_table():
    # manufacturer's published kinematic sheet for the 6-DoF arm
    return [
        DhRow(a=0.0, alpha=math.pi / 2, d=0.1273),
        DhRow(a=-0.612, alpha=0.0, d=0.0),
        DhRow(a=-0.5723, alpha=0.0, d=0.0),
        DhRow(a=0.0, alpha=math.pi / 2, d=0.163941),
        DhRow(a=0.0, alpha=-math.pi / 2, d=0.1157),
        DhRow(a=0.0, alpha=0.0, d=0.0922),
    ]


@dataclass
class RobotConfig:
    dh: list = field(default_factory=ur10_dh_table)
    joint_limits: list = field(default_factory=lambda: [(-2 * math.pi, 2 * math.pi)] * 6)
    max_joint_speed: float = 2.09
    max_cart_speed: float = 1.0
    jog_speed: float = 0.05

    def __post_init__(self):
        if len(self.dh) != 6 or len(self.joint_limits) != 6:
            raise ValidationError("need 6 DH rows and 6 joint limit pairs")
        for lo, hi in self.joint_limits:
            if not lo < hi:
                raise ValidationError("joint limits must satisfy min < max")
        if self.max_joint_speed <= 0 or self.max_cart_speed <= 0 or self.jog_speed <= 0:
            raise ValidationError("speeds must be positive")

    @property
    def max_reach(self):
        return sum(abs(r.a) + abs(r.d) for r in self.dh)


@dataclass
class Pose:
    position: np.ndarray
    orientation: np.ndarray  # unit quaternion (w, x, y, z)


@dataclass
class Gripper:
    opening_mm: float = GRIPPER_MAX_MM
    holding: str | None = None


@dataclass
class RobotState:
    joints: np.ndarray
    pose: Pose
    gripper: Gripper = field(default_factory=Gripper)
    wrist_rotation_active: bool = False


@dataclass
class JogCommand:
    axis: str
    speed: float

    def __post_init__(self):
        if self.axis not in JOG_AXES:
            raise ValidationError(f"axis must be one of {sorted(JOG_AXES)}, got {self.axis!r}")
        if self.speed <= 0:
            raise ValidationError("jog speed must be positive")


def make_state(cfg: RobotConfig, joints) -> RobotState:
    joints = np.asarray(joints, dtype=float)
    return RobotState(joints=joints.copy(), pose=forward_kinematics(cfg, joints))


# ---------------------------------------------------------------------------
# kinematics

def _check_limits(cfg, joints):
    for i, (q, (lo, hi)) in enumerate(zip(joints, cfg.joint_limits)):
        if not (lo <= q <= hi):
            raise JointLimitViolation(
                f"joint {i + 1} at {q:.4f} rad outside [{lo:.4f}, {hi:.4f}]", joint=i + 1
            )


def _dh_transform(row: DhRow, q):
    th = q + row.theta_offset
    ct, st = math.cos(th), math.sin(th)
    ca, sa = math.cos(row.alpha), math.sin(row.alpha)
    return np.array([
        [ct, -st * ca, st * sa, row.a * ct],
        [st, ct * ca, -ct * sa, row.a * st],
        [0.0, sa, ca, row.d],
        [0.0, 0.0, 0.0, 1.0],
    ])


def _chain(cfg, joints):
    frames = [np.eye(4)]
    T = np.eye(4)
    for row, q in zip(cfg.dh, joints):
        T = T @ _dh_transform(row, q)
        frames.append(T)
    return frames


def forward_kinematics(cfg: RobotConfig, joints) -> Pose:
    joints = np.asarray(joints, dtype=float)
    _check_limits(cfg, joints)
    T = _chain(cfg, joints)[-1]
    return Pose(position=T[:3, 3].copy(), orientation=quat_from_matrix(T[:3, :3]))


def link_points(cfg: RobotConfig, joints):
    """Origins of the base and each joint frame: 7 points for drawing the chain."""
    joints = np.asarray(joints, dtype=float)
    _check_limits(cfg, joints)
    return [T[:3, 3].copy() for T in _chain(cfg, joints)]


def jacobian(cfg: RobotConfig, joints) -> np.ndarray:
    """Geometric Jacobian: column i = (z_{i-1} x (p_e - p_{i-1}), z_{i-1})."""
    joints = np.asarray(joints, dtype=float)
    _check_limits(cfg, joints)
    frames = _chain(cfg, joints)
    p_e = frames[-1][:3, 3]
    J = np.zeros((6, 6))
    for i in range(6):
        z = frames[i][:3, 2]
        p = frames[i][:3, 3]
        J[:3, i] = np.cross(z, p_e - p)
        J[3:, i] = z
    return J


IK_DAMPING = 0.01
IK_STEP_CLAMP = 0.1
IK_POS_TOL = 1e-6
IK_ROT_TOL = 1e-4
IK_MAX_ITER = 200

# deterministic re-seeding schedule for attempts after the first: a fixed
# joint nudge hops the iteration out of elbow/wrist branch traps
IK_RESEEDS = (
    (2, 0.4), (2, -0.4), (4, 0.4), (4, -0.4),
    (2, 0.8), (2, -0.8), (1, 0.4), (1, -0.4),
    (4, 0.8), (4, -0.8), (3, 0.4), (3, -0.4),
)


def _dls_solve(cfg, target_p, R_target, seed):
    # damping scales with the residual, so steps turn Gauss-Newton near the
    # solution instead of stalling on small singular values
    lo = [l for l, _ in cfg.joint_limits]
    hi = [h for _, h in cfg.joint_limits]
    q = seed.copy()
    best = math.inf
    for _ in range(IK_MAX_ITER + 1):
        T = _chain(cfg, q)[-1]
        e_pos = target_p - T[:3, 3]
        e_rot = rotation_vector(R_target @ T[:3, :3].T)
        if np.linalg.norm(e_pos) < IK_POS_TOL and np.linalg.norm(e_rot) < IK_ROT_TOL:
            return q, best
        best = min(best, float(np.linalg.norm(e_pos)))
        e = np.concatenate([e_pos, e_rot])
        lam = IK_DAMPING * float(np.linalg.norm(e))
        J = jacobian(cfg, q)
        dq = J.T @ np.linalg.solve(J @ J.T + lam * lam * np.eye(6), e)
        m = float(np.max(np.abs(dq)))
        if m > IK_STEP_CLAMP:
            dq *= IK_STEP_CLAMP / m
        q = np.clip(q + dq, lo, hi)
    return None, best


def inverse_kinematics(cfg: RobotConfig, target: Pose, seed_joints) -> np.ndarray:
    """Damped least squares to the target pose, seeded near the solution.

    A non-converging run is retried from deterministically nudged seeds
    before giving up, so branch-boundary targets still resolve; results
    stay bit-reproducible for identical inputs.
    """
    seed = np.asarray(seed_joints, dtype=float).copy()
    _check_limits(cfg, seed)
    target_p = np.asarray(target.position, dtype=float)
    if np.linalg.norm(target_p) > cfg.max_reach:
        raise Unreachable(
            f"target at {np.linalg.norm(target_p):.3f} m exceeds max reach {cfg.max_reach:.3f} m"
        )
    R_target = quat_to_matrix(target.orientation)
    lo = [l for l, _ in cfg.joint_limits]
    hi = [h for _, h in cfg.joint_limits]
    q, best = _dls_solve(cfg, target_p, R_target, seed)
    if q is not None:
        return q
    for joint, offset in IK_RESEEDS:
        reseed = seed.copy()
        reseed[joint] += offset
        q, attempt_best = _dls_solve(cfg, target_p, R_target, np.clip(reseed, lo, hi))
        best = min(best, attempt_best)
        if q is not None:
            return q
    raise NoConvergence(
        f"no convergence after {1 + len(IK_RESEEDS)} attempts of {IK_MAX_ITER} iterations, "
        f"best position residual {best:.3e} m",
        residual=best,
    )


# ---------------------------------------------------------------------------
# steppers

def jog_step(cfg: RobotConfig, state: RobotState, cmd: JogCommand, dt: float):
    """Advance along a Cartesian axis holding orientation.

    Returns (state, fault): on IK failure the state is returned unchanged
    and the failure is described in ``fault`` instead of raising, so a
    control loop holding a button never dies.
    """
    if dt < 0:
        raise ParameterError("dt must be >= 0")
    if cmd.speed > cfg.max_cart_speed:
        raise ParameterError(f"speed {cmd.speed} exceeds max {cfg.max_cart_speed}")
    if dt == 0:
        return state, None
    target = Pose(
        position=state.pose.position + JOG_AXES[cmd.axis] * cmd.speed * dt,
        orientation=state.pose.orientation.copy(),
    )
    try:
        joints = inverse_kinematics(cfg, target, state.joints)
    except (Unreachable, NoConvergence) as exc:
        return state, {"error": exc.code, "detail": str(exc),
                       "target": target.position.tolist()}
    state.joints = joints
    state.pose = forward_kinematics(cfg, joints)
    return state, None


def gripper_step(state: RobotState, action: str, dt: float, scene=None):
    """Slew the gripper; closing near a container grasp point attaches it."""
    if dt < 0:
        raise ParameterError("dt must be >= 0")
    if action not in ("Open", "Close"):
        raise ParameterError(f"gripper action must be Open/Close, got {action!r}")
    goal = GRIPPER_MAX_MM if action == "Open" else 0.0
    delta = GRIPPER_RATE_MM_S * dt
    opening = state.gripper.opening_mm
    if opening < goal:
        opening = min(goal, opening + delta)
    else:
        opening = max(goal, opening - delta)
    state.gripper.opening_mm = opening

    if scene is not None:
        if action == "Close" and scene.attachment is None:
            tool = state.pose.position
            for c in scene.containers:
                if np.linalg.norm(np.asarray(c.grasp_point) - tool) <= GRASP_RADIUS_M:
                    scene.attach(c.id, state.pose)
                    state.gripper.holding = c.id
                    break
        elif action == "Open" and scene.attachment is not None:
            scene.detach()
            state.gripper.holding = None
    return state


def rotate_step(cfg: RobotConfig, state: RobotState, dt: float):
    """Advance the wrist joint; returns (state, haptic trigger).

    The trigger stays active every step while rotation progresses and goes
    inactive when the wrist limit halts it.
    """
    if dt < 0:
        raise ParameterError("dt must be >= 0")
    lo, hi = cfg.joint_limits[5]
    q6 = state.joints[5] + WRIST_RATE_RAD_S * dt
    if q6 > hi:
        state.joints[5] = hi
        state.pose = forward_kinematics(cfg, state.joints)
        state.wrist_rotation_active = False
        return state, {"direction": "cw", "active": False}
    state.joints[5] = q6
    state.pose = forward_kinematics(cfg, state.joints)
    state.wrist_rotation_active = True
    return state, {"direction": "cw" if WRIST_RATE_RAD_S > 0 else "ccw", "active": True}


# ---------------------------------------------------------------------------
# scene

@dataclass
class Container:
    id: str
    position: np.ndarray
    orientation: np.ndarray  # unit quaternion
    fill_fraction: float
    grasp_point: np.ndarray


@dataclass
class Box:
    footprint: tuple  # (x, y, w, h) in world XY meters
    content_fraction: float = 0.0

    def contains_xy(self, p):
        x, y, w, h = self.footprint
        return x <= p[0] <= x + w and y <= p[1] <= y + h


@dataclass
class Attachment:
    container_id: str
    rel_position: np.ndarray  # container origin in tool frame
    rel_orientation: np.ndarray
    rel_grasp: np.ndarray


@dataclass
class SceneState:
    containers: list
    box: Box
    attachment: Attachment | None = None
    pouring: bool = False

    def total_content(self):
        return sum(c.fill_fraction for c in self.containers) + self.box.content_fraction

    def container(self, cid) -> Container:
        for c in self.containers:
            if c.id == cid:
                return c
        raise ParameterError(f"no container {cid}")

    def attach(self, cid, tool_pose: Pose):
        c = self.container(cid)
        R = quat_to_matrix(tool_pose.orientation)
        self.attachment = Attachment(
            container_id=cid,
            rel_position=R.T @ (np.asarray(c.position) - tool_pose.position),
            rel_orientation=quat_mul(quat_conj(tool_pose.orientation), c.orientation),
            rel_grasp=R.T @ (np.asarray(c.grasp_point) - tool_pose.position),
        )

    def detach(self):
        self.attachment = None


def container_tilt_rad(c: Container) -> float:
    """Angle between the container's up axis and world up."""
    up = quat_to_matrix(c.orientation) @ np.array([0.0, 0.0, 1.0])
    return math.acos(max(-1.0, min(1.0, float(up[2]))))


def scene_step(scene: SceneState, robot_state: RobotState, dt: float) -> SceneState:
    """Track the attached container and transfer content while pouring.

    Content moves at POUR_RATE_PER_S from a container tilted past
    horizontal whose position is over the box footprint; totals are
    conserved to rounding.
    """
    if dt < 0:
        raise ParameterError("dt must be >= 0")
    if scene.attachment is not None:
        att = scene.attachment
        c = scene.container(att.container_id)
        R = quat_to_matrix(robot_state.pose.orientation)
        c.position = robot_state.pose.position + R @ att.rel_position
        c.orientation = quat_mul(robot_state.pose.orientation, att.rel_orientation)
        c.grasp_point = robot_state.pose.position + R @ att.rel_grasp
    scene.pouring = False
    for c in scene.containers:
        if c.fill_fraction <= 0.0:
            continue
        if container_tilt_rad(c) > TILT_POUR_RAD and scene.box.contains_xy(c.position):
            transfer = min(c.fill_fraction, POUR_RATE_PER_S * dt)
            c.fill_fraction -= transfer
            scene.box.content_fraction += transfer
            if transfer > 0:
                scene.pouring = True
    return scene


# ---------------------------------------------------------------------------
# serialization

def pose_to_dict(pose: Pose) -> dict:
    return {"position": [float(v) for v in pose.position],
            "orientation": [float(v) for v in pose.orientation]}


def pose_from_dict(obj) -> Pose:
    return Pose(position=np.asarray(obj["position"], dtype=float),
                orientation=np.asarray(obj["orientation"], dtype=float))


def scene_to_dict(scene: SceneState) -> dict:
    return {
        "containers": [
            {
                "id": c.id,
                "position": [float(v) for v in c.position],
                "orientation": [float(v) for v in c.orientation],
                "fill_fraction": float(c.fill_fraction),
                "grasp_point": [float(v) for v in c.grasp_point],
            }
            for c in scene.containers
        ],
        "box": {"footprint": list(scene.box.footprint),
                "content_fraction": float(scene.box.content_fraction)},
        "attached": scene.attachment.container_id if scene.attachment else None,
        "pouring": scene.pouring,
    }


def scene_from_dict(obj) -> SceneState:
    containers = [
        Container(
            id=c["id"],
            position=np.asarray(c["position"], dtype=float),
            orientation=np.asarray(c.get("orientation", [1.0, 0.0, 0.0, 0.0]), dtype=float),
            fill_fraction=float(c["fill_fraction"]),
            grasp_point=np.asarray(c["grasp_point"], dtype=float),
        )
        for c in obj["containers"]
    ]
    box = Box(footprint=tuple(obj["box"]["footprint"]),
              content_fraction=float(obj["box"].get("content_fraction", 0.0)))
    return SceneState(containers=containers, box=box)
