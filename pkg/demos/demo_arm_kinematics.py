"""Arm kinematics walkthrough: FK at home, a jogged square, IK statistics."""

import math
import time

import numpy as np

from cobot.robot import (
    JogCommand,
    RobotConfig,
    forward_kinematics,
    inverse_kinematics,
    jacobian,
    jog_step,
    make_state,
)

cfg = RobotConfig()
home = np.array([0.0, -math.pi / 2, math.pi / 2, 0.0, math.pi / 2, 0.0])

pose = forward_kinematics(cfg, home)
print("home joints:", np.round(home, 3).tolist())
print("tool position:", np.round(pose.position, 4).tolist())
print("tool quaternion (w,x,y,z):", np.round(pose.orientation, 4).tolist())

# jog a 60 mm square in the XZ plane, 20 ms control ticks
state = make_state(cfg, home)
path = [state.pose.position.copy()]
for axis, seconds in (("X+", 1.2), ("Z+", 1.2), ("X-", 1.2), ("Z-", 1.2)):
    for _ in range(int(seconds * 50)):
        state, fault = jog_step(cfg, state, JogCommand(axis, 0.05), 0.02)
        assert fault is None
        path.append(state.pose.position.copy())
closure = np.linalg.norm(path[-1] - path[0])
print(f"square jog: {len(path)} steps, loop closure error {closure * 1e6:.2f} um")

# IK round-trip statistics over random reachable targets
rng = np.random.default_rng(5)
errors = []
t0 = time.perf_counter()
for _ in range(100):
    q_true = rng.uniform(-math.pi, math.pi, 6)
    target = forward_kinematics(cfg, q_true)
    seed = q_true + rng.uniform(-0.2, 0.2, 6)
    solved = inverse_kinematics(cfg, target, seed)
    errors.append(np.linalg.norm(forward_kinematics(cfg, solved).position - target.position))
dt = time.perf_counter() - t0
print(f"IK on 100 random targets: max error {max(errors):.2e} m, "
      f"median {np.median(errors):.2e} m, {dt * 10:.1f} ms/solve")

# manipulability along the square path: sqrt(det(J J^T)) stays healthy
state = make_state(cfg, home)
w = []
for _ in range(60):
    state, _ = jog_step(cfg, state, JogCommand("X+", 0.05), 0.02)
    J = jacobian(cfg, state.joints)
    w.append(math.sqrt(max(np.linalg.det(J @ J.T), 0.0)))
print(f"manipulability while jogging X+: {min(w):.4f} .. {max(w):.4f}")
