"""Forward kinematics, positional Jacobian, and damped-least-squares IK
for a 6-DOF serial arm.

The default chain is yaw-pitch-insertion plus a three-joint wrist: the
prismatic insertion axis points straight down in the (world-aligned) base
frame, so the tool naturally operates below the mount point. Standard DH
convention, A_i = Rz(theta) Tz(d) Tx(a) Rx(alpha).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import IkFailed

REVOLUTE = "revolute"
PRISMATIC = "prismatic"


@dataclass(frozen=True)
class ArmModel:
    dh_rows: np.ndarray  # (6, 4): a, alpha, d, theta_offset
    joint_types: tuple[str, ...]  # 'revolute' | 'prismatic' per joint
    joint_limits: np.ndarray  # (6, 2): lo, hi (rad or m)

    def __post_init__(self) -> None:
        if self.dh_rows.shape != (6, 4):
            raise ValueError("dh_rows must be 6x4")
        if len(self.joint_types) != 6:
            raise ValueError("need 6 joint types")
        for jt in self.joint_types:
            if jt not in (REVOLUTE, PRISMATIC):
                raise ValueError(f"unknown joint type {jt!r}")
        if self.joint_limits.shape != (6, 2):
            raise ValueError("joint_limits must be 6x2")
        if np.any(self.joint_limits[:, 0] >= self.joint_limits[:, 1]):
            raise ValueError("each joint needs lo < hi")

    def clamp(self, q: np.ndarray) -> np.ndarray:
        return np.clip(q, self.joint_limits[:, 0], self.joint_limits[:, 1])


@dataclass
class ArmState:
    q: np.ndarray  # (6,) joint values
    gripper: float = 1.0  # 0 closed .. 1 open

    def validate(self, model: ArmModel) -> None:
        lo, hi = model.joint_limits[:, 0], model.joint_limits[:, 1]
        if np.any(self.q < lo) or np.any(self.q > hi):
            raise ValueError("joint values outside limits")
        if not 0.0 <= self.gripper <= 1.0:
            raise ValueError("gripper must lie in [0, 1]")


def default_arm_model() -> ArmModel:
    """Yaw-pitch-insertion arm with ~0.3 m reach, tool-down at home.

    The 0.03 m shoulder offset keeps the tool off the yaw axis so the yaw
    column of the Jacobian never vanishes entirely.
    """
    dh = np.array(
        [
            # a,    alpha,      d,     theta_offset
            [0.03, np.pi / 2, 0.0, 0.0],  # yaw about world z
            [0.00, np.pi / 2, 0.0, 0.0],  # pitch, tilts the insertion axis
            [0.00, 0.0, 0.0, 0.0],  # prismatic insertion, extends downward
            [0.00, np.pi / 2, 0.0, 0.0],  # tool roll
            [0.00, -np.pi / 2, 0.0, 0.0],  # wrist pitch
            [0.00, 0.0, 0.02, 0.0],  # jaw offset
        ]
    )
    types = (REVOLUTE, REVOLUTE, PRISMATIC, REVOLUTE, REVOLUTE, REVOLUTE)
    limits = np.array(
        [
            [-1.7, 1.7],
            [-1.2, 1.2],
            [0.05, 0.28],
            [-2.6, 2.6],
            [-1.5, 1.5],
            [-2.6, 2.6],
        ]
    )
    return ArmModel(dh_rows=dh, joint_types=types, joint_limits=limits)


HOME_Q = np.array([0.0, 0.0, 0.13, 0.0, 0.0, 0.0])


def dh_transform(a: float, alpha: float, d: float, theta: float) -> np.ndarray:
    ct, st = np.cos(theta), np.sin(theta)
    ca, sa = np.cos(alpha), np.sin(alpha)
    t = np.empty((4, 4))
    t[0, 0] = ct
    t[0, 1] = -st * ca
    t[0, 2] = st * sa
    t[0, 3] = a * ct
    t[1, 0] = st
    t[1, 1] = ct * ca
    t[1, 2] = -ct * sa
    t[1, 3] = a * st
    t[2, 0] = 0.0
    t[2, 1] = sa
    t[2, 2] = ca
    t[2, 3] = d
    t[3, 0] = 0.0
    t[3, 1] = 0.0
    t[3, 2] = 0.0
    t[3, 3] = 1.0
    return t


def fk_frames(model: ArmModel, q: np.ndarray) -> list[np.ndarray]:
    """Cumulative transforms after each joint; frames[0] is the base."""
    frames = [np.eye(4)]
    t = frames[0]
    for i in range(6):
        a, alpha, d, theta0 = model.dh_rows[i]
        if model.joint_types[i] == REVOLUTE:
            theta, dd = theta0 + q[i], d
        else:
            theta, dd = theta0, d + q[i]
        t = t @ dh_transform(a, alpha, dd, theta)
        frames.append(t)
    return frames


def fk(model: ArmModel, q: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """End-effector (position, 3x3 rotation) in the arm base frame."""
    t = fk_frames(model, q)[-1]
    return t[:3, 3].copy(), t[:3, :3].copy()


def jacobian(model: ArmModel, q: np.ndarray) -> np.ndarray:
    """Geometric positional Jacobian, 3x6: column j = d(ee pos)/d(q_j)."""
    frames = fk_frames(model, q)
    p_ee = frames[-1][:3, 3]
    cols = np.empty((3, 6))
    for j in range(6):
        z = frames[j][:3, 2]
        if model.joint_types[j] == REVOLUTE:
            cols[:, j] = np.cross(z, p_ee - frames[j][:3, 3])
        else:
            cols[:, j] = z
    return cols


def _dls_descend(
    model: ArmModel,
    target: np.ndarray,
    q0: np.ndarray,
    tol: float,
    max_iters: int,
    damping: float,
    trace: list | None,
) -> tuple[np.ndarray, float]:
    """One damped-least-squares descent from q0; returns (q, residual).

    The damping inflates whenever a step fails to reduce the residual
    (Levenberg-Marquardt style) and resets once a step succeeds, so every
    recorded iterate improves on the previous one.
    """
    q = model.clamp(np.asarray(q0, dtype=float).copy())
    pos, _ = fk(model, q)
    residual = float(np.linalg.norm(target - pos))
    if trace is not None:
        trace.append(residual)
    eye3 = np.eye(3)

    for _ in range(max_iters):
        if residual <= tol:
            break
        err = target - pos
        jac = jacobian(model, q)
        lam = damping
        improved = False
        for _ in range(12):
            core = jac @ jac.T + (lam * lam) * eye3
            step = jac.T @ np.linalg.solve(core, err)
            q_new = model.clamp(q + step)
            pos_new, _ = fk(model, q_new)
            r_new = float(np.linalg.norm(target - pos_new))
            if r_new < residual:
                q, pos, residual = q_new, pos_new, r_new
                improved = True
                break
            lam *= 2.0
        if not improved:
            break
        if trace is not None:
            trace.append(residual)
    return q, residual


def ik(
    model: ArmModel,
    target_position: np.ndarray,
    q0: np.ndarray,
    tol: float = 1e-4,
    max_iters: int = 200,
    damping: float = 0.05,
    trace: list | None = None,
) -> np.ndarray:
    """Damped least squares: q += J^T (JJ^T + lambda^2 I)^-1 err.

    Iterates from q0 with adaptive damping; if that descent stalls above
    tolerance, retries from a few fixed interior seeds (deterministic).
    Joint limits are enforced on every iterate, and the recorded residual
    trace is non-increasing within each descent. Raises IkFailed carrying
    the best q and its residual when the tolerance is not met.
    """
    target = np.asarray(target_position, dtype=float)
    best_q, best_r = _dls_descend(model, target, q0, tol, max_iters, damping, trace)
    if best_r <= tol:
        return best_q

    lo, hi = model.joint_limits[:, 0], model.joint_limits[:, 1]
    mid = 0.5 * (lo + hi)
    span = hi - lo
    seeds = [mid, mid + 0.25 * span, mid - 0.25 * span]
    # deterministic extra seeds derived from the target itself, for the
    # rare contorted poses the fixed seeds miss
    entropy = np.frombuffer(target.astype("<f8").tobytes(), dtype=np.uint64)
    restart_rng = np.random.default_rng(np.random.SeedSequence(list(entropy)))
    seeds.extend(restart_rng.uniform(lo, hi) for _ in range(8))

    for seed_q in seeds:
        q_r, r_r = _dls_descend(model, target, seed_q, tol, max_iters, damping, None)
        if r_r < best_r:
            best_q, best_r = q_r, r_r
        if best_r <= tol:
            return best_q

    raise IkFailed(best_r, best_q)
