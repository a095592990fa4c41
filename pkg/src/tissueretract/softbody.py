"""Deterministic mass-spring soft tissue.

A rectangular grid of point masses joined by structural, shear, and bend
springs, pinned at its four corners, integrated with semi-implicit Euler.
Three designated anchor nodes (center, left-edge middle, right-edge middle)
are the only grasp sites. A grasp kinematically slaves one anchor to the
gripper jaw and breaks when the net spring force on that node exceeds a
threshold, which is what produces grip-loss failures under fast retraction.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np

from .errors import InvalidState, SimulationDiverged

STRUCTURAL = 0
SHEAR = 1
BEND = 2
KIND_NAMES = ("structural", "shear", "bend")


@dataclass
class PhysicsConfig:
    """Integration and grasp parameters. Defaults are stable for the
    default 9x9 grid stiffnesses; override through the run config."""

    dt: float = 1.0 / 240.0
    substeps_per_control: int = 24
    gravity: tuple[float, float, float] = (0.0, 0.0, -9.81)
    damping: float = 4.0
    grasp_radius: float = 0.01
    grasp_break_force: float = 2.5

    def validate(self) -> None:
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.substeps_per_control < 1:
            raise ValueError("substeps_per_control must be >= 1")
        if not 0.0 <= self.damping * self.dt < 1.0:
            raise ValueError("damping*dt must lie in [0, 1) for stability")
        if self.grasp_radius <= 0:
            raise ValueError("grasp_radius must be positive")


class Spring(NamedTuple):
    node_a: int
    node_b: int
    rest_length: float
    stiffness: float
    kind: int


@dataclass
class Grasp:
    node: int
    offset: np.ndarray  # grasped node position minus jaw position at attach


@dataclass
class TissueMesh:
    positions: np.ndarray  # (n, 3) meters
    velocities: np.ndarray  # (n, 3) m/s
    masses: np.ndarray  # (n,) kg
    spring_a: np.ndarray  # (m,) int
    spring_b: np.ndarray  # (m,) int
    rest_lengths: np.ndarray  # (m,) meters
    stiffness: np.ndarray  # (m,) N/m
    kinds: np.ndarray  # (m,) int, STRUCTURAL | SHEAR | BEND
    pinned: np.ndarray  # (n,) bool
    anchors: tuple[int, int, int] = (0, 0, 0)  # center, left, right
    grasped: Optional[Grasp] = None
    degenerate_flag: bool = field(default=False, repr=False)

    @property
    def n_nodes(self) -> int:
        return self.positions.shape[0]

    @property
    def n_springs(self) -> int:
        return self.spring_a.shape[0]

    def spring(self, i: int) -> Spring:
        return Spring(
            int(self.spring_a[i]),
            int(self.spring_b[i]),
            float(self.rest_lengths[i]),
            float(self.stiffness[i]),
            int(self.kinds[i]),
        )

    def validate(self) -> None:
        n = self.n_nodes
        if np.any(self.spring_a == self.spring_b):
            raise ValueError("spring endpoints must be distinct nodes")
        for idx in (self.spring_a, self.spring_b):
            if np.any(idx < 0) or np.any(idx >= n):
                raise ValueError("spring endpoint index out of range")
        if np.any(self.rest_lengths <= 0):
            raise ValueError("rest lengths must be positive")
        if np.any(self.stiffness <= 0):
            raise ValueError("stiffnesses must be positive")
        if np.any(self.masses <= 0):
            raise ValueError("node masses must be positive")


class StepEvents(NamedTuple):
    """What happened during one control step."""

    released: bool  # grasp broke under excess spring force
    degenerate: bool  # some spring had coincident endpoints


def build_tissue(
    rows: int,
    cols: int,
    spacing: float,
    node_mass: float = 0.01,
    k_structural: float = 80.0,
    k_shear: float = 40.0,
    k_bend: float = 20.0,
) -> TissueMesh:
    """Grid mesh centered on the origin in the z=0 plane.

    Structural springs join grid neighbors, shear springs the cell
    diagonals, bend springs skip one node along rows and columns. The four
    corners are pinned; anchors are the center node and the middles of the
    left and right edges.
    """
    if rows < 3 or cols < 3:
        raise ValueError("tissue grid needs rows >= 3 and cols >= 3")
    if spacing <= 0 or node_mass <= 0:
        raise ValueError("spacing and node_mass must be positive")
    for k in (k_structural, k_shear, k_bend):
        if k <= 0:
            raise ValueError("spring stiffnesses must be positive")

    n = rows * cols
    xs = (np.arange(cols) - (cols - 1) / 2.0) * spacing
    ys = (np.arange(rows) - (rows - 1) / 2.0) * spacing
    gx, gy = np.meshgrid(xs, ys)
    positions = np.column_stack([gx.ravel(), gy.ravel(), np.zeros(n)])

    def node(r: int, c: int) -> int:
        return r * cols + c

    a_idx: list[int] = []
    b_idx: list[int] = []
    rest: list[float] = []
    ks: list[float] = []
    kinds: list[int] = []

    def add(i: int, j: int, length: float, k: float, kind: int) -> None:
        a_idx.append(i)
        b_idx.append(j)
        rest.append(length)
        ks.append(k)
        kinds.append(kind)

    diag = spacing * np.sqrt(2.0)
    for r in range(rows):
        for c in range(cols):
            if c + 1 < cols:
                add(node(r, c), node(r, c + 1), spacing, k_structural, STRUCTURAL)
            if r + 1 < rows:
                add(node(r, c), node(r + 1, c), spacing, k_structural, STRUCTURAL)
            if c + 1 < cols and r + 1 < rows:
                add(node(r, c), node(r + 1, c + 1), diag, k_shear, SHEAR)
                add(node(r, c + 1), node(r + 1, c), diag, k_shear, SHEAR)
            if c + 2 < cols:
                add(node(r, c), node(r, c + 2), 2 * spacing, k_bend, BEND)
            if r + 2 < rows:
                add(node(r, c), node(r + 2, c), 2 * spacing, k_bend, BEND)

    pinned = np.zeros(n, dtype=bool)
    pinned[[node(0, 0), node(0, cols - 1), node(rows - 1, 0), node(rows - 1, cols - 1)]] = True

    mid_r = rows // 2
    anchors = (node(mid_r, cols // 2), node(mid_r, 0), node(mid_r, cols - 1))

    mesh = TissueMesh(
        positions=positions,
        velocities=np.zeros_like(positions),
        masses=np.full(n, float(node_mass)),
        spring_a=np.asarray(a_idx, dtype=np.intp),
        spring_b=np.asarray(b_idx, dtype=np.intp),
        rest_lengths=np.asarray(rest, dtype=float),
        stiffness=np.asarray(ks, dtype=float),
        kinds=np.asarray(kinds, dtype=np.intp),
        pinned=pinned,
        anchors=anchors,
    )
    mesh.validate()
    return mesh


def spring_force(spring: Spring, positions: np.ndarray) -> tuple[np.ndarray, bool]:
    """Hookean force on node_a; the force on node_b is its negation.

    Coincident endpoints give a zero force plus a degeneracy flag instead of
    propagating a NaN direction.
    """
    d = positions[spring.node_a] - positions[spring.node_b]
    length = float(np.linalg.norm(d))
    if length == 0.0:
        return np.zeros(3), True
    force = -spring.stiffness * (length - spring.rest_length) * (d / length)
    return force, False


def spring_forces(mesh: TissueMesh) -> tuple[np.ndarray, bool]:
    """Net spring force per node, (n, 3). Vectorized over all springs."""
    pos = mesh.positions
    d = pos[mesh.spring_a] - pos[mesh.spring_b]
    lengths = np.linalg.norm(d, axis=1)
    degenerate = bool(np.any(lengths == 0.0))
    safe = np.where(lengths == 0.0, 1.0, lengths)
    # force on node_a along -d when stretched; node_b receives the negation
    scale = np.where(lengths == 0.0, 0.0, -mesh.stiffness * (lengths - mesh.rest_lengths) / safe)
    f_a = d * scale[:, None]

    n = mesh.n_nodes
    idx = np.concatenate([mesh.spring_a, mesh.spring_b])
    forces = np.empty((n, 3))
    for axis in range(3):
        w = np.concatenate([f_a[:, axis], -f_a[:, axis]])
        forces[:, axis] = np.bincount(idx, weights=w, minlength=n)
    return forces, degenerate


def step_physics(
    mesh: TissueMesh,
    config: PhysicsConfig,
    ee_pose: Optional[np.ndarray] = None,
) -> StepEvents:
    """Advance one control step (substeps_per_control physics substeps).

    Semi-implicit Euler: v <- (v + a*dt)*(1 - damping*dt), x <- x + v*dt.
    Pinned nodes are never written. A grasped node is slaved to
    ee_pose + offset each substep; if the net spring force on it exceeds
    grasp_break_force the grasp releases and the node is free from that
    substep onward.
    """
    dt = config.dt
    decay = 1.0 - config.damping * dt
    gravity = np.asarray(config.gravity, dtype=float)
    pos = mesh.positions
    vel = mesh.velocities
    inv_m = 1.0 / mesh.masses

    vel[mesh.pinned] = 0.0
    released = False
    degenerate = False

    for _ in range(config.substeps_per_control):
        grasp = mesh.grasped
        if grasp is not None:
            if ee_pose is not None:
                pos[grasp.node] = ee_pose + grasp.offset
            vel[grasp.node] = 0.0

        forces, degen = spring_forces(mesh)
        degenerate |= degen

        if grasp is not None:
            tension = float(np.linalg.norm(forces[grasp.node]))
            if tension > config.grasp_break_force:
                mesh.grasped = None
                grasp = None
                released = True

        free = ~mesh.pinned
        if grasp is not None:
            free = free.copy()
            free[grasp.node] = False

        accel = forces[free] * inv_m[free, None] + gravity
        vel[free] = (vel[free] + accel * dt) * decay
        pos[free] += vel[free] * dt

    if not np.isfinite(pos).all():
        raise SimulationDiverged("non-finite node positions after step")
    mesh.degenerate_flag |= degenerate
    return StepEvents(released=released, degenerate=degenerate)


def try_grasp(mesh: TissueMesh, config: PhysicsConfig, jaw_position: np.ndarray) -> bool:
    """Attach the nearest anchor within grasp_radius of the jaw.

    Returns False when no anchor is in reach (the improper-grasp failure).
    The stored offset keeps the node rigidly posed relative to the jaw.
    """
    if mesh.grasped is not None:
        raise InvalidState("mesh already holds a grasp")
    jaw = np.asarray(jaw_position, dtype=float)
    anchor_idx = np.asarray(mesh.anchors)
    dists = np.linalg.norm(mesh.positions[anchor_idx] - jaw, axis=1)
    best = int(np.argmin(dists))
    if dists[best] > config.grasp_radius:
        return False
    node = int(anchor_idx[best])
    mesh.grasped = Grasp(node=node, offset=mesh.positions[node] - jaw)
    return True


def release_grasp(mesh: TissueMesh) -> None:
    """Drop any current grasp. Idempotent."""
    mesh.grasped = None


def max_strain(mesh: TissueMesh) -> float:
    """Largest |length - rest| / rest over all springs."""
    d = mesh.positions[mesh.spring_a] - mesh.positions[mesh.spring_b]
    lengths = np.linalg.norm(d, axis=1)
    return float(np.max(np.abs(lengths - mesh.rest_lengths) / mesh.rest_lengths))


def kinetic_energy(mesh: TissueMesh) -> float:
    return float(0.5 * np.sum(mesh.masses[:, None] * mesh.velocities**2))
