"""Serial-chain finger kinematics and dynamics.

All joints are revolute. Joint i rotates link i about `axis` (expressed in the joint frame,
which sits at `origin` relative to link i-1). The end-effector frame {E} is `tip` relative to
the last link frame. World quantities are expressed in {W}.
"""

from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from geometry.rot3 import axis_angle_to_matrix, rpy_to_matrix
from utils.error_handler import ConfigError, DimensionMismatch

DEFAULT_GRAVITY = np.array([0.0, 0.0, -9.81])
CORIOLIS_STEP = 1e-6


@dataclass(frozen=True, eq=False)
class Pose6:
    position: np.ndarray
    orientation: np.ndarray

    @classmethod
    def identity(cls) -> "Pose6":
        return cls(np.zeros(3), np.eye(3))

    @classmethod
    def from_xyz_rpy(cls, position, rpy=(0.0, 0.0, 0.0)) -> "Pose6":
        return cls(np.asarray(position, dtype=float), rpy_to_matrix(*rpy))

    def compose(self, other: "Pose6") -> "Pose6":
        return Pose6(self.position + self.orientation @ other.position,
                     self.orientation @ other.orientation)

    def transform(self, point) -> np.ndarray:
        return self.position + self.orientation @ np.asarray(point, dtype=float)

    def inverse(self) -> "Pose6":
        Rt = self.orientation.T
        return Pose6(-Rt @ self.position, Rt)

    def as_matrix(self) -> np.ndarray:
        T = np.eye(4)
        T[:3, :3] = self.orientation
        T[:3, 3] = self.position
        return T


@dataclass(frozen=True, eq=False)
class Link:
    mass: float
    com: np.ndarray
    inertia: np.ndarray  # about the CoM, link frame


@dataclass(frozen=True, eq=False)
class Joint:
    name: str
    origin: Pose6
    axis: np.ndarray
    lower: float
    upper: float
    torque_limit: float
    damping: float = 0.0
    friction: float = 0.0
    armature: float = 0.0   # reflected rotor inertia, kg*m^2


@dataclass(frozen=True, eq=False)
class JointState:
    q: np.ndarray
    qdot: np.ndarray


@dataclass(frozen=True, eq=False)
class JointChain:
    name: str
    joints: Tuple[Joint, ...]
    links: Tuple[Link, ...]
    base: Pose6 = field(default_factory=Pose6.identity)
    tip: Pose6 = field(default_factory=Pose6.identity)
    gravity: np.ndarray = field(default_factory=lambda: DEFAULT_GRAVITY.copy())

    def __post_init__(self):
        if len(self.joints) != len(self.links):
            raise ConfigError(f"{len(self.joints)} joints but {len(self.links)} links", field="links")
        for joint in self.joints:
            if abs(np.linalg.norm(joint.axis) - 1.0) > 1e-6:
                raise ConfigError(f"joint '{joint.name}' axis is not unit-norm", field="axis")
            if joint.lower > joint.upper:
                raise ConfigError(f"joint '{joint.name}' has lower limit above upper limit", field="limits")
            if joint.armature < 0.0:
                raise ConfigError(f"joint '{joint.name}' armature must be non-negative", field="armature")
        for i, link in enumerate(self.links):
            if not link.mass > 0.0:
                raise ConfigError(f"link {i} mass must be positive", field="mass")
            I = np.asarray(link.inertia)
            if I.shape != (3, 3) or np.max(np.abs(I - I.T)) > 1e-12 or np.min(np.linalg.eigvalsh(I)) <= 0.0:
                raise ConfigError(f"link {i} inertia must be symmetric positive-definite", field="inertia")

    @property
    def m(self) -> int:
        return len(self.joints)

    @property
    def lower(self) -> np.ndarray:
        return np.array([j.lower for j in self.joints])

    @property
    def upper(self) -> np.ndarray:
        return np.array([j.upper for j in self.joints])

    @property
    def torque_limits(self) -> np.ndarray:
        return np.array([j.torque_limit for j in self.joints])

    @property
    def damping(self) -> np.ndarray:
        return np.array([j.damping for j in self.joints])

    @property
    def friction(self) -> np.ndarray:
        return np.array([j.friction for j in self.joints])

    @property
    def armature(self) -> np.ndarray:
        return np.array([j.armature for j in self.joints])


@dataclass(frozen=True, eq=False)
class ChainKinematics:
    """Every world-frame quantity the Jacobians and dynamics need for one q."""
    frames: List[Pose6]      # link frames after the joint rotation
    axes: np.ndarray         # (m, 3) joint axes in {W}
    origins: np.ndarray      # (m, 3) joint origins in {W}
    tip: Pose6               # {E} in {W}


def _as_q(chain: JointChain, q, name: str = "q") -> np.ndarray:
    q = np.asarray(q, dtype=float).reshape(-1)
    if q.shape[0] != chain.m:
        raise DimensionMismatch(f"{name} has {q.shape[0]} entries, chain has {chain.m} joints",
                                expected=chain.m, got=int(q.shape[0]))
    return q


def kinematics(chain: JointChain, q) -> ChainKinematics:
    q = _as_q(chain, q)
    T = chain.base
    frames = []
    axes = np.zeros((chain.m, 3))
    origins = np.zeros((chain.m, 3))
    for i, (joint, qi) in enumerate(zip(chain.joints, q)):
        T = T.compose(joint.origin)
        axes[i] = T.orientation @ joint.axis
        origins[i] = T.position
        T = Pose6(T.position, T.orientation @ axis_angle_to_matrix(joint.axis, qi))
        frames.append(T)
    return ChainKinematics(frames, axes, origins, T.compose(chain.tip))


def forward_kinematics(chain: JointChain, q) -> Pose6:
    return kinematics(chain, q).tip


def point_jacobian(kin: ChainKinematics, link: int, point) -> Tuple[np.ndarray, np.ndarray]:
    """(J_v, J_w) of a world point rigidly attached to `link`."""
    m = kin.axes.shape[0]
    Jv = np.zeros((3, m))
    Jw = np.zeros((3, m))
    n = link + 1
    Jw[:, :n] = kin.axes[:n].T
    Jv[:, :n] = np.cross(kin.axes[:n], np.asarray(point, dtype=float) - kin.origins[:n]).T
    return Jv, Jw


def jacobian(chain: JointChain, q, kin: Optional[ChainKinematics] = None) -> Tuple[np.ndarray, np.ndarray]:
    if kin is None:
        kin = kinematics(chain, q)
    return point_jacobian(kin, chain.m - 1, kin.tip.position)


def contact_jacobian(chain: JointChain, q, point, kin: Optional[ChainKinematics] = None) -> Tuple[np.ndarray, np.ndarray]:
    """Jacobian at a contact point on the fingertip (last link)."""
    if kin is None:
        kin = kinematics(chain, q)
    return point_jacobian(kin, chain.m - 1, point)


def mass_matrix(chain: JointChain, q, kin: Optional[ChainKinematics] = None) -> np.ndarray:
    """Link inertia plus each joint's armature on the diagonal."""
    if kin is None:
        kin = kinematics(chain, q)
    M = np.diag(chain.armature)
    for l, (link, frame) in enumerate(zip(chain.links, kin.frames)):
        Jv, Jw = point_jacobian(kin, l, frame.transform(link.com))
        I_w = frame.orientation @ link.inertia @ frame.orientation.T
        M += link.mass * (Jv.T @ Jv) + Jw.T @ I_w @ Jw
    return 0.5 * (M + M.T)


def gravity_vector(chain: JointChain, q, kin: Optional[ChainKinematics] = None) -> np.ndarray:
    """g(q): joint torques that statically balance gravity."""
    if kin is None:
        kin = kinematics(chain, q)
    g = np.zeros(chain.m)
    for l, (link, frame) in enumerate(zip(chain.links, kin.frames)):
        Jv, _ = point_jacobian(kin, l, frame.transform(link.com))
        g -= link.mass * (Jv.T @ chain.gravity)
    return g


def potential_energy(chain: JointChain, q) -> float:
    kin = kinematics(chain, q)
    return float(-sum(link.mass * np.dot(chain.gravity, frame.transform(link.com))
                      for link, frame in zip(chain.links, kin.frames)))


def kinetic_energy(chain: JointChain, q, qdot) -> float:
    qdot = _as_q(chain, qdot, "qdot")
    return float(0.5 * qdot @ mass_matrix(chain, q) @ qdot)


def coriolis_vector(chain: JointChain, q, qdot, h: float = CORIOLIS_STEP) -> np.ndarray:
    """C(q, qdot) qdot from Christoffel symbols of a central-difference dM/dq."""
    q = _as_q(chain, q)
    qdot = _as_q(chain, qdot, "qdot")
    if not np.any(qdot):
        return np.zeros(chain.m)
    dM = np.empty((chain.m, chain.m, chain.m))
    for k in range(chain.m):
        dq = np.zeros(chain.m)
        dq[k] = h
        dM[k] = (mass_matrix(chain, q + dq) - mass_matrix(chain, q - dq)) / (2.0 * h)
    # c_i = sum_jk (dM_ij/dq_k - 1/2 dM_jk/dq_i) qdot_j qdot_k
    first = np.einsum('kij,j,k->i', dM, qdot, qdot)
    second = 0.5 * np.einsum('ijk,j,k->i', dM, qdot, qdot)
    return first - second


def quasi_static_torque(J_w: np.ndarray, F_task) -> np.ndarray:
    """tau_task = J_w^T F_task"""
    return np.asarray(J_w, dtype=float).T @ np.asarray(F_task, dtype=float)


def clamp_to_limits(chain: JointChain, q: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Clamp q to the joint limits; also returns which joints were clamped."""
    lo, hi = chain.lower, chain.upper
    clamped = np.clip(q, lo, hi)
    return clamped, (clamped != q)


def make_chain(name: str, joints: Sequence[Joint], links: Sequence[Link], base: Pose6 = None,
               tip: Pose6 = None, gravity=None) -> JointChain:
    return JointChain(
        name=name,
        joints=tuple(joints),
        links=tuple(links),
        base=base if base is not None else Pose6.identity(),
        tip=tip if tip is not None else Pose6.identity(),
        gravity=np.asarray(gravity, dtype=float) if gravity is not None else DEFAULT_GRAVITY.copy(),
    )
