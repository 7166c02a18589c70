"""Finger dynamics against a fixed surface.

    M(q) qdd = tau - C(q, qd) qd - g(q) - J_c^T F_ext

integrated with semi-implicit Euler. Joint viscous damping is folded into the velocity
update implicitly; joint Coulomb friction is applied as a clamped impulse.
"""

import logging
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from dynamics.chain import (JointChain, JointState, clamp_to_limits, contact_jacobian, coriolis_vector,
                            gravity_vector, kinematics, mass_matrix)
from sim.contact import ContactForce, contact_force
from sim.surfaces import ContactGeometry, RigidSurface, contact_query
from utils.error_handler import DimensionMismatch, NumericalBlowup

logger = logging.getLogger(__name__)

DEFAULT_PHYSICS_DT = 1.0 / 1500.0
DEFAULT_QDOT_BOUND = 100.0


@dataclass(frozen=True, eq=False)
class ContactEval:
    geometry: Optional[ContactGeometry]
    force: Optional[ContactForce]
    J_v: Optional[np.ndarray]

    @property
    def in_contact(self) -> bool:
        return self.geometry is not None

    @property
    def F_ext(self) -> np.ndarray:
        return self.force.F_ext if self.force is not None else np.zeros(3)


@dataclass(frozen=True, eq=False)
class SimState:
    joints: JointState
    time: float = 0.0
    in_contact: bool = False
    contact_point: np.ndarray = field(default_factory=lambda: np.full(3, np.nan))
    F_ext: np.ndarray = field(default_factory=lambda: np.zeros(3))
    f_n: float = 0.0
    f_t: float = 0.0
    slipping: bool = False
    anchor: Optional[np.ndarray] = None

    @property
    def q(self) -> np.ndarray:
        return self.joints.q

    @property
    def qdot(self) -> np.ndarray:
        return self.joints.qdot


class World:
    def __init__(self, chain: JointChain, surface: Optional[RigidSurface] = None,
                 fingertip_radius: float = 0.012, qdot_bound: float = DEFAULT_QDOT_BOUND,
                 coriolis: bool = True):
        self.chain = chain
        self.surface = surface
        self.fingertip_radius = float(fingertip_radius)
        self.qdot_bound = float(qdot_bound)
        self.coriolis = coriolis

    def initial_state(self, q, qdot=None) -> SimState:
        q = np.asarray(q, dtype=float)
        if q.shape != (self.chain.m,):
            raise DimensionMismatch(f"initial q has shape {q.shape}", expected=self.chain.m, got=q.shape)
        q, _ = clamp_to_limits(self.chain, q)
        qdot = np.zeros(self.chain.m) if qdot is None else np.asarray(qdot, dtype=float)
        state = SimState(JointState(q, qdot))
        return self.observe(state)

    def evaluate_contact(self, q, qdot, anchor: Optional[np.ndarray] = None, kin=None) -> ContactEval:
        if kin is None:
            kin = kinematics(self.chain, q)
        geometry = contact_query(self.surface, kin.tip, self.fingertip_radius)
        if geometry is None:
            return ContactEval(None, None, None)
        J_v, _ = contact_jacobian(self.chain, q, geometry.point, kin)
        force = contact_force(self.surface.params, geometry, J_v @ qdot, anchor)
        return ContactEval(geometry, force, J_v)

    def observe(self, state: SimState) -> SimState:
        """Refresh the ground-truth contact fields for the current joint state.

        Observation does not move the stiction anchor; only `step` does.
        """
        ev = self.evaluate_contact(state.q, state.qdot, state.anchor)
        return replace(self._with_contact(state, ev), anchor=state.anchor)

    @staticmethod
    def _with_contact(state: SimState, ev: ContactEval) -> SimState:
        if not ev.in_contact:
            return replace(state, in_contact=False, contact_point=np.full(3, np.nan), F_ext=np.zeros(3),
                           f_n=0.0, f_t=0.0, slipping=False, anchor=None)
        return replace(state, in_contact=True, contact_point=ev.geometry.point, F_ext=ev.F_ext,
                       f_n=ev.force.f_n, f_t=ev.force.f_t, slipping=ev.force.slipping, anchor=ev.force.anchor)

    def step(self, state: SimState, tau, dt: float = DEFAULT_PHYSICS_DT, tick: Optional[int] = None) -> SimState:
        """Advance one physics step under joint torque tau.

        The returned state carries the contact that acted during the step (force, slip).
        """
        chain = self.chain
        q, qdot = state.q, state.qdot
        tau = np.asarray(tau, dtype=float)
        if tau.shape != (chain.m,):
            raise DimensionMismatch(f"tau has shape {tau.shape}", expected=chain.m, got=tau.shape)

        kin = kinematics(chain, q)
        ev = self.evaluate_contact(q, qdot, state.anchor, kin)
        M = mass_matrix(chain, q, kin)
        tau_net = tau - gravity_vector(chain, q, kin)
        if self.coriolis:
            tau_net = tau_net - coriolis_vector(chain, q, qdot)
        if ev.in_contact:
            tau_net = tau_net - ev.J_v.T @ ev.F_ext

        # (M + dt D) qd' = M qd + dt tau_net
        A = M + dt * np.diag(chain.damping)
        qdot_new = np.linalg.solve(A, M @ qdot + dt * tau_net)
        friction = chain.friction
        if np.any(friction > 0.0):
            qdot_new = self._coulomb(qdot_new, np.diag(A), friction, dt)

        time = state.time + dt
        norm = float(np.linalg.norm(qdot_new))
        if not np.isfinite(norm) or norm > self.qdot_bound:
            raise NumericalBlowup(f"|qdot| = {norm:.3g} rad/s exceeds {self.qdot_bound:g}",
                                  time=time, tick=tick, qdot_norm=norm)

        q_new, clamped = clamp_to_limits(chain, q + dt * qdot_new)
        qdot_new = np.where(clamped, 0.0, qdot_new)
        return self._with_contact(replace(state, joints=JointState(q_new, qdot_new), time=time), ev)

    @staticmethod
    def _coulomb(qdot: np.ndarray, inertia: np.ndarray, friction: np.ndarray, dt: float) -> np.ndarray:
        momentum = inertia * qdot
        impulse = dt * friction
        stopped = np.abs(momentum) <= impulse
        return np.where(stopped, 0.0, qdot - np.sign(qdot) * impulse / inertia)
