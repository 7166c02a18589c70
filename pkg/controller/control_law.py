"""Switching motion / force-direction control law.

    tau_motion = (1 - y) M(q) (K_p e + K_d edot) + g(q)
    tau_task   = y J_w^T (K_theta theta r + K_s W_R_E E_R_C n)
    tau_cmd    = tau_motion + tau_task

y = 1 is a stable contact. The Coriolis term is left out of the controller on purpose;
the simulator keeps it.
"""

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from controller.gains import ControllerGains
from dynamics.chain import JointChain, gravity_vector, jacobian, kinematics, mass_matrix
from geometry.rot3 import DEFAULT_FORCE_EPS, AxisAngle, axis_angle_of, rodrigues_between
from stability.logistic import ContactState
from tactile.estimator import ContactEstimate
from utils.error_handler import DegenerateForce

logger = logging.getLogger(__name__)

# surface normal of the end-effector, z-axis of the contact frame
CONTACT_NORMAL = np.array([0.0, 0.0, 1.0])


@dataclass(frozen=True, eq=False)
class ControlCommand:
    tau_motion: np.ndarray
    tau_task: np.ndarray
    tau_cmd: np.ndarray         # unclamped sum
    tau_applied: np.ndarray     # after the torque-limit clamp
    saturated: np.ndarray       # per joint
    theta: float                # nan when no usable force
    r: np.ndarray
    y: int
    p: float
    f_W: np.ndarray             # measured pseudo-force in {W}, nan without contact
    dphi_c: np.ndarray          # orientation error in the contact frame (diagnostic)

    @property
    def any_saturated(self) -> bool:
        return bool(np.any(self.saturated))


def orientation_error(f_W, f_d, eps: float = DEFAULT_FORCE_EPS) -> AxisAngle:
    return axis_angle_of(rodrigues_between(f_W, f_d, eps))


def task_torque(J_w: np.ndarray, theta: float, r, gains: ControllerGains, R_WE: np.ndarray,
                R_EC: np.ndarray, n=CONTACT_NORMAL, y: int = 1) -> np.ndarray:
    J_w = np.asarray(J_w, dtype=float)
    if not y:
        return np.zeros(J_w.shape[1])
    orient = J_w.T @ (gains.K_theta * (theta * np.asarray(r, dtype=float)))
    hold = J_w.T @ (gains.K_s * (R_WE @ R_EC @ np.asarray(n, dtype=float)))
    return orient + hold


def motion_torque(M: np.ndarray, gains: ControllerGains, e, edot, g_q, y: int = 0) -> np.ndarray:
    g_q = np.asarray(g_q, dtype=float)
    if y:
        return g_q.copy()
    pd = gains.K_p * np.asarray(e, dtype=float) + gains.K_d * np.asarray(edot, dtype=float)
    return M @ pd + g_q


def control_step(chain: JointChain, q, qdot, q_ref, contact: ContactEstimate, state: ContactState,
                 gains: ControllerGains, qdot_ref=None, eps: float = DEFAULT_FORCE_EPS) -> ControlCommand:
    q = np.asarray(q, dtype=float)
    qdot = np.asarray(qdot, dtype=float)
    kin = kinematics(chain, q)
    M = mass_matrix(chain, q, kin)
    g_q = gravity_vector(chain, q, kin)
    _, J_w = jacobian(chain, q, kin)
    R_WE = kin.tip.orientation
    R_EC = contact.rotation

    y = int(state.y) if contact.active else 0
    theta = float('nan')
    r = np.full(3, np.nan)
    f_W = np.full(3, np.nan)
    if contact.active:
        f_W = R_WE @ R_EC @ contact.f
        try:
            err = orientation_error(f_W, gains.f_d, eps)
            theta, r = err.angle, err.axis
        except DegenerateForce:
            # classifier and estimator disagree for this tick
            if y:
                logger.debug("stable contact without usable force (|f| = %.3g), holding position", np.linalg.norm(f_W))
            y = 0

    e = np.asarray(q_ref, dtype=float) - q
    edot = (np.zeros_like(qdot) if qdot_ref is None else np.asarray(qdot_ref, dtype=float)) - qdot
    tau_motion = motion_torque(M, gains, e, edot, g_q, y)
    tau_task = task_torque(J_w, theta, r, gains, R_WE, R_EC, CONTACT_NORMAL, y)
    tau_cmd = tau_motion + tau_task

    limits = chain.torque_limits
    tau_applied = np.clip(tau_cmd, -limits, limits)
    saturated = tau_applied != tau_cmd
    dphi_c = (R_WE @ R_EC).T @ (theta * r)

    return ControlCommand(
        tau_motion=tau_motion,
        tau_task=tau_task,
        tau_cmd=tau_cmd,
        tau_applied=tau_applied,
        saturated=saturated,
        theta=theta,
        r=r,
        y=y,
        p=float(state.p),
        f_W=f_W,
        dphi_c=dphi_c,
    )
