"""Contact pose and pseudo-force estimation from one tactile frame."""

from dataclasses import dataclass, field

import numpy as np

from geometry.rot3 import rpy_to_matrix
from tactile.layout import TaxelLayout
from utils.error_handler import DimensionMismatch, NoContact

DEFAULT_ACTIVATION_THRESHOLD = 0.02

_RPY_LOWER = np.array([-np.pi, -np.pi / 2, -np.pi])
_RPY_UPPER = np.array([np.pi, np.pi / 2, np.pi])


@dataclass(frozen=True, eq=False)
class TactileFrame:
    timestamp: float
    readings: np.ndarray  # (n_tx, 3) pseudo-force, each in its own taxel frame

    def activations(self) -> np.ndarray:
        """Delta_k = |f_k|"""
        return np.linalg.norm(self.readings, axis=1)


@dataclass(frozen=True, eq=False)
class ContactEstimate:
    c: np.ndarray                 # contact position in {E}, m
    rpy: np.ndarray               # contact frame orientation phi_c in {E}, rad
    delta: float                  # mean activation over all taxels
    active: bool
    f: np.ndarray = field(default_factory=lambda: np.zeros(3))  # pseudo-force in {C}

    @property
    def rotation(self) -> np.ndarray:
        """E_R_C"""
        return rpy_to_matrix(*self.rpy)

    @classmethod
    def inactive(cls, delta: float = 0.0) -> "ContactEstimate":
        return cls(np.zeros(3), np.zeros(3), float(delta), False)


def _check_frame(layout: TaxelLayout, frame: TactileFrame) -> np.ndarray:
    readings = np.asarray(frame.readings, dtype=float)
    if readings.shape != (layout.n_tx, 3):
        raise DimensionMismatch(f"frame has readings of shape {readings.shape}, layout has {layout.n_tx} taxels",
                                expected=(layout.n_tx, 3), got=readings.shape)
    return readings


def contact_pose(layout: TaxelLayout, frame: TactileFrame,
                 threshold: float = DEFAULT_ACTIVATION_THRESHOLD) -> ContactEstimate:
    """Activation-weighted mean of the taxel poses.

    The weights are Delta_k / sum(Delta_k), so one active taxel returns its own pose exactly.
    Orientation is averaged component-wise in RPY, which only holds for the small angular
    spread of a contact patch; the result is clamped to the valid RPY ranges.
    """
    _check_frame(layout, frame)
    d = frame.activations()
    total = float(np.sum(d))
    delta = total / layout.n_tx
    if total <= 0.0:
        return ContactEstimate.inactive(delta)

    w = d / total
    pose = w @ layout.poses
    rpy = np.clip(pose[3:], _RPY_LOWER, _RPY_UPPER)
    return ContactEstimate(pose[:3], rpy, delta, bool(delta >= threshold))


def contact_pseudo_force(layout: TaxelLayout, frame: TactileFrame, contact: ContactEstimate) -> np.ndarray:
    """f = R(phi_c)^T sum_k R(u_k) f_k, the total pseudo-force in the contact frame."""
    readings = _check_frame(layout, frame)
    if not contact.active:
        raise NoContact("no active contact to project the pseudo-force into", delta=contact.delta)
    f_E = np.einsum('kij,kj->i', layout.rotations, readings)
    return contact.rotation.T @ f_E


def estimate_contact(layout: TaxelLayout, frame: TactileFrame,
                     threshold: float = DEFAULT_ACTIVATION_THRESHOLD) -> ContactEstimate:
    pose = contact_pose(layout, frame, threshold)
    if not pose.active:
        return pose
    return ContactEstimate(pose.c, pose.rpy, pose.delta, True, contact_pseudo_force(layout, frame, pose))
