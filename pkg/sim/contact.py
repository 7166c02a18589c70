"""Penalty contact with Coulomb friction.

The normal and tangential components are the forces the surface applies to the fingertip.
F_ext, the force the finger exerts on the object, is their negation.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from sim.surfaces import ContactGeometry, ContactParams


@dataclass(frozen=True, eq=False)
class ContactForce:
    normal_force: np.ndarray      # on the fingertip, along the surface normal
    tangential_force: np.ndarray  # on the fingertip, in the tangent plane
    slipping: bool
    anchor: Optional[np.ndarray]  # stiction anchor in {W} after this evaluation

    @property
    def F_ext(self) -> np.ndarray:
        return -(self.normal_force + self.tangential_force)

    @property
    def f_n(self) -> float:
        return float(np.linalg.norm(self.normal_force))

    @property
    def f_t(self) -> float:
        return float(np.linalg.norm(self.tangential_force))


def contact_force(params: ContactParams, geometry: ContactGeometry, point_velocity,
                  anchor: Optional[np.ndarray] = None) -> ContactForce:
    """Spring-damper normal force and friction-cone-capped tangential force.

    F_n = k_c depth + b_c max(-v_n, 0), never adhesive. The trial tangential force is
    -(k_stick delta + k_t v_t), delta being the tangential offset from the stiction anchor;
    when it exceeds mu F_n the contact slips, the force is capped onto the cone and the
    anchor follows the point.
    """
    n = geometry.normal
    v = np.asarray(point_velocity, dtype=float)
    v_n = float(np.dot(v, n))
    v_t = v - v_n * n

    F_n = max(params.k_c * geometry.depth + params.b_c * max(-v_n, 0.0), 0.0)
    cap = params.mu * F_n

    trial = -params.k_t * v_t
    if params.k_stick > 0.0:
        if anchor is None:
            anchor = geometry.point.copy()
        offset = geometry.point - anchor
        offset = offset - np.dot(offset, n) * n
        trial = trial - params.k_stick * offset

    magnitude = float(np.linalg.norm(trial))
    slipping = magnitude > cap
    if slipping:
        F_t = trial * (cap / magnitude)
        if params.k_stick > 0.0:
            anchor = geometry.point + F_t / params.k_stick
    else:
        F_t = trial
    return ContactForce(F_n * n, F_t, bool(slipping), anchor if params.k_stick > 0.0 else None)
