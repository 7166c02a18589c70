"""Fixed rigid bodies the fingertip can touch.

Every surface carries its penalty-contact parameters. The fingertip is a sphere of radius
rho centered at the {E} origin.
"""

from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Dict, Optional, Type

import numpy as np

from dynamics.chain import Pose6
from utils.config import as_vector
from utils.error_handler import ConfigError


@dataclass(frozen=True, eq=False)
class ContactGeometry:
    depth: float          # penetration >= 0, m
    point: np.ndarray     # deepest fingertip point in {W}
    normal: np.ndarray    # outward unit normal of the surface in {W}


@dataclass(frozen=True, eq=False)
class ContactParams:
    k_c: float = 1000.0     # normal stiffness, N/m
    b_c: float = 2.0        # normal damping, N*s/m
    mu: float = 0.8         # Coulomb friction coefficient
    k_t: float = 5.0        # viscous tangential coefficient, N*s/m
    k_stick: float = 0.0    # stiction anchor stiffness, N/m (0 = viscous law only)

    def __post_init__(self):
        if not self.k_c > 0.0:
            raise ConfigError("contact stiffness k_c must be positive", field="k_c")
        for name in ('b_c', 'mu', 'k_t', 'k_stick'):
            if getattr(self, name) < 0.0:
                raise ConfigError(f"contact parameter {name} must be non-negative", field=name)


class RigidSurface(ABC):
    """Abstract base for fixed surfaces.

    `query` returns the contact geometry for a fingertip sphere, or None when separated.
    """

    kind: str = "base"

    def __init__(self, params: ContactParams):
        self.params = params

    @abstractmethod
    def query(self, center: np.ndarray, radius: float) -> Optional[ContactGeometry]:
        raise NotImplementedError


class Plane(RigidSurface):
    kind = "plane"

    def __init__(self, point, normal, params: ContactParams):
        super().__init__(params)
        normal = np.asarray(normal, dtype=float)
        if abs(np.linalg.norm(normal) - 1.0) > 1e-9:
            raise ConfigError("plane normal must be unit-norm", field="normal")
        self.point = np.asarray(point, dtype=float)
        self.normal = normal

    def query(self, center, radius):
        center = np.asarray(center, dtype=float)
        depth = radius - float(np.dot(center - self.point, self.normal))
        if depth <= 0.0:
            return None
        return ContactGeometry(depth, center - radius * self.normal, self.normal.copy())


class Sphere(RigidSurface):
    kind = "sphere"

    def __init__(self, center, radius: float, params: ContactParams):
        super().__init__(params)
        if not radius > 0.0:
            raise ConfigError("sphere radius must be positive", field="radius")
        self.center = np.asarray(center, dtype=float)
        self.radius = float(radius)

    def query(self, center, radius):
        center = np.asarray(center, dtype=float)
        offset = center - self.center
        dist = float(np.linalg.norm(offset))
        depth = self.radius + radius - dist
        if depth <= 0.0 or dist == 0.0:
            return None
        normal = offset / dist
        return ContactGeometry(depth, center - radius * normal, normal)


def contact_query(surface: Optional[RigidSurface], fingertip_pose: Pose6, radius: float) -> Optional[ContactGeometry]:
    if surface is None:
        return None
    return surface.query(fingertip_pose.position, radius)


SURFACES: Dict[str, Type[RigidSurface]] = {
    'plane': Plane,
    'sphere': Sphere,
}


def make_surface(data: Optional[dict], path=None) -> Optional[RigidSurface]:
    """Surface from a scenario `surface` mapping; `shape: none` (or no mapping) removes it."""
    if not data or data.get('shape', 'none') == 'none':
        return None
    shape = data['shape']
    if shape not in SURFACES:
        raise ConfigError(f"unknown surface shape '{shape}' (expected one of {sorted(SURFACES)})",
                          path=str(path) if path else None, field="surface.shape")
    try:
        params = ContactParams(
            k_c=float(data.get('k_c', ContactParams.k_c)),
            b_c=float(data.get('b_c', ContactParams.b_c)),
            mu=float(data.get('mu', ContactParams.mu)),
            k_t=float(data.get('k_t', ContactParams.k_t)),
            k_stick=float(data.get('k_stick', ContactParams.k_stick)),
        )
        if shape == 'plane':
            return Plane(as_vector(data.get('point'), 3, 'surface.point', path),
                         _unit(as_vector(data.get('normal'), 3, 'surface.normal', path), path), params)
        return Sphere(as_vector(data.get('center'), 3, 'surface.center', path), float(data.get('radius', 0.0)), params)
    except ConfigError as e:
        e.details['path'] = str(path) if path else None
        raise


def _unit(v: np.ndarray, path) -> np.ndarray:
    n = np.linalg.norm(v)
    if not n > 0.0:
        raise ConfigError("'surface.normal' must be nonzero", path=str(path) if path else None, field="surface.normal")
    return v / n
