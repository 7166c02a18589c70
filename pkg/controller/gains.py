from dataclasses import dataclass

import numpy as np

from utils.config import as_vector, gain_vector
from utils.error_handler import ConfigError

UNIT_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class ControllerGains:
    """Diagonal gains of the switching controller.

    K_p (1/s^2) and K_d (1/s) act per joint through M(q); K_theta (N*m/rad) scales the
    orientation error; K_s scales the normal hold. f_d is the desired force direction in {W}.
    """
    K_p: np.ndarray
    K_d: np.ndarray
    K_theta: np.ndarray
    K_s: np.ndarray
    f_d: np.ndarray

    def __post_init__(self):
        for name in ('K_p', 'K_d', 'K_theta', 'K_s'):
            if np.any(np.asarray(getattr(self, name)) < 0.0):
                raise ConfigError(f"gain {name} must be non-negative", field=name)
        if abs(np.linalg.norm(self.f_d) - 1.0) > UNIT_TOL:
            raise ConfigError("desired force direction f_d must be unit-norm", field="f_d")

    @classmethod
    def from_config(cls, data: dict, m: int, path=None) -> "ControllerGains":
        """Build from a scenario `gains` mapping; scalars expand to diagonals and f_d is normalized."""
        f_d = as_vector(data.get('f_d'), 3, 'gains.f_d', path)
        norm = np.linalg.norm(f_d)
        if not norm > 0.0:
            raise ConfigError("'gains.f_d' must be nonzero", path=str(path) if path else None, field="gains.f_d")
        return cls(
            K_p=gain_vector(data.get('K_p', 40.0), m, 'gains.K_p', path),
            K_d=gain_vector(data.get('K_d', 4.0), m, 'gains.K_d', path),
            K_theta=gain_vector(data.get('K_theta', 0.15), 3, 'gains.K_theta', path),
            K_s=gain_vector(data.get('K_s', 0.05), 3, 'gains.K_s', path),
            f_d=f_d / norm,
        )

    def scaled(self, K_theta_factor: float = 1.0) -> "ControllerGains":
        return ControllerGains(self.K_p, self.K_d, self.K_theta * K_theta_factor, self.K_s, self.f_d)
