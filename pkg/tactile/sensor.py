"""Simulated tri-axial tactile skin."""

from typing import Union

import numpy as np

from tactile.estimator import TactileFrame
from tactile.layout import TaxelLayout
from utils.error_handler import ConfigError

DEFAULT_SPREAD = 0.004
DEFAULT_NOISE = 0.0


def make_rng(rng: Union[np.random.Generator, int, None]) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


def simulate_taxels(layout: TaxelLayout, contact_point, surface_force,
                    spread: float = DEFAULT_SPREAD, noise: float = DEFAULT_NOISE,
                    rng: Union[np.random.Generator, int, None] = None,
                    gain: float = 1.0, timestamp: float = 0.0) -> TactileFrame:
    """Spread a force applied at contact_point (both in {E}) over the taxels.

    f_k = G_k s gain R_k^T F + noise, G_k = exp(-(|p_k - c|^2 - min_j |p_j - c|^2) / (2 spread^2)),
    s = 1 / sum(G_k). The nearest taxel always has G = 1.
    The noise draw is made on every call so the generator advances the same way whatever
    the force is.
    """
    if not spread > 0.0:
        raise ConfigError(f"sensor spread must be positive, got {spread}", field="spread")
    rng = make_rng(rng)

    d2 = np.sum((layout.positions - np.asarray(contact_point, dtype=float)) ** 2, axis=1)
    G = np.exp(-(d2 - d2.min()) / (2.0 * spread ** 2))
    F = gain * np.asarray(surface_force, dtype=float)
    readings = (G / np.sum(G))[:, None] * np.einsum('kji,j->ki', layout.rotations, F)
    readings = readings + noise * rng.standard_normal((layout.n_tx, 3))
    return TactileFrame(float(timestamp), readings)
