"""Hand-crafted contact-stability features over a window of tactile frames.

Feature set `tactile-v1` (d = 7), in order:

    mean_activation      mean of Delta over the window
    tangential_ratio     mean |f_t| / max(f_n, eps) over frames with active contact
    tangential_rate      least-squares slope of |f_t| (per second)
    normal_rate          least-squares slope of f_n (per second)
    active_fraction      mean fraction of taxels with Delta_k >= threshold
    center_drift         norm of the least-squares slope of the contact center (m/s)
    activation_variance  variance of Delta over the window

f_t, f_n are the tangential and normal parts of the pseudo-force in the contact frame;
frames without contact contribute zero force. A window without any active frame maps to
the zero vector.
"""

from typing import Sequence

import numpy as np

from tactile.estimator import DEFAULT_ACTIVATION_THRESHOLD, TactileFrame, estimate_contact
from tactile.layout import TaxelLayout
from utils.error_handler import WindowTooShort

FEATURE_SET_VERSION = "tactile-v1"
FEATURE_NAMES = (
    "mean_activation",
    "tangential_ratio",
    "tangential_rate",
    "normal_rate",
    "active_fraction",
    "center_drift",
    "activation_variance",
)
N_FEATURES = len(FEATURE_NAMES)
DEFAULT_WINDOW = 15
RATIO_EPS = 1e-6


def ls_slope(t: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Least-squares slope of y against t along axis 0; exactly 0 for a constant series."""
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    dt = t - t.mean()
    denom = float(np.dot(dt, dt))
    if denom == 0.0:
        return np.zeros(y.shape[1:]) if y.ndim > 1 else np.float64(0.0)
    return np.tensordot(dt, y - y[0], axes=(0, 0)) / denom


def extract_features(window: Sequence[TactileFrame], layout: TaxelLayout,
                     window_length: int = DEFAULT_WINDOW,
                     threshold: float = DEFAULT_ACTIVATION_THRESHOLD) -> np.ndarray:
    if len(window) < window_length:
        raise WindowTooShort(f"window has {len(window)} frames, need {window_length}",
                             required=window_length, got=len(window))
    frames = list(window)[-window_length:]

    t = np.array([fr.timestamp for fr in frames], dtype=float)
    deltas = np.zeros(window_length)
    taxel_fraction = np.zeros(window_length)
    f_n = np.zeros(window_length)
    f_t = np.zeros(window_length)
    active = np.zeros(window_length, dtype=bool)
    centers = np.zeros((window_length, 3))

    for i, frame in enumerate(frames):
        d_k = frame.activations()
        est = estimate_contact(layout, frame, threshold)
        deltas[i] = est.delta
        taxel_fraction[i] = np.count_nonzero(d_k >= threshold) / layout.n_tx
        if est.active:
            active[i] = True
            centers[i] = est.c
            f_n[i] = est.f[2]
            f_t[i] = np.hypot(est.f[0], est.f[1])

    if not active.any():
        return np.zeros(N_FEATURES)

    ratio = f_t[active] / np.maximum(f_n[active], RATIO_EPS)
    drift = ls_slope(t[active], centers[active]) if np.count_nonzero(active) > 1 else np.zeros(3)

    return np.array([
        deltas.mean(),
        ratio.mean(),
        ls_slope(t, f_t),
        ls_slope(t, f_n),
        taxel_fraction.mean(),
        np.linalg.norm(drift),
        np.var(deltas - deltas[0]),
    ])
