"""Logistic-regression contact-stability classifier.

p = sigmoid(w . x~ + b) with x~ = (x - mean) / scale; y = 1 (stable) iff p >= 0.5.
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import numpy as np

from stability.features import FEATURE_NAMES, FEATURE_SET_VERSION
from utils.config import as_vector, dump_yaml, load_yaml, require, to_plain
from utils.error_handler import ConfigError, DegenerateDataset, DimensionMismatch, EmptyDataset

logger = logging.getLogger(__name__)

DEFAULT_L2 = 1e-3
DEFAULT_LR = 0.5
DEFAULT_EPOCHS = 2000
# keeps p strictly inside (0, 1)
P_CLIP = 1e-15


@dataclass(frozen=True)
class ContactState:
    p: float
    y: int

    @classmethod
    def from_probability(cls, p: float) -> "ContactState":
        return cls(float(p), 1 if p >= 0.5 else 0)

    @classmethod
    def unstable(cls) -> "ContactState":
        return cls(0.0, 0)


@dataclass(frozen=True, eq=False)
class LogisticModel:
    weights: np.ndarray
    bias: float
    mean: np.ndarray
    scale: np.ndarray
    version: str = FEATURE_SET_VERSION
    feature_names: Tuple[str, ...] = field(default=FEATURE_NAMES)

    def __post_init__(self):
        d = len(self.weights)
        if len(self.mean) != d or len(self.scale) != d:
            raise DimensionMismatch("weights, mean and scale must have the same length",
                                    expected=d, got=(len(self.mean), len(self.scale)))
        if np.any(np.asarray(self.scale) <= 0.0):
            raise ConfigError("standardization scales must be positive", field="scale")

    @property
    def d(self) -> int:
        return len(self.weights)

    def standardize(self, X: np.ndarray) -> np.ndarray:
        return (np.asarray(X, dtype=float) - self.mean) / self.scale

    def decision(self, X: np.ndarray) -> np.ndarray:
        return self.standardize(X) @ self.weights + self.bias

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.d:
            raise DimensionMismatch(f"features have {X.shape[1]} columns, model expects {self.d}",
                                    expected=self.d, got=int(X.shape[1]))
        return sigmoid(self.decision(X))


def sigmoid(z) -> np.ndarray:
    z = np.asarray(z, dtype=float)
    e = np.exp(-np.abs(z))
    p = np.where(z >= 0.0, 1.0 / (1.0 + e), e / (1.0 + e))
    return np.clip(p, P_CLIP, 1.0 - P_CLIP)


def predict(model: LogisticModel, x) -> ContactState:
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.shape[0] != model.d:
        raise DimensionMismatch(f"feature vector has {x.shape[0]} entries, model expects {model.d}",
                                expected=model.d, got=int(x.shape[0]))
    return ContactState.from_probability(float(model.predict_proba(x)[0]))


def cross_entropy(p: np.ndarray, y: np.ndarray) -> float:
    return float(-np.mean(y * np.log(p) + (1.0 - y) * np.log(1.0 - p)))


def fit_standardization(X: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    mean = X.mean(axis=0)
    std = X.std(axis=0)
    return mean, np.where(std > 0.0, std, 1.0)


def fit_logistic(X, y, l2: float = DEFAULT_L2, epochs: int = DEFAULT_EPOCHS, lr: float = DEFAULT_LR,
                 seed: int = 0, feature_names: Sequence[str] = FEATURE_NAMES) -> Tuple[LogisticModel, List[float]]:
    """Batch gradient descent on mean cross-entropy + l2/2 |w|^2; returns the model and the loss per epoch."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=float).reshape(-1)
    if X.shape[0] == 0:
        raise EmptyDataset("no samples to train on", runs=0)
    if X.shape[0] != y.shape[0]:
        raise DimensionMismatch("features and labels differ in length", expected=X.shape[0], got=y.shape[0])
    classes = sorted({int(v) for v in np.unique(y)})
    if len(classes) < 2:
        raise DegenerateDataset(f"training data has a single class {classes}", classes=classes)

    mean, scale = fit_standardization(X)
    Xs = (X - mean) / scale
    n, d = Xs.shape
    rng = np.random.default_rng(seed)
    w = 0.01 * rng.standard_normal(d)
    b = 0.0

    losses = []
    for _ in range(int(epochs)):
        p = sigmoid(Xs @ w + b)
        losses.append(cross_entropy(p, y) + 0.5 * l2 * float(w @ w))
        err = p - y
        w = w - lr * (Xs.T @ err / n + l2 * w)
        b = b - lr * float(np.mean(err))

    names = tuple(feature_names) if len(feature_names) == d else tuple(f"x{i}" for i in range(d))
    model = LogisticModel(weights=w, bias=float(b), mean=mean, scale=scale, feature_names=names)
    if losses:
        logger.info("trained logistic model on %d samples: loss %.4f -> %.4f", n, losses[0], losses[-1])
    return model, losses


def train(X, y, l2: float = DEFAULT_L2, epochs: int = DEFAULT_EPOCHS, lr: float = DEFAULT_LR,
          seed: int = 0) -> LogisticModel:
    model, _ = fit_logistic(X, y, l2=l2, epochs=epochs, lr=lr, seed=seed)
    return model


def save_model(path, model: LogisticModel, metrics: Optional[dict] = None):
    data = {
        'version': model.version,
        'd': model.d,
        'feature_names': list(model.feature_names),
        'weights': to_plain(model.weights),
        'bias': float(model.bias),
        'mean': to_plain(model.mean),
        'scale': to_plain(model.scale),
    }
    if metrics:
        data['metrics'] = to_plain(metrics)
    dump_yaml(path, data)


def load_model(path, expected_version: Optional[str] = FEATURE_SET_VERSION) -> LogisticModel:
    path = Path(path)
    data = load_yaml(path)
    version = str(require(data, 'version', path))
    if expected_version is not None and version != expected_version:
        raise ConfigError(f"model feature set '{version}' does not match '{expected_version}'",
                          path=str(path), field="version")
    d = int(require(data, 'd', path))
    names = tuple(data.get('feature_names') or (FEATURE_NAMES if d == len(FEATURE_NAMES) else ()))
    try:
        return LogisticModel(
            weights=as_vector(require(data, 'weights', path), d, 'weights', path),
            bias=float(require(data, 'bias', path)),
            mean=as_vector(require(data, 'mean', path), d, 'mean', path),
            scale=as_vector(require(data, 'scale', path), d, 'scale', path),
            version=version,
            feature_names=names,
        )
    except ConfigError as e:
        e.details['path'] = str(path)
        raise
