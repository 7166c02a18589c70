import numpy as np
from typing import Dict

def confusion_counts(y_true: np.ndarray, y_pred: np.ndarray) -> Dict[str, int]:
    y_true = np.asarray(y_true).astype(int)
    y_pred = np.asarray(y_pred).astype(int)
    return {
        'tp': int(np.sum((y_true == 1) & (y_pred == 1))),
        'fp': int(np.sum((y_true == 0) & (y_pred == 1))),
        'tn': int(np.sum((y_true == 0) & (y_pred == 0))),
        'fn': int(np.sum((y_true == 1) & (y_pred == 0))),
    }

def classification_metrics(y_true, y_pred) -> Dict[str, float]:
    c = confusion_counts(y_true, y_pred)
    n = sum(c.values())
    accuracy = (c['tp'] + c['tn']) / n if n else 0.0
    precision = c['tp'] / (c['tp'] + c['fp']) if (c['tp'] + c['fp']) else 0.0
    recall = c['tp'] / (c['tp'] + c['fn']) if (c['tp'] + c['fn']) else 0.0
    f1 = 2 * precision * recall / (precision + recall) if (precision + recall) else 0.0
    out = {'accuracy': float(accuracy), 'precision': float(precision), 'recall': float(recall), 'f1': float(f1)}
    out.update(c)
    return out

def majority_rate(labels) -> float:
    labels = np.asarray(labels).astype(int)
    if labels.size == 0:
        return 0.0
    pos = float(labels.mean())
    return max(pos, 1.0 - pos)

def decay_rate(t, theta, floor: float = 1e-6) -> float:
    """Rate lambda of theta ~ theta_0 exp(-lambda t), least squares on log(theta); nan below 2 points."""
    t = np.asarray(t, dtype=float)
    theta = np.asarray(theta, dtype=float)
    ok = np.isfinite(theta) & np.isfinite(t)
    if np.count_nonzero(ok) < 2:
        return float('nan')
    t = t[ok]
    log_theta = np.log(np.maximum(theta[ok], floor))
    dt = t - t.mean()
    denom = float(dt @ dt)
    if denom == 0.0:
        return float('nan')
    # Negative slope means decay
    return float(-(dt @ (log_theta - log_theta.mean())) / denom)
