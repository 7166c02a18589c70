"""Summary of a RunLog: stable intervals, decay, contact loss, slip and classifier agreement."""

from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional

import numpy as np
import pandas as pd

from utils.metrics import confusion_counts, decay_rate

CONVERGED_THETA = 0.05
STALL_WINDOW = 0.5      # s of stable contact at the end of the run
STALL_CHANGE = 0.01     # rad


@dataclass
class StableInterval:
    start_tick: int
    end_tick: int           # inclusive
    t_start: float
    t_end: float
    theta_start: float
    theta_end: float
    decay_rate: float
    contact_maintained: bool


@dataclass
class Summary:
    scenario: str
    ticks: int
    intervals: List[StableInterval] = field(default_factory=list)
    final_theta: float = float('nan')
    contact_loss_count: int = 0
    recovered_after_loss: int = 0
    slip_count: int = 0
    confusion: Dict[str, int] = field(default_factory=dict)
    outcome: str = "no-stable-contact"
    torque_margin: float = float('nan')
    contact_drift: float = float('nan')

    def to_dict(self) -> dict:
        return asdict(self)


def runs_of(mask) -> List[tuple]:
    """(start, end) index pairs, end inclusive, of maximal runs of True."""
    mask = np.asarray(mask, dtype=bool)
    if mask.size == 0:
        return []
    padded = np.concatenate([[False], mask, [False]]).astype(int)
    edges = np.diff(padded)
    starts = np.flatnonzero(edges == 1)
    ends = np.flatnonzero(edges == -1) - 1
    return list(zip(starts.tolist(), ends.tolist()))


def _first_last_finite(values: np.ndarray):
    finite = np.flatnonzero(np.isfinite(values))
    if finite.size == 0:
        return float('nan'), float('nan')
    return float(values[finite[0]]), float(values[finite[-1]])


def stable_intervals(rows: pd.DataFrame) -> List[StableInterval]:
    y = rows['y'].to_numpy(dtype=int)
    theta = rows['theta'].to_numpy(dtype=float)
    t = rows['time'].to_numpy(dtype=float)
    contact = rows['gt_contact'].to_numpy(dtype=int)
    out = []
    for s, e in runs_of(y == 1):
        th0, th1 = _first_last_finite(theta[s:e + 1])
        out.append(StableInterval(
            start_tick=int(rows['tick'].iat[s]), end_tick=int(rows['tick'].iat[e]),
            t_start=float(t[s]), t_end=float(t[e]),
            theta_start=th0, theta_end=th1,
            decay_rate=decay_rate(t[s:e + 1], theta[s:e + 1]),
            contact_maintained=bool(np.all(contact[s:e + 1] == 1)),
        ))
    return out


def contact_loss_episodes(rows: pd.DataFrame) -> List[int]:
    """Row indices where ground-truth contact is lost after having been made."""
    contact = rows['gt_contact'].to_numpy(dtype=int)
    return (np.flatnonzero((contact[:-1] == 1) & (contact[1:] == 0)) + 1).tolist()


def _recovered(rows: pd.DataFrame, losses: List[int], intervals: List[StableInterval]) -> int:
    """Losses followed by a stable interval in which theta decreases."""
    ticks = rows['tick'].to_numpy(dtype=int)
    count = 0
    for idx in losses:
        after = [iv for iv in intervals if iv.start_tick > ticks[idx]]
        if after and np.isfinite(after[0].theta_start) and after[0].theta_end < after[0].theta_start:
            count += 1
    return count


def _outcome(rows: pd.DataFrame, final_theta: float, control_rate: float) -> str:
    stable = rows[rows['y'] == 1]
    if stable.empty:
        return "no-stable-contact"
    if np.isfinite(final_theta) and final_theta <= CONVERGED_THETA:
        return "converged"
    tail = stable.tail(max(2, int(round(STALL_WINDOW * control_rate))))
    th0, th1 = _first_last_finite(tail['theta'].to_numpy(dtype=float))
    if np.isfinite(th0) and abs(th1 - th0) < STALL_CHANGE:
        return "stalled"
    return "in-progress"


def _torque_margin(rows: pd.DataFrame, limits: Optional[List[float]]) -> float:
    if not limits or rows.empty:
        return float('nan')
    cols = [f"tau_applied_{i}" for i in range(len(limits))]
    if any(c not in rows.columns for c in cols):
        return float('nan')
    margin = np.asarray(limits, dtype=float) - np.abs(rows[cols].to_numpy(dtype=float))
    return float(margin.min())


def _contact_drift(rows: pd.DataFrame) -> float:
    """Largest ground-truth contact-point excursion in {E} over a stable, slip-free interval (m)."""
    cols = ['gt_cE_x', 'gt_cE_y', 'gt_cE_z']
    if any(c not in rows.columns for c in cols):
        return float('nan')
    held = (rows['y'] == 1) & (rows['gt_contact'] == 1) & (rows['gt_slip'] == 0)
    worst = float('nan')
    for s, e in runs_of(held.to_numpy()):
        pts = rows[cols].to_numpy(dtype=float)[s:e + 1]
        drift = float(np.max(np.linalg.norm(pts - pts[0], axis=1)))
        worst = drift if not np.isfinite(worst) else max(worst, drift)
    return worst


def summarize(metadata: dict, rows: pd.DataFrame) -> Summary:
    summary = Summary(scenario=str(metadata.get('scenario', '')), ticks=len(rows))
    if rows.empty:
        return summary
    summary.intervals = stable_intervals(rows)
    _, summary.final_theta = _first_last_finite(rows['theta'].to_numpy(dtype=float))
    losses = contact_loss_episodes(rows)
    summary.contact_loss_count = len(losses)
    summary.recovered_after_loss = _recovered(rows, losses, summary.intervals)
    slip = rows['gt_slip'].to_numpy(dtype=int)
    summary.slip_count = len(runs_of(slip == 1))
    truth = (rows['gt_contact'] == 1) & (rows['gt_slip'] == 0)
    summary.confusion = confusion_counts(truth.to_numpy(dtype=int), rows['y'].to_numpy(dtype=int))
    summary.outcome = _outcome(rows, summary.final_theta, float(metadata.get('control_rate', 150)))
    summary.torque_margin = _torque_margin(rows, metadata.get('torque_limits'))
    summary.contact_drift = _contact_drift(rows)
    return summary
