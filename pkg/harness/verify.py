"""Invariant checks on a RunLog."""

from dataclasses import dataclass
from typing import Dict, List

import numpy as np
import pandas as pd

from harness.summary import Summary, stable_intervals, summarize

DECAY_TOL = 0.02       # rad, allowed rise of theta over a stable interval
CONE_TOL = 1e-9        # N
RATE_TOL = 1e-12       # s

REQUIRED_COLUMNS = ('tick', 'time', 'theta', 'y', 'gt_contact', 'gt_slip',
                    'F_ext_x', 'F_ext_y', 'F_ext_z', 'F_n', 'F_t')


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str


@dataclass
class VerifyReport:
    checks: List[CheckResult]
    summary: Summary

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)


def _joint_columns(rows: pd.DataFrame, group: str) -> List[str]:
    cols = [c for c in rows.columns if c.startswith(f"{group}_") and c[len(group) + 1:].isdigit()]
    return sorted(cols, key=lambda c: int(c.rsplit('_', 1)[1]))


def check_theta_decay(rows: pd.DataFrame) -> CheckResult:
    bad = []
    checked = 0
    for iv in stable_intervals(rows):
        if not iv.contact_maintained or not np.isfinite(iv.theta_start):
            continue
        checked += 1
        if iv.theta_end > iv.theta_start + DECAY_TOL:
            bad.append(f"ticks {iv.start_tick}-{iv.end_tick}: {iv.theta_start:.3f} -> {iv.theta_end:.3f}")
    if bad:
        return CheckResult('theta_decay', False, "; ".join(bad))
    return CheckResult('theta_decay', True, f"{checked} stable interval(s) non-increasing within {DECAY_TOL} rad")


def check_friction_cone(rows: pd.DataFrame, mu) -> CheckResult:
    try:
        mu = float(mu)
    except (TypeError, ValueError):
        mu = float('nan')
    if not np.isfinite(mu):
        return CheckResult('friction_cone', True, "no surface, nothing to check")
    excess = rows['F_t'].to_numpy(dtype=float) - mu * rows['F_n'].to_numpy(dtype=float)
    worst = int(np.argmax(excess)) if len(excess) else -1
    if len(excess) and excess[worst] > CONE_TOL:
        return CheckResult('friction_cone', False,
                           f"tick {int(rows['tick'].iat[worst])}: F_t exceeds mu F_n by {excess[worst]:.3g} N")
    return CheckResult('friction_cone', True, f"F_t <= {mu:g} F_n on all {len(rows)} ticks")


def check_fext_off_contact(rows: pd.DataFrame) -> CheckResult:
    off = rows[rows['gt_contact'] == 0]
    nonzero = off[(off[['F_ext_x', 'F_ext_y', 'F_ext_z']] != 0.0).any(axis=1)]
    if not nonzero.empty:
        return CheckResult('fext_zero_off_contact', False,
                           f"{len(nonzero)} tick(s) without contact carry a force, first at tick {int(nonzero['tick'].iat[0])}")
    return CheckResult('fext_zero_off_contact', True, f"F_ext = 0 on all {len(off)} ticks without contact")


def check_tau_decomposition(rows: pd.DataFrame) -> CheckResult:
    motion, task, cmd = (_joint_columns(rows, g) for g in ('tau_motion', 'tau_task', 'tau_cmd'))
    if not cmd or len(motion) != len(cmd) or len(task) != len(cmd):
        return CheckResult('tau_decomposition', False, "torque columns missing")
    total = rows[motion].to_numpy(dtype=float) + rows[task].to_numpy(dtype=float)
    mismatch = np.flatnonzero(np.any(rows[cmd].to_numpy(dtype=float) != total, axis=1))
    gated = (rows['y'].to_numpy() == 0) & np.any(rows[task].to_numpy(dtype=float) != 0.0, axis=1)
    if mismatch.size:
        return CheckResult('tau_decomposition', False,
                           f"tau_cmd != tau_motion + tau_task on {mismatch.size} tick(s), first at tick {int(rows['tick'].iat[mismatch[0]])}")
    if np.any(gated):
        return CheckResult('tau_decomposition', False, f"task torque active with y = 0 on {int(gated.sum())} tick(s)")
    return CheckResult('tau_decomposition', True, "tau_cmd = tau_motion + tau_task on every tick")


def check_rate(rows: pd.DataFrame, control_rate) -> CheckResult:
    if rows.empty:
        return CheckResult('tick_rate', True, "empty log")
    rate = float(control_rate)
    ticks = rows['tick'].to_numpy(dtype=int)
    if not np.array_equal(ticks, np.arange(ticks[0], ticks[0] + len(ticks))):
        return CheckResult('tick_rate', False, "ticks are not consecutive")
    err = np.abs(rows['time'].to_numpy(dtype=float) - ticks / rate)
    if np.max(err) > RATE_TOL:
        return CheckResult('tick_rate', False, f"tick times deviate from 1/{rate:g} s spacing by {np.max(err):.3g} s")
    return CheckResult('tick_rate', True, f"ticks spaced 1/{rate:g} s")


def verify_rows(metadata: Dict, rows: pd.DataFrame) -> VerifyReport:
    checks = [
        check_theta_decay(rows),
        check_friction_cone(rows, metadata.get('mu')),
        check_fext_off_contact(rows),
        check_tau_decomposition(rows),
        check_rate(rows, metadata.get('control_rate', 150)),
    ]
    return VerifyReport(checks, summarize(metadata, rows))
