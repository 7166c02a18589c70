"""Windowed stable / unstable dataset from simulated runs.

Scenario-set schema (YAML)::

    name: default_mixed
    window: 15          # frames per window
    stride: 2           # ticks between window ends
    duration: 4.0       # s, overrides every run
    runs:
      - {scenario: ../scenarios/plane_reference.yaml, mu: 0.1, approach_time: 1.0}

Every run is driven by ground-truth stability, so labels never depend on a trained model.
A window qualifies when at least one of its frames shows active contact; it is labeled
stable (1) when the finger kept contact without slipping on every tick of the window.
A run that diverges is logged through the error handler and skipped; the rest of the set
still contributes.
"""

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Union

import numpy as np
import pandas as pd

from sim.runner import run
from sim.scenario import load_scenario
from stability.features import FEATURE_NAMES, extract_features
from utils.config import load_yaml, require, resolve_path
from utils.error_handler import ConfigError, EmptyDataset, NumericalBlowup, error_handler

logger = logging.getLogger(__name__)

DEFAULT_STRIDE = 2
RUN_OVERRIDES = ('mu', 'approach_time', 'K_theta_factor')


@dataclass(frozen=True)
class RunSpec:
    scenario: Path
    overrides: Dict[str, float]
    seed: int
    index: int


@dataclass(frozen=True)
class ScenarioSet:
    name: str
    runs: List[RunSpec]
    window: int
    stride: int
    duration: Optional[float]


@dataclass(frozen=True)
class SkippedRun:
    spec: RunSpec
    error_id: str
    message: str
    tick: Optional[int]


@dataclass
class GeneratedDataset:
    samples: pd.DataFrame
    skipped: List[SkippedRun]


def load_scenario_set(path, seed: int = 0) -> ScenarioSet:
    path = Path(path)
    data = load_yaml(path)
    entries = require(data, 'runs', path)
    if not isinstance(entries, list) or not entries:
        raise ConfigError("'runs' must be a non-empty list", path=str(path), field="runs")
    runs = []
    for i, entry in enumerate(entries):
        scenario = resolve_path(str(require(entry, 'scenario', path)), path.parent, field=f"runs[{i}].scenario")
        overrides = {k: float(entry[k]) for k in RUN_OVERRIDES if entry.get(k) is not None}
        runs.append(RunSpec(scenario, overrides, int(seed) + i, i))
    duration = data.get('duration')
    return ScenarioSet(
        name=str(data.get('name', path.stem)),
        runs=runs,
        window=int(data.get('window', 15)),
        stride=max(1, int(data.get('stride', DEFAULT_STRIDE))),
        duration=float(duration) if duration is not None else None,
    )


def window_samples(rows: pd.DataFrame, frames, layout, window: int, stride: int, threshold: float):
    """Features and labels of every qualifying window of one run."""
    active = rows['active'].to_numpy(dtype=int)
    held = (rows['gt_contact'].to_numpy(dtype=int) == 1) & (rows['gt_slip'].to_numpy(dtype=int) == 0)
    features, labels, ends = [], [], []
    for end in range(window - 1, len(rows), stride):
        start = end - window + 1
        if not active[start:end + 1].any():
            continue
        features.append(extract_features(frames[start:end + 1], layout, window, threshold))
        labels.append(int(held[start:end + 1].all()))
        ends.append(end)
    return features, labels, ends


def _run_one(spec: RunSpec, window: int, stride: int, duration: Optional[float]) -> Union[pd.DataFrame, SkippedRun]:
    config = load_scenario(spec.scenario).with_overrides(
        seed=spec.seed, source='oracle', duration=duration,
        mu=spec.overrides.get('mu'), approach_time=spec.overrides.get('approach_time'),
        K_theta_factor=spec.overrides.get('K_theta_factor'),
    )
    try:
        log = run(config, keep_frames=True)
    except NumericalBlowup as e:
        error_id = error_handler.log_error(e, {'run': spec.index, 'scenario': config.name, 'seed': spec.seed,
                                               **spec.overrides})
        return SkippedRun(spec, error_id, error_handler.get_user_friendly_message(e), e.details.get('tick'))
    features, labels, ends = window_samples(log.rows, log.frames, config.layout, window, stride,
                                            config.sensor.threshold)
    df = pd.DataFrame(np.array(features).reshape(-1, len(FEATURE_NAMES)), columns=list(FEATURE_NAMES))
    df['label'] = np.asarray(labels, dtype=int)
    df['run'] = spec.index
    df['tick'] = np.asarray(ends, dtype=int)
    logger.info("run %d (%s %s): %d windows, %d stable", spec.index, config.name, spec.overrides,
                len(df), int(df['label'].sum()))
    return df


def generate_dataset(scenario_set: ScenarioSet, jobs: int = 1) -> GeneratedDataset:
    args = [(spec, scenario_set.window, scenario_set.stride, scenario_set.duration) for spec in scenario_set.runs]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            parts = list(pool.map(_run_one, *zip(*args)))
    else:
        parts = [_run_one(*a) for a in args]
    skipped = [p for p in parts if isinstance(p, SkippedRun)]
    samples = [p for p in parts if not isinstance(p, SkippedRun)]
    if skipped:
        logger.warning("scenario set '%s': skipped %d of %d runs that diverged", scenario_set.name,
                       len(skipped), len(parts))
    df = pd.concat(samples, ignore_index=True) if samples else pd.DataFrame()
    if df.empty:
        raise EmptyDataset(f"no window of scenario set '{scenario_set.name}' showed contact "
                           f"({len(skipped)} of {len(parts)} runs diverged)", runs=len(scenario_set.runs))
    return GeneratedDataset(df, skipped)
