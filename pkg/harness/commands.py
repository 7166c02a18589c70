"""CLI commands. Each returns a process exit code and prints one verdict line per result."""

import logging
import os
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np

from harness.dataset import generate_dataset, load_scenario_set
from harness.summary import summarize
from harness.verify import REQUIRED_COLUMNS, verify_rows
from sim.runner import run
from sim.scenario import load_scenario
from stability.features import FEATURE_NAMES, FEATURE_SET_VERSION
from stability.logistic import DEFAULT_EPOCHS, DEFAULT_L2, DEFAULT_LR, fit_logistic, save_model
from utils.config import OUTPUT_DIR_ENV, dump_yaml, to_plain
from utils.error_handler import EXIT_FAILURE, EXIT_OK, DegenerateDataset, safe_execute
from utils.logger import log_run, read_dataset, read_run_log, write_dataset, write_tactile_log
from utils.metrics import classification_metrics, majority_rate

logger = logging.getLogger(__name__)

TRAIN_FRACTION = 0.8


def output_dir() -> Path:
    return Path(os.getenv(OUTPUT_DIR_ENV, "runs"))


def summary_path(out: Path) -> Path:
    return Path(f"{out}.summary.yaml")


def tactile_log_path(out: Path) -> Path:
    return Path(f"{out}.tactile.csv")


def _report_failure(result: dict) -> int:
    print(f"ERROR {result['error']} [{result['error_id']}]")
    for tip in result.get('suggestions', []):
        print(f"  - {tip}")
    return result['exit_code']


def _run_scenario(scenario_path, out_path: Optional[Path], seed: Optional[int], k_theta_factor: Optional[float],
                  tactile_log: bool = False):
    config = load_scenario(scenario_path).with_overrides(seed=seed, K_theta_factor=k_theta_factor)
    log = run(config, keep_frames=tactile_log)
    out = Path(out_path) if out_path else output_dir() / f"{config.name}.csv"
    log.save(out)
    if tactile_log:
        write_tactile_log(tactile_log_path(out), log.frames)
    summary = summarize(log.metadata, log.rows)
    dump_yaml(summary_path(out), to_plain(summary.to_dict()))
    return out, summary


def _run_safe(args):
    return safe_execute(_run_scenario, *args)


def cmd_run(scenario_paths: Sequence, out_path=None, seed: Optional[int] = None, jobs: int = 1,
            k_theta_factor: Optional[float] = None, tactile_log: bool = False) -> int:
    scenario_paths = [scenario_paths] if isinstance(scenario_paths, (str, Path)) else list(scenario_paths)
    if len(scenario_paths) > 1:
        # several scenarios: --out names a directory
        base = Path(out_path) if out_path else output_dir()
        outs: List[Optional[Path]] = [base / f"{Path(p).stem}.csv" for p in scenario_paths]
    else:
        outs = [Path(out_path) if out_path else None]
    args = [(p, o, seed, k_theta_factor, tactile_log) for p, o in zip(scenario_paths, outs)]
    if jobs > 1 and len(args) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_safe, args))
    else:
        results = [_run_safe(a) for a in args]

    code = EXIT_OK
    for path, result in zip(scenario_paths, results):
        if not result['success']:
            print(f"FAIL {path}")
            code = max(code, _report_failure(result))
            continue
        out, s = result['result']
        print(f"OK {s.scenario}: {s.ticks} ticks, outcome={s.outcome}, final theta={s.final_theta:.4f} rad, "
              f"contact losses={s.contact_loss_count}, slips={s.slip_count} -> {out}")
    return code


def _gen_dataset(set_path, out_path, seed: int, jobs: int):
    scenario_set = load_scenario_set(set_path, seed)
    generated = generate_dataset(scenario_set, jobs)
    df = generated.samples
    out = Path(out_path) if out_path else output_dir() / f"{scenario_set.name}_dataset.csv"
    write_dataset(out, df[list(FEATURE_NAMES)].to_numpy(), df['label'].to_numpy(), FEATURE_NAMES,
                  extra={'run': df['run'].to_numpy(), 'tick': df['tick'].to_numpy()})
    index_path = Path(f"{out}.runs.csv")
    if index_path.exists():
        index_path.unlink()
    errors = {s.spec.index: s.error_id for s in generated.skipped}
    for spec in scenario_set.runs:
        part = df[df['run'] == spec.index]
        log_run(str(index_path), {'run': spec.index, 'scenario': spec.scenario.stem, 'seed': spec.seed,
                                  'mu': spec.overrides.get('mu'), 'approach_time': spec.overrides.get('approach_time'),
                                  'K_theta_factor': spec.overrides.get('K_theta_factor'),
                                  'windows': len(part), 'stable': int(part['label'].sum()),
                                  'error_id': errors.get(spec.index, '')})
    return out, generated


def cmd_gen_dataset(set_path, out_path=None, seed: int = 0, jobs: int = 1) -> int:
    result = safe_execute(_gen_dataset, set_path, out_path, seed, jobs)
    if not result['success']:
        return _report_failure(result)
    out, generated = result['result']
    df = generated.samples
    for s in generated.skipped:
        print(f"SKIP run {s.spec.index} ({s.spec.scenario.stem} {s.spec.overrides}): {s.message} [{s.error_id}]")
    positive = float(df['label'].mean())
    print(f"OK dataset: {len(df)} windows from {df['run'].nunique()} runs ({len(generated.skipped)} skipped), "
          f"{positive:.1%} stable / {1 - positive:.1%} unstable -> {out}")
    return EXIT_OK


def split_indices(n: int, seed: int, train_fraction: float = TRAIN_FRACTION):
    order = np.random.default_rng(seed).permutation(n)
    cut = int(round(train_fraction * n))
    return order[:cut], order[cut:]


def _train_eval(dataset_path, model_path, split_seed: int, shuffle_labels: bool,
                l2: float, epochs: int, lr: float):
    X, y, names = read_dataset(dataset_path, list(FEATURE_NAMES))
    if shuffle_labels:
        y = np.random.default_rng(split_seed + 1).permutation(y)
    train_idx, test_idx = split_indices(len(y), split_seed)
    if len(np.unique(y[train_idx])) < 2:
        raise DegenerateDataset("training split has a single class", classes=np.unique(y[train_idx]).tolist())
    model, losses = fit_logistic(X[train_idx], y[train_idx], l2=l2, epochs=epochs, lr=lr, seed=split_seed,
                                 feature_names=names)
    metrics = classification_metrics(y[test_idx], (model.predict_proba(X[test_idx]) >= 0.5).astype(int))
    metrics.update({
        'train_size': int(len(train_idx)),
        'test_size': int(len(test_idx)),
        'majority_rate': majority_rate(y[test_idx]),
        'final_loss': float(losses[-1]) if losses else float('nan'),
        'shuffled_labels': bool(shuffle_labels),
        'feature_set': FEATURE_SET_VERSION,
    })
    out = Path(model_path) if model_path else output_dir() / "stability_model.yaml"
    save_model(out, model, metrics)
    return out, metrics


def cmd_train_eval(dataset_path, model_path=None, split_seed: int = 0, shuffle_labels: bool = False,
                   l2: float = DEFAULT_L2, epochs: int = DEFAULT_EPOCHS, lr: float = DEFAULT_LR) -> int:
    result = safe_execute(_train_eval, dataset_path, model_path, split_seed, shuffle_labels, l2, epochs, lr)
    if not result['success']:
        return _report_failure(result)
    out, m = result['result']
    print(f"OK held-out accuracy={m['accuracy']:.4f} precision={m['precision']:.4f} recall={m['recall']:.4f} "
          f"(majority {m['majority_rate']:.4f}, n={m['test_size']}) -> {out}")
    return EXIT_OK


def _verify(runlog_path):
    metadata, rows = read_run_log(runlog_path, REQUIRED_COLUMNS)
    return verify_rows(metadata, rows)


def cmd_verify(runlog_path) -> int:
    result = safe_execute(_verify, runlog_path)
    if not result['success']:
        return _report_failure(result)
    report = result['result']
    for check in report.checks:
        print(f"{'PASS' if check.passed else 'FAIL'} {check.name}: {check.detail}")
    s = report.summary
    print(f"outcome={s.outcome} final_theta={s.final_theta:.4f} stable_intervals={len(s.intervals)} "
          f"contact_losses={s.contact_loss_count} recovered={s.recovered_after_loss} "
          f"torque_margin={s.torque_margin:.4f} N*m")
    print("VERIFIED" if report.passed else "VERIFY FAILED")
    return EXIT_OK if report.passed else EXIT_FAILURE
