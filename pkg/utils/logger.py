import os
import csv
import logging
from typing import Dict, Iterable, List, Tuple

import numpy as np
import pandas as pd
import yaml

from utils.error_handler import MalformedLog

LOG_FORMAT = "%(asctime)s %(levelname)-7s %(name)s: %(message)s"


def setup_logging(level: str = "INFO"):
    logging.basicConfig(level=getattr(logging, str(level).upper(), logging.INFO), format=LOG_FORMAT, force=True)


def _ensure_dir(path: str):
    directory = os.path.dirname(os.fspath(path))
    if directory:
        os.makedirs(directory, exist_ok=True)


def _metadata_lines(metadata: Dict) -> List[str]:
    lines = []
    for key, value in metadata.items():
        dumped = yaml.safe_dump({key: value}, default_flow_style=True, width=10_000).strip()
        lines.append(f"# {dumped[1:-1].strip()}\n")
    return lines


def write_run_log(file_path, metadata: Dict, rows: pd.DataFrame):
    """RunLog CSV: `# key: value` metadata lines, then one row per control tick."""
    _ensure_dir(file_path)
    with open(file_path, 'w', newline='', encoding='utf-8') as f:
        f.writelines(_metadata_lines(metadata))
        rows.to_csv(f, index=False, na_rep='nan', lineterminator='\n')


def read_run_log(file_path, required: Iterable[str] = ()) -> Tuple[Dict, pd.DataFrame]:
    if not os.path.exists(file_path):
        raise MalformedLog(f"run log not found: {file_path}", path=str(file_path))
    header = []
    with open(file_path, 'r', encoding='utf-8') as f:
        for line in f:
            if not line.startswith('#'):
                break
            header.append(line[1:].strip())
    try:
        metadata = yaml.safe_load("\n".join(header)) or {}
        rows = pd.read_csv(file_path, skiprows=len(header), na_values=['nan'], float_precision='round_trip')
    except (yaml.YAMLError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise MalformedLog(f"cannot parse run log: {e}", path=str(file_path)) from e
    if not isinstance(metadata, dict):
        raise MalformedLog("metadata header is not a mapping", path=str(file_path))
    missing = [c for c in required if c not in rows.columns]
    if missing:
        raise MalformedLog("run log lacks required columns", path=str(file_path), missing=missing)
    return metadata, rows


def write_tactile_log(file_path, frames) -> int:
    """Tactile log CSV: timestamp + x, y, z reading for every taxel."""
    frames = list(frames)
    n_tx = frames[0].readings.shape[0] if frames else 0
    columns = ['timestamp'] + [f"t{k}_{axis}" for k in range(n_tx) for axis in 'xyz']
    data = [[fr.timestamp] + np.asarray(fr.readings, dtype=float).reshape(-1).tolist() for fr in frames]
    _ensure_dir(file_path)
    pd.DataFrame(data, columns=columns).to_csv(file_path, index=False, lineterminator='\n')
    return len(frames)


def read_tactile_log(file_path):
    from tactile.estimator import TactileFrame

    df = pd.read_csv(file_path)
    if 'timestamp' not in df.columns or (len(df.columns) - 1) % 3:
        raise MalformedLog("tactile log needs a timestamp and 3 columns per taxel", path=str(file_path))
    readings = df.drop(columns=['timestamp']).to_numpy(dtype=float).reshape(len(df), -1, 3)
    return [TactileFrame(float(t), r) for t, r in zip(df['timestamp'], readings)]


def write_dataset(file_path, features: np.ndarray, labels: np.ndarray, feature_names, extra: Dict = None):
    df = pd.DataFrame(np.asarray(features, dtype=float), columns=list(feature_names))
    df['label'] = np.asarray(labels, dtype=int)
    for key, values in (extra or {}).items():
        df[key] = values
    _ensure_dir(file_path)
    df.to_csv(file_path, index=False, lineterminator='\n')
    return df


def read_dataset(file_path, feature_names=None) -> Tuple[np.ndarray, np.ndarray, List[str]]:
    df = pd.read_csv(file_path)
    if 'label' not in df.columns:
        raise MalformedLog("dataset has no 'label' column", path=str(file_path), missing=['label'])
    if feature_names is None:
        feature_names = [c for c in df.columns if c not in ('label', 'run', 'tick')]
    missing = [c for c in feature_names if c not in df.columns]
    if missing:
        raise MalformedLog("dataset lacks feature columns", path=str(file_path), missing=missing)
    return df[list(feature_names)].to_numpy(dtype=float), df['label'].to_numpy(dtype=int), list(feature_names)


def log_run(file_path: str, record: dict):
    """Append one run's summary row to a sweep index CSV."""
    _ensure_dir(file_path)
    exists = os.path.exists(file_path)
    with open(file_path, 'a', newline='', encoding='utf-8') as f:
        writer = csv.DictWriter(f, fieldnames=list(record.keys()))
        if not exists:
            writer.writeheader()
        writer.writerow(record)
    logging.getLogger(__name__).debug("RUN_LOGGED %s", record.get('scenario', ''))
