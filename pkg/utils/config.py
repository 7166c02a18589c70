import os
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np
import yaml
from dotenv import load_dotenv

from utils.error_handler import ConfigError

CONFIG_PATH_ENV = "FINGERFORCE_CONFIG_PATH"
LOG_LEVEL_ENV = "FINGERFORCE_LOG_LEVEL"
OUTPUT_DIR_ENV = "FINGERFORCE_OUTPUT_DIR"


def load_env():
    load_dotenv()


def search_path() -> List[Path]:
    raw = os.getenv(CONFIG_PATH_ENV, "")
    return [Path(p) for p in raw.split(os.pathsep) if p]


def resolve_path(name: str, base_dir: Optional[Path] = None, field: str = None) -> Path:
    """Find a file referenced from a config: absolute, then next to the referencing file, then the search path."""
    candidate = Path(name)
    if candidate.is_absolute():
        if candidate.exists():
            return candidate
        raise ConfigError(f"file not found: {candidate}", path=str(candidate), field=field)
    dirs = ([base_dir] if base_dir is not None else []) + search_path() + [Path.cwd()]
    for d in dirs:
        p = Path(d) / candidate
        if p.exists():
            return p
    raise ConfigError(f"file not found: {name}", path=str(name), field=field)


def load_yaml(path) -> Dict[str, Any]:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"file not found: {path}", path=str(path))
    try:
        with open(path, 'r', encoding='utf-8') as f:
            data = yaml.safe_load(f)
    except yaml.MarkedYAMLError as e:
        line = e.problem_mark.line + 1 if e.problem_mark is not None else None
        raise ConfigError(str(e.problem or e), path=str(path), line=line) from e
    except yaml.YAMLError as e:
        raise ConfigError(str(e), path=str(path)) from e
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError("top level must be a mapping", path=str(path))
    return data


def require(data: Dict[str, Any], key: str, path=None):
    if key not in data or data[key] is None:
        raise ConfigError(f"missing required field '{key}'", path=str(path) if path else None, field=key)
    return data[key]


def as_vector(value, length: int, field: str, path=None) -> np.ndarray:
    try:
        arr = np.asarray(value, dtype=float).reshape(-1)
    except (TypeError, ValueError) as e:
        raise ConfigError(f"'{field}' must be numeric", path=str(path) if path else None, field=field) from e
    if arr.shape[0] != length:
        raise ConfigError(f"'{field}' must have {length} entries, got {arr.shape[0]}",
                          path=str(path) if path else None, field=field)
    if not np.all(np.isfinite(arr)):
        raise ConfigError(f"'{field}' must be finite", path=str(path) if path else None, field=field)
    return arr


def gain_vector(value, length: int, field: str, path=None) -> np.ndarray:
    """Scalar or per-axis diagonal gain."""
    if isinstance(value, (int, float)):
        return np.full(length, float(value))
    return as_vector(value, length, field, path)


def dump_yaml(path, data: Dict[str, Any]):
    path = Path(path)
    if path.parent and not path.parent.exists():
        path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', encoding='utf-8') as f:
        yaml.safe_dump(data, f, sort_keys=False, default_flow_style=None)


def to_plain(value):
    """numpy values → YAML-safe python values."""
    if isinstance(value, np.ndarray):
        return [to_plain(v) for v in value.tolist()]
    if isinstance(value, (np.floating,)):
        return float(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (list, tuple)):
        return [to_plain(v) for v in value]
    if isinstance(value, dict):
        return {k: to_plain(v) for k, v in value.items()}
    if isinstance(value, Path):
        return str(value)
    return value
