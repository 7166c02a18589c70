"""Scenario files: everything one closed-loop run needs.

Schema (YAML; relative paths resolve against the scenario's directory, then
FINGERFORCE_CONFIG_PATH, then the working directory)::

    name: plane_reference
    chain: ../chains/allegro_index.yaml
    layout: ../layouts/fingertip_30.yaml
    duration: 4.0                # s
    physics_rate: 1500           # Hz
    control_rate: 150            # Hz, must divide physics_rate
    qdot_bound: 100.0            # rad/s, NumericalBlowup above this
    coriolis: true
    q_start: [0.0, 0.1, 0.1, 0.1]      # rad
    q_close: [0.0, 0.45, 0.45, 0.45]   # rad
    approach_time: 1.5           # s for q_ref to travel q_start -> q_close
    surface: {shape: plane, point: [...], normal: [...], k_c: 400, b_c: 2, mu: 0.8, k_t: 5, k_stick: 400}
    gains: {K_p: 100, K_d: 15, K_theta: 0.15, K_s: 0.01, f_d: [0.9, 0.0, -0.44]}
    sensor: {spread: 0.004, noise: 0.001, gain: 25.0, threshold: 0.02}
    stability: {source: classifier, model: ../models/bootstrap.yaml, window: 15}
    seed: 7
"""

import copy
import hashlib
import logging
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional

import numpy as np
import yaml

from controller.gains import ControllerGains
from dynamics.chain import JointChain
from dynamics.loader import load_chain
from sim.surfaces import RigidSurface, make_surface
from sim.world import DEFAULT_QDOT_BOUND
from stability.features import DEFAULT_WINDOW
from tactile.estimator import DEFAULT_ACTIVATION_THRESHOLD
from tactile.layout import TaxelLayout, load_layout
from tactile.sensor import DEFAULT_SPREAD
from utils.config import as_vector, load_yaml, require, resolve_path, to_plain
from utils.error_handler import ConfigError

logger = logging.getLogger(__name__)

STABILITY_SOURCES = ('classifier', 'oracle')
DEFAULT_PHYSICS_RATE = 1500
DEFAULT_CONTROL_RATE = 150


@dataclass(frozen=True)
class SensorConfig:
    spread: float = DEFAULT_SPREAD
    noise: float = 0.0
    gain: float = 1.0
    threshold: float = DEFAULT_ACTIVATION_THRESHOLD


@dataclass(frozen=True)
class StabilityConfig:
    source: str = 'classifier'
    model: Optional[Path] = None
    window: int = DEFAULT_WINDOW


@dataclass(frozen=True, eq=False)
class ScenarioConfig:
    name: str
    chain: JointChain
    layout: TaxelLayout
    surface: Optional[RigidSurface]
    gains: ControllerGains
    q_start: np.ndarray
    q_close: np.ndarray
    approach_time: float
    duration: float
    physics_rate: int
    control_rate: int
    sensor: SensorConfig
    stability: StabilityConfig
    seed: int = 0
    qdot_bound: float = DEFAULT_QDOT_BOUND
    coriolis: bool = True
    config_hash: str = ""
    path: Optional[Path] = None

    @property
    def substeps(self) -> int:
        return self.physics_rate // self.control_rate

    @property
    def physics_dt(self) -> float:
        return 1.0 / self.physics_rate

    @property
    def n_ticks(self) -> int:
        return int(round(self.duration * self.control_rate))

    @property
    def mu(self) -> Optional[float]:
        return self.surface.params.mu if self.surface is not None else None

    def with_overrides(self, seed: Optional[int] = None, mu: Optional[float] = None,
                       approach_time: Optional[float] = None, duration: Optional[float] = None,
                       K_theta_factor: Optional[float] = None, source: Optional[str] = None) -> "ScenarioConfig":
        """Copy with selected fields replaced; the config hash covers the overrides."""
        overrides = {k: v for k, v in dict(seed=seed, mu=mu, approach_time=approach_time, duration=duration,
                                            K_theta_factor=K_theta_factor, source=source).items() if v is not None}
        if not overrides:
            return self
        cfg = self
        if seed is not None:
            cfg = replace(cfg, seed=int(seed))
        if mu is not None:
            if cfg.surface is None:
                raise ConfigError("cannot override mu on a scenario without a surface", field="surface.mu")
            surface = copy.copy(cfg.surface)
            surface.params = replace(surface.params, mu=float(mu))
            cfg = replace(cfg, surface=surface)
        if approach_time is not None:
            cfg = replace(cfg, approach_time=float(approach_time))
        if duration is not None:
            cfg = replace(cfg, duration=float(duration))
        if K_theta_factor is not None:
            cfg = replace(cfg, gains=cfg.gains.scaled(float(K_theta_factor)))
        if source is not None:
            cfg = replace(cfg, stability=replace(cfg.stability, source=_source(source, cfg.path)))
        digest = hashlib.sha256((self.config_hash + yaml.safe_dump(to_plain(overrides), sort_keys=True)).encode())
        return replace(cfg, config_hash=digest.hexdigest())


def _source(value: str, path) -> str:
    if value not in STABILITY_SOURCES:
        raise ConfigError(f"unknown stability source '{value}' (expected one of {list(STABILITY_SOURCES)})",
                          path=str(path) if path else None, field="stability.source")
    return value


def _positive(data: dict, key: str, default, path) -> float:
    value = float(data.get(key, default))
    if not value > 0.0:
        raise ConfigError(f"'{key}' must be positive", path=str(path), field=key)
    return value


def load_scenario(path) -> ScenarioConfig:
    path = Path(path)
    data = load_yaml(path)
    base = path.parent
    digest = hashlib.sha256(path.read_bytes())

    chain_path = resolve_path(str(require(data, 'chain', path)), base, field="chain")
    layout_path = resolve_path(str(require(data, 'layout', path)), base, field="layout")
    chain = load_chain(chain_path)
    layout = load_layout(layout_path)
    digest.update(chain_path.read_bytes())
    digest.update(layout_path.read_bytes())

    physics_rate = int(data.get('physics_rate', DEFAULT_PHYSICS_RATE))
    control_rate = int(data.get('control_rate', DEFAULT_CONTROL_RATE))
    if physics_rate <= 0 or control_rate <= 0 or physics_rate % control_rate:
        raise ConfigError(f"control_rate {control_rate} must divide physics_rate {physics_rate}",
                          path=str(path), field="control_rate")

    duration = float(data.get('duration', 0.0))
    if duration < 0.0:
        raise ConfigError("'duration' must be non-negative", path=str(path), field="duration")

    q_start = as_vector(require(data, 'q_start', path), chain.m, 'q_start', path)
    q_close = as_vector(data.get('q_close', q_start), chain.m, 'q_close', path)

    sensor_data = data.get('sensor') or {}
    sensor = SensorConfig(
        spread=_positive(sensor_data, 'spread', DEFAULT_SPREAD, path),
        noise=float(sensor_data.get('noise', 0.0)),
        gain=_positive(sensor_data, 'gain', 1.0, path),
        threshold=float(sensor_data.get('threshold', DEFAULT_ACTIVATION_THRESHOLD)),
    )

    stab_data = data.get('stability') or {}
    source = _source(str(stab_data.get('source', 'classifier')), path)
    model_path = None
    if stab_data.get('model'):
        model_path = resolve_path(str(stab_data['model']), base, field="stability.model")
        digest.update(model_path.read_bytes())
    elif source == 'classifier':
        raise ConfigError("classifier stability needs 'stability.model'", path=str(path), field="stability.model")
    window = int(stab_data.get('window', DEFAULT_WINDOW))
    if window < 2:
        raise ConfigError("'stability.window' must be at least 2 frames", path=str(path), field="stability.window")

    cfg = ScenarioConfig(
        name=str(data.get('name', path.stem)),
        chain=chain,
        layout=layout,
        surface=make_surface(data.get('surface'), path),
        gains=ControllerGains.from_config(require(data, 'gains', path), chain.m, path),
        q_start=q_start,
        q_close=q_close,
        approach_time=_positive(data, 'approach_time', 1.0, path),
        duration=duration,
        physics_rate=physics_rate,
        control_rate=control_rate,
        sensor=sensor,
        stability=StabilityConfig(source=source, model=model_path, window=window),
        seed=int(data.get('seed', 0)),
        qdot_bound=_positive(data, 'qdot_bound', DEFAULT_QDOT_BOUND, path),
        coriolis=bool(data.get('coriolis', True)),
        config_hash=digest.hexdigest(),
        path=path,
    )
    logger.debug("loaded scenario %s (%s)", cfg.name, cfg.config_hash[:12])
    return cfg
