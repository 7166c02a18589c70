"""Closed-loop run: physics at physics_rate, sensing and control at control_rate."""

import logging
from collections import deque
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np
import pandas as pd

from controller.control_law import control_step
from dynamics.chain import kinematics
from sim.scenario import ScenarioConfig
from sim.world import World
from stability.features import FEATURE_SET_VERSION, extract_features
from stability.logistic import ContactState, LogisticModel, load_model, predict
from tactile.estimator import TactileFrame, estimate_contact
from tactile.sensor import simulate_taxels
from utils.error_handler import NumericalBlowup
from utils.logger import write_run_log

logger = logging.getLogger(__name__)

__version__ = "1.0.0"

JOINT_GROUPS = ('q', 'qdot', 'q_ref', 'tau_motion', 'tau_task', 'tau_cmd', 'tau_applied')


def run_log_columns(m: int) -> List[str]:
    cols = ['tick', 'time', 'f_x', 'f_y', 'f_z', 'theta', 'p', 'y', 'active', 'delta',
            'c_x', 'c_y', 'c_z', 'fw_x', 'fw_y', 'fw_z', 'dphi_c_x', 'dphi_c_y', 'dphi_c_z']
    for group in JOINT_GROUPS:
        cols += [f"{group}_{i}" for i in range(m)]
    cols += ['saturated', 'gt_contact', 'gt_slip', 'F_ext_x', 'F_ext_y', 'F_ext_z', 'F_n', 'F_t',
             'gt_cE_x', 'gt_cE_y', 'gt_cE_z']
    return cols


@dataclass
class RunLog:
    metadata: Dict[str, object]
    rows: pd.DataFrame
    frames: List[TactileFrame] = field(default_factory=list)

    def save(self, path):
        write_run_log(path, self.metadata, self.rows)


def _metadata(config: ScenarioConfig) -> Dict[str, object]:
    return {
        'scenario': config.name,
        'config_hash': config.config_hash,
        'seed': config.seed,
        'version': __version__,
        'feature_set': FEATURE_SET_VERSION,
        'chain': config.chain.name,
        'layout': config.layout.name,
        'surface': config.surface.kind if config.surface is not None else 'none',
        'mu': config.mu if config.mu is not None else 'nan',
        'physics_rate': config.physics_rate,
        'control_rate': config.control_rate,
        'stability_source': config.stability.source,
        'window': config.stability.window,
        'torque_limits': [float(v) for v in config.chain.torque_limits],
    }


class _OracleStability:
    """Ground truth: stable when contact held without slip for the whole window."""

    def __init__(self, window: int):
        self.history = deque(maxlen=window)

    def update(self, in_contact: bool, slipped: bool) -> None:
        self.history.append(in_contact and not slipped)

    def state(self, active: bool) -> ContactState:
        stable = active and len(self.history) == self.history.maxlen and all(self.history)
        return ContactState(1.0 if stable else 0.0, 1 if stable else 0)


def run(config: ScenarioConfig, model: Optional[LogisticModel] = None, keep_frames: bool = False) -> RunLog:
    chain = config.chain
    layout = config.layout
    sensor = config.sensor
    window_len = config.stability.window
    if config.stability.source == 'classifier' and model is None:
        model = load_model(config.stability.model)

    world = World(chain, config.surface, layout.radius, config.qdot_bound, config.coriolis)
    rng = np.random.default_rng(config.seed)
    state = world.initial_state(config.q_start)
    window = deque(maxlen=window_len)
    oracle = _OracleStability(window_len)

    n_ticks = config.n_ticks
    progress = 0.0
    progress_step = 1.0 / (config.approach_time * config.control_rate)
    slipped = False  # during the previous control period
    saturating = False
    records = []
    frames = []

    for k in range(n_ticks):
        t = k / config.control_rate
        state = world.observe(state)
        kin = kinematics(chain, state.q)
        R_WE = kin.tip.orientation
        if state.in_contact:
            c_E = kin.tip.inverse().transform(state.contact_point)
            F_E = R_WE.T @ state.F_ext
        else:
            c_E = np.full(3, np.nan)
            F_E = np.zeros(3)
        frame = simulate_taxels(layout, np.nan_to_num(c_E), F_E, sensor.spread, sensor.noise, rng,
                                sensor.gain, t)
        window.append(frame)
        if keep_frames:
            frames.append(frame)
        estimate = estimate_contact(layout, frame, sensor.threshold)

        oracle.update(state.in_contact, slipped)
        if config.stability.source == 'oracle':
            contact_state = oracle.state(estimate.active)
        elif estimate.active and len(window) == window_len:
            contact_state = predict(model, extract_features(window, layout, window_len, sensor.threshold))
        else:
            contact_state = ContactState.unstable()

        q_ref = config.q_start + progress * (config.q_close - config.q_start)
        cmd = control_step(chain, state.q, state.qdot, q_ref, estimate, contact_state, config.gains)

        if cmd.any_saturated and not saturating:
            logger.warning("torque saturation at tick %d (t=%.3f s): tau_cmd=%s", k, t,
                           np.array2string(cmd.tau_cmd, precision=3))
        saturating = cmd.any_saturated

        record = {
            'tick': k, 'time': t,
            'f_x': estimate.f[0], 'f_y': estimate.f[1], 'f_z': estimate.f[2],
            'theta': cmd.theta, 'p': cmd.p, 'y': cmd.y, 'active': int(estimate.active), 'delta': estimate.delta,
            'c_x': estimate.c[0], 'c_y': estimate.c[1], 'c_z': estimate.c[2],
            'fw_x': cmd.f_W[0], 'fw_y': cmd.f_W[1], 'fw_z': cmd.f_W[2],
            'dphi_c_x': cmd.dphi_c[0], 'dphi_c_y': cmd.dphi_c[1], 'dphi_c_z': cmd.dphi_c[2],
            'saturated': int(cmd.any_saturated), 'gt_contact': int(state.in_contact), 'gt_slip': int(slipped),
            'F_ext_x': state.F_ext[0], 'F_ext_y': state.F_ext[1], 'F_ext_z': state.F_ext[2],
            'F_n': state.f_n, 'F_t': state.f_t,
            'gt_cE_x': c_E[0], 'gt_cE_y': c_E[1], 'gt_cE_z': c_E[2],
        }
        for group, values in zip(JOINT_GROUPS, (state.q, state.qdot, q_ref, cmd.tau_motion, cmd.tau_task,
                                                cmd.tau_cmd, cmd.tau_applied)):
            for i, v in enumerate(values):
                record[f"{group}_{i}"] = v
        records.append(record)

        slipped = False
        for _ in range(config.substeps):
            try:
                state = world.step(state, cmd.tau_applied, config.physics_dt, tick=k)
            except NumericalBlowup as e:
                logger.error("simulation diverged at tick %d: %s", k, e.message)
                raise
            slipped = slipped or state.slipping

        if cmd.y == 0:
            progress = min(1.0, progress + progress_step)

    rows = pd.DataFrame.from_records(records, columns=run_log_columns(chain.m))
    logger.info("run %s: %d ticks, %d stable, %d with contact", config.name, n_ticks,
                int(rows['y'].sum()) if n_ticks else 0, int(rows['gt_contact'].sum()) if n_ticks else 0)
    return RunLog(_metadata(config), rows, frames)
