"""Chain description file loader.

Schema (YAML, SI units: m, kg, kg*m^2, rad, N*m):

    name: allegro_index
    base: {position: [x, y, z], rpy: [roll, pitch, yaw]}
    gravity: [0, 0, -9.81]
    tip: {position: [...], rpy: [...]}          # {E} relative to the last link
    joints:
      - name: j0
        origin: {position: [...], rpy: [...]}   # joint frame relative to the previous link
        axis: [1, 0, 0]                         # unit, joint frame
        limits: [lower, upper]
        torque_limit: 0.7
        damping: 0.0                            # optional, N*m*s/rad
        friction: 0.0                           # optional, N*m
        armature: 0.0                           # optional reflected rotor inertia, kg*m^2
        link:
          mass: 0.065
          com: [0, 0, 0.027]
          inertia: [ixx, iyy, izz, ixy, ixz, iyz]
"""

import logging
from pathlib import Path

import numpy as np

from dynamics.chain import DEFAULT_GRAVITY, Joint, JointChain, Link, Pose6
from utils.config import as_vector, load_yaml, require
from utils.error_handler import ConfigError

logger = logging.getLogger(__name__)

AXIS_TOL = 1e-6


def _pose(data, path, field: str) -> Pose6:
    if data is None:
        return Pose6.identity()
    position = as_vector(data.get('position', [0.0, 0.0, 0.0]), 3, f"{field}.position", path)
    rpy = as_vector(data.get('rpy', [0.0, 0.0, 0.0]), 3, f"{field}.rpy", path)
    return Pose6.from_xyz_rpy(position, rpy)


def _inertia(values, path, field: str) -> np.ndarray:
    ixx, iyy, izz, ixy, ixz, iyz = as_vector(values, 6, field, path)
    I = np.array([[ixx, ixy, ixz], [ixy, iyy, iyz], [ixz, iyz, izz]])
    if np.min(np.linalg.eigvalsh(I)) <= 0.0:
        raise ConfigError(f"'{field}' is not positive-definite", path=str(path), field=field)
    return I


def _link(data, path, prefix: str) -> Link:
    if data is None:
        raise ConfigError(f"missing '{prefix}.link'", path=str(path), field=f"{prefix}.link")
    if data.get('inertia') is None:
        raise ConfigError(f"missing '{prefix}.link.inertia'", path=str(path), field=f"{prefix}.link.inertia")
    mass = float(require(data, 'mass', path))
    if not mass > 0.0:
        raise ConfigError(f"'{prefix}.link.mass' must be positive", path=str(path), field=f"{prefix}.link.mass")
    com = as_vector(data.get('com', [0.0, 0.0, 0.0]), 3, f"{prefix}.link.com", path)
    return Link(mass=mass, com=com, inertia=_inertia(data['inertia'], path, f"{prefix}.link.inertia"))


def _joint(data, path, index: int) -> Joint:
    prefix = f"joints[{index}]"
    axis = as_vector(require(data, 'axis', path), 3, f"{prefix}.axis", path)
    if abs(np.linalg.norm(axis) - 1.0) > AXIS_TOL:
        raise ConfigError(f"'{prefix}.axis' is not unit-norm (|axis| = {np.linalg.norm(axis):.6f})",
                          path=str(path), field=f"{prefix}.axis")
    lower, upper = as_vector(require(data, 'limits', path), 2, f"{prefix}.limits", path)
    return Joint(
        name=str(data.get('name', f"j{index}")),
        origin=_pose(data.get('origin'), path, f"{prefix}.origin"),
        axis=axis,
        lower=float(lower),
        upper=float(upper),
        torque_limit=float(require(data, 'torque_limit', path)),
        damping=float(data.get('damping', 0.0)),
        friction=float(data.get('friction', 0.0)),
        armature=float(data.get('armature', 0.0)),
    )


def load_chain(path) -> JointChain:
    path = Path(path)
    data = load_yaml(path)
    joints_data = require(data, 'joints', path)
    if not isinstance(joints_data, list) or not joints_data:
        raise ConfigError("'joints' must be a non-empty list", path=str(path), field="joints")

    joints = []
    links = []
    for i, jd in enumerate(joints_data):
        joints.append(_joint(jd, path, i))
        links.append(_link(jd.get('link'), path, f"joints[{i}]"))

    gravity = as_vector(data.get('gravity', DEFAULT_GRAVITY), 3, "gravity", path)
    try:
        chain = JointChain(
            name=str(data.get('name', path.stem)),
            joints=tuple(joints),
            links=tuple(links),
            base=_pose(data.get('base'), path, "base"),
            tip=_pose(data.get('tip'), path, "tip"),
            gravity=gravity,
        )
    except ConfigError as e:
        e.details['path'] = str(path)
        raise
    logger.debug("loaded chain %s with %d joints from %s", chain.name, chain.m, path)
    return chain
