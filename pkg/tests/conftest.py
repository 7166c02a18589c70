from pathlib import Path

import numpy as np
import pytest

from controller.gains import ControllerGains
from dynamics.chain import Joint, Link, Pose6, make_chain
from dynamics.loader import load_chain
from tactile.layout import fingertip_grid_layout, load_layout

ROOT = Path(__file__).resolve().parent.parent
CONFIGS = ROOT / "configs"


def small_inertia():
    return np.diag([1e-6, 1e-6, 1e-6])


def pendulum_chain(mass=0.1, length=0.1, com=None, axis=(0.0, 1.0, 0.0), damping=0.0, friction=0.0,
                   armature=0.0):
    """One revolute joint at the origin; by default the mass hangs straight down."""
    com = np.array([0.0, 0.0, -length]) if com is None else np.asarray(com, dtype=float)
    joint = Joint("j0", Pose6.identity(), np.asarray(axis, dtype=float), -np.pi, np.pi, 10.0,
                  damping=damping, friction=friction, armature=armature)
    return make_chain("pendulum", [joint], [Link(mass, com, small_inertia())])


def straight_chain(n=4, offset=0.05):
    """n joints about y, each origin a pure z-offset from the previous link."""
    joints = [Joint(f"j{i}", Pose6.from_xyz_rpy([0.0, 0.0, offset if i else 0.0]), np.array([0.0, 1.0, 0.0]),
                    -2.0, 2.0, 1.0) for i in range(n)]
    links = [Link(0.05, np.array([0.0, 0.0, offset / 2]), small_inertia()) for _ in range(n)]
    return make_chain("straight", joints, links, tip=Pose6.from_xyz_rpy([0.0, 0.0, offset]))


@pytest.fixture
def index_chain():
    return load_chain(CONFIGS / "chains" / "allegro_index.yaml")


@pytest.fixture
def thumb_chain():
    return load_chain(CONFIGS / "chains" / "allegro_thumb.yaml")


@pytest.fixture
def layout():
    return fingertip_grid_layout()


@pytest.fixture
def reference_layout():
    return load_layout(CONFIGS / "layouts" / "fingertip_30.yaml")


@pytest.fixture
def gains():
    f_d = np.array([0.9, 0.0, -0.44])
    return ControllerGains(K_p=np.full(4, 100.0), K_d=np.full(4, 15.0), K_theta=np.full(3, 0.15),
                           K_s=np.full(3, 0.01), f_d=f_d / np.linalg.norm(f_d))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
