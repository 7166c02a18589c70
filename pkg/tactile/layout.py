"""Taxel layout: static pose u_k = [x, y, z, roll, pitch, yaw] of every taxel in {E}.

Positions are meters, orientations extrinsic RPY radians (see geometry.rot3). The z-axis of
each taxel frame is the taxel normal and must point out of the fingertip.
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from geometry.rot3 import rpy_to_matrix
from utils.config import as_vector, dump_yaml, load_yaml, require, to_plain
from utils.error_handler import ConfigError

logger = logging.getLogger(__name__)

REFERENCE_N_TX = 30
DEFAULT_RADIUS = 0.012
# 6 rows from near the tip apex down to the pad equator, 5 columns across the pad
DEFAULT_ELEVATIONS = (0.30, 0.56, 0.82, 1.08, 1.34, 1.55)
DEFAULT_AZIMUTHS = (-0.6, -0.3, 0.0, 0.3, 0.6)


@dataclass(frozen=True, eq=False)
class TaxelLayout:
    name: str
    positions: np.ndarray      # (n_tx, 3) meters in {E}
    rpy: np.ndarray            # (n_tx, 3) radians in {E}
    radius: float = DEFAULT_RADIUS  # fingertip sphere radius, centered at the {E} origin
    rotations: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        positions = np.asarray(self.positions, dtype=float).reshape(-1, 3)
        rpy = np.asarray(self.rpy, dtype=float).reshape(-1, 3)
        if positions.shape != rpy.shape:
            raise ConfigError(f"{positions.shape[0]} taxel positions but {rpy.shape[0]} orientations",
                              field="taxels")
        object.__setattr__(self, 'positions', positions)
        object.__setattr__(self, 'rpy', rpy)
        object.__setattr__(self, 'rotations', np.array([rpy_to_matrix(*u) for u in rpy]))

    @property
    def n_tx(self) -> int:
        return self.positions.shape[0]

    @property
    def poses(self) -> np.ndarray:
        """(n_tx, 6) rows u_k."""
        return np.hstack([self.positions, self.rpy])

    @property
    def normals(self) -> np.ndarray:
        return self.rotations[:, :, 2]


def outward_violations(layout: TaxelLayout) -> np.ndarray:
    """Indices of taxels whose normal does not point away from the fingertip center."""
    dots = np.einsum('ij,ij->i', layout.normals, layout.positions)
    return np.flatnonzero(~(dots > 0.0))


def fingertip_grid_layout(radius: float = DEFAULT_RADIUS,
                          elevations: Sequence[float] = DEFAULT_ELEVATIONS,
                          azimuths: Sequence[float] = DEFAULT_AZIMUTHS,
                          name: str = "fingertip_30") -> TaxelLayout:
    """Grid of taxels on the hemispherical cap of a capsule fingertip.

    Elevation e tilts the normal from the finger axis (+z of {E}) toward the pad (+x);
    azimuth h tilts it sideways (+y). A taxel sits at radius * normal with
    rpy = (-h, e, 0), so its z-axis is the outward normal
    (sin e cos h, sin h, cos e cos h). Rows are elevations, row-major.
    """
    positions = []
    rpy = []
    for e in elevations:
        for h in azimuths:
            R = rpy_to_matrix(-h, e, 0.0)
            positions.append(radius * R[:, 2])
            rpy.append([-h, e, 0.0])
    return TaxelLayout(name=name, positions=np.array(positions), rpy=np.array(rpy), radius=float(radius))


def load_layout(path) -> TaxelLayout:
    """Read a layout file.

    Schema::

        name: fingertip_30
        n_tx: 30
        radius: 0.012                  # m, fingertip sphere at the {E} origin
        taxels:                        # one [x, y, z, roll, pitch, yaw] per taxel (m, rad)
          - [0.0029, -0.0068, 0.0095, 0.6, 0.3, 0.0]
    """
    path = Path(path)
    data = load_yaml(path)
    n_tx = int(require(data, 'n_tx', path))
    rows = require(data, 'taxels', path)
    if not isinstance(rows, list):
        raise ConfigError("'taxels' must be a list", path=str(path), field="taxels")
    if len(rows) != n_tx:
        raise ConfigError(f"declared n_tx = {n_tx} but {len(rows)} taxels listed",
                          path=str(path), field="taxels")
    u = np.array([as_vector(row, 6, f"taxels[{i}]", path) for i, row in enumerate(rows)]).reshape(-1, 6)
    radius = float(data.get('radius', DEFAULT_RADIUS))
    if not radius > 0.0:
        raise ConfigError("'radius' must be positive", path=str(path), field="radius")

    layout = TaxelLayout(name=str(data.get('name', path.stem)), positions=u[:, :3], rpy=u[:, 3:], radius=radius)
    bad = outward_violations(layout)
    if bad.size:
        raise ConfigError(f"taxel normals point into the fingertip at indices {bad.tolist()}",
                          path=str(path), field="taxels")
    logger.debug("loaded layout %s with %d taxels from %s", layout.name, layout.n_tx, path)
    return layout


def save_layout(path, layout: TaxelLayout, header: str = None):
    data = {
        'name': layout.name,
        'n_tx': layout.n_tx,
        'radius': float(layout.radius),
        'taxels': [[round(float(v), 6) for v in row] for row in to_plain(layout.poses)],
    }
    dump_yaml(path, data)
    if header:
        text = Path(path).read_text(encoding='utf-8')
        comment = "".join(f"# {line}\n" for line in header.splitlines())
        Path(path).write_text(comment + text, encoding='utf-8')
