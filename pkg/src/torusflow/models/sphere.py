"""Even spheres S^2n in C^n x R with the coordinatewise circle action.

Two charts: ``U_0 = {s != 1}`` with ``phi_0(z, s) = conj(z) / (1 - s)`` and
``U_inf = {s != -1}`` with ``phi_inf(z, s) = z / (1 + s)``. Following the
usual indexing, ``U_0`` is labelled by the north pole ``(0, ..., 0, 1)``
although it does not contain it: ``phi_0`` sends the south pole to the
origin. The tangential weights attached to the north pole are whatever makes
``phi_0`` equivariant; they are inferred numerically, not assumed.

Spheres carry no flows here, only covering and equivariance checks.
"""

from dataclasses import dataclass

import numpy as np

from ..errors import DomainError, ModelError
from ..torus import TorusElement, Weight, character_eval
from .base import ChartPoint, FixedPointRecord, TorusManifold

NORTH, SOUTH = "north", "south"
CHART_0, CHART_INF = 0, 1


@dataclass(eq=False)
class SpherePoint:
    z: np.ndarray
    s: float

    def __post_init__(self):
        self.z = np.asarray(self.z, dtype=complex).reshape(-1)
        self.s = float(self.s)

    def norm_defect(self) -> float:
        return abs(float(np.sum(np.abs(self.z) ** 2)) + self.s ** 2 - 1.0)


class SphereModel(TorusManifold):
    kind = "sphere"
    supports_flow = False

    def __init__(self, n: int, conjugate: bool = True):
        if n < 1:
            raise ModelError("sphere half-dimension must be at least 1")
        self.dim = int(n)
        self.rank = int(n)
        # conjugate=False drops the conjugation in phi_0 (used as a negative control)
        self.conjugate = conjugate
        self._north_weights = None

    def __repr__(self):
        return f"SphereModel(n={self.dim})"

    @property
    def charts(self):
        return [CHART_0, CHART_INF]

    def chart_label(self, chart):
        return "U_0" if chart == CHART_0 else "U_inf"

    def pole(self, which: str) -> SpherePoint:
        return SpherePoint(np.zeros(self.dim), 1.0 if which == NORTH else -1.0)

    # -- fixed points --------------------------------------------------------
    def fixed_points(self):
        return [
            FixedPointRecord(NORTH, CHART_0, self.north_weights()),
            FixedPointRecord(SOUTH, CHART_INF, self.south_weights()),
        ]

    def south_weights(self):
        return [Weight([1 if k == i else 0 for k in range(self.dim)]) for i in range(self.dim)]

    def north_weights(self):
        if self._north_weights is None:
            from .verify import infer_chart_weights_numeric

            self._north_weights = infer_chart_weights_numeric(self, CHART_0)
        return list(self._north_weights)

    def chart_weights(self, chart):
        return self.north_weights() if chart == CHART_0 else self.south_weights()

    def chart_center(self, chart):
        # the origin of phi_0 is the south pole and vice versa
        return SOUTH if chart == CHART_0 else NORTH

    # -- charts --------------------------------------------------------------
    def chart_map(self, chart, x):
        if isinstance(x, ChartPoint):
            x = self.chart_inverse(x)
        if x.z.size != self.dim:
            raise DomainError(f"expected {self.dim} complex coordinates")
        if chart == CHART_0:
            if x.s == 1.0:
                raise DomainError("s = 1 lies outside U_0")
            w = np.conj(x.z) if self.conjugate else x.z
            return ChartPoint(CHART_0, w / (1.0 - x.s))
        if chart == CHART_INF:
            if x.s == -1.0:
                raise DomainError("s = -1 lies outside U_inf")
            return ChartPoint(CHART_INF, x.z / (1.0 + x.s))
        raise DomainError(f"unknown chart {chart!r}")

    def chart_inverse(self, point):
        w = point.coords
        r = float(np.sum(np.abs(w) ** 2))
        if point.chart == CHART_0:
            z = 2.0 * (np.conj(w) if self.conjugate else w) / (1.0 + r)
            return SpherePoint(z, (r - 1.0) / (1.0 + r))
        if point.chart == CHART_INF:
            return SpherePoint(2.0 * w / (1.0 + r), (1.0 - r) / (1.0 + r))
        raise DomainError(f"unknown chart {point.chart!r}")

    # -- action and sampling -------------------------------------------------
    def act(self, t: TorusElement, x):
        chi = np.array([
            character_eval(Weight([1 if k == i else 0 for k in range(self.dim)]), t)
            for i in range(self.dim)
        ])
        return SpherePoint(x.z * chi, x.s)

    def sample(self, rng, count, strata=True):
        """Normalised Gaussians in R^(2n+1); with ``strata`` some samples are
        poles or have coordinates zeroed."""
        out = []
        for _ in range(count):
            if strata and rng.random() < 0.02:
                out.append(self.pole(NORTH if rng.random() < 0.5 else SOUTH))
                continue
            v = rng.standard_normal(2 * self.dim + 1)
            z = v[0:2 * self.dim:2] + 1j * v[1:2 * self.dim:2]
            s = v[-1]
            if strata and rng.random() < 0.3:
                z[rng.choice(self.dim, size=int(rng.integers(1, self.dim + 1)), replace=False)] = 0
            norm = np.sqrt(np.sum(np.abs(z) ** 2) + s * s)
            out.append(SpherePoint(z / norm, s / norm))
        return out

    def distance(self, x, y):
        return float(np.sqrt(np.sum(np.abs(x.z - y.z) ** 2) + (x.s - y.s) ** 2))
