"""Complex projective space CP^n with a diagonal torus action.

The torus acts by ``t . [z_0 : ... : z_n] = [chi_{w_0}(t) z_0 : ... : chi_{w_n}(t) z_n]``
for integer coordinate weights ``w_j``. The default weights ``w_0 = 0``,
``w_j = e_j`` give the standard action of ``(S^1)^n``. Points are stored as
homogeneous vectors normalised so the largest-modulus entry equals 1.
"""

from itertools import combinations

import numpy as np

from ..errors import DomainError, ModelError
from ..torus import TorusElement, Weight, character_eval
from .base import ChartPoint, FixedPointRecord, TorusManifold


def normalize_homogeneous(z) -> np.ndarray:
    z = np.asarray(z, dtype=complex).reshape(-1)
    k = int(np.argmax(np.abs(z)))
    if z[k] == 0:
        raise DomainError("the zero vector is not a point of projective space")
    return z / z[k]


def format_homogeneous(z, digits: int = 6) -> str:
    def fmt(c):
        c = complex(c)
        if abs(c.imag) < 10 ** -digits:
            return f"{c.real:.{digits}g}"
        return f"{c.real:.{digits}g}{c.imag:+.{digits}g}j"
    return "[" + ":".join(fmt(c) for c in z) + "]"


class ProjectiveModel(TorusManifold):
    kind = "projective"

    def __init__(self, n: int, coordinate_weights=None):
        if n < 1:
            raise ModelError("projective dimension must be at least 1")
        self.dim = int(n)
        if coordinate_weights is None:
            coordinate_weights = [[0] * n] + [
                [1 if k == j else 0 for k in range(n)] for j in range(n)
            ]
        weights = [w if isinstance(w, Weight) else Weight(w) for w in coordinate_weights]
        if len(weights) != n + 1:
            raise ModelError(f"CP^{n} needs {n + 1} coordinate weights, got {len(weights)}")
        ranks = {len(w) for w in weights}
        if len(ranks) != 1:
            raise ModelError("coordinate weights have inconsistent ranks")
        self.rank = ranks.pop()
        clashes = [(i, j) for i, j in combinations(range(n + 1), 2)
                   if (weights[j] - weights[i]).is_zero()]
        if clashes:
            raise ModelError(
                "equal coordinate weights give non-isolated fixed points",
                [{"coordinates": list(c)} for c in clashes],
            )
        self.coordinate_weights = weights
        self._fixed = [
            FixedPointRecord(self.point_label(i), i, self.chart_weights(i))
            for i in range(n + 1)
        ]

    def __repr__(self):
        return f"ProjectiveModel(n={self.dim}, coordinate_weights={[list(w) for w in self.coordinate_weights]})"

    def point_label(self, i: int) -> str:
        return "[" + ":".join("1" if j == i else "0" for j in range(self.dim + 1)) + "]"

    @property
    def charts(self):
        return list(range(self.dim + 1))

    def chart_weights(self, chart):
        w = self.coordinate_weights
        return [w[j] - w[chart] for j in range(self.dim + 1) if j != chart]

    def fixed_points(self):
        return list(self._fixed)

    def coordinate_point(self, i: int) -> np.ndarray:
        z = np.zeros(self.dim + 1, dtype=complex)
        z[i] = 1.0
        return z

    # -- charts --------------------------------------------------------------
    def chart_map(self, chart, x):
        if isinstance(x, ChartPoint):
            x = self.chart_inverse(x)
        z = np.asarray(x, dtype=complex).reshape(-1)
        if z.size != self.dim + 1:
            raise DomainError(f"expected {self.dim + 1} homogeneous coordinates")
        if z[chart] == 0:
            raise DomainError(f"z_{chart} = 0 lies outside chart U_{chart}")
        return ChartPoint(chart, np.delete(z, chart) / z[chart])

    def lift(self, point: ChartPoint) -> np.ndarray:
        """Homogeneous vector with ``z_chart = 1`` (not max-normalised)."""
        return np.insert(point.coords, point.chart, 1.0 + 0j)

    def chart_inverse(self, point):
        return normalize_homogeneous(self.lift(point))

    def transition(self, point, target):
        if point.chart == target:
            return point.copy()
        z = self.lift(point)
        if z[target] == 0:
            return None
        return ChartPoint(target, np.delete(z, target) / z[target])

    def best_chart(self, point):
        z = self.lift(point)
        k = int(np.argmax(np.abs(z)))
        if k == point.chart:
            return point.copy()
        return ChartPoint(k, np.delete(z, k) / z[k])

    def as_chart_point(self, x):
        if isinstance(x, ChartPoint):
            return x
        z = normalize_homogeneous(x)
        k = int(np.argmax(np.abs(z)))
        return ChartPoint(k, np.delete(z, k) / z[k])

    # -- action and sampling -------------------------------------------------
    def act(self, t: TorusElement, x):
        z = np.asarray(x, dtype=complex).reshape(-1)
        chi = np.array([character_eval(w, t) for w in self.coordinate_weights])
        return normalize_homogeneous(z * chi)

    def sample(self, rng, count, strata=True):
        """Gaussian homogeneous vectors; with ``strata`` about half the samples
        get a random nonempty proper subset of coordinates set to zero."""
        m = self.dim + 1
        out = []
        for _ in range(count):
            z = (rng.standard_normal(m) + 1j * rng.standard_normal(m)) / np.sqrt(2)
            if strata and rng.random() < 0.5:
                k = int(rng.integers(1, m))  # number of zeroed coordinates
                z[rng.choice(m, size=k, replace=False)] = 0.0
            out.append(normalize_homogeneous(z))
        return out

    def distance(self, x, y) -> float:
        """Distance between max-normalised representatives, made phase-free
        by expressing both in the chart where ``x`` is largest."""
        a = self.as_chart_point(x)
        b = self.chart_map(a.chart, y)
        return float(np.linalg.norm(a.coords - b.coords))

    def describe(self):
        out = super().describe()
        out["coordinate_weights"] = [w.to_json() for w in self.coordinate_weights]
        return out
