"""Chart points, fixed-point records and the interface shared by all models."""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..errors import DomainError
from ..torus import TorusElement, character_eval


@dataclass(eq=False)
class ChartPoint:
    """A point given by complex coordinates in one chart of a model."""

    chart: int
    coords: np.ndarray

    def __post_init__(self):
        self.coords = np.asarray(self.coords, dtype=complex).reshape(-1)

    @classmethod
    def from_real(cls, chart: int, xy) -> "ChartPoint":
        xy = np.asarray(xy, dtype=float)
        return cls(chart, xy[0::2] + 1j * xy[1::2])

    def real(self) -> np.ndarray:
        """Interleaved real coordinates ``(x_1, y_1, ..., x_n, y_n)``."""
        out = np.empty(2 * self.coords.size)
        out[0::2] = self.coords.real
        out[1::2] = self.coords.imag
        return out

    def norm(self) -> float:
        return float(np.linalg.norm(self.coords))

    def copy(self) -> "ChartPoint":
        return ChartPoint(self.chart, self.coords.copy())

    def __repr__(self):
        return f"ChartPoint(chart={self.chart}, coords={self.coords!r})"


@dataclass
class FixedPointRecord:
    id: str
    home_chart: int
    tangential_weights: list
    exponents: Optional[list] = None
    unstable_dim: Optional[int] = None

    @property
    def dim(self) -> int:
        return len(self.tangential_weights)

    def to_json(self) -> dict:
        out = {
            "id": self.id,
            "home_chart": self.home_chart,
            "tangential_weights": [w.to_json() for w in self.tangential_weights],
        }
        if self.exponents is not None:
            out["exponents"] = [
                {"value": f"{e.value.numerator}/{e.value.denominator}",
                 "scaled": e.scaled}
                for e in self.exponents
            ]
        if self.unstable_dim is not None:
            out["unstable_dim"] = self.unstable_dim
        return out


def rho(weights, t: TorusElement) -> np.ndarray:
    """Diagonal of the linear tangential action of ``t``."""
    return np.array([character_eval(m, t) for m in weights], dtype=complex)


class TorusManifold:
    """Compact T-manifold with isolated fixed points and a weight-chart atlas.

    Subclasses supply the ambient representation of points, the action,
    chart maps and transitions. Charts are indexed by consecutive integers
    and every chart is linear for the torus action: the torus acts on the
    ``i``-th chart coordinate by the character of ``chart_weights(c)[i]``.
    """

    kind = "abstract"
    supports_flow = True

    rank: int
    dim: int

    # -- atlas -------------------------------------------------------------
    @property
    def charts(self) -> list:
        raise NotImplementedError

    def chart_label(self, chart: int) -> str:
        return f"U{chart}"

    def chart_weights(self, chart: int) -> list:
        raise NotImplementedError

    def chart_map(self, chart: int, x) -> ChartPoint:
        raise NotImplementedError

    def chart_inverse(self, point: ChartPoint):
        raise NotImplementedError

    def in_domain(self, chart: int, x) -> bool:
        try:
            self.chart_map(chart, x)
        except DomainError:
            return False
        return True

    def transition(self, point: ChartPoint, target: int) -> Optional[ChartPoint]:
        """Re-express ``point`` in chart ``target``; None if outside its domain."""
        if point.chart == target:
            return point.copy()
        try:
            return self.chart_map(target, self.chart_inverse(point))
        except DomainError:
            return None

    def best_chart(self, point: ChartPoint) -> ChartPoint:
        """The chart minimising the largest coordinate modulus (ties: lowest id)."""
        best = None
        best_size = np.inf
        for c in self.charts:
            q = self.transition(point, c)
            if q is None or not np.all(np.isfinite(q.coords)):
                continue
            size = float(np.max(np.abs(q.coords))) if q.coords.size else 0.0
            if size < best_size:
                best, best_size = q, size
        if best is None:
            raise DomainError("point lies in no chart")
        return best

    # -- points and action ---------------------------------------------------
    def act(self, t: TorusElement, x):
        raise NotImplementedError

    def act_point(self, t: TorusElement, point: ChartPoint) -> ChartPoint:
        """Act on a chart point through the ambient representation."""
        return self.chart_map(point.chart, self.act(t, self.chart_inverse(point)))

    def as_chart_point(self, x) -> ChartPoint:
        if isinstance(x, ChartPoint):
            return x
        for c in self.charts:
            if self.in_domain(c, x):
                return self.best_chart(self.chart_map(c, x))
        raise DomainError("point lies in no chart")

    def sample(self, rng: np.random.Generator, count: int, strata: bool = True) -> list:
        raise NotImplementedError

    def sample_in_chart(self, rng: np.random.Generator, chart: int):
        """Ambient point whose coordinates in ``chart`` are standard complex Gaussian."""
        w = (rng.standard_normal(self.dim) + 1j * rng.standard_normal(self.dim)) / np.sqrt(2)
        return self.chart_inverse(ChartPoint(chart, w))

    def reference_representation(self, x, rng=None):
        """Ambient representation used when the action is applied.

        Models whose action is defined chart-by-chart override this to move
        the point into a different chart, so that checks exercise transitions.
        """
        return x

    # -- fixed points --------------------------------------------------------
    def fixed_points(self) -> list:
        raise NotImplementedError

    def fixed_point(self, p) -> FixedPointRecord:
        if isinstance(p, FixedPointRecord):
            return p
        for rec in self.fixed_points():
            if rec.id == p:
                return rec
        raise DomainError(f"{p!r} is not a fixed point of this model")

    def tangential_weights(self, p) -> list:
        return list(self.fixed_point(p).tangential_weights)

    def chart_center(self, chart: int) -> str:
        """Id of the fixed point sent to the origin of ``chart``."""
        for rec in self.fixed_points():
            if rec.home_chart == chart:
                return rec.id
        raise DomainError(f"chart {chart} has no center")

    def describe(self) -> dict:
        return {
            "kind": self.kind,
            "rank": self.rank,
            "complex_dim": self.dim,
            "charts": len(self.charts),
            "fixed_points": [r.to_json() for r in self.fixed_points()],
        }


def with_exponents(rec: FixedPointRecord, exponents: list) -> FixedPointRecord:
    """Copy of ``rec`` carrying flow exponents and the derived unstable dimension."""
    neg = sum(1 for e in exponents if e.value < 0)
    zero = any(e.value == 0 for e in exponents)
    return FixedPointRecord(
        rec.id, rec.home_chart, list(rec.tangential_weights), list(exponents),
        None if zero else 2 * neg,
    )

