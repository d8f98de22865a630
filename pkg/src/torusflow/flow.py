"""The gradient-like flow generated by a0 on a torus manifold.

In the weight chart of a fixed point p with tangential weights m_1..m_n the
field is ``dw_i/ds = -a_i w_i`` with ``a_i = 2 pi <m_i, a0>``, so its flow is
``w_i -> w_i exp(-a_i s)``. Orientation: ``a_i > 0`` means coordinate i is
contracted forward in time, and the unstable dimension of p is twice the
number of negative exponents.

Because every chart transition is a monomial map whose exponents are
compatible with the weights, the chartwise scalings glue to one global flow.
On CP^n it is ``[z_j] -> [z_j exp(-2 pi <w_j, a0> s)]``.
"""

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import GenericityError, InconsistencyError, ModelError, SwitchingThrashError
from .models.base import ChartPoint, with_exponents
from .models.projective import ProjectiveModel
from .torus import TWO_PI, GeneratorVector, TorusElement, exponent, pairing
from .verdict import Verdict

# |log| growth allowed per exact-flow chunk before re-charting
_CHUNK_LOG_GROWTH = 20.0
MAX_THRASH = 100


@dataclass
class TrajectoryOptions:
    h: float = 1e-3
    max_time: float = 100.0
    switch_margin: float = 0.1
    tolerance: float = 1e-9

    def __post_init__(self):
        if not self.h > 0:
            raise ValueError("step h must be positive")
        if not self.max_time > 0:
            raise ValueError("max_time must be positive")
        if not 0 < self.switch_margin < 1:
            raise ValueError("switch_margin must lie in (0, 1)")

    @property
    def switch_radius(self) -> float:
        return 1.0 / self.switch_margin


@dataclass
class FlowState:
    position: ChartPoint
    time: float


@dataclass
class LimitResult:
    point_id: str
    direction: str
    s_reached: float
    method: str

    def to_json(self):
        return {"point_id": self.point_id, "direction": self.direction,
                "s_reached": self.s_reached}


@dataclass
class TimeOneSpectrum:
    eigenvalues: list
    exponents: list
    hyperbolic: bool


def _as_generator(a0) -> GeneratorVector:
    if isinstance(a0, GeneratorVector):
        return a0
    if isinstance(a0, str):
        return GeneratorVector.parse(a0)
    return GeneratorVector(a0)


def hyperbolicity_witnesses(model, a0) -> list:
    """Every (fixed point, tangential weight) pairing to zero with a0."""
    out = []
    for rec in model.fixed_points():
        for m in rec.tangential_weights:
            if pairing(m, a0) == 0:
                out.append({"point": rec.id, "weight": m.to_json()})
    return out


class GradientLikeFlow:
    """Flow of the field -J xi_0 for a fixed model and generator.

    Construction refuses non-generic generators (some tangential weight
    pairs to zero) unless ``check=False``.
    """

    def __init__(self, model, a0, options=None, check=True):
        if not model.supports_flow:
            raise ModelError(f"{model.kind} models carry no flow")
        self.model = model
        self.a0 = _as_generator(a0)
        if len(self.a0) != model.rank:
            raise ModelError(f"a0 has rank {len(self.a0)}, the torus has rank {model.rank}")
        self.options = options or TrajectoryOptions()
        if check:
            bad = hyperbolicity_witnesses(model, self.a0)
            if bad:
                raise GenericityError(
                    f"a0 = ({self.a0}) pairs to zero with {len(bad)} tangential weight(s)", bad
                )
        self._exact = {}
        self.exponents = np.zeros((len(model.charts), model.dim))
        for c in model.charts:
            row = [pairing(m, self.a0) for m in model.chart_weights(c)]
            self._exact[c] = row
            self.exponents[c] = [TWO_PI * float(q) for q in row]
        nonzero = np.abs(self.exponents[self.exponents != 0])
        self.min_rate = float(nonzero.min()) if nonzero.size else 0.0
        self.max_rate = float(np.abs(self.exponents).max())
        if isinstance(model, ProjectiveModel):
            self._coord_pairings = [pairing(w, self.a0) for w in model.coordinate_weights]
            self._coord_rates = np.array([TWO_PI * float(q) for q in self._coord_pairings])
        else:
            self._coord_pairings = None

    @property
    def has_analytic_limits(self) -> bool:
        return self._coord_pairings is not None

    # -- records ---------------------------------------------------------------
    def fixed_point_records(self):
        return [with_exponents(r, [exponent(m, self.a0) for m in r.tangential_weights])
                for r in self.model.fixed_points()]

    def default_max_time(self) -> float:
        return 200.0 / self.min_rate if self.min_rate else self.options.max_time

    # -- field -----------------------------------------------------------------
    def vector_field(self, x: ChartPoint) -> np.ndarray:
        """Tangent vector ``(-a_1 x_1, -a_1 y_1, ..., -a_n x_n, -a_n y_n)``."""
        a = self.exponents[x.chart]
        v = -a * x.coords
        out = np.empty(2 * v.size)
        out[0::2] = v.real
        out[1::2] = v.imag
        return out

    def field_norm(self, x: ChartPoint) -> float:
        """Euclidean norm of the field in the chart coordinates of ``x``."""
        return float(np.linalg.norm(self.exponents[x.chart] * x.coords))

    # -- exact flow ------------------------------------------------------------
    def _settle(self, point: ChartPoint) -> ChartPoint:
        if point.coords.size and np.max(np.abs(point.coords)) > self.options.switch_radius:
            return self.model.best_chart(point)
        return point

    def flow_exact(self, x, s: float) -> ChartPoint:
        x = self.model.as_chart_point(x)
        s = float(s)
        if self._coord_pairings is not None:
            return self._flow_projective(x, s)
        return self._flow_charts(x, s)

    def _flow_projective(self, x, s):
        z = self.model.lift(x)
        nz = z != 0
        logmag = np.full(z.size, -np.inf)
        logmag[nz] = np.log(np.abs(z[nz])) - self._coord_rates[nz] * s
        k = int(np.argmax(logmag))
        out = np.zeros_like(z)
        out[nz] = np.exp(logmag[nz] - logmag[k]) * (z[nz] / np.abs(z[nz]))
        out /= out[k]
        if out[x.chart] != 0:
            here = ChartPoint(x.chart, np.delete(out, x.chart) / out[x.chart])
            if np.all(np.isfinite(here.coords)) and (
                    here.coords.size == 0 or np.max(np.abs(here.coords)) <= self.options.switch_radius):
                return here
        return ChartPoint(k, np.delete(out, k))

    def _flow_charts(self, x, s):
        point = x.copy()
        if self.max_rate == 0 or s == 0:
            return point
        chunk = _CHUNK_LOG_GROWTH / self.max_rate
        remaining = s
        while remaining != 0:
            ds = math.copysign(min(abs(remaining), chunk), remaining)
            point = ChartPoint(point.chart, point.coords * np.exp(-self.exponents[point.chart] * ds))
            point = self._settle(point)
            remaining -= ds
            if abs(remaining) < 1e-15 * max(1.0, abs(s)):
                break
        return point

    # -- RK4 oracle ------------------------------------------------------------
    def _rhs(self, charts, w):
        return -self.exponents[charts] * w

    def rk4_batch(self, points, s: float, h=None, checkpoints=None):
        """Classical RK4 on many starting points at once, with chart switching.

        Returns the final chart points, or, if ``checkpoints`` (an increasing
        sequence of times in ``[0, s]`` or ``[s, 0]``) is given, a list with
        one list of chart points per checkpoint.
        """
        h = self.options.h if h is None else h
        pts = [self.model.as_chart_point(p) for p in points]
        charts = np.array([p.chart for p in pts], dtype=int)
        w = np.array([p.coords for p in pts], dtype=complex).reshape(len(pts), self.model.dim)
        nsteps = max(1, int(math.ceil(abs(s) / h - 1e-9)))
        step = s / nsteps
        marks = {}
        if checkpoints is not None:
            for c in checkpoints:
                marks.setdefault(int(round(c / step)) if step else 0, []).append(c)
        snapshots = {}
        if 0 in marks:
            snapshots[0] = (charts.copy(), w.copy())
        thrash = np.zeros(len(pts), dtype=int)
        radius = self.options.switch_radius
        for k in range(1, nsteps + 1):
            k1 = self._rhs(charts, w)
            k2 = self._rhs(charts, w + 0.5 * step * k1)
            k3 = self._rhs(charts, w + 0.5 * step * k2)
            k4 = self._rhs(charts, w + step * k3)
            w = w + (step / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
            out = np.abs(w).max(axis=1) > radius
            for i in np.nonzero(out)[0]:
                q = self.model.best_chart(ChartPoint(charts[i], w[i]))
                charts[i] = q.chart
                w[i] = q.coords
                if np.abs(q.coords).max() > radius:
                    thrash[i] += 1
                    if thrash[i] > MAX_THRASH:
                        raise SwitchingThrashError(
                            f"trajectory {i} switched charts {MAX_THRASH} times without "
                            "re-entering a chart domain")
                else:
                    thrash[i] = 0
            if k in marks:
                snapshots[k] = (charts.copy(), w.copy())
        if checkpoints is None:
            return [ChartPoint(c, v) for c, v in zip(charts, w)]
        result = []
        for k in sorted(marks):
            c_arr, w_arr = snapshots[k]
            result.append([ChartPoint(c, v) for c, v in zip(c_arr, w_arr)])
        return result

    def flow_rk4(self, x, s: float, h=None) -> ChartPoint:
        return self.rk4_batch([x], s, h)[0]

    # -- comparison ------------------------------------------------------------
    def distance(self, x: ChartPoint, y: ChartPoint) -> float:
        """Euclidean distance in the chart of ``x``."""
        q = self.model.transition(y, x.chart)
        if q is None:
            return float("inf")
        return float(np.linalg.norm(x.coords - q.coords))

    # -- limits ----------------------------------------------------------------
    def analytic_limit(self, x, direction="forward"):
        """Projective models: the nonzero homogeneous coordinate with the
        smallest (forward) or largest (backward) pairing <w_j, a0> wins."""
        if self._coord_pairings is None:
            return None
        x = self.model.as_chart_point(x)
        z = self.model.lift(x)
        support = [j for j in range(z.size) if z[j] != 0]
        vals = [self._coord_pairings[j] for j in support]
        best = min(vals) if direction == "forward" else max(vals)
        winners = [j for j, v in zip(support, vals) if v == best]
        if len(winners) > 1:
            raise GenericityError(
                f"coordinates {winners} tie for the {direction} limit; check is_generic",
                [{"coordinates": winners}],
            )
        return self.model.point_label(winners[0])

    def follow(self, x, direction="forward", max_time=None, tol=None):
        """Follow the exact flow chunk by chunk until the chart-local norm
        drops below ``tol`` with every expanding coordinate exactly zero; the
        chart's center is then the limit."""
        res = self.follow_batch([x], direction, max_time, tol)
        return res[0]

    def follow_batch(self, points, direction="forward", max_time=None, tol=None):
        """Vectorised :meth:`follow`. Returns ``(point_id or None, s_reached)`` pairs."""
        tol = self.options.tolerance if tol is None else tol
        max_time = self.default_max_time() if max_time is None else max_time
        sign = 1.0 if direction == "forward" else -1.0
        pts = [self.model.as_chart_point(p) for p in points]
        count = len(pts)
        charts = np.array([p.chart for p in pts], dtype=int)
        w = np.array([p.coords for p in pts], dtype=complex).reshape(count, self.model.dim)
        result = [None] * count
        s_reached = np.zeros(count)
        done = np.zeros(count, dtype=bool)
        if self.max_rate == 0:
            return [(None, 0.0)] * count
        chunk = _CHUNK_LOG_GROWTH / self.max_rate
        s = 0.0
        radius = self.options.switch_radius
        centers = [self.model.chart_center(c) for c in self.model.charts]
        while True:
            # near p but with a nonzero expanding coordinate is not convergence:
            # such points are about to be pushed away from p
            expanding = (sign * self.exponents[charts]) < 0
            leaving = np.any((w != 0) & expanding, axis=1)
            norms = np.linalg.norm(w, axis=1)
            newly = (~done) & (norms < tol) & ~leaving
            for i in np.nonzero(newly)[0]:
                result[i] = centers[charts[i]]
                s_reached[i] = s
            done |= newly
            if done.all() or s >= max_time:
                break
            ds = min(chunk, max_time - s)
            active = ~done
            with np.errstate(under="ignore"):
                w[active] = w[active] * np.exp(-sign * self.exponents[charts[active]] * ds)
            s += ds
            out = active & (np.abs(w).max(axis=1) > radius)
            for i in np.nonzero(out)[0]:
                q = self.model.best_chart(ChartPoint(charts[i], w[i]))
                charts[i] = q.chart
                w[i] = q.coords
        return [(result[i], float(sign * s_reached[i])) for i in range(count)]

    def limit(self, x, direction="forward") -> LimitResult:
        """Forward/backward limit; analytic and trajectory answers must agree."""
        if direction not in ("forward", "backward"):
            raise ValueError("direction must be 'forward' or 'backward'")
        analytic = self.analytic_limit(x, direction)
        traced, s_reached = self.follow(x, direction)
        if analytic is not None:
            if traced is not None and traced != analytic:
                raise InconsistencyError(
                    f"{direction} limit: trajectory reached {traced}, argmin gives {analytic}")
            return LimitResult(analytic, direction, s_reached, "analytic")
        if traced is None:
            raise InconsistencyError(
                f"{direction} trajectory did not converge within s = {self.default_max_time():.6g}")
        return LimitResult(traced, direction, s_reached, "trajectory")

    # -- spectra ---------------------------------------------------------------
    def time_one_map_eigenvalues(self, p) -> TimeOneSpectrum:
        return time_one_spectrum(self.model, self.a0, p)


def time_one_spectrum(model, a0, p) -> TimeOneSpectrum:
    """Eigenvalues of the differential of the time-one map at ``p``.

    Each tangential weight contributes ``exp(-a_i)`` twice (real and
    imaginary direction). Hyperbolic iff no exponent is exactly zero.
    """
    a0 = _as_generator(a0)
    rec = model.fixed_point(p)
    exps = [exponent(m, a0) for m in rec.tangential_weights]
    eig = []
    for e in exps:
        eig.extend([math.exp(-e.scaled)] * 2)
    return TimeOneSpectrum(eig, exps, all(e.value != 0 for e in exps))


def flow_equivariance_check(model, a0, trials=1000, tol=1e-9, seed=0, flow=None,
                            s_range=(-5.0, 5.0)):
    """``phi_s(t . x) = t . phi_s(x)`` on random ``(t, x, s)``.

    ``flow`` may replace the exact flow (a callable ``(point, s) -> point``),
    which is how corrupted fields are fed in as negative controls.
    """
    engine = a0 if isinstance(a0, GradientLikeFlow) else GradientLikeFlow(model, a0)
    flow = engine.flow_exact if flow is None else flow
    rng = np.random.default_rng(seed)
    worst = 0.0
    witnesses = []
    samples = model.sample(rng, trials)
    for x in samples:
        t = TorusElement.random(model.rank, rng)
        s = float(rng.uniform(*s_range))
        x = model.as_chart_point(x)
        lhs = flow(model.act_point(t, x), s)
        rhs = model.act_point(t, flow(x, s))
        d = engine.distance(lhs, rhs)
        if not d < tol and len(witnesses) < 5:
            witnesses.append({"s": s, "angles": list(t.angles), "distance": d})
        worst = max(worst, d)
    return Verdict("flow_equivariance", worst < tol, worst, witnesses,
                   {"trials": trials, "tolerance": tol})


# module-level conveniences mirroring the operation names

def vector_field(model, a0, x):
    return GradientLikeFlow(model, a0, check=False).vector_field(model.as_chart_point(x))


def flow_exact(model, a0, x, s):
    return GradientLikeFlow(model, a0).flow_exact(x, s)


def flow_rk4(model, a0, x, s, options=None):
    return GradientLikeFlow(model, a0, options).flow_rk4(x, s)


def limit(model, a0, x, direction="forward"):
    return GradientLikeFlow(model, a0).limit(x, direction).point_id


def time_one_map_eigenvalues(model, a0, p):
    return time_one_spectrum(model, a0, p)


def exact_exponent_table(model, a0) -> dict:
    """``{fixed point id: [Fraction, ...]}`` of exact pairings."""
    a0 = _as_generator(a0)
    return {r.id: [Fraction(pairing(m, a0)) for m in r.tangential_weights]
            for r in model.fixed_points()}


__all__ = [
    "GradientLikeFlow", "TrajectoryOptions", "FlowState", "LimitResult", "TimeOneSpectrum",
    "vector_field", "flow_exact", "flow_rk4", "limit", "flow_equivariance_check",
    "time_one_map_eigenvalues", "time_one_spectrum", "hyperbolicity_witnesses",
    "exact_exponent_table",
]
