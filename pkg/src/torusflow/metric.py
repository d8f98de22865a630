"""Chart metrics, a bump-function partition of unity and decay of the field norm.

Each chart carries the diagonal metric with entries ``exp(-|x_i|)`` and
``exp(-|y_i|)`` in its real coordinates ``w_i = x_i + i y_i``; the charts are
glued by a partition of unity. The absolute value makes the chart metric only
continuous across coordinate hyperplanes. Nothing here differentiates the
metric, so the formula is used as is; a smooth replacement of ``|.|`` would be
needed before computing connections or geodesics.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .flow import GradientLikeFlow, _as_generator
from .models.base import ChartPoint
from .verdict import Verdict

BUMP_RADIUS = 10.0
DECAY_THRESHOLD = 1e-6
HORIZON_FACTOR = 60.0


def _real(coords) -> np.ndarray:
    coords = np.asarray(coords, dtype=complex)
    out = np.empty(coords.shape[:-1] + (2 * coords.shape[-1],))
    out[..., 0::2] = coords.real
    out[..., 1::2] = coords.imag
    return out


def metric_diagonal(coords, flat: bool = False) -> np.ndarray:
    """Diagonal of the chart metric at ``coords`` in interleaved real order.

    ``flat=True`` drops the exponential factor (Euclidean metric); it exists
    only as a negative control for the decay checks.
    """
    xy = _real(coords)
    if flat:
        return np.ones_like(xy)
    return np.exp(-np.abs(xy))


def _chart_coords(model, chart, x) -> np.ndarray:
    if isinstance(x, ChartPoint):
        if model is None or x.chart == chart:
            return x.coords
        q = model.transition(x, chart)
        if q is None:
            raise DomainError(f"point is outside chart {chart}")
        return q.coords
    if model is None:
        return np.asarray(x, dtype=complex)
    return model.chart_map(chart, x).coords


@dataclass(frozen=True)
class ChartMetric:
    """Diagonal metric of one chart, evaluated on tangent vectors in real coordinates."""

    model: object
    chart_id: int
    flat: bool = False

    def __call__(self, x, u, v) -> float:
        coords = _chart_coords(self.model, self.chart_id, x)
        diag = metric_diagonal(coords, self.flat)
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        if u.shape != diag.shape or v.shape != diag.shape:
            raise ValueError(f"tangent vectors must have length {diag.size}")
        return float(np.sum(u * v * diag))


def _chart_index(model, p) -> int:
    if isinstance(p, (int, np.integer)):
        return int(p)
    return model.fixed_point(p).home_chart


def chart_metric_eval(model, p, x, u, v, flat: bool = False) -> float:
    """Evaluate the metric of the chart of fixed point ``p`` on ``u``, ``v`` at ``x``.

    ``p`` is a fixed-point id or a chart index; ``x`` is an ambient point or a
    :class:`ChartPoint` (transitioned into the chart if needed).

    Raises
    ------
    DomainError
        If ``x`` does not lie in the chart.
    """
    return ChartMetric(model, _chart_index(model, p), flat)(x, u, v)


class PartitionOfUnity:
    """Normalized bumps ``exp(1 / (|w|^2 / R^2 - 1))`` supported in ``|w| < R``.

    The bump of chart ``c`` is evaluated in the chart coordinates of ``c`` and
    vanishes where the point is outside the chart or at distance ``>= R`` from
    the chart origin.
    """

    def __init__(self, model, radius: float = BUMP_RADIUS):
        self.model = model
        self.radius = float(radius)

    def bump(self, chart: int, x: ChartPoint) -> float:
        q = self.model.transition(x, chart)
        if q is None or not np.all(np.isfinite(q.coords)):
            return 0.0
        r2 = float(np.sum(np.abs(q.coords) ** 2)) / self.radius ** 2
        if r2 >= 1.0:
            return 0.0
        return float(np.exp(1.0 / (r2 - 1.0)))

    def support(self, chart: int) -> dict:
        return {"chart": chart, "label": self.model.chart_label(chart), "radius": self.radius}

    def __call__(self, x) -> np.ndarray:
        """Weights ``rho_c(x)`` for every chart ``c``; they sum to one."""
        x = self.model.as_chart_point(x)
        b = np.array([self.bump(c, x) for c in self.model.charts])
        total = b.sum()
        if total == 0:
            raise DomainError("no bump is positive at this point")
        return b / total


def chart_field_norm(engine: GradientLikeFlow, chart: int, coords, flat: bool = False) -> float:
    """Norm of the gradient-like field in the metric of ``chart`` at ``coords``."""
    coords = np.asarray(coords, dtype=complex)
    xi = _real(-engine.exponents[chart] * coords)
    return float(np.sqrt(np.sum(xi * xi * metric_diagonal(coords, flat))))


def global_field_norm(model, a0, pou, x, engine=None, flat: bool = False) -> float:
    """Norm of the field at ``x`` in the glued metric ``sum_c rho_c g_c``."""
    engine = engine or GradientLikeFlow(model, a0)
    x = model.as_chart_point(x)
    weights = pou(x)
    total = 0.0
    for c, rho in zip(model.charts, weights):
        if rho == 0.0:
            continue
        q = model.transition(x, c)
        total += rho * chart_field_norm(engine, c, q.coords, flat) ** 2
    return float(np.sqrt(total))


def norm_along_flow_closed_form(start, a, s) -> float:
    """Chart norm of the field at ``start * exp(-a s)`` from the start coordinates.

    ``start`` holds the real coordinates ``(p_1, q_1, ..., p_n, q_n)``, ``a`` the
    exponents ``a_1..a_n``. Evaluated in log space, so the double-exponential
    factor of expanding directions underflows cleanly to zero.
    """
    pq = np.asarray(start, dtype=float)
    a = np.repeat(np.asarray(a, dtype=float), 2)
    s = float(s)
    nz = (pq != 0) & (a != 0)
    if not np.any(nz):
        return 0.0
    pq, a = pq[nz], a[nz]
    with np.errstate(over="ignore"):
        scale = np.exp(-a * s)
        log_terms = 2 * np.log(np.abs(a * pq)) - 2 * a * s - np.abs(pq) * scale
    return float(np.sqrt(np.sum(np.exp(log_terms))))


def decay_grid(engine: GradientLikeFlow, points: int = 41, factor: float = HORIZON_FACTOR) -> np.ndarray:
    """Times ``0 .. factor / min|a|``: slow directions get a proportionally longer horizon."""
    return np.linspace(0.0, factor / engine.min_rate, points)


def decay_curves(model, a0, samples=100, seed=0, s_grid=None, pou=None, flat=False):
    """Global field norm along exact flow lines, forward and backward.

    Returns rows ``(direction, sample, s, norm)``; the backward curves use
    ``-a0`` in forward time, so ``s`` is always nonnegative.
    """
    a0 = _as_generator(a0)
    pou = pou or PartitionOfUnity(model)
    starts = _starts(model, samples, seed)
    rows = []
    for direction, gen in (("forward", a0), ("backward", -a0)):
        engine = GradientLikeFlow(model, gen)
        grid = decay_grid(engine) if s_grid is None else np.asarray(s_grid, dtype=float)
        for i, x in enumerate(starts):
            for s in grid:
                y = engine.flow_exact(x, s)
                rows.append((direction, i, float(s),
                             global_field_norm(model, gen, pou, y, engine, flat)))
    return rows


def _starts(model, samples, seed):
    if isinstance(samples, int):
        rng = np.random.default_rng(seed)
        return [model.as_chart_point(x) for x in model.sample(rng, samples, strata=True)]
    return [model.as_chart_point(x) for x in samples]


def verify_closed_form(model, a0, samples=100, seed=0, s_max=None, tol=1e-10) -> Verdict:
    """Compare the closed form with the chart metric at flowed in-chart points."""
    engine = GradientLikeFlow(model, a0)
    rng = np.random.default_rng(seed)
    s_max = 5.0 / engine.min_rate if s_max is None else float(s_max)
    worst = 0.0
    witnesses = []
    for i in range(samples):
        chart = int(rng.integers(len(model.charts)))
        w = (rng.standard_normal(model.dim) + 1j * rng.standard_normal(model.dim)) / np.sqrt(2)
        s = float(rng.uniform(-s_max, s_max))
        a = engine.exponents[chart]
        flowed = w * np.exp(-a * s)
        xi = _real(-a * flowed)
        direct = np.sqrt(ChartMetric(model, chart)(ChartPoint(chart, flowed), xi, xi))
        closed = norm_along_flow_closed_form(_real(w), a, s)
        err = abs(direct - closed)
        worst = max(worst, err)
        if err > tol and len(witnesses) < 5:
            witnesses.append({"sample": i, "chart": chart, "s": s, "direct": direct, "closed": closed})
    return Verdict("closed_form", worst <= tol, worst, witnesses, {"samples": samples, "tolerance": tol})


def verify_norm_decay(model, a0, samples=100, seed=0, s_grid=None, threshold=DECAY_THRESHOLD,
                      flat: bool = False, chart_local: bool = False) -> Verdict:
    """Check that the field norm along every sampled flow line ends below ``threshold``.

    Both time directions are checked (backward via ``-a0``). With
    ``chart_local=True`` each trajectory stays in the chart it started in and
    is measured with that chart's metric only, without switching; this is the
    regime in which the ``flat=True`` control diverges on expanding
    directions.
    """
    a0 = _as_generator(a0)
    starts = _starts(model, samples, seed)
    pou = PartitionOfUnity(model)
    witnesses = []
    worst = 0.0
    finals = {}
    for direction, gen in (("forward", a0), ("backward", -a0)):
        engine = GradientLikeFlow(model, gen)
        grid = decay_grid(engine) if s_grid is None else np.asarray(s_grid, dtype=float)
        s_end = float(grid[-1])
        values = []
        for i, x in enumerate(starts):
            if chart_local:
                a = engine.exponents[x.chart]
                if flat:
                    with np.errstate(over="ignore"):
                        end = chart_field_norm(engine, x.chart, x.coords * np.exp(-a * s_end), flat=True)
                else:
                    end = norm_along_flow_closed_form(x.real(), a, s_end)
            else:
                end = global_field_norm(model, gen, pou, engine.flow_exact(x, s_end), engine, flat)
            values.append(end)
            if not end < threshold and len(witnesses) < 5:
                start = [[float(c.real), float(c.imag)] for c in x.coords]
                witnesses.append({"direction": direction, "sample": i, "chart": x.chart,
                                  "start": start, "s": s_end, "norm": end})
        finals[direction] = values
        worst = max(worst, max(values, default=0.0))
    passed = all(v < threshold for vals in finals.values() for v in vals)
    return Verdict(
        "decay", passed, worst, witnesses,
        {"samples": len(starts), "threshold": threshold, "chart_local": chart_local, "flat": flat},
    )
