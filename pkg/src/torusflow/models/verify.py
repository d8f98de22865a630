"""Checks that an atlas is a torus-representation covering."""

from collections import Counter
from itertools import permutations

import numpy as np

from ..errors import DomainError, InferenceError
from ..torus import TorusElement, Weight
from ..verdict import Verdict
from .base import ChartPoint, rho

INFERENCE_RESIDUAL = 1e-6


def infer_chart_weights_numeric(model, chart, radius=1e-3, delta=1e-4, trials=3, seed=0):
    """Recover the weights of the linear action on ``chart`` by finite differences.

    Small points near the chart origin are pushed through the ambient action
    of ``exp(+-delta e_k)``; the phase change of coordinate ``i`` divided by
    ``2 pi delta`` is the ``k``-th entry of its weight. Raises
    :class:`InferenceError` when an entry is not within 1e-6 of an integer or
    a coordinate picks up a modulus change (the chart is not diagonal).
    """
    rng = np.random.default_rng(seed)
    n, r = model.dim, model.rank
    estimates = []
    worst = 0.0
    for _ in range(trials):
        w = radius * np.exp(2j * np.pi * rng.random(n))
        x = model.reference_representation(model.chart_inverse(ChartPoint(chart, w)))
        base = model.chart_map(chart, x).coords
        m = np.empty((n, r))
        for k in range(r):
            e = np.zeros(r)
            e[k] = delta
            plus = model.chart_map(chart, model.act(TorusElement(e), x)).coords / base
            minus = model.chart_map(chart, model.act(TorusElement(-e), x)).coords / base
            worst = max(worst, float(np.max(np.abs(np.abs(plus) - 1.0))),
                        float(np.max(np.abs(np.abs(minus) - 1.0))))
            m[:, k] = (np.angle(plus) - np.angle(minus)) / (4.0 * np.pi * delta)
        estimates.append(m)
    est = np.mean(estimates, axis=0)
    spread = max(float(np.max(np.abs(e - est))) for e in estimates)
    rounded = np.rint(est)
    residual = max(float(np.max(np.abs(est - rounded))), spread, worst)
    if residual >= INFERENCE_RESIDUAL:
        raise InferenceError(
            f"chart {chart}: weight inference residual {residual:.3g} >= {INFERENCE_RESIDUAL}"
        )
    return [Weight(int(v) for v in row) for row in rounded]


def infer_tangential_weights_numeric(model, p, **kwargs):
    rec = model.fixed_point(p)
    return infer_chart_weights_numeric(model, rec.home_chart, **kwargs)


def equivariance_violation(model, chart, weights, t, x) -> float:
    lhs = model.chart_map(chart, model.act(t, x)).coords
    rhs = rho(weights, t) * model.chart_map(chart, x).coords
    return float(np.linalg.norm(lhs - rhs))


def verify_chart_equivariance(model, p, trials=1000, tol=1e-10, seed=0, weights=None):
    """Compare ``chart(t . x)`` with ``rho_p(t) chart(x)`` on random ``(t, x)``."""
    rec = model.fixed_point(p)
    chart = rec.home_chart
    weights = rec.tangential_weights if weights is None else weights
    rng = np.random.default_rng(seed)
    worst = 0.0
    witnesses = []
    for _ in range(trials):
        t = TorusElement.random(model.rank, rng)
        x = model.sample_in_chart(rng, chart)
        v = equivariance_violation(model, chart, weights, t, x)
        if v >= tol and len(witnesses) < 5:
            witnesses.append({"angles": list(t.angles), "violation": v})
        worst = max(worst, v)
    return Verdict(
        f"equivariance:{rec.id}", worst < tol, worst, witnesses,
        {"chart": model.chart_label(chart), "trials": trials, "tolerance": tol,
         "weights": [w.to_json() for w in weights]},
    )


def verify_covering(model, samples=10000, seed=0, charts=None):
    """Every sample must lie in at least one chart domain of ``charts``."""
    rng = np.random.default_rng(seed)
    pts = model.sample(rng, samples) if isinstance(samples, int) else list(samples)
    charts = model.charts if charts is None else list(charts)
    hits = Counter()
    misses = 0
    witnesses = []
    for x in pts:
        covered = False
        for c in charts:
            if model.in_domain(c, x):
                hits[c] += 1
                covered = True
        if not covered:
            misses += 1
            if len(witnesses) < 5:
                witnesses.append(_describe_point(x))
    return Verdict(
        "covering", misses == 0, float(misses), witnesses,
        {"samples": len(pts), "hits": {model.chart_label(c): hits[c] for c in charts}},
    )


def _describe_point(x):
    if isinstance(x, ChartPoint):
        return {"chart": x.chart, "coords": [[c.real, c.imag] for c in x.coords]}
    if hasattr(x, "s"):
        return {"z": [[c.real, c.imag] for c in x.z], "s": x.s}
    return {"homogeneous": [[complex(c).real, complex(c).imag] for c in x]}


def weight_signature(weights):
    return tuple(sorted(w.components for w in weights))


def match_fixed_point_weights(model_a, model_b):
    """Bijection between fixed points with identical tangential weight multisets.

    Brute force over all orderings, so only meant for a handful of points.
    Returns a dict ``id_a -> id_b`` or None.
    """
    fa, fb = model_a.fixed_points(), model_b.fixed_points()
    if len(fa) != len(fb):
        return None
    sig_a = [weight_signature(r.tangential_weights) for r in fa]
    sig_b = [weight_signature(r.tangential_weights) for r in fb]
    for perm in permutations(range(len(fb))):
        if all(sig_a[i] == sig_b[j] for i, j in enumerate(perm)):
            return {fa[i].id: fb[j].id for i, j in enumerate(perm)}
    return None


def check_inferred_weights(model) -> Verdict:
    """Symbolic and numerically inferred weights must agree as multisets."""
    bad = []
    for rec in model.fixed_points():
        try:
            inferred = infer_tangential_weights_numeric(model, rec)
        except (InferenceError, DomainError) as exc:
            bad.append({"point": rec.id, "error": str(exc)})
            continue
        if Counter(inferred) != Counter(rec.tangential_weights):
            bad.append({"point": rec.id,
                        "symbolic": [w.to_json() for w in rec.tangential_weights],
                        "inferred": [w.to_json() for w in inferred]})
    return Verdict("weights", not bad, float(len(bad)), bad)
