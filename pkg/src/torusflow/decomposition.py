"""Morse / Bialynicki-Birula picture of a gradient-like torus flow.

Hyperbolicity, indices, Poincare polynomial, the convergence condition,
basins of attraction, and the connection poset between fixed points.
"""

from collections import Counter, defaultdict
from dataclasses import dataclass, field

import numpy as np

from .errors import GenericityError, InconsistencyError
from .flow import GradientLikeFlow, _as_generator, hyperbolicity_witnesses
from .models.base import ChartPoint, with_exponents
from .models.descriptors import model_to_descriptor
from .models.toric import ToricModel, h_vector
from .torus import exponent, pairing
from .verdict import Verdict

ORIENTATION = ("a_i > 0 => coordinate i is contracted forward in time; "
               "unstable_dim = 2 * #{i : a_i < 0}")
SEED_RADIUS = 1e-4
FIELD_ZERO_TOL = 1e-12


def verify_hyperbolic(model, a0) -> Verdict:
    """Exact check that every tangential weight pairs nonzero with a0."""
    a0 = _as_generator(a0)
    table = {}
    for rec in model.fixed_points():
        table[rec.id] = [str(pairing(m, a0)) for m in rec.tangential_weights]
    witnesses = hyperbolicity_witnesses(model, a0)
    return Verdict("hyperbolic", not witnesses, float(len(witnesses)), witnesses,
                   {"exponent_table": table})


def unstable_dim(record) -> int:
    if record.exponents is None:
        raise ValueError(f"{record.id}: exponents not computed")
    if any(e.value == 0 for e in record.exponents):
        raise GenericityError(f"{record.id}: zero flow exponent",
                              [{"point": record.id}])
    return 2 * sum(1 for e in record.exponents if e.value < 0)


def _records(model, a0):
    a0 = _as_generator(a0)
    bad = hyperbolicity_witnesses(model, a0)
    if bad:
        raise GenericityError(f"a0 = ({a0}) is not generic for this model", bad)
    return [with_exponents(r, [exponent(m, a0) for m in r.tangential_weights])
            for r in model.fixed_points()]


def poincare_polynomial(model, a0) -> list:
    """Coefficient ``k`` counts fixed points of unstable dimension ``k``."""
    coeffs = [0] * (2 * model.dim + 1)
    for rec in _records(model, a0):
        coeffs[unstable_dim(rec)] += 1
    return coeffs


def euler_characteristic(model, a0) -> int:
    chi = len(model.fixed_points())
    poincare = poincare_polynomial(model, a0)
    if sum(poincare) != chi:
        raise InconsistencyError(f"P(1) = {sum(poincare)} but there are {chi} fixed points")
    return chi


def _pairs(coords) -> list:
    return [[float(c.real), float(c.imag)] for c in coords]


def _sample(model, samples, seed):
    if isinstance(samples, int):
        return model.sample(np.random.default_rng(seed), samples, strata=True)
    return list(samples)


@dataclass
class BasinPartition:
    forward: list
    backward: list
    basin_counts: dict
    co_basin_counts: dict
    chart_membership: dict
    analytic_agreement: float = None
    unconverged: int = 0


def basin_classify(model, a0, samples=10000, seed=0, strict=True, engine=None) -> BasinPartition:
    """Assign every sample its forward and backward limit.

    Trajectory following is always run; on projective models the argmin cell
    description is run as well and the two must agree on every sample
    (``strict`` raises :class:`InconsistencyError` otherwise).
    """
    flow = engine or GradientLikeFlow(model, a0)
    pts = [model.as_chart_point(x) for x in _sample(model, samples, seed)]
    fwd = [r[0] for r in flow.follow_batch(pts, "forward")]
    bwd = [r[0] for r in flow.follow_batch(pts, "backward")]
    ids = [r.id for r in model.fixed_points()]
    agreement = None
    if flow.has_analytic_limits:
        hits = 0
        mismatches = []
        for i, p in enumerate(pts):
            af, ab = flow.analytic_limit(p, "forward"), flow.analytic_limit(p, "backward")
            if af == fwd[i] and ab == bwd[i]:
                hits += 1
            elif len(mismatches) < 5:
                mismatches.append((i, af, fwd[i], ab, bwd[i]))
        agreement = hits / len(pts) if pts else 1.0
        if strict and mismatches:
            raise InconsistencyError(
                f"trajectory and analytic limits disagree on {len(pts) - hits} samples: {mismatches}")
    membership = defaultdict(Counter)
    for p, lim in zip(pts, fwd):
        for c in model.charts:
            if model.transition(p, c) is not None:
                membership[lim][model.chart_label(c)] += 1
    return BasinPartition(
        fwd, bwd,
        {i: sum(1 for x in fwd if x == i) for i in ids},
        {i: sum(1 for x in bwd if x == i) for i in ids},
        {k: dict(sorted(v.items())) for k, v in sorted(membership.items(), key=lambda kv: str(kv[0]))},
        agreement,
        sum(1 for x in fwd + bwd if x is None),
    )


def verify_convergence_condition(model, a0, samples=10000, seed=0, engine=None) -> Verdict:
    """Fixed sets agree, W^u(p) meets W^s(p) only in p, and every sample has
    fixed-point limits in both time directions."""
    flow = engine or GradientLikeFlow(model, a0)  # refuses non-generic a0 before sampling
    records = flow.fixed_point_records()
    witnesses = []

    # (1) the field vanishes at every fixed point and the flow fixes it
    worst_field = 0.0
    for rec in records:
        origin = ChartPoint(rec.home_chart, np.zeros(model.dim))
        v = float(np.linalg.norm(flow.vector_field(origin)))
        moved = flow.flow_exact(origin, 1.0).norm()
        worst_field = max(worst_field, v, moved)
        if v > FIELD_ZERO_TOL or moved > FIELD_ZERO_TOL:
            witnesses.append({"condition": 1, "point": rec.id, "field_norm": v})

    # (2) stable and unstable coordinate subspaces meet only at the origin
    for rec in records:
        a = np.array([e.scaled for e in rec.exponents])
        stable = set(np.nonzero(a > 0)[0])
        unstable = set(np.nonzero(a < 0)[0])
        if stable & unstable or len(stable) + len(unstable) != model.dim:
            witnesses.append({"condition": 2, "point": rec.id, "reason": "subspaces overlap"})
            continue
        if stable and unstable:
            w = np.zeros(model.dim, dtype=complex)
            w[min(stable)] = 0.5
            w[min(unstable)] = 0.5
            for s in (5.0 / flow.min_rate, -5.0 / flow.min_rate):
                scaled = w * np.exp(-a * s)
                if not np.linalg.norm(scaled) > np.linalg.norm(w):
                    witnesses.append({"condition": 2, "point": rec.id,
                                      "reason": f"mixed point does not leave p at s={s}"})

    # (3) both limits exist for every sample
    pts = [model.as_chart_point(x) for x in _sample(model, samples, seed)]
    fwd = flow.follow_batch(pts, "forward")
    bwd = flow.follow_batch(pts, "backward")
    missing = [i for i, (f, b) in enumerate(zip(fwd, bwd)) if f[0] is None or b[0] is None]
    for i in missing[:5]:
        witnesses.append({"condition": 3, "sample": i, "chart": pts[i].chart, "coords": _pairs(pts[i].coords)})
    return Verdict(
        "convergence", not witnesses, float(len(missing)) + worst_field, witnesses,
        {"samples": len(pts), "unconverged": len(missing),
         "limit_tolerance": flow.options.tolerance},
    )


@dataclass
class PosetEdge:
    source: str
    target: str
    witness: list

    def to_json(self):
        return {"source": self.source, "target": self.target, "witness": self.witness}


@dataclass
class PosetResult:
    edges: list
    inconclusive: list = field(default_factory=list)


def connection_poset(model, a0, per_point_samples=8, seed=0, engine=None) -> PosetResult:
    """Seed points 1e-4 away from each fixed point along unstable directions,
    flow them forward, and record which fixed points they reach."""
    flow = engine or GradientLikeFlow(model, a0)
    rng = np.random.default_rng(seed)
    max_time = flow.default_max_time()
    edges = {}
    inconclusive = []
    for rec in flow.fixed_point_records():
        a = np.array([e.scaled for e in rec.exponents])
        unstable = np.nonzero(a < 0)[0]
        if unstable.size == 0:
            continue
        seeds = []
        for i in unstable:
            w = np.zeros(model.dim, dtype=complex)
            w[i] = SEED_RADIUS * np.exp(2j * np.pi * rng.random())
            seeds.append(w)
        for _ in range(per_point_samples):
            g = rng.standard_normal(unstable.size) + 1j * rng.standard_normal(unstable.size)
            w = np.zeros(model.dim, dtype=complex)
            w[unstable] = SEED_RADIUS * g / np.linalg.norm(g)
            seeds.append(w)
        pts = [ChartPoint(rec.home_chart, w) for w in seeds]
        for p, (target, _) in zip(pts, flow.follow_batch(pts, "forward", max_time=max_time)):
            if target is None or target == rec.id:
                inconclusive.append({"source": rec.id, "seed": _pairs(p.coords)})
                continue
            key = (rec.id, target)
            if key not in edges:
                edges[key] = PosetEdge(rec.id, target, _pairs(p.coords))
    return PosetResult(list(edges.values()), inconclusive)


def index_duality(model, a0) -> Verdict:
    """unstable_dim under a0 plus unstable_dim under -a0 equals 2n everywhere."""
    a0 = _as_generator(a0)
    plus = {r.id: unstable_dim(r) for r in _records(model, a0)}
    minus = {r.id: unstable_dim(r) for r in _records(model, -a0)}
    bad = [{"point": k, "index": plus[k], "dual_index": minus[k]}
           for k in plus if plus[k] + minus[k] != 2 * model.dim]
    return Verdict("index_duality", not bad, float(len(bad)), bad)


@dataclass
class DecompositionReport:
    model: dict
    a0: list
    seed: int
    samples: int
    fixed_points: list
    basin_counts: dict
    co_basin_counts: dict
    chart_membership: dict
    poincare: list
    euler: int
    poset_edges: list
    inconclusive_edges: list
    verdicts: dict
    tolerances: dict
    h_vector: list = None
    sample_points: list = field(default=None, repr=False)
    forward_limits: list = field(default=None, repr=False)
    backward_limits: list = field(default=None, repr=False)

    @property
    def passed(self) -> bool:
        return all(v.passed for v in self.verdicts.values())

    def to_json(self) -> dict:
        out = {
            "orientation": ORIENTATION,
            "model": self.model,
            "a0": self.a0,
            "seed": self.seed,
            "samples": self.samples,
            "tolerances": self.tolerances,
            "fixed_points": [r.to_json() for r in self.fixed_points],
            "basin_counts": self.basin_counts,
            "co_basin_counts": self.co_basin_counts,
            "chart_membership": self.chart_membership,
            "poincare": self.poincare,
            "euler": self.euler,
            "poset_edges": [e.to_json() for e in self.poset_edges],
            "inconclusive_edges": self.inconclusive_edges,
            "verdicts": {k: v.to_json() for k, v in self.verdicts.items()},
            "pass": self.passed,
        }
        if self.h_vector is not None:
            out["h_vector"] = self.h_vector
        return out


def decompose(model, a0, samples=2000, seed=0, per_point_samples=8,
              options=None) -> DecompositionReport:
    """Run the whole pipeline; raises GenericityError for non-generic a0."""
    a0 = _as_generator(a0)
    flow = GradientLikeFlow(model, a0, options)
    records = flow.fixed_point_records()
    index = {r.id: r.unstable_dim for r in records}
    verdicts = {"hyperbolic": verify_hyperbolic(model, a0)}

    pts = [model.as_chart_point(x) for x in _sample(model, samples, seed)]
    partition = basin_classify(model, a0, pts, strict=False, engine=flow)
    if partition.analytic_agreement is not None:
        verdicts["basin_agreement"] = Verdict(
            "basin_agreement", partition.analytic_agreement == 1.0,
            1.0 - partition.analytic_agreement, [], {"agreement": partition.analytic_agreement})
    verdicts["convergence"] = verify_convergence_condition(model, a0, pts, engine=flow)

    poset = connection_poset(model, a0, per_point_samples, seed, engine=flow)
    bad_edges = [e.to_json() for e in poset.edges if not index[e.source] > index[e.target]]
    verdicts["poset_index"] = Verdict("poset_index", not bad_edges and not poset.inconclusive,
                                      float(len(bad_edges) + len(poset.inconclusive)), bad_edges)

    poincare = poincare_polynomial(model, a0)
    euler = len(records)
    verdicts["euler"] = Verdict("euler", sum(poincare) == euler and not any(poincare[1::2]),
                                float(abs(sum(poincare) - euler)), [],
                                {"poincare_at_1": sum(poincare), "fixed_points": euler})
    verdicts["index_duality"] = index_duality(model, a0)
    hv = None
    if isinstance(model, ToricModel):
        hv = h_vector(model.fan)
        even = poincare[0::2]
        verdicts["h_vector"] = Verdict("h_vector", even == hv, 0.0 if even == hv else 1.0, [],
                                       {"h_vector": hv, "poincare_even": even})
    tolerances = {
        "limit_detection": flow.options.tolerance,
        "switch_margin": flow.options.switch_margin,
        "seed_radius": SEED_RADIUS,
        "max_time": flow.default_max_time(),
        "field_zero": FIELD_ZERO_TOL,
    }
    return DecompositionReport(
        model_to_descriptor(model), a0.to_json(), seed, len(pts), records,
        partition.basin_counts, partition.co_basin_counts, partition.chart_membership,
        poincare, euler, poset.edges, poset.inconclusive, verdicts, tolerances, hv,
        pts, partition.forward, partition.backward,
    )
