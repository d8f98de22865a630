from math import exp, log, pi

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from torusflow.errors import GenericityError, ModelError, SwitchingThrashError
from torusflow.flow import (
    GradientLikeFlow,
    TrajectoryOptions,
    flow_equivariance_check,
    limit,
    time_one_map_eigenvalues,
    vector_field,
)
from torusflow.models import ChartPoint, ProjectiveModel, SphereModel, ToricModel, hirzebruch_fan

from oracles import cp_affine, cp_argmin_limit, cp_flow, cp_label, cp_rates, frac_vec, numeric_jacobian

CP1, CP2 = ProjectiveModel(1), ProjectiveModel(2)
F1 = ToricModel(hirzebruch_fan(1))
A0 = "1/3,1/7"


def test_vector_field_examples():
    assert np.allclose(vector_field(CP1, "1", ChartPoint(0, [1.0])), [-2 * pi, 0])
    v = vector_field(CP2, A0, ChartPoint(0, [1.0, 1.0]))
    assert np.allclose(v, [-2 * pi / 3, 0, -2 * pi / 7, 0], rtol=1e-15)
    for model in (CP2, F1):
        eng = GradientLikeFlow(model, A0)
        for c in model.charts:
            assert not np.any(eng.vector_field(ChartPoint(c, np.zeros(2))))


def test_flow_exact_examples():
    eng = GradientLikeFlow(CP1, "1")
    y = eng.flow_exact(np.array([1, 1]), log(2) / (2 * pi))
    assert y.chart == 0 and abs(y.coords[0] - 0.5) < 1e-14
    for model in (CP2, F1):
        eng = GradientLikeFlow(model, A0)
        for c in model.charts:
            origin = ChartPoint(c, np.zeros(2))
            for s in (-40.0, 3.0, 100.0):
                assert eng.flow_exact(origin, s).norm() == 0.0


@pytest.mark.parametrize("n, weights, a0", [
    (1, None, "1"),
    (2, None, A0),
    (3, None, "1/3,1/7,1/11"),
    (2, [(0, 0), (2, 1), (-1, 3)], "1/5,-1/13"),
])
def test_projective_flow_matches_homogeneous_oracle(n, weights, a0):
    model = ProjectiveModel(n, weights)
    eng = GradientLikeFlow(model, a0)
    rates = cp_rates(n, frac_vec(a0), weights)
    rng = np.random.default_rng(n)
    for z in model.sample(rng, 200):
        s = float(rng.uniform(-3, 3))
        y = eng.flow_exact(z, s)
        expected = cp_flow(z, rates, s)
        assert np.allclose(cp_affine(expected, y.chart), y.coords, atol=1e-10)


def test_rk4_examples():
    eng = GradientLikeFlow(CP1, "1")
    y = eng.flow_rk4(np.array([1, 1]), log(2) / (2 * pi), h=1e-2)
    assert abs(y.coords[0] - 0.5) < 1e-7
    eng = GradientLikeFlow(CP2, A0)
    start = eng.model.as_chart_point(np.array([1, 1, 1]))
    times = np.linspace(0, 5, 26)
    snaps = eng.rk4_batch([start], 5.0, h=1e-3, checkpoints=times)
    dev = max(eng.distance(eng.flow_exact(start, t), snap[0]) for t, snap in zip(times, snaps))
    assert dev < 1e-8


def test_rk4_stays_at_fixed_points():
    eng = GradientLikeFlow(CP2, A0)
    origins = [ChartPoint(c, np.zeros(2)) for c in CP2.charts]
    for y in eng.rk4_batch(origins, 100.0, h=1e-2):
        assert y.norm() < 1e-12


def _rk4_error(eng, starts, h, s_end=10.0):
    times = np.linspace(0, s_end, 11)
    snaps = eng.rk4_batch(starts, s_end, h=h, checkpoints=times)
    worst = 0.0
    for t, snap in zip(times, snaps):
        for x, y in zip(starts, snap):
            worst = max(worst, eng.distance(eng.flow_exact(x, t), y))
    return worst


def test_rk4_is_fourth_order():
    eng = GradientLikeFlow(CP2, A0)
    start = [CP2.as_chart_point(np.array([1, 1, 1]))]
    ratio = _rk4_error(eng, start, 1e-2) / _rk4_error(eng, start, 5e-3)
    assert 12 <= ratio <= 20


def test_switching_thrash_is_reported():
    class Stuck(ProjectiveModel):
        def best_chart(self, point):
            return point

    eng = GradientLikeFlow(Stuck(1), "1")
    with pytest.raises(SwitchingThrashError):
        eng.rk4_batch([ChartPoint(0, [9.9])], -2.0, h=1e-2)


def test_limit_examples():
    assert limit(CP1, "1", np.array([1, 1])) == "[1:0]"
    assert limit(CP1, "1", np.array([1, 1]), "backward") == "[0:1]"
    assert limit(CP2, A0, np.array([0, 1, 1])) == "[0:0:1]"
    for rec in F1.fixed_points():
        origin = ChartPoint(rec.home_chart, np.zeros(2))
        eng = GradientLikeFlow(F1, A0)
        for d in ("forward", "backward"):
            res = eng.limit(origin, d)
            assert res.point_id == rec.id and res.s_reached == 0.0
    res = GradientLikeFlow(CP2, A0).limit(np.array([1, 1, 1]), "forward")
    assert set(res.to_json()) == {"point_id", "direction", "s_reached"}


def test_limits_agree_with_argmin_oracle():
    eng = GradientLikeFlow(CP2, A0)
    rates = cp_rates(2, frac_vec(A0))
    rng = np.random.default_rng(5)
    pts = CP2.sample(rng, 500)
    for d in ("forward", "backward"):
        traced = [r[0] for r in eng.follow_batch(pts, d)]
        assert traced == [cp_label(2, cp_argmin_limit(z, rates, d)) for z in pts]


def test_tie_and_nongeneric_generator_refused():
    with pytest.raises(GenericityError):
        GradientLikeFlow(CP2, "1/3,1/3")
    eng = GradientLikeFlow(CP2, "1/3,1/3", check=False)
    with pytest.raises(GenericityError):
        eng.analytic_limit(np.array([0, 1, 1]))
    with pytest.raises(ModelError):
        GradientLikeFlow(SphereModel(1), "1")


def test_time_one_eigenvalues():
    spec = time_one_map_eigenvalues(CP1, "1", "[1:0]")
    assert spec.eigenvalues == pytest.approx([exp(-2 * pi)] * 2, rel=1e-14)
    spec = time_one_map_eigenvalues(CP2, A0, "[0:1:0]")
    assert sorted(spec.eigenvalues) == pytest.approx(
        sorted([exp(2 * pi / 3)] * 2 + [exp(8 * pi / 21)] * 2), rel=1e-14)
    degenerate = time_one_map_eigenvalues(CP2, "1/3,1/3", "[0:1:0]")
    assert not degenerate.hyperbolic and 1.0 in degenerate.eigenvalues


@pytest.mark.parametrize("model", [CP2, F1], ids=repr)
def test_time_one_eigenvalues_match_numeric_linearization(model):
    eng = GradientLikeFlow(model, A0)
    for rec in model.fixed_points():
        def time_one(xy, c=rec.home_chart):
            y = eng.flow_exact(ChartPoint.from_real(c, xy), 1.0)
            return model.transition(y, c).real()

        jac = numeric_jacobian(time_one, np.zeros(4), eps=1e-7)
        numeric = np.sort(np.linalg.eigvals(jac).real)
        exact = np.sort(eng.time_one_map_eigenvalues(rec.id).eigenvalues)
        assert np.allclose(numeric, exact, rtol=1e-6)


# -- invariants ------------------------------------------------------------------

def test_flow_equivariance_cp2():
    v = flow_equivariance_check(CP2, A0, trials=1000, tol=1e-9)
    assert v.passed, v.witnesses
    assert flow_equivariance_check(F1, A0, trials=300, tol=1e-9).passed


def test_flow_equivariance_identity_is_exact():
    eng = GradientLikeFlow(CP2, A0)
    rng = np.random.default_rng(2)
    from torusflow.torus import TorusElement

    e = TorusElement.identity(2)
    for z in CP2.sample(rng, 50):
        x = CP2.as_chart_point(z)
        assert np.array_equal(eng.flow_exact(CP2.act_point(e, x), 1.5).coords,
                              eng.flow_exact(x, 1.5).coords)


def test_corrupted_flow_fails_equivariance():
    eng = GradientLikeFlow(CP2, A0)

    def corrupted(x, s):
        y = eng.flow_exact(x, s)
        return ChartPoint(y.chart, y.coords + 0.1 * s * np.conj(y.coords))

    assert not flow_equivariance_check(CP2, A0, trials=100, flow=corrupted).passed


def test_inconsistent_chart_exponents_break_the_flow():
    """Perturbing exponents chart by chart is still equivariant inside each
    chart, but the pieces no longer glue: the semigroup law fails."""
    eng = GradientLikeFlow(F1, A0)
    bad = GradientLikeFlow(F1, A0)
    bad.exponents = bad.exponents * (1 + 0.1 * np.arange(len(F1.charts)))[:, None]
    rng = np.random.default_rng(3)
    worst = 0.0
    for x in F1.sample(rng, 100, strata=False):
        x = F1.as_chart_point(x)
        one = bad.flow_exact(x, 6.0)
        two = bad.flow_exact(bad.flow_exact(x, 3.0), 3.0)
        worst = max(worst, F1.distance(one, two))
        assert F1.distance(eng.flow_exact(x, 6.0), eng.flow_exact(eng.flow_exact(x, 3.0), 3.0)) < 1e-9
    assert worst > 1e-3


@pytest.mark.parametrize("model", [CP2, F1], ids=repr)
def test_zero_set_is_the_fixed_set(model):
    eng = GradientLikeFlow(model, A0)
    rng = np.random.default_rng(0)
    for x in model.sample(rng, 10000, strata=False):
        assert eng.field_norm(model.as_chart_point(x)) > 1e-3


seeds = st.integers(0, 2**32 - 1)
times = st.floats(-3, 3, allow_nan=False)


@given(seeds, times, times)
def test_semigroup_law(seed, s, t):
    rng = np.random.default_rng(seed)
    for model in (CP2, F1):
        eng = GradientLikeFlow(model, A0)
        x = model.as_chart_point(model.sample(rng, 1)[0])
        one = eng.flow_exact(x, s + t)
        two = eng.flow_exact(eng.flow_exact(x, t), s)
        assert model.distance(one, two) < 1e-9


@given(seeds, st.floats(-20, 20, allow_nan=False))
def test_limits_are_flow_invariant(seed, s):
    rng = np.random.default_rng(seed)
    for model in (CP2, F1):
        eng = GradientLikeFlow(model, A0)
        x = model.as_chart_point(model.sample(rng, 1)[0])
        y = eng.flow_exact(x, s)
        for d in ("forward", "backward"):
            assert eng.follow(x, d)[0] == eng.follow(y, d)[0]


@given(seeds)
def test_conjugate_generator_swaps_limits(seed):
    rng = np.random.default_rng(seed)
    for model in (CP2, F1):
        plus = GradientLikeFlow(model, A0)
        minus = GradientLikeFlow(model, "-1/3,-1/7")
        pts = model.sample(rng, 20)
        assert [r[0] for r in plus.follow_batch(pts, "forward")] == \
            [r[0] for r in minus.follow_batch(pts, "backward")]
        assert [r[0] for r in plus.follow_batch(pts, "backward")] == \
            [r[0] for r in minus.follow_batch(pts, "forward")]


def test_trajectory_options_validation():
    with pytest.raises(ValueError):
        TrajectoryOptions(h=0)
    with pytest.raises(ValueError):
        TrajectoryOptions(switch_margin=1.5)
    assert TrajectoryOptions().switch_radius == pytest.approx(10.0)
