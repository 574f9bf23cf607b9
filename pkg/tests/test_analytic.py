import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from maglattice.analytic import (
    AnalyticDomainError,
    AnalyticModel,
    AnalyticParams,
    SingularCurvature,
    analytic_field,
    analytic_jacobian,
    curvature_analytic,
    derive_params,
    dmin_heuristic,
    field_series,
    field_truncated,
    ideal_minima_grid,
    model_for_spec,
    printed_magnitude_eq7,
    zero_bias_magnitude,
)
from maglattice.config import BiasField
from maglattice.fieldmodel import maxwell_residuals
from maglattice.traps import hessian_numeric


@pytest.fixture
def params():
    return AnalyticParams.from_values(2000.0, 1.0, 2.0)


def test_b0_and_bref_arithmetic(params):
    assert params.b0 == pytest.approx(636.6198, rel=1e-6)
    assert 1 - math.exp(-2 * math.pi) == pytest.approx(0.998132, abs=1e-6)
    assert params.b_ref == pytest.approx(635.43, abs=0.01)
    assert params.beta * params.alpha == pytest.approx(math.pi, rel=1e-15)
    assert params.b_ref < params.b0


def test_bref_limits():
    assert AnalyticParams.from_values(2000.0, 1.0, 1e-12).b_ref == pytest.approx(0.0, abs=1e-8)
    assert AnalyticParams.from_values(2000.0, 1.0, 50.0).b_ref == pytest.approx(2000.0 / math.pi, rel=1e-12)


def test_unequal_hole_and_spacing_rejected(t1_spec):
    with pytest.raises(AnalyticDomainError, match="prism"):
        derive_params(t1_spec.replace(alpha_s=2.0))


def test_on_axis_field(params):
    z = 2.7
    b = field_truncated((0.0, 0.0, z), params)
    assert b.bx == 0.0 and b.by == 0.0
    assert b.bz == pytest.approx(2 * params.b_ref * math.exp(-math.pi * (z - 2.0)), rel=1e-14)


def test_zero_line(params):
    b = field_truncated((0.0, 1.0, 3.1), params)
    assert b.magnitude < 1e-12 * params.b_ref


def test_biased_quarter_period_point():
    p = AnalyticParams.from_values(2000.0, 1.0, 2.0, BiasField(10.0, 0.0, 0.0))
    bref = 2000.0 / math.pi * (1 - math.exp(-2 * math.pi))
    b = field_truncated((0.5, 0.0, 2.0), p)
    assert b.bx == pytest.approx(bref + 10.0, rel=1e-13)
    assert b.by == pytest.approx(0.0, abs=1e-12)
    assert b.bz == pytest.approx(bref, rel=1e-13)
    assert not b.extrapolated
    assert field_truncated((0.5, 0.0, 1.0), p).extrapolated


def test_series_order_one_is_truncated(params, rng):
    pts = np.column_stack([rng.uniform(-3, 3, 50), rng.uniform(-3, 3, 50), rng.uniform(2, 5, 50)])
    for p in pts:
        a, b = field_truncated(p, params).as_array(), field_series(p, params, 1).as_array()
        np.testing.assert_allclose(a, b, rtol=1e-14, atol=0)


def test_second_harmonic_at_quarter_period(params):
    b0 = 2000.0 / math.pi
    bref = b0 * (1 - math.exp(-2 * math.pi))
    third = b0 / 3 * (1 - math.exp(-6 * math.pi))
    assert field_series((0.5, 0.0, 2.0), params, 2).bx == pytest.approx(bref + third, rel=1e-13)


def test_harmonics_negligible_high_above(params, rng):
    for _ in range(20):
        p = (rng.uniform(-2, 2), rng.uniform(-2, 2), 2.0 + 3.0)
        one = field_series(p, params, 1).as_array()
        four = field_series(p, params, 4).as_array()
        if np.linalg.norm(one) > 1e-3:
            assert np.linalg.norm(four - one) / np.linalg.norm(one) < 1e-8


def test_zero_bias_magnitude(params, rng):
    assert zero_bias_magnitude((0.0, 1.0, 2.5), params).value < 1e-10
    assert zero_bias_magnitude((0.0, 0.0, 2.0), params).value == pytest.approx(2 * params.b_ref, rel=1e-14)
    for _ in range(50):
        p = (rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(2, 4))
        assert zero_bias_magnitude(p, params).value == pytest.approx(field_truncated(p, params).magnitude, rel=1e-12)


def test_zero_bias_magnitude_requires_zero_bias():
    with pytest.raises(AnalyticDomainError):
        zero_bias_magnitude((0, 0, 3), AnalyticParams.from_values(2000, 1, 2, BiasField(0, 0, 1)))


def test_printed_magnitude_matches_at_zero_bias_only_where_defined(params):
    # with zero bias the printed radical keeps only the cross term; not |B|
    v = printed_magnitude_eq7((0.0, 0.0, 2.0), params)
    assert v == pytest.approx(math.sqrt(2) * params.b_ref, rel=1e-12)


def test_ideal_minima_grid(params):
    pts = ideal_minima_grid(params, range(-1, 2), range(-1, 2))
    for q in [(0, 1), (1, 0), (-1, 0), (0, -1)]:
        assert q in pts
    assert (0, 0) not in pts and (1, 1) not in pts
    # brute-force oracle on a fine grid: cos(bx)cos(by) = -1 exactly at the returned set
    g = np.linspace(-1, 1, 201)
    X, Y = np.meshgrid(g, g, indexing="ij")
    prod = np.cos(math.pi * X) * np.cos(math.pi * Y)
    found = {(round(x, 6), round(y, 6)) for x, y in zip(X[prod < -1 + 1e-12], Y[prod < -1 + 1e-12])}
    assert found == {(float(a), float(b)) for a, b in pts}
    for x, y in pts:
        for z in (2.1, 3.0, 6.0):
            assert zero_bias_magnitude((x, y, z), params).value < 1e-9
    arr = np.array(ideal_minima_grid(params, range(-4, 5), range(-4, 5)))
    d = np.linalg.norm(arr[:, None] - arr[None], axis=-1)
    d[d == 0] = np.inf
    assert d.min() == pytest.approx(math.sqrt(2) * params.alpha)


def test_ideal_minima_need_zero_in_plane_bias():
    with pytest.raises(AnalyticDomainError):
        ideal_minima_grid(AnalyticParams.from_values(2000, 1, 2, BiasField(1, 0, 0)), range(2), range(2))


def test_dmin_heuristic():
    p = AnalyticParams(b0=636.6, beta=math.pi, tau=2.0, alpha=1.0, bias=BiasField(0, 0, 1.0))
    h = dmin_heuristic(p)
    assert h.label == "HEURISTIC"
    assert h.value == pytest.approx(math.log(p.b_ref + 1.0) / math.pi, rel=1e-12)
    p2 = AnalyticParams(b0=635.4 / (1 - math.exp(-2 * math.pi)), beta=math.pi, tau=2.0, alpha=1.0,
                        bias=BiasField(0, 0, 1.0))
    assert dmin_heuristic(p2).value == pytest.approx(2.055, abs=1e-3)
    big = AnalyticParams(b0=636.6, beta=math.pi, tau=2.0, alpha=1.0, bias=BiasField(0, 0, 1e12))
    assert dmin_heuristic(big).value == pytest.approx(math.log(big.b_ref) / math.pi, rel=1e-9)
    with pytest.raises(AnalyticDomainError):
        dmin_heuristic(AnalyticParams(b0=636.6, beta=math.pi, tau=2.0, alpha=1.0))


def _fd2(f, p, k, h):
    e = np.zeros(3)
    e[k] = h
    return (f(p + e) - 2 * f(p) + f(p - e)) / h**2


def test_curvature_matches_finite_differences(params, rng):
    def mag(q):
        return zero_bias_magnitude(q, params).value

    h = 1e-4 * params.alpha
    n = 0
    while n < 30:
        p = np.array([rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(2.3, 3.5)])
        if mag(p) < 1.0:
            continue
        cx, cy = curvature_analytic(p, params)
        assert cx == pytest.approx(_fd2(mag, p, 0, h), rel=1e-6, abs=1e-6 * abs(cy))
        assert cy == pytest.approx(_fd2(mag, p, 1, h), rel=1e-6, abs=1e-6 * abs(cx))
        n += 1


def test_curvature_diagonal_symmetry(params, rng):
    for _ in range(20):
        t = rng.uniform(-1, 1)
        cx, cy = curvature_analytic((t, t, 2.5), params)
        assert cx == cy


def test_curvature_singular_at_zero(params):
    with pytest.raises(SingularCurvature):
        curvature_analytic((0.0, 1.0, 2.5), params)


def test_hessian_numeric_cross_oracle(params):
    model = AnalyticModel(params)
    for p in [(0.2, 0.1, 2.6), (0.45, -0.3, 2.4), (0.0, 0.0, 3.0)]:
        c = hessian_numeric(model, p, alpha=params.alpha)
        cx, cy = curvature_analytic(p, params)
        assert not c.linear[0] and not c.linear[1]
        assert c.values[0] == pytest.approx(cx, rel=1e-5)
        assert c.values[1] == pytest.approx(cy, rel=1e-5)


def test_hessian_numeric_linear_at_zero(params):
    c = hessian_numeric(AnalyticModel(params), (0.0, 1.0, 2.5), alpha=1.0)
    assert c.linear.all()


def test_jacobian_matches_finite_differences(params, rng):
    model = AnalyticModel(params, order=3)
    pts = np.column_stack([rng.uniform(-2, 2, 20), rng.uniform(-2, 2, 20), rng.uniform(2.2, 4, 20)])
    exact = analytic_jacobian(pts, params, 3)
    fd = super(AnalyticModel, model).jacobian(pts)
    np.testing.assert_allclose(exact, fd, atol=1e-5 * np.abs(exact).max())


def test_source_free(params, rng):
    pts = np.column_stack([rng.uniform(-2, 2, 200), rng.uniform(-2, 2, 200), rng.uniform(2.2, 5, 200)])
    J = analytic_jacobian(pts, params, 3)
    assert np.abs(np.trace(J, axis1=1, axis2=2)).max() < 1e-9
    assert np.abs(J - J.transpose(0, 2, 1)).max() < 1e-9
    div, curl = maxwell_residuals(AnalyticModel(params, 3), pts, 0.005)
    assert np.abs(div).max() < 1e-6 and curl.max() < 1e-6


def test_world_offset_places_hole_on_axis(t1_spec):
    # odd n: world origin is a hole centre, which is a B_z minimum of the pattern
    m = model_for_spec(t1_spec)
    b_hole = m.field([[0.0, 0.0, 2.5]])[0]
    b_corner = m.field([[1.0, 1.0, 2.5]])[0]
    assert b_hole[2] < 0 < b_corner[2]


@settings(max_examples=100, deadline=None)
@given(x=st.floats(-5, 5), y=st.floats(-5, 5), dz=st.floats(0.0, 4.0),
       mz=st.floats(100, 1e4), a=st.floats(0.2, 10), tau=st.floats(0.1, 5))
def test_magnitude_identity(x, y, dz, mz, a, tau):
    p = AnalyticParams.from_values(mz, a, tau)
    z = tau + dz * a
    b = analytic_field([[x, y, z]], p)[0]
    cx, cy = math.cos(p.beta * x), math.cos(p.beta * y)
    ref = p.b_ref**2 * math.exp(-2 * p.beta * (z - tau)) * (2 + 2 * cx * cy)
    got = float(b @ b)
    assert abs(got - ref) <= 1e-12 * p.b_ref**2 * math.exp(-2 * p.beta * (z - tau)) * 4
