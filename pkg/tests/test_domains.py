import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate

from bienergy import PointN, ball_section, make_domain
from bienergy.domains import CuspProfile, annulus, axial_ball, sphere_area
from bienergy.experiments import singular_metric
from bienergy.quad import integrate_axisym, integrate_cartesian
from oracles import ball_volume

ONE = lambda t, rho: np.ones_like(t)
PI = math.pi


def _volume(domain, tol=1e-10):
    return integrate_axisym(ONE, domain, tol=tol)[0]


def _spike(alpha, clip_ball):
    prof = CuspProfile(alpha)

    def area(t):
        u = float(prof.u(t))
        if clip_ball:
            u = min(u, math.sqrt(max(1 - t * t, 0.0)))
        return PI * u * u

    return integrate.quad(area, 0.0, 1.0, epsabs=1e-13, limit=200)[0]


@pytest.mark.parametrize(
    "kind, expected",
    [
        ("UnitBall", 4 * PI / 3),
        ("SplitX_slit", 2 * PI),
        ("SplitY_slit", 5 * PI / 3),
        ("SplitX_cut", 23 * PI / 12),
        ("SplitY_cut", 2 * PI),
        ("SplitX_cusp", 5 * PI / 3),
    ],
)
def test_volumes_n3(kind, expected):
    assert _volume(make_domain(kind, 3)) == pytest.approx(expected, rel=1e-9)


@pytest.mark.parametrize("alpha", [1.0, 2.0, 3.5])
def test_cusp_volumes(alpha):
    y = make_domain("SplitY_cusp", 3, alpha=alpha)
    assert _volume(y) == pytest.approx(2 * PI - _spike(alpha, False), rel=1e-8)
    b = make_domain("CuspBall", 3, alpha=alpha)
    assert _volume(b) == pytest.approx(4 * PI / 3 - _spike(alpha, True), rel=1e-7)


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_ball_and_annulus_any_dimension(n):
    assert _volume(make_domain("UnitBall", n)) == pytest.approx(ball_volume(n), rel=1e-10)
    a = annulus(0.5, 0.9, n)
    assert _volume(a) == pytest.approx(ball_volume(n, 0.9) - ball_volume(n, 0.5), rel=1e-10)
    off = axial_ball(0.3, 0.25, n)
    assert _volume(off) == pytest.approx(ball_volume(n, 0.25), rel=1e-10)


def test_sphere_area():
    assert sphere_area(0) == 2.0
    assert sphere_area(1) == pytest.approx(2 * PI)
    assert sphere_area(2) == pytest.approx(4 * PI)


@pytest.mark.parametrize("r", [0.5, 0.1, 1e-4])
def test_ball_section_volume(r):
    sec = ball_section(make_domain("SplitX_cusp", 3), r)
    # wedge theta in (pi/4, pi) of a ball of radius r
    expected = 2 * PI * r**3 / 3 * (1 + math.cos(PI / 4))
    assert _volume(sec) == pytest.approx(expected, rel=1e-9)


def test_cartesian_fallback_agrees_coarsely():
    d = make_domain("SplitX_cut", 3)
    v = integrate_cartesian(lambda P: np.ones(len(P)), d, (-1, -1, -1), (1, 1, 1), cells=16)
    assert v == pytest.approx(23 * PI / 12, rel=3e-2)


def test_membership_examples():
    x = make_domain("SplitX_slit", 3)
    assert not x.contains([0.5, 0.0, 0.0])[0]  # on the slit
    assert x.contains([-0.5, 0.0, 0.0])[0]
    assert x.contains([0.5, 0.1, 0.0])[0]
    y = make_domain("SplitY_slit", 3)
    assert y.contains([0.05, 0.1, 0.0])[0]
    assert not y.contains([0.5, 0.1, 0.0])[0]
    cut = make_domain("SplitX_cut", 3)
    assert not cut.contains([0.5, 0.2, 0.0])[0]
    assert cut.contains([0.5, 0.3, 0.0])[0]
    assert not make_domain("UnitBall", 3).contains([1.0, 0.0])[0]  # wrong dimension


def test_cusp_profile():
    prof = CuspProfile(2.0)
    assert float(prof.u(1.0)) == pytest.approx(1.0)
    t = np.geomspace(1e-3, 1.0, 400)
    assert np.all(np.diff(prof.log_u(t)) > 0)
    back = prof.u_inv_log(prof.log_u(t))
    np.testing.assert_allclose(back, t, rtol=1e-12)
    # derivative vanishes at the tip and grows away from it
    assert float(prof.u_prime(0.0)) == 0.0
    near = np.linspace(1e-3, 0.3, 50)
    assert np.all(np.diff(prof.u_prime(near)) >= 0)
    with pytest.raises(ValueError):
        CuspProfile(0.0)


def test_pointn():
    p = PointN.axial(0.2, 0.5, 4)
    assert p.n == 4
    assert p.rho == pytest.approx(0.5)
    np.testing.assert_array_equal(PointN.from_array(p.as_array()).as_array(), p.as_array())


SAMPLED = [
    ("SplitX_slit", {}),
    ("SplitY_slit", {}),
    ("SplitX_cut", {}),
    ("SplitY_cut", {}),
    ("SplitX_cusp", {}),
    ("SplitY_cusp", {"alpha": 2.0}),
    ("CuspBall", {"alpha": 2.0}),
]


@pytest.mark.parametrize("kind, params", SAMPLED)
@given(seed=st.integers(0, 2**31 - 1), k=st.integers(1, 30))
def test_stratum_samples_are_inside(kind, params, seed, k):
    d = make_domain(kind, 3, **params)
    metric, center = singular_metric(d)
    rng = np.random.default_rng(seed)
    a, b = 2.0 ** (-k - 1), 2.0**-k
    t, rho = d.sample_stratum(rng, 32, a, b, metric, center)
    assert t.size > 0
    assert d.contains_reduced(t, rho).all()
    dist = d.distance(t, rho, metric, center)
    assert np.all((dist > a) & (dist <= b))


@given(seed=st.integers(0, 2**31 - 1))
def test_stratum_sampler_is_reproducible(seed):
    d = make_domain("SplitY_cut", 3)
    one = d.sample_stratum(np.random.default_rng(seed), 20, 1e-3, 2e-3)
    two = d.sample_stratum(np.random.default_rng(seed), 20, 1e-3, 2e-3)
    np.testing.assert_array_equal(one[0], two[0])
    np.testing.assert_array_equal(one[1], two[1])


def test_truncated_drops_singular_pieces():
    d = make_domain("SplitX_slit", 3).truncated(1e-2)
    assert not d.has_singular_pieces
    assert _volume(d) == pytest.approx(2 * PI * (1 - 1e-4), rel=1e-9)


def test_unknown_kind():
    with pytest.raises(ValueError):
        make_domain("Torus", 3)
    with pytest.raises(ValueError):
        make_domain("SplitX_slit", 2)
