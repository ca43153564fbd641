import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate

from bienergy import (
    InsufficientShells,
    change_of_variables,
    classify,
    energy,
    make_domain,
    make_cut_pair,
    make_identity_map,
    make_radial_map,
    make_slit_pair,
    sphere_integral,
)
from bienergy.domains import annulus, custom_axisymmetric, unit_ball
from bienergy.experiments import cusp_plus_region
from bienergy.diffgeo import op_norm
from bienergy.points import axial_points, random_directions
from bienergy.quad import (
    BETA_CONV,
    ShellLedger,
    gradient_integrand,
    integrate_axisym,
    integrate_functional,
)
from oracles import cut_inverse_energy, sigma1_2x2, slit_inverse_energy

PI = math.pi

# frozen from tests/oracles.py (scipy reductions, independent of the package)
SLIT_ORACLE = {2.0: 12.13173561542308, 2.5: 22.29561441214675, 2.9: 101.52676930100037}
CUT_ORACLE = {1.0: 7.090058753840797, 1.5: 8.03572987376945, 1.9: 12.723264142182218}


def power(q):
    return lambda t, rho: rho ** (-q)


def _only_plus(kind):
    d = make_domain(kind, 3)
    plus = d.pieces[1]
    return custom_axisymmetric(lambda t, rho: d.member(t, rho) & plus.contains(t, rho), (plus,), 3,
                               f"{kind}+", d.singular_set)


# -- integrate_axisym --------------------------------------------------------


def test_unit_ball_volume():
    v, err = integrate_axisym(lambda t, rho: np.ones_like(t), unit_ball(3), tol=1e-8)
    assert v == pytest.approx(4 * PI / 3, rel=1e-6)
    assert err < 1e-6


def test_inverse_square_over_truncated_cut():
    d = make_domain("SplitY_cut", 3).truncated(2.0**-20)
    v, _ = integrate_axisym(power(2.0), d, tol=1e-10)
    assert v == pytest.approx(4 * PI * 20 * math.log(2), rel=1e-9)
    assert v == pytest.approx(174.2069, abs=1e-4)
    plus = _only_plus("SplitY_cut").truncated(2.0**-20)
    v, _ = integrate_axisym(power(2.0), plus, tol=1e-10)
    assert v == pytest.approx(2 * PI * 20 * math.log(2), rel=1e-9)


def test_cusp_envelope_partial_sums():
    g = lambda t, rho: rho**-3 * (1 - np.log(rho)) ** -1.5
    res = integrate_functional(g, cusp_plus_region(3), 3, shell_depth=30)
    partial = np.cumsum(res.ledger.contributions)
    assert np.all(np.diff(partial) > 0) and partial[-1] < 4 * PI
    assert res.convergent
    assert res.value == pytest.approx(4 * PI, rel=1e-3)


# closed forms for rho^-q: the s-extent is 1 on the lower pieces and rho (or 1) on the upper
def _oracle(kind, q):
    if kind in ("SplitY_slit", "SplitX_cusp"):
        return 2 * PI * (1 / (2 - q) + 1 / (3 - q)) if q < 2 else math.inf
    if kind in ("SplitX_slit", "SplitY_cut"):
        return 4 * PI / (2 - q) if q < 2 else math.inf
    if kind == "SplitY_slit+":
        return 2 * PI / (3 - q)
    raise KeyError(kind)


CRITICAL = {"SplitY_slit": 2.0, "SplitX_cusp": 2.0, "SplitX_slit": 2.0, "SplitY_cut": 2.0, "SplitY_slit+": 3.0}


@pytest.mark.parametrize("kind", sorted(CRITICAL))
@pytest.mark.parametrize("q", [0.0, 1.0, 1.5, 2.0, 2.5])
def test_power_oracles_and_classification(kind, q):
    d = _only_plus("SplitY_slit") if kind == "SplitY_slit+" else make_domain(kind, 3)
    res = integrate_functional(power(q), d, 3)
    crit = CRITICAL[kind]
    if q <= crit - 0.1:
        assert res.convergent
        assert res.value == pytest.approx(_oracle(kind, q), rel=5e-3)
    elif q >= crit + 0.1:
        assert res.kind == "Divergent"
    else:
        assert res.kind in ("Divergent", "Inconclusive")


# -- classify -----------------------------------------------------------------


def test_classify_examples():
    v = classify(ShellLedger.from_contributions(2.0 ** -np.arange(40)))
    assert v.kind == "Convergent" and v.beta == pytest.approx(1.0)
    assert v.value == pytest.approx(2.0, rel=1e-9)
    v = classify(ShellLedger.from_contributions(np.ones(40)))
    assert v.kind == "Divergent" and v.beta == pytest.approx(0.0, abs=1e-12) and v.borderline
    v = classify(ShellLedger.from_contributions(2.0 ** (0.5 * np.arange(40))))
    assert v.kind == "Divergent" and v.beta == pytest.approx(-0.5)
    v = classify(ShellLedger.from_contributions(2.0 ** (-0.05 * np.arange(40))))
    assert v.kind == "Inconclusive" and v.borderline


def test_classify_log_power_shells():
    k = np.arange(40)
    L = np.log(math.e * 2.0 ** (k + 0.5))
    v = classify(ShellLedger.from_contributions(L**-3.0))
    assert v.model == "log-power" and v.gamma == pytest.approx(3.0, rel=1e-6)
    assert v.kind == "Convergent"
    v = classify(ShellLedger.from_contributions(L**-1.0))
    assert v.kind == "Divergent"


def test_classify_needs_resolved_shells():
    with pytest.raises(InsufficientShells):
        classify(ShellLedger.from_contributions(np.ones(5)))
    with pytest.raises(InsufficientShells):
        classify(ShellLedger.from_contributions(np.ones(20), rel_err=0.5))


@given(beta=st.floats(-1.0, 2.0), c0=st.floats(1e-6, 1e6))
def test_classify_geometric_property(beta, c0):
    v = classify(ShellLedger.from_contributions(c0 * 2.0 ** (-beta * np.arange(40))))
    assert v.beta == pytest.approx(beta, abs=1e-9)
    if beta >= BETA_CONV:
        assert v.kind == "Convergent"
        assert v.value == pytest.approx(c0 / (1 - 2.0**-beta), rel=1e-6)
    elif beta <= 0.02:
        assert v.kind == "Divergent"
    else:
        assert v.kind == "Inconclusive"


# -- energies -------------------------------------------------------------------


def test_identity_energy():
    res = energy(make_identity_map(3), unit_ball(3), 3)
    assert res.convergent
    assert res.value == pytest.approx(4 * PI / 3, abs=1e-4)


def test_slit_energy_examples():
    _, f = make_slit_pair(3)
    res = energy(f, p=3.0)
    assert res.kind == "Divergent" and res.verdict.borderline
    assert res.beta == pytest.approx(0.0, abs=0.02)
    res = energy(f, p=2.5)
    assert res.convergent
    assert res.beta == pytest.approx(0.5, abs=0.02)


@pytest.mark.parametrize("p", sorted(SLIT_ORACLE))
def test_slit_energy_matches_oracle(p):
    res = energy(make_slit_pair(3)[1], p=p)
    assert res.convergent
    assert res.value == pytest.approx(SLIT_ORACLE[p], rel=1e-6)


@pytest.mark.parametrize("p", sorted(CUT_ORACLE))
def test_cut_energy_matches_oracle(p):
    res = energy(make_cut_pair(3)[1], p=p)
    assert res.convergent
    assert res.value == pytest.approx(CUT_ORACLE[p], rel=1e-6)


def test_oracles_reproduce_frozen_values():
    assert slit_inverse_energy(2.5) == pytest.approx(SLIT_ORACLE[2.5], rel=1e-10)
    assert cut_inverse_energy(1.5) == pytest.approx(CUT_ORACLE[1.5], rel=1e-10)


def test_refinement_monotone():
    f = make_cut_pair(3)[1]
    prev = None
    for tol in (1e-4, 5e-5, 2.5e-5, 1.25e-5):
        res = energy(f, p=1.5, tol=tol)
        assert res.convergent
        if prev is not None:
            assert abs(res.value - prev.value) <= prev.abs_err
        prev = res


@pytest.mark.parametrize("p", [2.0, 2.5])
def test_shell_additivity(p):
    res = energy(make_slit_pair(3)[1], p=p)
    total = res.ledger.regular + math.fsum(res.ledger.contributions)
    assert abs(total - res.value) <= res.abs_err
    last3 = math.fsum(res.ledger.contributions[-3:])
    assert last3 <= res.abs_err
    assert np.all(res.ledger.contributions >= 0)
    rows = res.ledger.shells
    for a, b in zip(rows, rows[1:]):
        assert a.rho_lo == b.rho_hi


def test_transverse_rotation_invariance():
    _, f = make_slit_pair(4)
    g = gradient_integrand(f, 3.5)
    rng = np.random.default_rng(0)
    t = rng.uniform(-0.9, 0.0, 200)
    rho = rng.uniform(0.05, 0.9, 200)
    base = g(t, rho)
    X = random_directions(rng, 200, 3) * rho[:, None]
    rotated = op_norm(f.analytic_diff(np.column_stack([t, X]))) ** 3.5
    np.testing.assert_allclose(rotated, base, rtol=1e-13)
    one = energy(f, p=3.5).to_dict()
    two = energy(f, p=3.5).to_dict()
    assert one == two


# -- spheres --------------------------------------------------------------------


def test_sphere_integral_examples():
    assert sphere_integral(make_identity_map(3), None, 0.5, 2.0) == pytest.approx(PI, rel=1e-10)
    assert sphere_integral(make_radial_map(2.0, 3), None, 0.5, 3.0) == pytest.approx(PI, rel=1e-10)


def test_sphere_integral_slit_inverse():
    _, f = make_slit_pair(3)
    r = 0.5

    def density(theta):
        s, rho = r * math.cos(theta), r * math.sin(theta)
        nd = max(sigma1_2x2(1 / rho, -s / rho**2, 0.0, 1.0), 1.0) if s >= 0 else 1.0
        return nd**2 * rho * r

    oracle = 2 * PI * (integrate.quad(density, PI / 4, PI / 2, epsabs=1e-13, limit=200)[0]
                       + integrate.quad(density, PI / 2, PI, epsabs=1e-13)[0])
    assert sphere_integral(f, None, r, 2.0) == pytest.approx(oracle, rel=1e-2)
    assert sphere_integral(f, None, r, 2.0) == pytest.approx(oracle, rel=1e-8)


# -- change of variables ------------------------------------------------------------


def test_change_of_variables_examples():
    cv = change_of_variables(make_identity_map(3), annulus(0.5, 0.9, 3))
    assert cv.residual <= 1e-6
    cv = change_of_variables(make_radial_map(2.0, 3), annulus(0.5, 1.0, 3))
    assert cv.rhs == pytest.approx(4 * PI / 3 * (1 - 0.25**3), rel=1e-8)
    assert cv.lhs == pytest.approx(4 * PI / 3 * (1 - 0.25**3), rel=1e-8)
    h, _ = make_slit_pair(3)
    X = make_domain("SplitX_slit", 3)
    plus = X.pieces[1].restrict(0.05, np.inf)
    region = custom_axisymmetric(lambda t, rho: (t > 0) & (t < 1) & (rho > 0.05) & (rho < 1), (plus,), 3,
                                 "Xplus")
    cv = change_of_variables(h, region, eta=lambda s, rho: rho)
    assert cv.residual <= 1e-3
    # |J_h| = rho on X+, so both sides equal int rho^2 over the region
    expected = 2 * PI * integrate.quad(lambda r: r**3, 0.05, 1.0)[0]
    assert cv.rhs == pytest.approx(expected, rel=1e-8)


def test_axial_points_shape():
    P = axial_points(np.array([0.1, 0.2]), np.array([0.3, 0.4]), 4)
    assert P.shape == (2, 4)
    np.testing.assert_allclose(np.linalg.norm(P[:, 1:], axis=1), [0.3, 0.4])
