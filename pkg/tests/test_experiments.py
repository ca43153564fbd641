import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from bienergy import (
    PointN,
    ScaleOutOfDomain,
    cusp_threshold,
    energy,
    energy_identity,
    exponent_sweep,
    make_cusp_pair,
    make_cut_pair,
    make_domain,
    make_identity_map,
    make_radial_map,
    make_slit_pair,
    modulus_profile,
    qc_witness,
)
from bienergy.domains import annulus, unit_ball
from bienergy.experiments import (
    EXPERIMENTS,
    ROW_COLUMNS,
    ExperimentReport,
    ReportRow,
    change_of_variables_experiment,
    growth_flag,
    identity_gap,
    lipschitz_check,
    modulus_report,
    pointwise_identities,
    qc_report,
)
from oracles import cusp_envelope

PI = math.pi
ORDER = {"Convergent": 0, "Inconclusive": 1, "Divergent": 2}


def _kinds(report):
    return [r.computed for r in report.rows]


# -- report bookkeeping ------------------------------------------------------

row_st = st.builds(
    ReportRow,
    cell=st.text(min_size=1, max_size=5),
    tag=st.just("tag"),
    predicted=st.sampled_from(["Convergent", "Divergent"]),
    computed=st.sampled_from(["Convergent", "Divergent", "Inconclusive"]),
    agree=st.booleans(),
    borderline=st.booleans(),
    failure=st.one_of(st.none(), st.just("MaxDepthExceeded")),
)


@given(st.lists(row_st, max_size=20))
def test_summary_counts_equal_tallies(rows):
    rep = ExperimentReport("synthetic", {}, rows)
    s = rep.summary
    assert s["rows"] == len(rows)
    assert s["agree"] + s["disagree"] == len(rows)
    assert s["failed"] == sum(1 for r in rows if not r.agree and not r.borderline)
    assert rep.passed == (s["failed"] == 0)
    csv = rep.csv_rows()
    assert all(list(rec) == ROW_COLUMNS for rec in csv) or not csv
    json.dumps(rep.to_dict())


def test_every_experiment_has_a_claim():
    assert set(EXPERIMENTS) >= {"energy-identity", "exponent-sweep", "cusp-threshold", "modulus-profile",
                                "qc-witness"}
    assert all(EXPERIMENTS.values())


# -- energy identity -----------------------------------------------------------------


def test_identity_pair_on_ball():
    ident = make_identity_map(3)
    rep = energy_identity(ident, ident, unit_ball(3))
    row = rep.rows[0]
    assert row.agree and row.diagnostics["value"] == pytest.approx(4 * PI / 3, rel=1e-9)
    assert identity_gap(rep) <= 1e-6


def test_radial_pair_on_annulus():
    r = make_radial_map(2.0, 3)
    rep = energy_identity(r, r.inverse, annulus(0.5, 1.0, 3))
    d = rep.rows[0].diagnostics
    assert rep.passed
    assert d["value"] == pytest.approx(7 * PI / 3, rel=1e-9)
    assert d["reference"] == pytest.approx(7 * PI / 3, rel=1e-3)


def test_slit_pair_truncated():
    h, f = make_slit_pair(3)
    region = h.domain.truncated(1e-2)
    rep = energy_identity(h, f, region)
    assert rep.passed and identity_gap(rep) <= 1e-2
    # independent right side: f's energy over its own truncated domain
    ref = energy(f, f.domain.truncated(1e-2), 3)
    assert rep.rows[0].diagnostics["value"] == pytest.approx(ref.value, rel=1e-6)


def test_identity_gap_under_refinement():
    h, f = make_slit_pair(3)
    region = h.domain.truncated(1e-2)
    ref = energy(f, f.domain.truncated(1e-2), 3, tol=1e-12).value
    errs, gaps = [], []
    for t in (1e-6, 1e-8, 1e-10):
        rep = energy_identity(h, f, region, quad_tol=t)
        gaps.append(identity_gap(rep))
        errs.append(abs(rep.rows[0].diagnostics["value"] - ref) / ref)
    # both sides share nodes through the map fiber, so the gap itself sits at roundoff
    assert max(gaps) <= 1e-12
    assert all(b <= a * (1 + 1e-9) + 1e-13 for a, b in zip(errs, errs[1:]))
    assert errs[-1] <= 1e-9


def test_slit_pair_full_domain_both_divergent():
    h, f = make_slit_pair(3)
    rep = energy_identity(h, f)
    row = rep.rows[0]
    assert row.predicted == "both divergent"
    assert row.computed == "both divergent" and row.borderline


# -- sweeps -------------------------------------------------------------------------


def test_slit_sweep():
    rep = exponent_sweep(make_slit_pair(3)[1], p_grid=[2, 2.5, 2.9, 3, 3.5])
    assert [r.predicted for r in rep.rows] == ["Convergent"] * 3 + ["Divergent"] * 2
    assert rep.passed
    assert rep.row("p=3").borderline


def test_cut_sweep():
    rep = exponent_sweep(make_cut_pair(3)[1], p_grid=[1, 1.5, 1.9, 2, 2.5])
    assert [r.predicted for r in rep.rows] == ["Convergent"] * 3 + ["Divergent"] * 2
    assert rep.passed
    assert rep.row("p=2").borderline


def test_identity_sweep():
    rep = exponent_sweep(make_identity_map(3), p_grid=[1, 3, 7])
    assert _kinds(rep) == ["Convergent"] * 3


@pytest.mark.parametrize("map", [make_slit_pair(3)[1], make_cut_pair(3)[1], make_slit_pair(4)[1]],
                         ids=lambda m: m.id)
def test_sweep_monotone_in_p(map):
    rep = exponent_sweep(map, p_grid=np.linspace(1.0, map.n + 0.8, 9))
    ranks = [ORDER[k] for k in _kinds(rep)]
    assert ranks == sorted(ranks)


def test_sweep_rejects_small_p():
    with pytest.raises(ValueError):
        exponent_sweep(make_identity_map(3), p_grid=[0.5])


def test_threshold_override_produces_disagreement():
    rep = exponent_sweep(make_slit_pair(3)[1], p_grid=[3.5], threshold=4.0)
    assert not rep.passed


# -- cusp threshold ------------------------------------------------------------------


@pytest.fixture(scope="module")
def cusp_report():
    return cusp_threshold(alphas=(1.0, 2.0, 2.5, 3.0, 3.5, 4.0))


def test_cusp_threshold_rows(cusp_report):
    assert cusp_report.passed
    env = cusp_report.row("alpha=2:envelope").diagnostics
    assert env["reference"] == pytest.approx(cusp_envelope(2.0))
    assert env["value"] == pytest.approx(4 * PI, rel=1e-2)
    three = cusp_report.row("alpha=3:energy")
    assert three.computed == "Divergent" and three.borderline
    four = cusp_report.row("alpha=4:energy")
    assert four.computed == "Divergent" and not four.borderline
    # 3/4 power tail of w^(-3/4): effective exponent about -1/4 after the log-power fit
    assert four.diagnostics["beta"] < 0


def test_cusp_verdicts_monotone_in_alpha(cusp_report):
    energy_rows = [r for r in cusp_report.rows if r.cell.endswith(":energy")]
    ranks = [ORDER[r.computed] for r in energy_rows]
    assert ranks == sorted(ranks)


def test_cusp_inverse_is_lipschitz():
    for a in (1.0, 2.0, 2.5):
        assert lipschitz_check(make_cusp_pair(a, 3)[1]).passed


# -- qc and pointwise ---------------------------------------------------------------


def test_qc_witness_examples():
    w = qc_witness(make_identity_map(3))
    assert w.estimate == pytest.approx(1.0) and not w.growth
    est, growth = qc_witness(make_radial_map(2.0, 3))
    assert est == pytest.approx(2.0, abs=1e-6) and not growth
    assert qc_witness(make_slit_pair(3)[0]).growth
    assert qc_report(make_radial_map(2.0, 3)).passed
    assert qc_report(make_slit_pair(3)[0]).passed


@given(st.lists(st.floats(1.0, 1e6), min_size=6, max_size=12))
def test_growth_flag_needs_monotone_doubling(maxima):
    flag = growth_flag(maxima)
    tail = maxima[-6:]
    if flag:
        assert all(b >= a * (1 - 1e-9) for a, b in zip(tail, tail[1:]))
        assert tail[-1] >= 2 * tail[0]
    if sorted(tail) == tail and tail[-1] >= 2 * tail[0]:
        assert flag


def test_pointwise_identities_pass():
    maps = [make_radial_map(2.0, 3), *make_slit_pair(3), *make_cusp_pair(2.0, 3)]
    rep = pointwise_identities(maps, sample_budget=2000)
    assert rep.passed and rep.summary["rows"] == 4 * len(maps)


def test_change_of_variables_experiment():
    rep = change_of_variables_experiment(make_radial_map(2.0, 3), annulus(0.5, 1.0, 3))
    assert rep.passed
    assert rep.rows[0].diagnostics["reference"] == pytest.approx(4 * PI / 3 * (1 - 1 / 64), rel=1e-8)


# -- modulus -------------------------------------------------------------------------


def test_modulus_identity():
    prof = modulus_profile(make_identity_map(3))
    np.testing.assert_allclose(prof.osc, 2 * np.array(prof.scales), rtol=1e-12)
    assert np.isfinite(prof.C_hat)
    assert np.all(np.diff(prof.osc) < 0)  # scales listed largest first


def test_modulus_radial_interior():
    prof = modulus_profile(make_radial_map(2.0, 3), PointN.axial(0.5, 0.0, 3),
                           scales=[2.0**-k for k in range(3, 13)])
    assert prof.variant == "interior"
    assert prof.spread <= 4
    assert modulus_report(make_radial_map(2.0, 3), PointN.axial(0.5, 0.0, 3)).passed


def test_modulus_interior_needs_room():
    with pytest.raises(ScaleOutOfDomain):
        modulus_profile(make_radial_map(2.0, 3), PointN.axial(0.9, 0.0, 3), scales=[0.25], variant="interior")
    with pytest.raises(ValueError):
        modulus_profile(make_identity_map(3), PointN(0.0, (0.1, 0.0)))


def test_modulus_cusp_boundary():
    h, _ = make_cusp_pair(2.0, 3)
    prof = modulus_profile(h)
    assert prof.variant == "boundary"
    so = prof.scaled_osc
    assert all(b < a for a, b in zip(so, so[1:]))
    assert all(b <= a for a, b in zip(prof.osc, prof.osc[1:]))
    assert all(np.isfinite(prof.energy))


def test_domains_for_split_kinds_exist():
    assert make_domain("SplitY_cusp", 3, alpha=2.0).contains([0.5, 0.9, 0.0])[0]
