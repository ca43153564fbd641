"""Drivers that turn kernel computations into verdict tables.

Each driver returns an :class:`ExperimentReport`: one row per input cell with
the predicted outcome, the claim it comes from, the computed outcome and the
numbers behind it.  Rows marked ``borderline`` (exact critical exponents,
inconclusive fits, diagnostic-only checks) are reported but never count as
failures.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.distance import pdist, squareform

from . import diffgeo, quad
from .domains import (
    DomainSpec,
    axial_ball,
    ball_section,
    custom_axisymmetric,
    split_x_cusp,
    sphere_area,
    unit_ball,
)
from .errors import ScaleOutOfDomain
from .mapzoo import EnergyPrediction, MapSpec, image_region, make_cusp_pair
from .points import PointN, as_points, axial_points, random_directions

TAG_IDENTITY = "energy identity: int_X K_I(x,h) dx = int_Y |Df|^n dy"
TAG_QC = "quasiconformal iff K_I is essentially bounded"
TAG_LIPSCHITZ = "Lipschitz map: |Dh| bounded up to the singular set"
TAG_ENVELOPE = "cusp envelope: int_X+ (rho^-1 L^(-1/alpha))^n = omega_(n-2) alpha/(n-alpha) iff alpha < n"
TAG_CRAMER = "Cramer: adj(D) D = det(D) I"
TAG_SANDWICH = "distortion sandwich: K_I^(1/(n-1)) <= K_O <= K_I^(n-1)"
TAG_CHAIN = "inverse chain rule: Df(h(x)) Dh(x) = I and K_I(x,h) = |Df(h(x))|^n J_h(x)"
TAG_COV = "change of variables: int_A eta(h)|J_h| = int_h(A) eta"
TAG_MODULUS = "modulus of continuity: |h(x1)-h(x2)|^n <= C E(2B) / log(e + diam B/|x1-x2|)"
TAG_BOUNDARY = "boundary modulus: osc(tau) log^(1/n)(1/tau) -> 0 at the cusp pre-image"

ROW_COLUMNS = [
    "index", "experiment", "cell", "tag", "predicted", "computed", "agree", "borderline", "failure",
    "value", "abs_err", "reference", "gap", "beta", "gamma", "model",
]


@dataclass
class ReportRow:
    cell: str
    tag: str
    predicted: str
    computed: str
    agree: bool
    borderline: bool = False
    failure: str | None = None
    diagnostics: dict = field(default_factory=dict)

    @property
    def counts_as_failure(self) -> bool:
        return not self.agree and not self.borderline

    def to_dict(self) -> dict:
        return {"cell": self.cell, "tag": self.tag, "predicted": self.predicted, "computed": self.computed,
                "agree": bool(self.agree), "borderline": bool(self.borderline), "failure": self.failure,
                "diagnostics": self.diagnostics}


@dataclass
class ExperimentReport:
    experiment_id: str
    parameters: dict
    rows: list[ReportRow] = field(default_factory=list)

    @property
    def summary(self) -> dict:
        return {
            "rows": len(self.rows),
            "agree": sum(r.agree for r in self.rows),
            "disagree": sum(not r.agree for r in self.rows),
            "borderline": sum(r.borderline for r in self.rows),
            "failed": sum(r.counts_as_failure for r in self.rows),
            "numerical_failures": sum(r.failure is not None and not r.borderline for r in self.rows),
        }

    @property
    def passed(self) -> bool:
        return not any(r.counts_as_failure for r in self.rows)

    @property
    def numerical_failure(self) -> bool:
        return any(r.failure is not None and not r.borderline for r in self.rows)

    def row(self, cell: str) -> ReportRow:
        for r in self.rows:
            if r.cell == cell:
                return r
        raise KeyError(cell)

    def to_dict(self) -> dict:
        return {"experiment": self.experiment_id, "parameters": self.parameters,
                "summary": self.summary, "passed": self.passed,
                "rows": [r.to_dict() for r in self.rows]}

    def csv_rows(self) -> list[dict]:
        out = []
        for i, r in enumerate(self.rows):
            rec = {"index": i, "experiment": self.experiment_id, **r.to_dict()}
            del rec["diagnostics"]
            for k in ROW_COLUMNS[9:]:
                rec[k] = r.diagnostics.get(k)
            out.append(rec)
        return out


def _verdict_diag(res: quad.EnergyResult) -> dict:
    v = res.verdict
    return {"value": v.value, "abs_err": v.abs_err, "beta": v.beta, "gamma": v.gamma, "model": v.model,
            "tail": v.tail, "partial_sum": v.partial, "shells": len(res.ledger.shells)}


def _verdict_row(cell: str, res: quad.EnergyResult, pred: EnergyPrediction, **extra) -> ReportRow:
    want = "Convergent" if pred.finite else "Divergent"
    if res.failure:
        border = pred.borderline
    else:
        border = pred.borderline or res.verdict.borderline
    diag = _verdict_diag(res)
    diag.update(extra)
    return ReportRow(cell, pred.claim, want, res.kind, res.kind == want, border, res.failure, diag)


def _override(threshold: float | None, x: float, name: str, pred: EnergyPrediction) -> EnergyPrediction:
    if threshold is None:
        return pred
    return EnergyPrediction(x < threshold, x == threshold, f"override: finite iff {name} < {threshold:g}")


def bounded_domain(map: MapSpec) -> DomainSpec:
    """The map's domain, or the unit ball when the map lives on all of R^n."""
    d = map.domain
    return unit_ball(map.n) if d.id.startswith("R^") else d


def _fmt(x: float) -> str:
    return format(float(x), "g")


# --------------------------------------------------------------------------
# energy identity


def inner_distortion_integrand(map: MapSpec, method: str = "auto") -> quad.Integrand:
    """``(t, rho) -> K_I`` at the axial points ``(t, rho e_1)``."""
    diff = quad._differential_fn(map, method)

    def g(t, rho):
        D = diff(axial_points(t, rho, map.n))
        return diffgeo.distortion_values(D, map.n)[5]

    return quad.Integrand(g, quad._switch(map, 1))


def energy_identity(
    h: MapSpec,
    f: MapSpec,
    region: DomainSpec | None = None,
    tol: float = 1e-6,
    quad_tol: float = 1e-10,
    shell_depth: int = quad.SHELL_DEPTH,
    method: str = "auto",
    max_depth: int = quad.MAX_DEPTH,
) -> ExperimentReport:
    """Compare ``int_region K_I(., h)`` with ``int_{h(region)} |Df|^n``."""
    n = h.n
    region = region if region is not None else bounded_domain(h)
    image = image_region(h, region)
    L = quad.integrate_functional(inner_distortion_integrand(h, method), region, n, p=n, label=f"K_I[{h.id}]",
                                  tol=quad_tol, shell_depth=shell_depth, max_depth=max_depth)
    R = quad.integrate_functional(quad.gradient_integrand(f, n, method), image, n, p=n, label=f.id,
                                  tol=quad_tol, shell_depth=shell_depth, max_depth=max_depth)
    pred = f.predict_energy(n) if region.has_singular_pieces else EnergyPrediction(
        True, False, "bounded integrand on a region away from the singular set")
    report = ExperimentReport("energy-identity", {
        "h": h.id, "f": f.id, "region": region.id, "image": image.id, "n": n, "tol": tol,
        "quad_tol": quad_tol, "shell_depth": shell_depth, "method": method,
    })
    failure = L.failure or R.failure
    diag = {"value": L.value, "abs_err": L.abs_err, "reference": R.value, "reference_err": R.abs_err,
            "lhs_verdict": L.kind, "rhs_verdict": R.kind}
    if L.kind == "Convergent" and R.kind == "Convergent":
        scale = max(abs(R.value), 1e-300)
        gap = abs(L.value - R.value) / scale
        threshold = max(tol, 3 * (L.abs_err + R.abs_err) / scale)
        computed = "equal" if gap <= threshold else "unequal"
        diag.update(gap=gap, threshold=threshold)
    elif L.kind == "Divergent" and R.kind == "Divergent":
        computed = "both divergent"
    else:
        computed = f"{L.kind} vs {R.kind}"
    predicted = "equal" if pred.finite else "both divergent"
    border = pred.borderline or (computed not in ("equal", "unequal", "both divergent") and not failure)
    report.rows.append(ReportRow(f"region={region.id}", f"{TAG_IDENTITY}; {pred.claim}", predicted, computed,
                                 computed == predicted, border, failure, diag))
    return report


def identity_gap(report: ExperimentReport) -> float:
    return float(report.rows[0].diagnostics.get("gap", math.nan))


# --------------------------------------------------------------------------
# exponent sweeps


def exponent_sweep(
    map: MapSpec,
    domain: DomainSpec | None = None,
    p_grid=(2.0, 2.5, 2.9, 3.0, 3.5),
    tol: float = 1e-10,
    shell_depth: int = quad.SHELL_DEPTH,
    threshold: float | None = None,
    max_depth: int = quad.MAX_DEPTH,
) -> ExperimentReport:
    """Energy verdicts of ``int |Dmap|^p`` across ``p_grid`` against the map's rule."""
    domain = domain if domain is not None else bounded_domain(map)
    grid = [float(p) for p in p_grid]
    if any(p < 1 for p in grid):
        raise ValueError("p_grid values must be at least 1")
    report = ExperimentReport("exponent-sweep", {
        "map": map.id, "domain": domain.id, "n": map.n, "p_grid": grid, "tol": tol,
        "shell_depth": shell_depth, "threshold": threshold,
    })
    for p in grid:
        res = quad.energy(map, domain, p, tol=tol, shell_depth=shell_depth, max_depth=max_depth)
        pred = _override(threshold, p, "p", map.predict_energy(p))
        report.rows.append(_verdict_row(f"p={_fmt(p)}", res, pred))
    return report


# --------------------------------------------------------------------------
# sampling


def singular_metric(domain: DomainSpec) -> tuple[str, float]:
    """Distance used for strata: to the axis for segments, to the point otherwise."""
    s = domain.singular_set
    if s.kind == "segment":
        return "rho", 0.0
    if s.kind == "point":
        return "r", float(s.data[0])
    return "r", 0.0


def stratified_points(domain: DomainSpec, rng: np.random.Generator, per_stratum: int, strata: int,
                      first: int = 0, scale: float = 1.0):
    """Full points per dyadic stratum ``(scale 2^-(j+1), scale 2^-j]``, ``j = first..``."""
    metric, center = singular_metric(domain)
    out = []
    for j in range(first, first + strata):
        a, b = scale * 2.0 ** (-j - 1), scale * 2.0 ** (-j)
        t, rho = domain.sample_stratum(rng, per_stratum, a, b, metric, center)
        P = np.zeros((len(t), domain.n))
        P[:, 0] = t
        P[:, 1:] = rho[:, None] * random_directions(rng, len(t), domain.n - 1)
        out.append(((a, b), P))
    return out


def growth_flag(maxima, factor: float = 2.0, strata: int = 6) -> bool:
    """Per-stratum maxima (shallow to deep) non-decreasing and growing by ``factor`` overall."""
    m = [float(x) for x in maxima if np.isfinite(x) and x > 0][-strata:]
    if len(m) < strata:
        return False
    steady = all(b >= a * (1 - 1e-9) for a, b in zip(m, m[1:]))
    return steady and m[-1] >= factor * m[0]


def _stratum_max(values_per_stratum):
    return [float(np.max(v)) if len(v) else math.nan for v in values_per_stratum]


@dataclass(frozen=True)
class QCWitness:
    estimate: float
    growth: bool
    maxima: tuple[float, ...]
    strata: tuple[tuple[float, float], ...]
    samples: int

    def __iter__(self):
        return iter((self.estimate, self.growth))

    def to_dict(self) -> dict:
        return {"estimate": self.estimate, "growth": self.growth, "maxima": list(self.maxima),
                "strata": [list(s) for s in self.strata], "samples": self.samples}


def qc_witness(map: MapSpec, sample_budget: int = 10_000, seed: int = 0, strata: int = 6,
               domain: DomainSpec | None = None, method: str = "auto") -> QCWitness:
    """Sampled sup of ``K_I`` and whether its per-stratum maxima keep growing."""
    domain = domain if domain is not None else bounded_domain(map)
    rng = np.random.default_rng(seed)
    layers = stratified_points(domain, rng, max(sample_budget // strata, 1), strata)
    vals = []
    for _, P in layers:
        if len(P):
            D = diffgeo.differential(map, P, method=method)
            vals.append(diffgeo.distortion_values(D, map.n)[5])
        else:
            vals.append(np.empty(0))
    maxima = _stratum_max(vals)
    finite = [m for m in maxima if np.isfinite(m)]
    return QCWitness(max(finite) if finite else math.nan, growth_flag(maxima, strata=strata),
                     tuple(maxima), tuple(e for e, _ in layers), sum(len(v) for v in vals))


@dataclass(frozen=True)
class LipschitzCheck:
    sup: float
    bound: float
    maxima: tuple[float, ...]
    growth: bool
    samples: int

    @property
    def passed(self) -> bool:
        return bool(self.sup <= self.bound and not self.growth)

    def to_dict(self) -> dict:
        return {"sup": self.sup, "bound": self.bound, "maxima": list(self.maxima), "growth": self.growth,
                "samples": self.samples, "passed": self.passed}


def lipschitz_check(map: MapSpec, sample_budget: int = 4096, seed: int = 0, strata: int = 12,
                    domain: DomainSpec | None = None, method: str = "auto") -> LipschitzCheck:
    """Empirical sup of ``|Dmap|`` on strata accumulating at the singular set.

    The bound is fitted on the three shallowest strata (twice their maximum);
    deeper strata must stay below it and must not keep growing.
    """
    domain = domain if domain is not None else bounded_domain(map)
    rng = np.random.default_rng(seed)
    layers = stratified_points(domain, rng, max(sample_budget // strata, 1), strata)
    vals = [diffgeo.op_norm(diffgeo.differential(map, P, method=method)) if len(P) else np.empty(0)
            for _, P in layers]
    maxima = _stratum_max(vals)
    shallow = [m for m in maxima[:3] if np.isfinite(m)]
    bound = 2.0 * max(shallow) if shallow else math.nan
    finite = [m for m in maxima if np.isfinite(m)]
    return LipschitzCheck(max(finite) if finite else math.nan, bound, tuple(maxima),
                          growth_flag(maxima), sum(len(v) for v in vals))


def qc_report(map: MapSpec, sample_budget: int = 10_000, seed: int = 0) -> ExperimentReport:
    w = qc_witness(map, sample_budget, seed)
    report = ExperimentReport("qc-witness", {"map": map.id, "n": map.n, "sample_budget": sample_budget,
                                             "seed": seed})
    predicted = "bounded" if map.quasiconformal else "unbounded"
    computed = "unbounded" if w.growth else "bounded"
    # sampling can exhibit growth but never certify boundedness: a missing
    # witness for a non-quasiconformal map is inconclusive, not a disagreement
    border = not map.quasiconformal and not w.growth
    report.rows.append(ReportRow(f"map={map.id}", TAG_QC, predicted, computed, predicted == computed, border,
                                 diagnostics={"value": w.estimate, **w.to_dict()}))
    return report


# --------------------------------------------------------------------------
# cusp threshold


def cusp_plus_region(n: int) -> DomainSpec:
    """The cone ``{0 < t < rho < 1}`` on which the cusp map differs from the identity."""
    X = split_x_cusp(n)
    plus = [p for p in X.pieces if p.label == "t>0"]
    return custom_axisymmetric(lambda t, rho: (t > 0) & (rho > t) & (rho < 1), tuple(plus), n,
                               "SplitX_cusp+", X.singular_set)


def envelope_oracle(alpha: float, n: int) -> float:
    return sphere_area(n - 2) * alpha / (n - alpha) if alpha < n else math.inf


def cusp_threshold(
    alphas=(1.0, 2.0, 2.5, 3.0, 3.5, 4.0),
    n: int = 3,
    tol: float = 1e-10,
    shell_depth: int = quad.SHELL_DEPTH,
    sample_budget: int = 4096,
    seed: int = 0,
    threshold: float | None = None,
    max_depth: int = quad.MAX_DEPTH,
) -> ExperimentReport:
    """Per alpha: energy verdict of the forward cusp map, envelope oracle, Lipschitz check of the inverse."""
    grid = [float(a) for a in alphas]
    if any(not a > 0 for a in grid):
        raise ValueError("alphas must be positive")
    report = ExperimentReport("cusp-threshold", {
        "n": n, "alphas": grid, "tol": tol, "shell_depth": shell_depth, "sample_budget": sample_budget,
        "seed": seed, "threshold": threshold,
    })
    region = cusp_plus_region(n)
    for a in grid:
        h, f = make_cusp_pair(a, n)
        res = quad.energy(h, None, n, tol=tol, shell_depth=shell_depth, max_depth=max_depth)
        pred = _override(threshold, a, "alpha", h.predict_energy(n))
        report.rows.append(_verdict_row(f"alpha={_fmt(a)}:energy", res, pred))

        env = quad.integrate_functional(quad.Integrand(lambda t, rho, h=h: h.envelope(t, rho) ** n), region, n,
                                        p=n, label=f"envelope[{h.id}]", tol=tol, shell_depth=shell_depth,
                                        max_depth=max_depth)
        oracle = envelope_oracle(a, n)
        if a < n:
            gap = abs(env.value - oracle) / oracle if env.kind == "Convergent" else math.nan
            ok = env.kind == "Convergent" and gap <= 1e-2
            row = ReportRow(f"alpha={_fmt(a)}:envelope", TAG_ENVELOPE, "Convergent", env.kind, ok,
                            False, env.failure, {**_verdict_diag(env), "reference": oracle, "gap": gap})
        else:
            row = _verdict_row(f"alpha={_fmt(a)}:envelope", env,
                               EnergyPrediction(False, a == n, TAG_ENVELOPE), reference=oracle)
        report.rows.append(row)

        lip = lipschitz_check(f, sample_budget, seed)
        covered = a < n
        report.rows.append(ReportRow(
            f"alpha={_fmt(a)}:lipschitz", TAG_LIPSCHITZ + ("" if covered else " (diagnostic only)"),
            "bounded", "bounded" if lip.passed else "unbounded", lip.passed, not covered, None,
            {"value": lip.sup, "reference": lip.bound, **lip.to_dict()},
        ))
    return report


def lipschitz_report(map: MapSpec, sample_budget: int = 4096, seed: int = 0) -> ExperimentReport:
    lip = lipschitz_check(map, sample_budget, seed)
    report = ExperimentReport("lipschitz-check", {"map": map.id, "n": map.n, "sample_budget": sample_budget,
                                                  "seed": seed})
    report.rows.append(ReportRow(f"map={map.id}", TAG_LIPSCHITZ, "bounded",
                                 "bounded" if lip.passed else "unbounded", lip.passed,
                                 diagnostics={"value": lip.sup, "reference": lip.bound, **lip.to_dict()}))
    return report


# --------------------------------------------------------------------------
# pointwise identities


def pointwise_identities(maps, sample_budget: int = 10_000, seed: int = 0, strata: int = 12,
                         cramer_tol: float = 1e-10, sandwich_tol: float = 1e-9,
                         analytic_tol: float = 1e-9, fd_tol: float = 1e-5) -> ExperimentReport:
    """Cramer, sandwich and chain-rule residuals on stratified samples of each map."""
    report = ExperimentReport("pointwise-identities", {
        "maps": [m.id for m in maps], "sample_budget": sample_budget, "seed": seed, "strata": strata,
        "cramer_tol": cramer_tol, "sandwich_tol": sandwich_tol, "analytic_tol": analytic_tol, "fd_tol": fd_tol,
    })
    for k, m in enumerate(maps):
        rng = np.random.default_rng([seed, k])
        layers = stratified_points(bounded_domain(m), rng, max(sample_budget // strata, 1), strata)
        P = np.concatenate([p for _, p in layers])
        D = diffgeo.differential(m, P)
        cram = float(np.max(diffgeo.cramer_residual(D)))
        _, _, _, _, KO, KI = diffgeo.distortion_values(D, m.n)
        sand = float(np.max(diffgeo.sandwich_residual(KO, KI, m.n)))
        cell = f"map={m.id}"
        report.rows.append(ReportRow(f"{cell}:cramer", TAG_CRAMER, f"<= {cramer_tol:g}", f"{cram:.3g}",
                                     cram <= cramer_tol, diagnostics={"value": cram, "reference": cramer_tol,
                                                                      "samples": len(P)}))
        report.rows.append(ReportRow(f"{cell}:sandwich", TAG_SANDWICH, f"<= {sandwich_tol:g}", f"{sand:.3g}",
                                     sand <= sandwich_tol, diagnostics={"value": sand, "reference": sandwich_tol,
                                                                        "samples": len(P)}))
        if m.inverse is None:
            continue
        f = m.inverse
        chain = float(np.max(diffgeo.pointwise_identity(m, f, P, method="analytic")))
        report.rows.append(ReportRow(f"{cell}:chain-analytic", TAG_CHAIN, f"<= {analytic_tol:g}", f"{chain:.3g}",
                                     chain <= analytic_tol,
                                     diagnostics={"value": chain, "reference": analytic_tol, "samples": len(P)}))
        fd_res, dropped = _fd_chain(m, f, P)
        ok = fd_res <= fd_tol and dropped <= 0.05 * len(P)
        report.rows.append(ReportRow(f"{cell}:chain-fd", TAG_CHAIN, f"<= {fd_tol:g}", f"{fd_res:.3g}", ok,
                                     diagnostics={"value": fd_res, "reference": fd_tol, "samples": len(P),
                                                  "unstable": dropped}))
    return report


def _fd_chain(h: MapSpec, f: MapSpec, P: np.ndarray) -> tuple[float, int]:
    """Max chain-rule residual with both differentials by finite differences."""
    Q = h.apply(P)
    inside = f.domain.contains(Q)
    P, Q = P[inside], Q[inside]
    Dh, bad_h = diffgeo.fd_differential(h, P, strict=False)
    Df, bad_f = diffgeo.fd_differential(f, Q, strict=False)
    good = ~(bad_h | bad_f)
    prod = np.einsum("nij,njk->nik", Df[good], Dh[good])
    res = np.linalg.norm(prod - np.eye(h.n), axis=(1, 2))
    return (float(np.max(res)) if res.size else math.nan), int((~good).sum() + (~inside).sum())


# --------------------------------------------------------------------------
# change of variables


def change_of_variables_experiment(map: MapSpec, region: DomainSpec, tols=(1e-4, 1e-6, 1e-8), eta=None,
                                   threshold: float = 1e-3) -> ExperimentReport:
    report = ExperimentReport("change-of-variables", {"map": map.id, "region": region.id, "n": map.n,
                                                      "tols": [float(t) for t in tols], "threshold": threshold})
    residuals = []
    for tol in tols:
        cov = quad.change_of_variables(map, region, eta, tol)
        residuals.append(cov.residual)
        report.rows.append(ReportRow(f"tol={_fmt(tol)}", TAG_COV, f"<= {threshold:g}", f"{cov.residual:.3g}",
                                     cov.residual <= threshold,
                                     diagnostics={"value": cov.lhs, "abs_err": cov.lhs_err, "reference": cov.rhs,
                                                  "gap": cov.residual, "reference_err": cov.rhs_err}))
    down = all(b <= max(a, 1e-13) for a, b in zip(residuals, residuals[1:]))
    report.rows.append(ReportRow("refinement", TAG_COV, "non-increasing", "non-increasing" if down else "increasing",
                                 down, diagnostics={"residuals": residuals}))
    return report


# --------------------------------------------------------------------------
# modulus of continuity


@dataclass(frozen=True)
class ModulusProfile:
    base: tuple[float, ...]
    variant: str
    scales: tuple[float, ...]
    osc: tuple[float, ...]
    energy: tuple[float, ...]
    bound: tuple[float, ...]
    ratio: tuple[float, ...]
    scaled_osc: tuple[float, ...] = ()

    @property
    def C_hat(self) -> float:
        r = [x for x in self.ratio if np.isfinite(x)]
        return max(r) if r else math.nan

    @property
    def spread(self) -> float:
        r = [x for x in self.ratio if np.isfinite(x) and x > 0]
        return max(r) / min(r) if r else math.nan

    def to_dict(self) -> dict:
        return {"base": list(self.base), "variant": self.variant, "scales": list(self.scales),
                "osc": list(self.osc), "energy": list(self.energy), "bound": list(self.bound),
                "ratio": list(self.ratio), "C_hat": self.C_hat, "spread": self.spread,
                "scaled_osc": list(self.scaled_osc)}


def _fibonacci_sphere(m: int) -> np.ndarray:
    k = np.arange(m) + 0.5
    z = 1 - 2 * k / m
    phi = math.pi * (1 + math.sqrt(5)) * k
    s = np.sqrt(1 - z * z)
    return np.column_stack([z, s * np.cos(phi), s * np.sin(phi)])


def _full_directions(n: int, m: int, rng) -> np.ndarray:
    return _fibonacci_sphere(m) if n == 3 else random_directions(rng, m, n)


def _latitude_points(n: int, theta: np.ndarray) -> np.ndarray:
    pts = []
    for sign in (1.0, -1.0):
        P = np.zeros((len(theta), n))
        P[:, 0] = np.cos(theta)
        P[:, 1] = sign * np.sin(theta)
        pts.append(P)
    return np.concatenate(pts)


def _diameter(X: np.ndarray, Y: np.ndarray) -> tuple[float, float]:
    """``diam Y`` and the distance between the pre-images of a farthest pair."""
    if len(Y) < 2:
        return 0.0, math.nan
    d = squareform(pdist(Y))
    i, j = np.unravel_index(np.argmax(d), d.shape)
    return float(d[i, j]), float(np.linalg.norm(X[i] - X[j]))


def modulus_profile(
    map: MapSpec,
    base: PointN | None = None,
    scales=None,
    variant: str = "auto",
    samples: int = 256,
    tol: float = 1e-8,
    seed: int = 0,
    domain: DomainSpec | None = None,
) -> ModulusProfile:
    """Oscillation of ``map`` on spheres about ``base`` against the energy bound.

    ``variant="interior"`` needs ``B(base, 2 tau)`` inside the domain and uses
    ``E = int_{2B} |Dh|^n``.  ``variant="boundary"`` puts ``base`` at a
    boundary point on the axis and uses ``E = int_{B(base, sqrt tau)} |Dh|^n``
    with the bound ``E / log(1/tau)``.
    """
    n = map.n
    domain = domain if domain is not None else bounded_domain(map)
    if base is None:
        base = PointN.axial(0.0, 0.0, n)
    base_arr = as_points(base, n)[0]
    if np.any(base_arr[1:] != 0):
        raise ValueError("modulus_profile needs a base point on the axis")
    c = float(base_arr[0])
    if variant == "auto":
        sing = domain.singular_set
        at_tip = sing.kind == "point" and sing.data[0] == c
        variant = "boundary" if at_tip or not domain.contains(base_arr[None])[0] else "interior"
    if scales is None:
        scales = [2.0 ** -k for k in (range(3, 13) if variant == "interior" else range(4, 26, 2))]
    scales = [float(s) for s in scales]
    rng = np.random.default_rng(seed)
    lat = np.linspace(0.0, math.pi, samples // 2)
    full = _full_directions(n, samples, rng)
    oscs, energies, bounds, ratios, scaled = [], [], [], [], []
    for tau in scales:
        if variant == "interior":
            _require_ball(domain, c, 2 * tau)
            U = np.concatenate([_latitude_points(n, lat), full])
        elif variant == "boundary":
            arcs = domain.sphere_arcs(tau, center=c)
            if not arcs:
                raise ScaleOutOfDomain(f"sphere of radius {tau:g} misses the domain")
            U = np.concatenate([_latitude_points(n, _arc_angles(arcs, samples // 2)), full])
        else:
            raise ValueError(f"unknown modulus variant {variant!r}")
        X = base_arr + tau * U
        X = X[domain.contains(X)]
        osc, sep = _diameter(X, map.apply(X))
        if variant == "interior":
            E, _ = quad.integrate_axisym(quad.gradient_integrand(map, n), axial_ball(c, 2 * tau, n), tol=tol, n=n)
            bound = E / math.log(math.e + 2 * tau / sep)
        else:
            r = math.sqrt(tau)
            res = quad.integrate_functional(quad.gradient_integrand(map, n), ball_section(domain, r), n, p=n,
                                            tol=tol)
            E = res.value if res.kind == "Convergent" else math.nan
            bound = E / math.log(1.0 / tau)
            scaled.append(osc * math.log(1.0 / tau) ** (1.0 / n))
        oscs.append(osc)
        energies.append(E)
        bounds.append(bound)
        ratios.append(osc**n / bound if bound > 0 else math.nan)
    return ModulusProfile(tuple(base_arr.tolist()), variant, tuple(scales), tuple(oscs), tuple(energies),
                          tuple(bounds), tuple(ratios), tuple(scaled))


def _require_ball(domain: DomainSpec, c: float, radius: float) -> None:
    theta = np.linspace(0.0, math.pi, 257)
    for frac in (0.25, 0.5, 0.75, 1.0):
        r = radius * frac
        if not domain.contains_reduced(c + r * np.cos(theta), r * np.sin(theta)).all():
            raise ScaleOutOfDomain(f"ball of radius {radius:g} about t={c:g} leaves {domain.id}")


def _arc_angles(arcs, m: int) -> np.ndarray:
    lengths = np.array([b - a for a, b, _ in arcs])
    counts = np.maximum(1, np.round(m * lengths / lengths.sum()).astype(int))
    return np.concatenate([a + (b - a) * (np.arange(k) + 0.5) / k for (a, b, _), k in zip(arcs, counts)])


def decreasing_tail(values, count: int = 6) -> bool:
    v = [x for x in values if np.isfinite(x)][-count:]
    return len(v) == count and all(b < a for a, b in zip(v, v[1:]))


def modulus_report(map: MapSpec, base: PointN | None = None, scales=None, variant: str = "auto",
                   tol: float = 1e-8, seed: int = 0) -> ExperimentReport:
    prof = modulus_profile(map, base, scales, variant, tol=tol, seed=seed)
    report = ExperimentReport("modulus-profile", {"map": map.id, "n": map.n, "base": list(prof.base),
                                                  "variant": prof.variant, "scales": list(prof.scales),
                                                  "tol": tol, "seed": seed})
    tag = TAG_MODULUS if prof.variant == "interior" else TAG_BOUNDARY
    for j, tau in enumerate(prof.scales):
        finite = bool(np.isfinite(prof.ratio[j]))
        diag = {"value": prof.osc[j], "reference": prof.bound[j], "gap": prof.ratio[j], "energy": prof.energy[j]}
        if prof.scaled_osc:
            diag["scaled_osc"] = prof.scaled_osc[j]
        report.rows.append(ReportRow(f"tau={_fmt(tau)}", tag, "finite", "finite" if finite else "non-finite",
                                     finite, diagnostics=diag))
    if prof.variant == "interior":
        stable = bool(prof.spread <= 10.0)
        report.rows.append(ReportRow("scale-stability", tag, "stable", "stable" if stable else "unstable", stable,
                                     diagnostics={"value": prof.C_hat, "gap": prof.spread}))
    else:
        down = decreasing_tail(prof.scaled_osc)
        report.rows.append(ReportRow("scaled-oscillation", tag, "decreasing",
                                     "decreasing" if down else "not decreasing", down,
                                     diagnostics={"value": prof.scaled_osc[-1] if prof.scaled_osc else math.nan}))
    return report


# --------------------------------------------------------------------------
# catalogue

EXPERIMENTS = {
    "energy-identity": "inner distortion integral equals the conformal energy of the inverse",
    "exponent-sweep": "Sobolev exponent thresholds of the inverse slit and cut maps",
    "cusp-threshold": "the cusp-flattening map has finite conformal energy iff alpha < n",
    "qc-witness": "bounded inner distortion characterises quasiconformal maps",
    "lipschitz-check": "forward slit and cut maps and the inverse cusp map are Lipschitz",
    "pointwise-identities": "Cramer rule, distortion inequalities and the inverse chain rule",
    "change-of-variables": "change of variables for Sobolev homeomorphisms",
    "modulus-profile": "modulus of continuity controlled by the conformal energy",
}
