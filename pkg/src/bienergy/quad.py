"""Axisymmetric quadrature with dyadic shells and divergence classification.

An axisymmetric integrand ``g(t, rho)`` over a solid of revolution reduces to

    int g dx = omega_{n-2} * int int g(t, rho) rho^(n-2) dt drho,

which is evaluated piece by piece on the reduced regions carried by each
:class:`~bienergy.domains.DomainSpec`.  Each piece is pulled back to the unit
square in ``(v, xi)`` (outer variable, normalised inner variable) and
integrated with tensor Gauss-Legendre rules on adaptively refined cells.

Pieces that accumulate toward a singular set are cut into dyadic shells of
the shell variable, ``(rho0 2^(-k-1), rho0 2^(-k)]``.  The per-shell
contributions go into a :class:`ShellLedger`; :func:`classify` then fits their
decay and decides between a convergent tail, divergence, or neither.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy import integrate as sp_integrate

from . import diffgeo
from .domains import DomainSpec, Piece, sphere_area
from .errors import InsufficientShells, MaxDepthExceeded, NonFiniteIntegrand
from .points import axial_points

BETA_CONV = 0.1
BETA_DIV = 0.02
FIT_SLACK = 1e-4
FIT_SHELLS = 12
SHELL_DEPTH = 40
MAX_DEPTH = 24
MAX_CELLS = 400_000
GRADE_LEVELS = 40


def _unit_rule(k: int):
    x, w = leggauss(k)
    return 0.5 * (x + 1.0), 0.5 * w


def threads() -> int:
    try:
        return max(1, int(os.environ.get("BIENERGY_THREADS", "1")))
    except ValueError:
        return 1


def _pmap(fn, items):
    items = list(items)
    k = threads()
    if k <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=k) as ex:
        return list(ex.map(fn, items))


# --------------------------------------------------------------------------
# one piece


_HI = _unit_rule(12)
_LO = _unit_rule(6)


class Integrand:
    """An axisymmetric integrand ``fn(t, rho)`` with an optional switch function.

    ``switch`` changes sign across curves where ``fn`` has a kink (typically
    where two singular values of the differential cross).
    """

    def __init__(self, fn, switch=None):
        self.fn = fn
        self.switch = switch

    def __call__(self, t, rho):
        return self.fn(t, rho)


def _locate(sw, piece, V, lo, width, a, b, iters: int = 48):
    """Bisection for a sign change of the switch function along ``xi`` in ``(a, b)``."""
    def s_at(xi):
        t, rho, _ = piece.to_reduced(V, lo + xi * width)
        return sw(t, rho)

    sa = s_at(a)
    sb = s_at(b)
    cross = (sa * sb < 0) & (width > 0)
    cut = b.copy()
    if not cross.any():
        return cut
    A, B, SA = a[cross], b[cross], sa[cross]
    Vc, loc, wc = V[cross], lo[cross], width[cross]
    for _ in range(iters):
        M = 0.5 * (A + B)
        t, rho, _ = piece.to_reduced(Vc, loc + M * wc)
        SM = sw(t, rho)
        left = SA * SM <= 0
        B = np.where(left, M, B)
        A = np.where(left, A, M)
        SA = np.where(left, SA, SM)
    cut[cross] = 0.5 * (A + B)
    return cut


def _rule_sums(g, piece: Piece, n: int, cells: np.ndarray):
    """Cell sums ``(Q[12,12], Q[6,12], Q[12,6])`` (outer order, inner order).

    Along the inner direction each outer node gets a Gauss rule on each side
    of the switch point of the integrand (if it has one), so kinks along
    curves do not spoil the inner rule.
    """
    v0, v1, x0, x1 = cells.T
    dv = v1 - v0
    m = len(cells)
    sw = getattr(g, "switch", None)
    blocks = []  # (t, rho, weights for each inner rule, live)
    for xo, wo, inner in ((_HI[0], _HI[1], (_HI, _LO)), (_LO[0], _LO[1], (_HI,))):
        V = v0[:, None] + dv[:, None] * xo[None, :]
        lo, hi = piece.lo(V), piece.hi(V)
        width = hi - lo
        a = np.broadcast_to(x0[:, None], V.shape).copy()
        b = np.broadcast_to(x1[:, None], V.shape).copy()
        cut = _locate(sw, piece, V, lo, width, a, b) if sw is not None else b
        seg_lo = np.stack([a, cut], axis=-1)
        seg_len = np.stack([cut - a, b - cut], axis=-1)
        for xi_nodes, xi_w in inner:
            X = seg_lo[..., None] + seg_len[..., None] * xi_nodes
            shape = X.shape
            Vb = np.broadcast_to(V[:, :, None, None], shape)
            wdb = np.broadcast_to(width[:, :, None, None], shape)
            t, rho, jac = piece.to_reduced(Vb, np.broadcast_to(lo[:, :, None, None], shape) + X * wdb)
            with np.errstate(invalid="ignore"):
                wt = (rho ** (n - 2) * jac * wdb * seg_len[..., None] * xi_w
                      * (dv[:, None] * wo[None, :])[:, :, None, None])
            live = (wdb > 0) & (seg_len[..., None] > 0) & (rho > 0) & np.isfinite(wt)
            blocks.append((t.reshape(m, -1), rho.reshape(m, -1), wt.reshape(m, -1), live.reshape(m, -1)))
    t_all = np.concatenate([bl[0][bl[3]] for bl in blocks])
    r_all = np.concatenate([bl[1][bl[3]] for bl in blocks])
    vals = np.asarray(g(t_all, r_all), dtype=float) if t_all.size else np.empty(0)
    if not np.all(np.isfinite(vals)):
        i = int(np.flatnonzero(~np.isfinite(vals))[0])
        raise NonFiniteIntegrand(f"integrand is {vals[i]} at t={t_all[i]:.6g}, rho={r_all[i]:.6g}")
    sums = []
    at = 0
    for t, rho, wt, live in blocks:
        G = np.zeros(t.shape)
        c = int(live.sum())
        G[live] = vals[at : at + c]
        at += c
        sums.append(np.where(live, G * wt, 0.0).sum(axis=1))
    q_hh, q_hl, q_lh = sums  # outer 12/inner 12, outer 12/inner 6, outer 6/inner 12
    return q_hh, q_lh, q_hl


def _breaks_outer(lo: float, hi: float, levels: int) -> list[float]:
    out = [hi]
    x = hi
    for _ in range(levels):
        x *= 0.5
        if x <= lo:
            break
        out.append(x)
    out.append(lo)
    return out[::-1]


def _probe(va: float, vb: float, samples: int) -> np.ndarray:
    """Interior probe points: uniform, plus geometric clusters toward both ends."""
    u = np.concatenate([np.linspace(0, 1, samples)[1:-1], 2.0 ** -np.arange(6, 48, 0.5)])
    u = np.unique(np.concatenate([u, 1 - u]))
    u = u[(u > 0) & (u < 1)]
    return va + (vb - va) * u


def _switch_breaks(sw, piece: Piece, vb: list[float], xb: list[float], samples: int = 65) -> list[float]:
    """Outer values where the switch curve crosses one of the inner grid lines."""
    extra = []
    eps = 1e-9
    lines = [min(max(x, eps), 1 - eps) for x in xb]
    for va, vb_ in zip(vb[:-1], vb[1:]):
        V = _probe(va, vb_, samples)
        if not V.size:
            continue
        lo, hi = piece.lo(V), piece.hi(V)
        width = hi - lo
        for xi in lines:
            def s_at(v):
                l, h = piece.lo(v), piece.hi(v)
                t, rho, _ = piece.to_reduced(v, l + xi * (h - l))
                return sw(t, rho)

            S = s_at(V)
            ok = np.isfinite(S) & (width > 0)
            idx = np.flatnonzero(ok[:-1] & ok[1:] & (S[:-1] * S[1:] < 0))
            for i in idx:
                A, B, SA = V[i], V[i + 1], S[i]
                for _ in range(60):
                    M = 0.5 * (A + B)
                    SM = float(s_at(np.array([M]))[0])
                    if SA * SM <= 0:
                        B = M
                    else:
                        A, SA = M, SM
                extra.append(0.5 * (A + B))
    return extra


def _initial_cells(piece: Piece, graded: bool, sw=None) -> np.ndarray:
    v0, v1 = piece.outer
    if not v1 > v0:
        return np.empty((0, 4))
    vb, xb = [v0, v1], [0.0, 1.0]
    if graded and piece.shell_on_outer:
        if piece.singular and v0 <= 0:
            vb = _breaks_outer(0.0, v1, GRADE_LEVELS)
        elif v0 > 0:
            vb = _breaks_outer(v0, v1, min(GRADE_LEVELS, math.ceil(math.log2(v1 / v0))))
    elif graded:
        vs = np.linspace(v0, v1, 11)[1:-1]
        lo, hi = piece.lo(vs), piece.hi(vs)
        if piece.singular and np.all(lo <= 0):
            levels = GRADE_LEVELS
        else:
            with np.errstate(divide="ignore", invalid="ignore"):
                ratio = hi / lo
            ratio = ratio[np.isfinite(ratio) & (ratio > 2)]
            levels = min(GRADE_LEVELS, math.ceil(math.log2(ratio.max()))) if ratio.size else 0
        if levels:
            xb = _breaks_outer(0.0, 1.0, levels)
    if sw is not None:
        with np.errstate(all="ignore"):
            vb = sorted(set(vb) | set(_switch_breaks(sw, piece, vb, xb)))
    cells = [(a, b, c, d) for a, b in zip(vb[:-1], vb[1:]) for c, d in zip(xb[:-1], xb[1:])]
    return np.array(cells, dtype=float)


@dataclass(frozen=True)
class PieceResult:
    value: float
    abs_err: float
    cells: int


def integrate_piece(
    g,
    piece: Piece,
    n: int,
    rtol: float = 1e-10,
    atol: float = 0.0,
    max_depth: int = MAX_DEPTH,
    max_cells: int = MAX_CELLS,
    graded: bool = True,
) -> PieceResult:
    """Adaptive Gauss-Legendre integral of ``g rho^(n-2)`` over one piece.

    The factor ``omega_{n-2}`` is *not* included.  Each cell carries separate
    error estimates for its outer and inner directions; cells whose total
    estimate exceeds their share of the target are bisected along the worse
    direction.  ``max_depth`` bounds the number of bisections per direction.
    """
    sw = getattr(g, "switch", None)
    cells = _initial_cells(piece, graded, sw)
    if not len(cells):
        return PieceResult(0.0, 0.0, 0)
    dv_depth = np.zeros(len(cells), dtype=int)
    dx_depth = np.zeros(len(cells), dtype=int)
    val, q_lo_v, q_lo_x = _rule_sums(g, piece, n, cells)
    ev, ex = np.abs(val - q_lo_v), np.abs(val - q_lo_x)
    while True:
        total = math.fsum(val)
        target = max(rtol * abs(total), atol)
        err = ev + ex
        E = float(np.sum(err))
        if E <= target:
            return PieceResult(total, E, len(cells))
        pick = err > target / len(cells)
        if not pick.any():
            pick[np.argmax(err)] = True
        along_v = pick & (ev >= ex)
        along_x = pick & ~along_v
        if (dv_depth[along_v] >= max_depth).any() or (dx_depth[along_x] >= max_depth).any():
            raise MaxDepthExceeded(f"cell depth {max_depth} reached (error {E:.3e}, target {target:.3e})")
        if len(cells) + int(pick.sum()) > max_cells:
            raise MaxDepthExceeded(f"cell budget {max_cells} exhausted (error {E:.3e}, target {target:.3e})")
        Pv, Px = cells[along_v], cells[along_x]
        vm = 0.5 * (Pv[:, 0] + Pv[:, 1])
        xm = 0.5 * (Px[:, 2] + Px[:, 3])
        kids = np.concatenate([
            np.column_stack([Pv[:, 0], vm, Pv[:, 2], Pv[:, 3]]),
            np.column_stack([vm, Pv[:, 1], Pv[:, 2], Pv[:, 3]]),
            np.column_stack([Px[:, 0], Px[:, 1], Px[:, 2], xm]),
            np.column_stack([Px[:, 0], Px[:, 1], xm, Px[:, 3]]),
        ])
        kdv = np.concatenate([np.tile(dv_depth[along_v] + 1, 2), np.tile(dv_depth[along_x], 2)])
        kdx = np.concatenate([np.tile(dx_depth[along_v], 2), np.tile(dx_depth[along_x] + 1, 2)])
        kv, klv, klx = _rule_sums(g, piece, n, kids)
        keep = ~pick
        cells = np.concatenate([cells[keep], kids])
        dv_depth = np.concatenate([dv_depth[keep], kdv])
        dx_depth = np.concatenate([dx_depth[keep], kdx])
        val = np.concatenate([val[keep], kv])
        ev = np.concatenate([ev[keep], np.abs(kv - klv)])
        ex = np.concatenate([ex[keep], np.abs(kv - klx)])


def integrate_axisym(g, domain: DomainSpec, tol: float = 1e-8, n: int | None = None,
                     max_depth: int = MAX_DEPTH):
    """``(value, abs_err)`` of ``int_domain g(t, |x|) dx`` via the reduced integral.

    Singular pieces are graded dyadically toward their singular end; callers
    with non-integrable singularities should pass a truncated domain.
    """
    if not domain.axisymmetric:
        raise ValueError("integrate_axisym needs an axisymmetric domain")
    n = n or domain.n
    om = sphere_area(n - 2)
    res = [integrate_piece(g, p, n, rtol=tol, max_depth=max_depth) for p in domain.pieces]
    return om * math.fsum(r.value for r in res), om * sum(r.abs_err for r in res)


# --------------------------------------------------------------------------
# shells


@dataclass(frozen=True)
class ShellRow:
    k: int
    rho_lo: float
    rho_hi: float
    contribution: float
    est_error: float
    cells_used: int

    def to_dict(self) -> dict:
        return {"k": self.k, "rho_lo": self.rho_lo, "rho_hi": self.rho_hi,
                "contribution": self.contribution, "est_error": self.est_error, "cells_used": self.cells_used}


SHELL_COLUMNS = ["k", "rho_lo", "rho_hi", "contribution", "est_error", "cells_used"]


@dataclass(frozen=True)
class ShellLedger:
    shells: tuple[ShellRow, ...]
    rho0: float = 1.0
    regular: float = 0.0
    regular_err: float = 0.0
    regular_cells: int = 0

    @property
    def contributions(self) -> np.ndarray:
        return np.array([s.contribution for s in self.shells])

    @property
    def errors(self) -> np.ndarray:
        return np.array([s.est_error for s in self.shells])

    def partial_sum(self) -> float:
        """Regular part plus all shells, summed deepest first."""
        return math.fsum([self.regular] + [s.contribution for s in reversed(self.shells)])

    def rows(self) -> list[dict]:
        return [s.to_dict() for s in self.shells]

    def to_dict(self) -> dict:
        return {"rho0": self.rho0, "regular": self.regular, "regular_err": self.regular_err,
                "shells": self.rows()}

    @classmethod
    def from_contributions(cls, contributions, rho0: float = 1.0, rel_err: float = 1e-12):
        rows = tuple(
            ShellRow(k, rho0 * 2.0 ** (-k - 1), rho0 * 2.0 ** (-k), float(c), abs(float(c)) * rel_err, 1)
            for k, c in enumerate(contributions)
        )
        return cls(rows, rho0)


def _shell_pieces(domain: DomainSpec):
    sing = [p for p in domain.pieces if p.singular]
    reg = [p for p in domain.pieces if not p.singular]
    return sing, reg


def shell_integrate(
    g,
    domain: DomainSpec,
    n: int | None = None,
    rtol: float = 1e-10,
    depth: int = SHELL_DEPTH,
    rho0: float | None = None,
    max_depth: int = MAX_DEPTH,
    max_cells: int = MAX_CELLS,
) -> ShellLedger:
    """Integrate ``g`` shell by shell toward the singular set of ``domain``."""
    n = n or domain.n
    om = sphere_area(n - 2)
    sing, reg = _shell_pieces(domain)
    if rho0 is None:
        rho0 = max((p.shell_range() for p in sing), default=1.0)

    def one_shell(k):
        a, b = rho0 * 2.0 ** (-k - 1), rho0 * 2.0 ** (-k)
        parts = [
            integrate_piece(g, replace(p.restrict(a, b), singular=False), n, rtol=rtol,
                            max_depth=max_depth, max_cells=max_cells)
            for p in sing
        ]
        return ShellRow(k, a, b, om * math.fsum(r.value for r in parts),
                        om * sum(r.abs_err for r in parts), sum(r.cells for r in parts))

    shells = tuple(_pmap(one_shell, range(depth))) if sing else ()
    regs = [integrate_piece(g, p, n, rtol=rtol, max_depth=max_depth, max_cells=max_cells) for p in reg]
    return ShellLedger(
        shells,
        float(rho0),
        om * math.fsum(r.value for r in regs),
        om * sum(r.abs_err for r in regs),
        sum(r.cells for r in regs),
    )


# --------------------------------------------------------------------------
# classification


@dataclass(frozen=True)
class Verdict:
    kind: str  # Convergent | Divergent | Inconclusive
    value: float = math.nan
    abs_err: float = math.nan
    beta: float = math.nan
    gamma: float = math.nan
    model: str = "none"
    tail: float = 0.0
    partial: float = math.nan
    rss_geometric: float = math.nan
    rss_logpower: float = math.nan

    @property
    def borderline(self) -> bool:
        """Inconclusive, or divergent with essentially flat shells (log divergence)."""
        return self.kind == "Inconclusive" or (self.kind == "Divergent" and abs(self.beta) <= BETA_DIV)

    def to_dict(self) -> dict:
        return {"verdict": self.kind, "value": self.value, "abs_err": self.abs_err, "beta": self.beta,
                "gamma": self.gamma, "model": self.model, "tail": self.tail, "partial_sum": self.partial,
                "borderline": self.borderline}


def _fit(x, y):
    A = np.column_stack([np.ones_like(x), x])
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    rss = float(np.sum((A @ coef - y) ** 2))
    return coef, rss


def classify(
    ledger: ShellLedger,
    fit: int = FIT_SHELLS,
    beta_conv: float = BETA_CONV,
    beta_div: float = BETA_DIV,
) -> Verdict:
    """Decide convergence from the decay of the deepest ``fit`` shell contributions.

    Two models are fitted to ``log2 c_k``: geometric decay ``c_k ~ 2^(-beta k)``
    and log-power decay ``c_k ~ L_k^(-gamma)`` with ``L_k = log(e rho0' / rho_k)``.
    The log-power model is preferred only when it explains the data an order
    of magnitude better; its effective exponent is ``beta = gamma - 1``, which
    is the margin by which the series converges.
    """
    shells = ledger.shells
    if len(shells) < fit:
        raise InsufficientShells(f"need {fit} shells, have {len(shells)}")
    deep = shells[-fit:]
    c = np.array([s.contribution for s in deep])
    e = np.array([s.est_error for s in deep])
    unresolved = e > 0.01 * np.abs(c)
    if unresolved.any():
        k = deep[int(np.flatnonzero(unresolved)[0])].k
        raise InsufficientShells(f"shell {k} not resolved to 1% (error {e[unresolved][0]:.3e})")
    partial = ledger.partial_sum()
    err_sum = float(np.sum(ledger.errors)) + ledger.regular_err
    last3 = math.fsum(s.contribution for s in shells[-3:])
    if np.all(c == 0):
        return Verdict("Convergent", partial, err_sum, math.inf, model="zero", partial=partial)
    if np.any(c <= 0):
        raise InsufficientShells("shell contributions must be positive to fit a decay rate")
    k = np.array([s.k for s in deep], dtype=float)
    y = np.log2(c)
    (a_g, s_g), rss_g = _fit(k, y)
    beta_g = -s_g
    scale = max(ledger.rho0, 1.0)
    v_mid = ledger.rho0 * 2.0 ** (-k - 0.5)
    L = np.log(math.e * scale / v_mid)
    (a_l, s_l), rss_l = _fit(np.log2(L), y)
    gamma = -s_l
    use_log = rss_l < 0.1 * rss_g and rss_g > 1e-14
    beta = gamma - 1.0 if use_log else beta_g
    model = "log-power" if use_log else "geometric"
    common = dict(beta=beta, gamma=gamma if use_log else math.nan, model=model, partial=partial,
                  rss_geometric=rss_g, rss_logpower=rss_l)
    if beta >= beta_conv - FIT_SLACK:
        K = shells[-1].k
        if use_log:
            L_end = math.log(math.e * scale / (ledger.rho0 * 2.0 ** (-K - 1)))
            tail = 2.0**a_l * L_end ** (1.0 - gamma) / ((gamma - 1.0) * math.log(2.0))
        else:
            r = 2.0**-beta
            tail = 2.0 ** (a_g - beta * K) * r / (1.0 - r)
        value = partial + tail
        abs_err = err_sum + max(abs(tail), last3)
        return Verdict("Convergent", value, abs_err, tail=tail, **common)
    if beta <= beta_div + FIT_SLACK:
        return Verdict("Divergent", math.inf, math.nan, **common)
    return Verdict("Inconclusive", math.nan, math.nan, **common)


# --------------------------------------------------------------------------
# energies


@dataclass(frozen=True)
class EnergyResult:
    verdict: Verdict
    ledger: ShellLedger
    p: float
    map_id: str
    domain_id: str
    failure: str | None = None

    @property
    def kind(self) -> str:
        return self.verdict.kind

    @property
    def value(self) -> float:
        return self.verdict.value

    @property
    def abs_err(self) -> float:
        return self.verdict.abs_err

    @property
    def beta(self) -> float:
        return self.verdict.beta

    @property
    def convergent(self) -> bool:
        return self.kind == "Convergent"

    def to_dict(self) -> dict:
        d = {"map": self.map_id, "domain": self.domain_id, "p": self.p}
        d.update(self.verdict.to_dict())
        d["failure"] = self.failure
        d["ledger"] = self.ledger.to_dict()
        return d


def integrate_functional(
    g,
    domain: DomainSpec,
    n: int | None = None,
    p: float = math.nan,
    label: str = "integrand",
    tol: float = 1e-10,
    shell_depth: int = SHELL_DEPTH,
    max_depth: int = MAX_DEPTH,
    max_cells: int = MAX_CELLS,
    fit: int = FIT_SHELLS,
) -> EnergyResult:
    """Shell-decomposed integral of an axisymmetric ``g`` with a verdict."""
    n = n or domain.n
    try:
        ledger = shell_integrate(g, domain, n, rtol=tol, depth=shell_depth, max_depth=max_depth,
                                 max_cells=max_cells)
    except MaxDepthExceeded as exc:
        return EnergyResult(Verdict("Inconclusive"), ShellLedger(()), p, label, domain.id,
                            failure=f"MaxDepthExceeded: {exc}")
    if not ledger.shells:
        v = Verdict("Convergent", ledger.regular, ledger.regular_err, model="regular",
                    partial=ledger.regular)
        return EnergyResult(v, ledger, p, label, domain.id)
    try:
        verdict = classify(ledger, fit=fit)
    except InsufficientShells as exc:
        return EnergyResult(Verdict("Inconclusive", partial=ledger.partial_sum()), ledger, p, label,
                            domain.id, failure=f"InsufficientShells: {exc}")
    return EnergyResult(verdict, ledger, p, label, domain.id)


def _differential_fn(map, method: str):
    if method == "auto":
        method = "analytic" if map.analytic else "fd"
    if method == "analytic":
        return map.analytic_diff
    if method == "fd":
        return lambda P: diffgeo.fd_differential(map, P, strict=False)[0]
    raise ValueError(f"unknown differential method {method!r}")


def gradient_integrand(map, p: float, method: str = "auto"):
    """``(t, rho) -> |Dmap(t, rho e_1)|^p``; transverse angles are never sampled."""
    diff = _differential_fn(map, method)

    def g(t, rho):
        return diffgeo.op_norm(diff(axial_points(t, rho, map.n))) ** p

    return Integrand(g, _switch(map, 0))


def _switch(map, which: int):
    """Crossing of the ``which``-th block singular value with the transverse stretch."""
    if map.n < 3:
        return None

    def sw(t, rho):
        s = map.block_singular_values(t, rho)
        return s[which] - s[2]

    return sw


def energy(
    map,
    domain: DomainSpec | None = None,
    p: float | None = None,
    tol: float = 1e-10,
    shell_depth: int = SHELL_DEPTH,
    method: str = "auto",
    max_depth: int = MAX_DEPTH,
    max_cells: int = MAX_CELLS,
) -> EnergyResult:
    """``int_domain |Dmap|^p`` (conformal energy when ``p = n``) with a verdict."""
    domain = domain if domain is not None else map.domain
    p = float(map.n if p is None else p)
    if p < 1:
        raise ValueError("energy exponent must be at least 1")
    res = integrate_functional(gradient_integrand(map, p, method), domain, map.n, p=p, label=map.id,
                               tol=tol, shell_depth=shell_depth, max_depth=max_depth, max_cells=max_cells)
    return res


# --------------------------------------------------------------------------
# spheres and change of variables


def sphere_functional(g, domain: DomainSpec, r: float, n: int | None = None, center: float = 0.0,
                      tol: float = 1e-10) -> tuple[float, float]:
    """``int_{S_r cap domain} g dS`` by latitude reduction, with an error estimate."""
    n = n or domain.n
    om = sphere_area(n - 2)
    total, err = [], 0.0

    def F(theta):
        t = center + r * math.cos(theta)
        rho = r * math.sin(theta)
        return float(g(np.array([t]), np.array([rho]))[0]) * rho ** (n - 2) * r

    for a, b, _ in domain.sphere_arcs(r, center):
        v, e = sp_integrate.quad(F, a, b, epsabs=0.0, epsrel=tol, limit=400)
        total.append(v)
        err += e
    return om * math.fsum(total), om * err


def sphere_integral(map, domain: DomainSpec | None, t: float, p: float, center: float = 0.0,
                    method: str = "auto") -> float:
    """``int |Dmap|^p`` over the sphere of radius ``t`` intersected with the domain."""
    domain = domain if domain is not None else map.domain
    return sphere_functional(gradient_integrand(map, p, method), domain, t, map.n, center)[0]


@dataclass(frozen=True)
class ChangeOfVariables:
    lhs: float
    rhs: float
    lhs_err: float
    rhs_err: float
    tol: float = math.nan
    region: str = ""

    @property
    def residual(self) -> float:
        return abs(self.lhs - self.rhs) / max(abs(self.rhs), 1e-12)

    def to_dict(self) -> dict:
        return {"region": self.region, "tol": self.tol, "lhs": self.lhs, "rhs": self.rhs,
                "lhs_err": self.lhs_err, "rhs_err": self.rhs_err, "residual": self.residual}


def change_of_variables(map, region: DomainSpec, eta=None, tol: float = 1e-8) -> ChangeOfVariables:
    """Both sides of ``int_A eta(h) |J_h| = int_{h(A)} eta`` with the same engine.

    ``eta`` is an axisymmetric test function ``eta(s, rho)`` on the codomain
    (default: constant one).
    """
    from .mapzoo import image_region

    if eta is None:
        eta = lambda s, rho: np.ones_like(s)
    n = map.n

    def lhs_g(t, rho):
        P = axial_points(t, rho, n)
        J = diffgeo.det(map.analytic_diff(P))
        s, r = map.reduced(t, rho)
        return eta(s, r) * np.abs(J)

    L, Le = integrate_axisym(lhs_g, region, tol=tol, n=n)
    R, Re = integrate_axisym(eta, image_region(map, region), tol=tol, n=n)
    return ChangeOfVariables(L, R, Le, Re, tol, region.id)


def change_of_variables_check(map, region: DomainSpec, test_fn=None, tol: float = 1e-8) -> float:
    return change_of_variables(map, region, test_fn, tol).residual


# --------------------------------------------------------------------------
# Cartesian fallback


def integrate_cartesian(g_full, domain: DomainSpec, lo, hi, cells: int = 8, order: int = 4) -> float:
    """Masked tensor Gauss rule on a box in full ``n``-space; coarse validation only.

    ``g_full`` takes an ``(N, n)`` array.  The indicator of the domain is
    integrated as is, so accuracy is limited by the boundary (first order in
    the cell size).
    """
    n = domain.n
    lo = np.broadcast_to(np.asarray(lo, dtype=float), (n,))
    hi = np.broadcast_to(np.asarray(hi, dtype=float), (n,))
    x, w = _unit_rule(order)
    h = (hi - lo) / cells
    axes = [lo[i] + h[i] * (np.arange(cells)[:, None] + x[None, :]).ravel() for i in range(n)]
    wts = [h[i] * np.tile(w, cells) for i in range(n)]
    total = []
    # iterate over the first axis to bound memory
    rest = np.stack(np.meshgrid(*axes[1:], indexing="ij"), axis=-1).reshape(-1, n - 1)
    rest_w = np.prod(np.stack(np.meshgrid(*wts[1:], indexing="ij"), axis=-1).reshape(-1, n - 1), axis=1)
    for a, wa in zip(axes[0], wts[0]):
        P = np.column_stack([np.full(len(rest), a), rest])
        inside = domain.contains(P)
        if not inside.any():
            continue
        vals = np.zeros(len(P))
        vals[inside] = g_full(P[inside])
        total.append(wa * float(np.dot(vals, rest_w)))
    return math.fsum(total)


__all__ = [
    "BETA_CONV", "BETA_DIV", "EnergyResult", "ShellLedger", "ShellRow", "Verdict", "ChangeOfVariables",
    "change_of_variables", "change_of_variables_check", "classify", "energy", "integrate_axisym",
    "integrate_cartesian", "integrate_functional", "integrate_piece", "shell_integrate",
    "sphere_functional", "sphere_integral",
]
