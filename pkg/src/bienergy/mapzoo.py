"""Catalogue of explicit axisymmetric homeomorphisms.

Every map here acts on split coordinates as

    (t, x)  ->  (T(t, rho), R(t, rho) * x / rho),      rho = |x|,

so it is fully described by the two reduced profile functions ``T`` and ``R``
on each formula branch, together with their partial derivatives.  The full
differential follows from the block formula in :meth:`MapSpec.analytic_diff`.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import domains as dm
from .domains import CuspProfile, DomainSpec
from .errors import DomainViolation
from .points import PointN, as_points, is_single, split

Reduced = Callable[[np.ndarray, np.ndarray], np.ndarray]


@dataclass(frozen=True, eq=False)
class Branch:
    """One formula piece of an axisymmetric map.

    ``dT`` and ``dR`` return the partial derivatives ``(d/dt, d/drho)``.
    """

    label: str
    select: Callable[[np.ndarray, np.ndarray], np.ndarray]
    T: Reduced
    R: Reduced
    dT: Callable
    dR: Callable


def _identity_branch(label: str, select) -> Branch:
    one = lambda t, r: np.ones_like(t)
    zero = lambda t, r: np.zeros_like(t)
    return Branch(label, select, lambda t, r: t, lambda t, r: r, lambda t, r: (one(t, r), zero(t, r)),
                  lambda t, r: (zero(t, r), one(t, r)))


@dataclass(frozen=True)
class EnergyPrediction:
    finite: bool
    borderline: bool
    claim: str


@dataclass(eq=False)
class MapSpec:
    family: str
    member: str
    n: int
    domain: DomainSpec
    codomain: DomainSpec
    branches: tuple[Branch, ...]
    gradient_bound: Callable | None = None
    fiber: str = "identity"
    energy_rule: Callable[[float], EnergyPrediction] | None = None
    params: tuple = ()
    analytic: bool = True
    lipschitz: bool = False
    quasiconformal: bool = False
    inverse: "MapSpec | None" = field(default=None, repr=False)

    # -- naming -----------------------------------------------------------
    @property
    def id(self) -> str:
        toks = [f"{k}={v:g}" for k, v in self.params]
        if self.member != "h":
            toks.append(self.member)
        toks.append(f"n={self.n}")
        return f"{self.family}:{','.join(toks)}"

    @property
    def name(self) -> str:
        extra = " ".join(f"{k}={v:g}" for k, v in self.params)
        return f"{self.family} {self.member}" + (f" ({extra})" if extra else "")

    def __repr__(self) -> str:
        return f"MapSpec({self.id})"

    # -- reduced profile ----------------------------------------------------
    def _per_branch(self, t, rho, fn):
        t = np.asarray(t, dtype=float)
        rho = np.asarray(rho, dtype=float)
        shape = np.broadcast(t, rho).shape
        t, rho = np.broadcast_to(t, shape).ravel(), np.broadcast_to(rho, shape).ravel()
        outs = None
        taken = np.zeros(t.shape, dtype=bool)
        for br in self.branches:
            m = br.select(t, rho) & ~taken
            taken |= m
            if not m.any():
                if outs is None:
                    outs = [np.full(t.shape, np.nan) for _ in range(len(fn(br, t[:1], rho[:1])))]
                continue
            with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
                vals = fn(br, t[m], rho[m])
            if outs is None:
                outs = [np.full(t.shape, np.nan) for _ in vals]
            for o, v in zip(outs, vals):
                o[m] = v
        return tuple(o.reshape(shape) for o in outs)

    def branch_of(self, t, rho) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        idx = np.full(t.shape, -1)
        for i, br in reversed(list(enumerate(self.branches))):
            idx = np.where(br.select(t, rho), i, idx)
        return idx

    def reduced(self, t, rho):
        return self._per_branch(t, rho, lambda br, a, b: (br.T(a, b), br.R(a, b)))

    def reduced_jacobian(self, t, rho):
        """``(T_t, T_rho, R_t, R_rho)`` at reduced points."""
        return self._per_branch(t, rho, lambda br, a, b: (*br.dT(a, b), *br.dR(a, b)))

    def block_singular_values(self, t, rho):
        """``(s1, s2, |R/rho|)``: singular values of the ``(t, rho)`` block and the transverse stretch."""
        Tt, Tr, Rt, Rr = self.reduced_jacobian(t, rho)
        _, R = self.reduced(t, rho)
        Q = np.abs(self._scale(np.asarray(rho, float), R, Rr))
        tr = Tt * Tt + Tr * Tr + Rt * Rt + Rr * Rr
        d = np.abs(Tt * Rr - Tr * Rt)
        s1 = np.sqrt(0.5 * (tr + np.sqrt(np.maximum(tr * tr - 4 * d * d, 0.0))))
        with np.errstate(invalid="ignore", divide="ignore"):
            s2 = np.where(s1 > 0, d / s1, 0.0)
        return s1, s2, Q

    # -- full-space evaluation ---------------------------------------------
    def _scale(self, rho, R, Rr):
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(rho > 0, R / np.where(rho > 0, rho, 1.0), Rr)

    def apply(self, P) -> np.ndarray:
        """Evaluate on an (N, n) array without domain checks."""
        P = as_points(P, self.n)
        t, X, rho = split(P)
        T, R = self.reduced(t, rho)
        if np.any(rho == 0):
            Rr = self.reduced_jacobian(t, rho)[3]
        else:
            Rr = None
        Q = self._scale(rho, R, Rr if Rr is not None else R)
        return np.column_stack([T, Q[:, None] * X])

    def analytic_diff(self, P) -> np.ndarray:
        P = as_points(P, self.n)
        t, X, rho = split(P)
        Tt, Tr, Rt, Rr = self.reduced_jacobian(t, rho)
        _, R = self.reduced(t, rho)
        Q = self._scale(rho, R, Rr)
        with np.errstate(divide="ignore", invalid="ignore"):
            xh = np.where(rho[:, None] > 0, X / np.where(rho > 0, rho, 1.0)[:, None], 0.0)
        N, k = X.shape
        outer = xh[:, :, None] * xh[:, None, :]
        D = np.empty((N, self.n, self.n))
        D[:, 0, 0] = Tt
        D[:, 0, 1:] = Tr[:, None] * xh
        D[:, 1:, 0] = Rt[:, None] * xh
        D[:, 1:, 1:] = Rr[:, None, None] * outer + Q[:, None, None] * (np.eye(k) - outer)
        return D

    # -- checks -------------------------------------------------------------
    def on_singular(self, t, rho) -> np.ndarray:
        s = self.domain.singular_set
        t = np.asarray(t, dtype=float)
        rho = np.asarray(rho, dtype=float)
        if s.kind == "point":
            return (t == s.data[0]) & (rho == 0)
        if s.kind == "segment":
            return (t >= s.data[0]) & (t < s.data[1]) & (rho == 0)
        return np.zeros(np.broadcast(t, rho).shape, dtype=bool)

    def check_points(self, P) -> np.ndarray:
        P = as_points(P, self.n)
        t, _, rho = split(P)
        bad = ~self.domain.contains(P) | self.on_singular(t, rho)
        if bad.any():
            i = int(np.flatnonzero(bad)[0])
            raise DomainViolation(f"point {P[i].tolist()} is outside {self.domain.id} or on its singular set")
        return P

    def envelope(self, t, rho):
        if self.gradient_bound is None:
            raise ValueError(f"{self.id} has no gradient envelope")
        return self.gradient_bound(np.asarray(t, float), np.asarray(rho, float))

    def predict_energy(self, p: float) -> EnergyPrediction:
        if self.energy_rule is None:
            return EnergyPrediction(True, False, "smooth map on a bounded domain has finite energy")
        return self.energy_rule(p)


def evaluate(map: MapSpec, p):
    """Evaluate ``map`` at a point or batch, rejecting points outside its domain."""
    single = is_single(p)
    P = map.check_points(p)
    out = map.apply(P)
    if single:
        return PointN.from_array(out[0]) if isinstance(p, PointN) else out[0]
    return out


# --------------------------------------------------------------------------
# constructors


def _whole_space(n: int) -> DomainSpec:
    everything = dm.Piece("theta_r", (0.0, np.pi), dm.const(0.0), dm.const(np.inf), label="all")
    return dm.custom_axisymmetric(lambda t, rho: np.ones(np.broadcast(t, rho).shape, bool), (everything,), n,
                                  f"R^{n}")


def _link(h: MapSpec, f: MapSpec):
    h.inverse = f
    f.inverse = h
    return h, f


def make_identity_map(n: int) -> MapSpec:
    if n < 2:
        raise ValueError("dimension must be at least 2")
    everywhere = lambda t, r: np.ones(np.shape(t), dtype=bool)
    whole = _whole_space(n)
    m = MapSpec("identity", "h", n, whole, whole, (_identity_branch("all", everywhere),),
                gradient_bound=lambda t, r: np.ones_like(t), fiber="identity", lipschitz=True,
                quasiconformal=True)
    m.inverse = m
    return m


def _radial_branch(a: float) -> Branch:
    def T(t, r):
        return t * np.hypot(t, r) ** (a - 1)

    def R(t, r):
        return r * np.hypot(t, r) ** (a - 1)

    def dT(t, r):
        s = np.hypot(t, r)
        return s ** (a - 1) + (a - 1) * t * t * s ** (a - 3), (a - 1) * t * r * s ** (a - 3)

    def dR(t, r):
        s = np.hypot(t, r)
        return (a - 1) * t * r * s ** (a - 3), s ** (a - 1) + (a - 1) * r * r * s ** (a - 3)

    return Branch("radial", lambda t, r: np.hypot(t, r) > 0, T, R, dT, dR)


def _radial_one(a: float, n: int, ball: DomainSpec) -> MapSpec:
    def rule(p, a=a, n=n):
        finite = p * (a - 1) + n > 0
        return EnergyPrediction(bool(finite), abs(p * (a - 1) + n) < 1e-12,
                                "radial stretch |x|^(a-1)x has finite p-energy iff p(a-1)+n > 0")

    branches = (_radial_branch(a),) if a != 1 else (_identity_branch("all", lambda t, r: np.ones(np.shape(t), bool)),)
    return MapSpec("radial", "h", n, ball, ball, branches,
                   gradient_bound=lambda t, r: np.hypot(t, r) ** (a - 1),
                   fiber="radial", energy_rule=rule, params=(("a", float(a)),), lipschitz=a >= 1,
                   quasiconformal=True)


def make_radial_map(a: float, n: int) -> MapSpec:
    """``h(x) = |x|^(a-1) x`` on the unit ball; the inverse is the radial map with ``1/a``."""
    if not a > 0:
        raise ValueError(f"radial exponent must be positive, got {a}")
    if n < 2:
        raise ValueError("dimension must be at least 2")
    ball = dm.unit_ball(n)
    if a != 1:
        from dataclasses import replace

        ball = replace(ball, singular_set=dm.SingularSet("point", (0.0,)),
                       pieces=tuple(replace(p, singular=True) for p in ball.pieces))
    h = _radial_one(a, n, ball)
    if a == 1:
        h.inverse = h
        return h
    f = _radial_one(1.0 / a, n, ball)
    _link(h, f)
    return h


def make_slit_pair(n: int) -> tuple[MapSpec, MapSpec]:
    """``h(t, x) = (t|x|, x)`` for ``t > 0`` and its inverse ``f(s, y) = (s/|y|, y)``."""
    X, Y = dm.split_x_slit(n), dm.split_y_slit(n)
    h_plus = Branch(
        "t>0", lambda t, r: t > 0,
        lambda t, r: t * r, lambda t, r: r,
        lambda t, r: (r, t), lambda t, r: (np.zeros_like(t), np.ones_like(t)),
    )
    f_plus = Branch(
        "s>=0", lambda s, r: s >= 0,
        lambda s, r: s / r, lambda s, r: r,
        lambda s, r: (1.0 / r, -s / (r * r)), lambda s, r: (np.zeros_like(s), np.ones_like(s)),
    )
    h_br = (h_plus, _identity_branch("t<=0", lambda t, r: t <= 0))
    f_br = (f_plus, _identity_branch("s<0", lambda s, r: s < 0))

    def rule_f(p, n=n):
        return EnergyPrediction(p < n, p == n, "slit: inverse of the Lipschitz slit map lies in W^{1,p} iff p < n")

    def rule_h(p):
        return EnergyPrediction(True, False, "slit: forward map is Lipschitz on a bounded domain")

    h = MapSpec("slit", "h", n, X, Y, h_br, gradient_bound=lambda t, r: np.ones_like(t),
                fiber="rho", energy_rule=rule_h, lipschitz=True)
    f = MapSpec("slit", "f", n, Y, X, f_br, gradient_bound=lambda s, r: 1.0 / r,
                fiber="rho", energy_rule=rule_f)
    return _link(h, f)


def make_cut_pair(n: int) -> tuple[MapSpec, MapSpec]:
    """Lipschitz flattening of the cone ``|x| <= t/2`` onto the axis segment."""
    X, Y = dm.split_x_cut(n), dm.split_y_cut(n)
    h_plus = Branch(
        "t>=0", lambda t, r: t >= 0,
        lambda t, r: t, lambda t, r: (2 * r - t) / (2 - t),
        lambda t, r: (np.ones_like(t), np.zeros_like(t)),
        lambda t, r: ((2 * r - 2) / (2 - t) ** 2, 2 / (2 - t)),
    )
    f_plus = Branch(
        "s>=0", lambda s, r: s >= 0,
        lambda s, r: s, lambda s, r: 0.5 * (2 - s) * r + 0.5 * s,
        lambda s, r: (np.ones_like(s), np.zeros_like(s)),
        lambda s, r: (0.5 * (1 - r), 0.5 * (2 - s)),
    )
    h_br = (h_plus, _identity_branch("t<0", lambda t, r: t < 0))
    f_br = (f_plus, _identity_branch("s<0", lambda s, r: s < 0))

    def rule_f(p, n=n):
        return EnergyPrediction(p < n - 1, p == n - 1,
                                "cut: inverse of the cone-flattening map lies in W^{1,p} iff p < n-1")

    def rule_h(p):
        return EnergyPrediction(True, False, "cut: forward map is Lipschitz on a bounded domain")

    h = MapSpec("cut", "h", n, X, Y, h_br, gradient_bound=lambda t, r: np.ones_like(t),
                fiber="t", energy_rule=rule_h, lipschitz=True)
    f = MapSpec("cut", "f", n, Y, X, f_br,
                gradient_bound=lambda s, r: 1.0 + np.maximum(s, 0.0) / r,
                fiber="t", energy_rule=rule_f)
    return _link(h, f)


def make_cusp_pair(alpha: float, n: int) -> tuple[MapSpec, MapSpec]:
    """Map of the cone ``|x| > t`` onto the exterior of the cusp ``|y| <= u(s)``."""
    if not alpha > 0:
        raise ValueError(f"cusp exponent must be positive, got {alpha}")
    prof = CuspProfile(alpha)
    X, Y = dm.split_x_cusp(n, prof), dm.split_y_cusp(n, prof)
    ia = 1.0 / alpha

    def logL(r):
        return 1.0 - np.log(r)

    def phi(r):
        return logL(r) ** -ia / r

    def dphi(r):
        L = logL(r)
        return L ** -ia / (r * r) * (-1.0 + ia / L)

    def psi(r):
        return r * logL(r) ** ia

    def dpsi(r):
        L = logL(r)
        return L ** ia - ia * L ** (ia - 1.0)

    zeros = lambda t, r: np.zeros_like(t)
    ones = lambda t, r: np.ones_like(t)
    h_plus = Branch(
        "t>0", lambda t, r: t > 0,
        lambda t, r: t * phi(r), lambda t, r: r,
        lambda t, r: (phi(r), t * dphi(r)), lambda t, r: (zeros(t, r), ones(t, r)),
    )
    f_plus = Branch(
        "s>0", lambda s, r: s > 0,
        lambda s, r: s * psi(r), lambda s, r: r,
        lambda s, r: (psi(r), s * dpsi(r)), lambda s, r: (zeros(s, r), ones(s, r)),
    )
    h_br = (h_plus, _identity_branch("t<=0", lambda t, r: t <= 0))
    f_br = (f_plus, _identity_branch("s<=0", lambda s, r: s <= 0))

    def rule_h(p, n=n, alpha=alpha):
        finite = p < n or (p == n and alpha < n)
        border = p == n and alpha == n
        return EnergyPrediction(finite, border,
                                "cusp: conformal energy of the cusp-flattening map is finite iff alpha < n")

    def rule_f(p):
        return EnergyPrediction(True, False, "cusp: inverse map is Lipschitz on a bounded domain")

    params = (("alpha", float(alpha)),)
    h = MapSpec("cusp", "h", n, X, Y, h_br, gradient_bound=lambda t, r: 1.0 / psi(r),
                fiber="rho", energy_rule=rule_h, params=params)
    f = MapSpec("cusp", "f", n, Y, X, f_br, gradient_bound=lambda s, r: np.ones_like(s),
                fiber="rho", energy_rule=rule_f, params=params, lipschitz=True)
    return _link(h, f)


# --------------------------------------------------------------------------
# images of regions


def image_region(map: MapSpec, region: DomainSpec) -> DomainSpec:
    """The image ``map(region)`` described with pieces in the same chart.

    Uses the coordinate each family fixes: ``rho`` for slit and cusp maps,
    ``t`` for the cut maps, the polar angle for radial maps.
    """
    from dataclasses import replace

    inv = map.inverse
    if inv is None:
        raise ValueError(f"{map.id} has no inverse; cannot describe its image")
    pieces = []
    for piece in region.pieces:
        pieces.append(_image_piece(map, piece))
    base = region.member

    def member(s, rho):
        t, r = inv.reduced(s, rho)
        return base(t, r) & ~np.isnan(t)

    return replace(
        region,
        kind="CustomAxisymmetric",
        pieces=tuple(pieces),
        member=member,
        params=(),
        name=f"{map.family}.{map.member}({region.id})",
    )


def _image_piece(map: MapSpec, piece):
    from dataclasses import replace

    if map.fiber == "identity":
        return piece
    if map.fiber == "rho" and piece.chart == "rho_t":
        lo, hi = piece.lo, piece.hi
        T = lambda t, r: map.reduced(t, r)[0]
        return replace(piece, lo=lambda r: T(lo(r), r), hi=lambda r: T(hi(r), r), margin=None)
    if map.fiber == "t" and piece.chart == "t_rho":
        lo, hi = piece.lo, piece.hi
        R = lambda t, r: map.reduced(t, r)[1]
        return replace(piece, lo=lambda t: R(t, lo(t)), hi=lambda t: R(t, hi(t)), margin=None)
    if map.fiber == "radial" and piece.center == 0.0:
        a = dict(map.params)["a"]
        if piece.chart == "theta_r":
            lo, hi = piece.lo, piece.hi
            return replace(piece, lo=lambda v: lo(v) ** a, hi=lambda v: hi(v) ** a, margin=None)
        lo, hi = piece.lo, piece.hi
        o0, o1 = piece.outer
        return replace(piece, outer=(o0**a, o1**a), lo=lambda r: lo(r ** (1 / a)),
                       hi=lambda r: hi(r ** (1 / a)), margin=None)
    raise ValueError(f"no image rule for {map.id} on a {piece.chart} piece")


# --------------------------------------------------------------------------
# registry

FAMILIES = {
    "identity": ("identity map", "R^n", ()),
    "radial": ("radial stretch |x|^(a-1) x", "UnitBall", ("a",)),
    "slit": ("slit pair: h(t,x)=(t|x|,x) for t>0", "SplitX_slit -> SplitY_slit", ()),
    "cut": ("cut pair: cone |x|<=t/2 flattened onto an axis segment", "SplitX_cut -> SplitY_cut", ()),
    "cusp": ("cusp pair for the profile u(t)=e*exp(-t^-alpha)", "SplitX_cusp -> SplitY_cusp", ("alpha",)),
}

_TOKEN = re.compile(r"^\s*([A-Za-z_]+)\s*(?:=\s*([^,]+?))?\s*$")


def parse_map_id(text: str, n: int | None = None) -> MapSpec:
    """Resolve identifiers such as ``radial:a=2``, ``slit:f`` or ``cusp:alpha=2,f,n=4``.

    The member flag ``f`` (alias ``inverse``) selects the inverse map; ``h`` is
    the default.
    """
    family, _, rest = text.strip().partition(":")
    family = family.strip()
    if family not in FAMILIES:
        raise ValueError(f"unknown map family {family!r}; known: {', '.join(FAMILIES)}")
    opts: dict[str, float] = {}
    member = "h"
    for tok in filter(None, (s.strip() for s in rest.split(","))):
        m = _TOKEN.match(tok)
        if not m:
            raise ValueError(f"cannot parse map option {tok!r}")
        key, val = m.group(1), m.group(2)
        if val is None:
            if key in ("f", "inverse"):
                member = "f"
            elif key == "h":
                member = "h"
            else:
                raise ValueError(f"unknown map flag {key!r}")
            continue
        try:
            opts[key] = float(val)
        except ValueError:
            raise ValueError(f"map option {key} needs a number, got {val!r}") from None
    dim = int(opts.pop("n", n if n is not None else 3))
    needed = FAMILIES[family][2]
    unknown = set(opts) - set(needed)
    if unknown:
        raise ValueError(f"unknown option(s) for {family}: {sorted(unknown)}")
    missing = [k for k in needed if k not in opts]
    if missing:
        raise ValueError(f"map {family} requires {missing}")
    if family == "identity":
        m = make_identity_map(dim)
    elif family == "radial":
        m = make_radial_map(opts["a"], dim)
    elif family == "slit":
        m = make_slit_pair(dim)[0]
    elif family == "cut":
        m = make_cut_pair(dim)[0]
    else:
        m = make_cusp_pair(opts["alpha"], dim)[0]
    return m.inverse if member == "f" else m


def catalog() -> list[dict]:
    rows = []
    for fam, (desc, dom, needed) in FAMILIES.items():
        args = ",".join(f"{k}=<a>" for k in needed)
        ident = f"{fam}:{args}" if args else fam
        rows.append({"id": ident, "description": desc, "domain": dom,
                     "members": ["h"] if fam in ("identity", "radial") else ["h", "f"]})
    return rows


def pair(map: MapSpec) -> tuple[MapSpec, MapSpec]:
    """``(h, f)`` with ``h`` the forward member of the family."""
    if map.inverse is None:
        raise ValueError(f"{map.id} has no inverse")
    return (map, map.inverse) if map.member == "h" else (map.inverse, map)
