"""Axisymmetric model domains and their reduced ``(t, rho)`` descriptions.

Every catalogued domain is a solid of revolution about the ``t`` axis.  Besides
a membership predicate it carries a list of :class:`Piece` objects, each a
curvilinear region of the reduced half-plane ``{(t, rho): rho > 0}`` written in
one of four charts:

``rho_t``     outer variable ``rho``, inner variable ``t``
``t_rho``     outer variable ``t``,   inner variable ``rho``
``theta_r``   outer polar angle ``theta``, inner radius ``r`` (about ``(c, 0)``)
``r_theta``   outer radius ``r``, inner polar angle ``theta`` (about ``(c, 0)``)

Pieces never straddle a branch interface of the catalogued maps, so integrands
are smooth inside each piece.  A piece flagged ``singular`` accumulates toward
the singular set as its *shell variable* (``rho`` for the Cartesian charts,
``r`` for the polar ones) goes to zero.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Callable

import numpy as np

from .points import split

Bound = Callable[[np.ndarray], np.ndarray]

CHARTS = ("rho_t", "t_rho", "theta_r", "r_theta")


def sphere_area(k: int) -> float:
    """Surface area of the unit k-sphere in R^{k+1} (``sphere_area(0) == 2``)."""
    return 2.0 * math.pi ** ((k + 1) / 2) / math.gamma((k + 1) / 2)


def ball_volume(n: int, r: float = 1.0) -> float:
    return sphere_area(n - 1) / n * r**n


def const(c: float) -> Bound:
    return lambda v: np.full(np.shape(v), float(c))


# --------------------------------------------------------------------------
# cusp profile


@dataclass(frozen=True)
class CuspProfile:
    """The profile ``u(t) = e * exp(-t**(-alpha))`` normalised by ``u(1) = 1``.

    ``u`` underflows to zero long before ``t`` does (already at ``t ~ 0.04``
    for ``alpha = 2``), so the log-space forms :meth:`log_u` and
    :meth:`u_inv_log` are the ones used in membership tests.
    """

    alpha: float

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError(f"cusp exponent must be positive, got {self.alpha}")

    def log_u(self, t):
        t = np.asarray(t, dtype=float)
        with np.errstate(divide="ignore", over="ignore"):
            return 1.0 - t ** (-self.alpha)

    def u(self, t):
        return np.exp(self.log_u(t))

    def u_prime(self, t):
        t = np.asarray(t, dtype=float)
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            out = self.alpha * t ** (-self.alpha - 1.0) * np.exp(self.log_u(t))
        return np.where(t > 0, np.nan_to_num(out, nan=0.0, posinf=0.0), 0.0)

    def u_inv_log(self, log_eta):
        """Inverse of :meth:`log_u`: the ``t`` with ``log u(t) = log_eta``."""
        return (1.0 - np.asarray(log_eta, dtype=float)) ** (-1.0 / self.alpha)

    def u_inv(self, eta):
        eta = np.asarray(eta, dtype=float)
        with np.errstate(divide="ignore"):
            return self.u_inv_log(np.log(eta))


def _cusp_angle(r, profile: CuspProfile):
    """Polar angle where the circle of radius r about the origin meets rho = u(t).

    Solves ``r sin(theta) = u(r cos(theta))`` by bisection; the left side
    increases and the right side decreases in theta, so the root is unique.
    """
    r = np.asarray(r, dtype=float)
    lo = np.zeros_like(r)
    hi = np.full_like(r, math.pi / 2)
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        t = r * np.cos(mid)
        rho = r * np.sin(mid)
        with np.errstate(divide="ignore"):
            inside = np.log(np.maximum(rho, 1e-300)) > profile.log_u(np.maximum(t, 1e-300))
        hi = np.where(inside, mid, hi)
        lo = np.where(inside, lo, mid)
    return hi


# --------------------------------------------------------------------------
# pieces


@dataclass(frozen=True)
class Piece:
    chart: str
    outer: tuple[float, float]
    lo: Bound
    hi: Bound
    center: float = 0.0
    singular: bool = False
    label: str = ""
    margin: Callable | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.chart not in CHARTS:
            raise ValueError(f"unknown chart {self.chart!r}")

    @property
    def shell_on_outer(self) -> bool:
        return self.chart in ("rho_t", "r_theta")

    def to_reduced(self, v, w):
        """Map chart coordinates to ``(t, rho, jacobian)``."""
        if self.chart == "rho_t":
            return w, v, np.ones_like(v)
        if self.chart == "t_rho":
            return v, w, np.ones_like(v)
        if self.chart == "theta_r":
            return self.center + w * np.cos(v), w * np.sin(v), w
        return self.center + v * np.cos(w), v * np.sin(w), v

    def from_reduced(self, t, rho):
        if self.chart == "rho_t":
            return rho, t
        if self.chart == "t_rho":
            return t, rho
        r = np.hypot(t - self.center, rho)
        theta = np.arctan2(rho, t - self.center)
        return (theta, r) if self.chart == "theta_r" else (r, theta)

    def contains(self, t, rho):
        v, w = self.from_reduced(np.asarray(t, float), np.asarray(rho, float))
        ok = (v > self.outer[0]) & (v < self.outer[1])
        with np.errstate(invalid="ignore"):
            return ok & (w > self.lo(v)) & (w < self.hi(v))

    def shell_range(self) -> float:
        """Upper end of the shell variable over this piece."""
        if self.shell_on_outer:
            return float(self.outer[1])
        vs = np.linspace(self.outer[0], self.outer[1], 257)
        return float(np.max(self.hi(vs)))

    def restrict(self, a: float, b: float) -> "Piece":
        """Clip the shell variable to ``(a, b)``."""
        if self.shell_on_outer:
            lo, hi = max(self.outer[0], a), min(self.outer[1], b)
            return replace(self, outer=(lo, max(lo, hi)))
        plo, phi = self.lo, self.hi
        return replace(
            self,
            lo=lambda v: np.maximum(plo(v), a),
            hi=lambda v: np.minimum(phi(v), b),
        )

    def sample(self, rng: np.random.Generator, m: int, a: float, b: float,
               metric: str = "rho", center: float = 0.0):
        """Draw up to ``m`` reduced points of this piece whose distance lies in ``(a, b]``.

        ``metric`` is ``"rho"`` (distance to the axis) or ``"r"`` (distance to
        the axial point ``(center, 0)``).  The distance is drawn log-uniformly;
        the position along its level set is found by scanning membership on a
        grid clustered toward the ends, then jittered within a grid cell.
        """
        if metric == "rho" and self.chart == "rho_t":
            return self._sample_direct(rng, m, a, b)
        if metric == "rho":
            g0, g1 = _t_extent(self)
            grid = _probe_grid(g0, g1)
            to_tr = lambda d, g: np.broadcast_arrays(g, d)
        else:
            grid = _probe_grid(0.0, math.pi)
            to_tr = lambda d, g: (center + d * np.cos(g), d * np.sin(g))
        ts, rs = [], []
        got = 0
        for _ in range(20):
            d = np.exp(rng.uniform(math.log(a), math.log(b), m))[:, None]
            inside = self.contains(*to_tr(d, grid[None, :]))
            cell_in = inside[:, :-1] | inside[:, 1:]
            weight = cell_in * np.diff(grid)[None, :]
            tot = weight.sum(axis=1)
            ok = tot > 0
            if not ok.any():
                continue
            cdf = np.cumsum(weight[ok], axis=1) / tot[ok, None]
            j = np.minimum((cdf < rng.uniform(size=(int(ok.sum()), 1))).sum(axis=1), len(grid) - 2)
            g = grid[j] + rng.uniform(size=j.shape) * (grid[j + 1] - grid[j])
            t, rho = to_tr(d[ok, 0], g)
            keep = self.contains(t, rho)
            ts.append(np.asarray(t)[keep])
            rs.append(np.asarray(rho)[keep])
            got += int(keep.sum())
            if got >= m:
                break
        if not ts:
            return np.empty(0), np.empty(0)
        return np.concatenate(ts)[:m], np.concatenate(rs)[:m]

    def _sample_direct(self, rng, m, a, b):
        lo_r, hi_r = max(a, self.outer[0]), min(b, self.outer[1])
        if not hi_r > lo_r or lo_r <= 0:
            return np.empty(0), np.empty(0)
        ts, rs = [], []
        need = m
        for _ in range(20):
            rho = np.exp(rng.uniform(math.log(lo_r), math.log(hi_r), need))
            lo, hi = self.lo(rho), self.hi(rho)
            ok = hi > lo
            u = rng.uniform(size=need)
            ts.append((lo + u * (hi - lo))[ok])
            rs.append(rho[ok])
            need -= int(ok.sum())
            if need <= 0:
                break
        return np.concatenate(ts)[:m], np.concatenate(rs)[:m]


def _probe_grid(g0: float, g1: float, uniform: int = 1025) -> np.ndarray:
    u = np.concatenate([np.linspace(0, 1, uniform), 2.0 ** -np.arange(10, 50, 0.25)])
    u = np.unique(np.concatenate([u, 1 - u]))
    return g0 + (g1 - g0) * u


def _t_extent(piece: Piece) -> tuple[float, float]:
    o0, o1 = piece.outer
    o1 = min(o1, 1e6)
    v = np.linspace(o0, o1, 129)
    V, X = np.meshgrid(v, np.linspace(0, 1, 129), indexing="ij")
    lo, hi = piece.lo(V), piece.hi(V)
    hi = np.minimum(hi, 1e6)
    t, _, _ = piece.to_reduced(V, lo + X * (hi - lo))
    t = t[np.isfinite(t)]
    return float(t.min()), float(t.max())


def _rho_t(lo, hi, outer=(0.0, 1.0), **kw) -> Piece:
    lo = const(lo) if np.isscalar(lo) else lo
    hi = const(hi) if np.isscalar(hi) else hi
    return Piece("rho_t", outer, lo, hi, **kw)


def _t_rho(lo, hi, outer, **kw) -> Piece:
    lo = const(lo) if np.isscalar(lo) else lo
    hi = const(hi) if np.isscalar(hi) else hi
    return Piece("t_rho", outer, lo, hi, **kw)


# --------------------------------------------------------------------------
# domains


@dataclass(frozen=True)
class SingularSet:
    kind: str  # "none", "point" or "segment"
    data: tuple = ()

    def describe(self) -> str:
        if self.kind == "none":
            return "none"
        if self.kind == "point":
            return "point t=%g on axis" % self.data[0]
        return "axis segment t in [%g, %g)" % self.data


NO_SINGULAR = SingularSet("none")


@dataclass(frozen=True)
class DomainSpec:
    kind: str
    n: int
    pieces: tuple[Piece, ...]
    member: Callable = field(compare=False)
    singular_set: SingularSet = NO_SINGULAR
    axisymmetric: bool = True
    params: tuple = ()
    name: str = ""

    @cached_property
    def id(self) -> str:
        if self.name:
            return self.name
        args = ",".join(f"{k}={v:g}" if isinstance(v, float) else f"{k}={v}" for k, v in self.params)
        return f"{self.kind}({args + ',' if args else ''}n={self.n})"

    def __str__(self) -> str:
        return self.id

    def contains_reduced(self, t, rho):
        t = np.asarray(t, dtype=float)
        rho = np.asarray(rho, dtype=float)
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.asarray(self.member(t, rho), dtype=bool)

    def contains(self, P) -> np.ndarray:
        P = np.atleast_2d(np.asarray(P, dtype=float))
        if P.shape[1] != self.n:
            return np.zeros(len(P), dtype=bool)
        t, _, rho = split(P)
        return self.contains_reduced(t, rho)

    @property
    def has_singular_pieces(self) -> bool:
        return any(p.singular for p in self.pieces)

    def boundary_distance(self, t, rho):
        """Lower bound on the distance from ``(t, rho)`` to the boundary of its piece.

        Branch interfaces count as boundary: finite-difference stencils must
        not straddle a change of formula.  Domains without margin data return
        ``inf``.
        """
        t = np.asarray(t, dtype=float)
        rho = np.asarray(rho, dtype=float)
        margins = [p.margin(t, rho) for p in self.pieces if p.margin is not None]
        if not margins:
            return np.full(np.broadcast(t, rho).shape, np.inf)
        return np.maximum(np.max(margins, axis=0), 0.0)

    def sphere_arcs(self, r: float, center: float = 0.0, grid: int = 2049):
        """Polar-angle intervals of the sphere ``|p - center e_t| = r`` inside each piece.

        Returns a list of ``(theta_lo, theta_hi, piece_index)``.  Transitions are
        located on a grid and refined by bisection on the piece predicate.
        """
        theta = np.linspace(0.0, math.pi, grid)
        arcs = []
        for idx, piece in enumerate(self.pieces):
            inside = piece.contains(center + r * np.cos(theta), r * np.sin(theta))
            inside[0] = inside[-1] = False
            if not inside.any():
                continue
            edges = np.flatnonzero(np.diff(inside.astype(int)))
            for a_i, b_i in zip(edges[::2], edges[1::2]):
                a = self._refine(piece, r, center, theta[a_i], theta[a_i + 1], entering=True)
                b = self._refine(piece, r, center, theta[b_i], theta[b_i + 1], entering=False)
                arcs.append((a, b, idx))
        arcs.sort()
        return arcs

    @staticmethod
    def _refine(piece, r, center, lo, hi, entering):
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            inside = bool(piece.contains(center + r * math.cos(mid), r * math.sin(mid)))
            if inside == entering:
                hi = mid
            else:
                lo = mid
        return hi if entering else lo

    def distance(self, t, rho, metric: str = "rho", center: float = 0.0):
        return rho if metric == "rho" else np.hypot(np.asarray(t) - center, rho)

    def sample_stratum(self, rng, m: int, a: float, b: float, metric: str = "rho", center: float = 0.0):
        """Reduced samples with distance in ``(a, b]``, split evenly over the pieces."""
        probe = [p.sample(rng, 4, a, b, metric, center) for p in self.pieces]
        live = [p for p, (t, _) in zip(self.pieces, probe) if t.size]
        if not live:
            return np.empty(0), np.empty(0)
        share = [m // len(live) + (1 if i < m % len(live) else 0) for i in range(len(live))]
        ts, rs = zip(*(p.sample(rng, k, a, b, metric, center) for p, k in zip(live, share)))
        t, rho = np.concatenate(ts), np.concatenate(rs)
        d = self.distance(t, rho, metric, center)
        keep = self.contains_reduced(t, rho) & (d > a) & (d <= b)
        return t[keep], rho[keep]

    def truncated(self, rho_min: float) -> "DomainSpec":
        """The part of the domain with ``rho`` (or ``r``) above ``rho_min``."""
        pieces = tuple(replace(p.restrict(rho_min, np.inf), singular=False) for p in self.pieces)
        base = self.member
        return replace(
            self,
            kind="Truncated",
            pieces=pieces,
            member=lambda t, rho: base(t, rho) & (rho > rho_min),
            singular_set=NO_SINGULAR,
            params=(),
            name=f"Truncated({self.id},rho_min={rho_min:g})",
        )


# -- catalogue ------------------------------------------------------------


def _polar_margin(center, r_in, r_out):
    def margin(t, rho):
        r = np.hypot(t - center, rho)
        return np.minimum(r - r_in, r_out - r) if r_in > 0 else r_out - r

    return margin


def unit_ball(n: int) -> DomainSpec:
    piece = Piece("theta_r", (0.0, math.pi), const(0.0), const(1.0), margin=_polar_margin(0.0, 0.0, 1.0))
    return DomainSpec(
        "UnitBall", n, (piece,), member=lambda t, rho: t * t + rho * rho < 1.0
    )


def annulus(r_in: float, r_out: float, n: int) -> DomainSpec:
    if not 0 <= r_in < r_out:
        raise ValueError("annulus needs 0 <= r_in < r_out")
    piece = Piece(
        "theta_r", (0.0, math.pi), const(r_in), const(r_out), margin=_polar_margin(0.0, r_in, r_out)
    )
    return DomainSpec(
        "Annulus",
        n,
        (piece,),
        member=lambda t, rho: (np.hypot(t, rho) > r_in) & (np.hypot(t, rho) < r_out),
        params=(("r_in", float(r_in)), ("r_out", float(r_out))),
    )


def axial_ball(center: float, radius: float, n: int) -> DomainSpec:
    """Ball of the given radius centred at ``(center, 0)``."""
    piece = Piece(
        "theta_r",
        (0.0, math.pi),
        const(0.0),
        const(radius),
        center=center,
        margin=_polar_margin(center, 0.0, radius),
    )
    return DomainSpec(
        "CustomAxisymmetric",
        n,
        (piece,),
        member=lambda t, rho: np.hypot(t - center, rho) < radius,
        name=f"Ball(c={center:g},r={radius:g},n={n})",
    )


def custom_axisymmetric(predicate, pieces, n: int, name: str, singular_set=NO_SINGULAR) -> DomainSpec:
    """Extension hook: any solid of revolution given by a predicate on ``(t, rho)``."""
    return DomainSpec(
        "CustomAxisymmetric", n, tuple(pieces), member=predicate, singular_set=singular_set, name=name
    )


def cusp_ball(profile: CuspProfile, n: int) -> DomainSpec:
    """Unit ball with the inward spike ``{t >= 0, rho <= u(t)}`` removed."""

    def member(t, rho):
        spike = (t >= 0) & (np.log(np.maximum(rho, 1e-300)) <= profile.log_u(np.maximum(t, 1e-300)))
        return (t * t + rho * rho < 1.0) & ~spike

    piece = Piece(
        "r_theta",
        (0.0, 1.0),
        lambda r: _cusp_angle(r, profile),
        const(math.pi),
        singular=True,
        label="ball-minus-spike",
    )
    return DomainSpec(
        "CuspBall",
        n,
        (piece,),
        member=member,
        singular_set=SingularSet("point", (0.0,)),
        params=(("alpha", float(profile.alpha)),),
    )


def _require_split_dim(n):
    if n < 3:
        raise ValueError(f"the split model domains need n >= 3, got {n}")


def _minus_margin(t, rho):
    return np.minimum(np.minimum(t + 1.0, -t), 1.0 - rho)


def split_x_slit(n: int) -> DomainSpec:
    """Cylinder ``(-1, 1) x B^{n-1}`` minus the axis segment ``0 <= t < 1``."""
    _require_split_dim(n)
    minus = _rho_t(-1.0, 0.0, singular=True, label="t<0", margin=_minus_margin)
    plus = _rho_t(
        0.0,
        1.0,
        singular=True,
        label="t>0",
        margin=lambda t, rho: np.min([t, 1.0 - t, 1.0 - rho, rho], axis=0),
    )

    def member(t, rho):
        return (t > -1) & (t < 1) & (rho < 1) & ~((t >= 0) & (rho == 0))

    return DomainSpec(
        "SplitX_slit", n, (minus, plus), member, singular_set=SingularSet("segment", (0.0, 1.0))
    )


def split_y_slit(n: int) -> DomainSpec:
    """``{|y| < 1, -1 < s < |y|}``, bi-Lipschitz to the ball."""
    _require_split_dim(n)
    minus = _rho_t(-1.0, 0.0, singular=True, label="s<0", margin=_minus_margin)
    plus = _rho_t(
        0.0,
        lambda rho: rho,
        singular=True,
        label="s>=0",
        margin=lambda s, rho: np.min([s, (rho - s) / math.sqrt(2), 1.0 - rho], axis=0),
    )
    return DomainSpec(
        "SplitY_slit",
        n,
        (minus, plus),
        lambda s, rho: (rho < 1) & (s > -1) & (s < rho),
        singular_set=SingularSet("point", (0.0,)),
    )


def split_x_cut(n: int) -> DomainSpec:
    """Cylinder with the cone ``{t >= 0, |x| <= t/2}`` removed."""
    _require_split_dim(n)
    minus = _t_rho(0.0, 1.0, (-1.0, 0.0), label="t<0", margin=_minus_margin)
    plus = _t_rho(
        lambda t: 0.5 * t,
        1.0,
        (0.0, 1.0),
        label="t>=0",
        margin=lambda t, rho: np.min([t, 1.0 - t, (rho - 0.5 * t) / math.sqrt(1.25), 1.0 - rho], axis=0),
    )

    def member(t, rho):
        return ((t > -1) & (t < 0) & (rho < 1)) | ((t >= 0) & (t < 1) & (rho > 0.5 * t) & (rho < 1))

    return DomainSpec("SplitX_cut", n, (minus, plus), member, singular_set=SingularSet("point", (0.0,)))


def split_y_cut(n: int) -> DomainSpec:
    """Cylinder with the axis segment ``0 <= s < 1`` removed."""
    _require_split_dim(n)
    minus = _t_rho(0.0, 1.0, (-1.0, 0.0), singular=True, label="s<0", margin=_minus_margin)
    plus = _t_rho(
        0.0,
        1.0,
        (0.0, 1.0),
        singular=True,
        label="s>=0",
        margin=lambda s, rho: np.min([s, 1.0 - s, rho, 1.0 - rho], axis=0),
    )

    def member(s, rho):
        return ((s > -1) & (s < 0) & (rho < 1)) | ((s >= 0) & (s < 1) & (rho > 0) & (rho < 1))

    return DomainSpec(
        "SplitY_cut", n, (minus, plus), member, singular_set=SingularSet("segment", (0.0, 1.0))
    )


def split_x_cusp(n: int, profile: CuspProfile | None = None) -> DomainSpec:
    """Cylinder with the cone ``{t > 0, |x| <= t}`` removed."""
    _require_split_dim(n)
    minus = _rho_t(-1.0, 0.0, singular=True, label="t<=0", margin=_minus_margin)
    plus = _rho_t(
        0.0,
        lambda rho: rho,
        singular=True,
        label="t>0",
        margin=lambda t, rho: np.min([t, (rho - t) / math.sqrt(2), 1.0 - rho], axis=0),
    )

    def member(t, rho):
        return ((t > -1) & (t <= 0) & (rho < 1)) | ((t > 0) & (t < 1) & (rho > t) & (rho < 1))

    params = (("alpha", float(profile.alpha)),) if profile is not None else ()
    return DomainSpec(
        "SplitX_cusp", n, (minus, plus), member, singular_set=SingularSet("point", (0.0,)), params=params
    )


def split_y_cusp(n: int, profile: CuspProfile) -> DomainSpec:
    """Cylinder with the cusp ``{s > 0, |y| <= u(s)}`` removed."""
    _require_split_dim(n)

    def plus_margin(s, rho):
        gap = rho - np.exp(profile.log_u(np.maximum(s, 1e-300)))
        slope = np.hypot(1.0, profile.u_prime(np.maximum(s, 1e-300)))
        return np.min([s, 1.0 - s, gap / slope, 1.0 - rho], axis=0)

    minus = _rho_t(-1.0, 0.0, singular=True, label="s<=0", margin=_minus_margin)
    plus = _rho_t(0.0, profile.u_inv, singular=True, label="s>0", margin=plus_margin)

    def member(s, rho):
        above = np.log(np.maximum(rho, 1e-300)) > profile.log_u(np.maximum(s, 1e-300))
        return ((s > -1) & (s <= 0) & (rho < 1)) | ((s > 0) & (s < 1) & above & (rho < 1))

    return DomainSpec(
        "SplitY_cusp",
        n,
        (minus, plus),
        member,
        singular_set=SingularSet("point", (0.0,)),
        params=(("alpha", float(profile.alpha)),),
    )


# -- ball sections about the origin ----------------------------------------

_SECTOR_ANGLES = {
    "SplitX_slit": 0.0,
    "SplitY_slit": math.pi / 4,
    "SplitX_cut": math.atan(0.5),
    "SplitY_cut": 0.0,
    "SplitX_cusp": math.pi / 4,
}


def ball_section(domain: DomainSpec, radius: float) -> DomainSpec:
    """``B(0, radius)`` intersected with a split model domain, as polar wedges.

    Near the origin every split domain is a union of two wedges about the
    axis (the lower half-cylinder and a cone or cusp sector), so the section
    is exact for ``radius < 1``.
    """
    from .errors import ScaleOutOfDomain

    if not 0 < radius < 1:
        raise ScaleOutOfDomain(f"ball section radius must lie in (0, 1), got {radius}")
    kind = domain.kind
    if kind == "SplitY_cusp":
        profile = CuspProfile(dict(domain.params)["alpha"])
        plus_lo = lambda r: _cusp_angle(r, profile)
    elif kind in _SECTOR_ANGLES:
        plus_lo = const(_SECTOR_ANGLES[kind])
    elif kind in ("UnitBall", "CuspBall"):
        p = domain.pieces[0]
        piece = replace(p, outer=(0.0, radius)) if p.chart == "r_theta" else replace(p, hi=const(radius))
        base = domain.member
        return replace(
            domain,
            kind="CustomAxisymmetric",
            pieces=(replace(piece, singular=domain.singular_set.kind != "none"),),
            member=lambda t, rho: base(t, rho) & (np.hypot(t, rho) < radius),
            name=f"Section({domain.id},r={radius:g})",
        )
    else:
        raise ScaleOutOfDomain(f"no ball-section rule for {domain.id}")
    minus = Piece("r_theta", (0.0, radius), const(math.pi / 2), const(math.pi), singular=True, label="lower")
    plus = Piece("r_theta", (0.0, radius), plus_lo, const(math.pi / 2), singular=True, label="upper")
    base = domain.member
    return replace(
        domain,
        kind="CustomAxisymmetric",
        pieces=(minus, plus),
        member=lambda t, rho: base(t, rho) & (np.hypot(t, rho) < radius),
        name=f"Section({domain.id},r={radius:g})",
    )


def make_domain(kind: str, n: int, **params) -> DomainSpec:
    """Build a catalogued domain by kind name."""
    alpha = params.pop("alpha", None)
    profile = CuspProfile(alpha) if alpha is not None else None
    table = {
        "UnitBall": lambda: unit_ball(n),
        "Annulus": lambda: annulus(params["r_in"], params["r_out"], n),
        "CuspBall": lambda: cusp_ball(profile, n),
        "SplitX_slit": lambda: split_x_slit(n),
        "SplitY_slit": lambda: split_y_slit(n),
        "SplitX_cut": lambda: split_x_cut(n),
        "SplitY_cut": lambda: split_y_cut(n),
        "SplitX_cusp": lambda: split_x_cusp(n, profile),
        "SplitY_cusp": lambda: split_y_cusp(n, profile),
    }
    if kind not in table:
        raise ValueError(f"unknown domain kind {kind!r}")
    return table[kind]()
