"""Pointwise kernel: determinants, adjugates, operator norms and distortion.

All matrix routines accept a single ``(n, n)`` matrix or a stack ``(N, n, n)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .errors import DomainViolation, FDUnstable, OrientationViolation
from .points import as_points, is_single, split

ORIENTATION_TOL = 1e-9
FD_REL_STEP = 1e-5
FD_RICHARDSON_TOL = 1e-6
# steps stay this fraction of the way to the nearest boundary or singular point,
# keeping the Richardson truncation term near (1/256)^4 relative
FD_ROOM_FRACTION = 1.0 / 256


def _stack(M):
    M = np.asarray(M, dtype=float)
    return (M[None], True) if M.ndim == 2 else (M, False)


def _det(M: np.ndarray) -> np.ndarray:
    n = M.shape[-1]
    if n == 1:
        return M[:, 0, 0].copy()
    if n == 2:
        return M[:, 0, 0] * M[:, 1, 1] - M[:, 0, 1] * M[:, 1, 0]
    if n == 3:
        a = M
        return (
            a[:, 0, 0] * (a[:, 1, 1] * a[:, 2, 2] - a[:, 1, 2] * a[:, 2, 1])
            - a[:, 0, 1] * (a[:, 1, 0] * a[:, 2, 2] - a[:, 1, 2] * a[:, 2, 0])
            + a[:, 0, 2] * (a[:, 1, 0] * a[:, 2, 1] - a[:, 1, 1] * a[:, 2, 0])
        )
    if n == 4:
        out = np.zeros(M.shape[0])
        for j in range(4):
            cols = [c for c in range(4) if c != j]
            out += (-1) ** j * M[:, 0, j] * _det(M[:, 1:][:, :, cols])
        return out
    return np.linalg.det(M)


def det(M):
    """Determinant by cofactor expansion for n <= 4, LU beyond."""
    S, single = _stack(M)
    d = _det(S)
    return float(d[0]) if single else d


def adjugate(M):
    """Transposed cofactor matrix, so that ``adjugate(M) @ M == det(M) * I``.

    Minors are formed explicitly; a rank-deficient input gives an exactly
    singular (often exactly zero) result rather than ``det * inv``.
    """
    S, single = _stack(M)
    N, n, _ = S.shape
    if n == 1:
        out = np.ones_like(S)
    else:
        out = np.empty_like(S)
        idx = np.arange(n)
        for i in range(n):
            rows = idx[idx != i]
            for j in range(n):
                cols = idx[idx != j]
                out[:, j, i] = (-1) ** (i + j) * _det(S[:, rows][:, :, cols])
    return out[0] if single else out


def _jacobi_max_eig(A: np.ndarray, tol: float = 1e-13, max_sweeps: int = 50) -> np.ndarray:
    """Largest eigenvalue of a stack of symmetric matrices by cyclic Jacobi."""
    A = A.copy()
    n = A.shape[-1]
    pairs = list(combinations(range(n), 2))
    scale = np.maximum(np.sqrt(np.einsum("nij,nij->n", A, A)), np.finfo(float).tiny)
    for _ in range(max_sweeps):
        off = np.sqrt(sum(A[:, p, q] ** 2 for p, q in pairs)) if pairs else np.zeros(len(A))
        if np.all(off <= tol * scale):
            break
        for p, q in pairs:
            apq = A[:, p, q]
            live = np.abs(apq) > 1e-300
            if not live.any():
                continue
            theta = np.where(live, (A[:, q, q] - A[:, p, p]) / (2 * np.where(live, apq, 1.0)), 0.0)
            with np.errstate(over="ignore"):
                tt = np.sign(theta) / (np.abs(theta) + np.sqrt(theta * theta + 1.0))
            tt = np.where(theta == 0, 1.0, tt)
            tt = np.where(live, tt, 0.0)
            c = 1.0 / np.sqrt(tt * tt + 1.0)
            s = tt * c
            Ap = A[:, :, p].copy()
            Aq = A[:, :, q].copy()
            A[:, :, p] = c[:, None] * Ap - s[:, None] * Aq
            A[:, :, q] = s[:, None] * Ap + c[:, None] * Aq
            Ap = A[:, p, :].copy()
            Aq = A[:, q, :].copy()
            A[:, p, :] = c[:, None] * Ap - s[:, None] * Aq
            A[:, q, :] = s[:, None] * Ap + c[:, None] * Aq
    return np.max(np.diagonal(A, axis1=1, axis2=2), axis=1)


def op_norm(M):
    """Largest singular value, via Jacobi rotations on ``M^T M``."""
    S, single = _stack(M)
    if not np.all(np.isfinite(S)):
        raise ValueError("op_norm needs finite entries")
    G = np.einsum("nki,nkj->nij", S, S)
    s = np.sqrt(np.maximum(_jacobi_max_eig(G), 0.0))
    return float(s[0]) if single else s


# --------------------------------------------------------------------------
# differentials


def _singular_distance(map, t, rho):
    s = map.domain.singular_set
    if s.kind == "point":
        return np.hypot(t - s.data[0], rho)
    if s.kind == "segment":
        a, b = s.data
        return np.hypot(t - np.clip(t, a, b), rho)
    return np.full(t.shape, np.inf)


def fd_step(map, P) -> np.ndarray:
    """Per-point central-difference step, kept well inside the local piece."""
    t, _, rho = split(P)
    delta = FD_REL_STEP * np.maximum(1.0, np.linalg.norm(P, axis=1))
    room = np.minimum(map.domain.boundary_distance(t, rho), _singular_distance(map, t, rho))
    return np.minimum(delta, room * FD_ROOM_FRACTION)


def _central(map, P, delta):
    N, n = P.shape
    D = np.empty((N, n, n))
    for j in range(n):
        E = np.zeros((N, n))
        E[:, j] = delta
        D[:, :, j] = (map.apply(P + E) - map.apply(P - E)) / (2 * delta)[:, None]
    return D


def fd_differential(map, P, strict: bool = True):
    """Richardson-extrapolated central differences.

    Returns ``(D, unstable)`` where ``unstable`` flags points whose extrapolated
    value moved by more than ``FD_RICHARDSON_TOL`` (relative) when the step was
    halved.  With ``strict`` such points raise :class:`FDUnstable`.
    """
    P = as_points(P, map.n)
    delta = fd_step(map, P)
    bad = ~(delta > 0)
    delta = np.where(bad, 1.0, delta)
    D1, D2, D4 = (_central(map, P, delta / k) for k in (1, 2, 4))
    R1 = (4 * D2 - D1) / 3
    R2 = (4 * D4 - D2) / 3
    scale = np.linalg.norm(R2, axis=(1, 2))
    change = np.linalg.norm(R1 - R2, axis=(1, 2)) / np.maximum(scale, 1e-300)
    unstable = bad | ~(change < FD_RICHARDSON_TOL)
    if strict and unstable.any():
        i = int(np.flatnonzero(unstable)[0])
        raise FDUnstable(
            f"finite differences unstable at {P[i].tolist()} ({int(unstable.sum())} of {len(P)} points)"
        )
    return R2, unstable


def differential(map, p, method: str = "auto"):
    """Deformation gradient of ``map`` at a point or an ``(N, n)`` batch."""
    single = is_single(p)
    P = map.check_points(p)
    if method == "auto":
        method = "analytic" if map.analytic else "fd"
    if method == "analytic":
        D = map.analytic_diff(P)
    elif method == "fd":
        D, _ = fd_differential(map, P)
    else:
        raise ValueError(f"unknown differential method {method!r}")
    if not np.all(np.isfinite(D)):
        raise DomainViolation("differential is not finite at some sample points")
    return D[0] if single else D


# --------------------------------------------------------------------------
# distortion


def distortion_values(D: np.ndarray, n: int | None = None):
    """``(J, adj, |D|, |adj|, K_O, K_I)`` for a stack of differentials."""
    D, _ = _stack(D)
    n = n or D.shape[-1]
    J = _det(D)
    if np.any(J < -ORIENTATION_TOL):
        i = int(np.argmin(J))
        raise OrientationViolation(f"negative Jacobian {J[i]:.3e}")
    adj = adjugate(D)
    nd = op_norm(D)
    na = op_norm(adj)
    pos = J > 0
    Jp = np.where(pos, J, 1.0)
    with np.errstate(over="ignore"):
        KO = np.where(pos, nd**n / Jp, np.where(nd == 0, 1.0, np.inf))
        KI = np.where(pos, na**n / Jp ** (n - 1), np.where(na == 0, 1.0, np.inf))
    return J, adj, nd, na, KO, KI


@dataclass(frozen=True)
class DistortionSample:
    point: np.ndarray
    D: np.ndarray
    J: float
    adjD: np.ndarray
    opnorm: float
    adj_opnorm: float
    K_O: float
    K_I: float

    def to_record(self) -> dict:
        rec = {f"p{i}": float(c) for i, c in enumerate(self.point)}
        rec.update(J=self.J, opnorm=self.opnorm, adj_opnorm=self.adj_opnorm, K_O=self.K_O, K_I=self.K_I)
        return rec


@dataclass(frozen=True)
class DistortionBatch:
    points: np.ndarray
    D: np.ndarray
    J: np.ndarray
    adjD: np.ndarray
    opnorm: np.ndarray
    adj_opnorm: np.ndarray
    K_O: np.ndarray
    K_I: np.ndarray

    def __len__(self):
        return len(self.points)

    def __getitem__(self, i) -> DistortionSample:
        return DistortionSample(
            self.points[i], self.D[i], float(self.J[i]), self.adjD[i], float(self.opnorm[i]),
            float(self.adj_opnorm[i]), float(self.K_O[i]), float(self.K_I[i]),
        )


def distortion_batch(map, P, method: str = "auto") -> DistortionBatch:
    P = map.check_points(P)
    D = differential(map, P, method=method)
    return DistortionBatch(P, D, *distortion_values(D, map.n))


def distortion_sample(map, p, method: str = "auto") -> DistortionSample:
    return distortion_batch(map, as_points(p, map.n), method)[0]


def sandwich_residual(K_O, K_I, n: int):
    """Relative violation of ``K_I^(1/(n-1)) <= K_O <= K_I^(n-1)`` (<= 0 when it holds)."""
    K_O = np.asarray(K_O, dtype=float)
    K_I = np.asarray(K_I, dtype=float)
    lower = K_I ** (1.0 / (n - 1)) / K_O - 1.0
    upper = K_O / K_I ** (n - 1) - 1.0
    return np.maximum(lower, upper)


def pointwise_identity(h, f, p, method: str = "auto"):
    """Residual of ``Df(h(x)) Dh(x) = I`` and ``K_I(x, h) = |Df(h(x))|^n J_h(x)``."""
    single = is_single(p)
    P = h.check_points(p)
    n = h.n
    Dh = differential(h, P, method=method)
    Dfh = differential(f, h.apply(P), method=method)
    chain = np.linalg.norm(np.einsum("nij,njk->nik", Dfh, Dh) - np.eye(n), axis=(1, 2))
    J, _, _, _, _, KI = distortion_values(Dh, n)
    rhs = op_norm(Dfh) ** n * J
    ident = np.abs(KI - rhs) / KI
    res = np.maximum(chain, ident)
    return float(res[0]) if single else res


def cramer_residual(M):
    """``|adj(M) M - det(M) I| / |M|^n`` (Frobenius), per matrix."""
    S, single = _stack(M)
    n = S.shape[-1]
    r = np.linalg.norm(adjugate(S) @ S - _det(S)[:, None, None] * np.eye(n), axis=(1, 2))
    scale = np.maximum(np.linalg.norm(S, axis=(1, 2)) ** n, 1e-300)
    out = r / scale
    return float(out[0]) if single else out
