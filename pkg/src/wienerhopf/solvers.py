"""Stein, Sylvester and Riccati solvers.

Stein and Sylvester equations are reduced to triangular form with complex
Schur decompositions and finished by back-substitution in
:mod:`wienerhopf._core`. The Riccati solver targets the spectral
factorization equation

    Q - A Q A* = (B - A Q C*) (D - C Q C*)^{-1} (B* - C Q A*)

built from :class:`~wienerhopf.realization.ProductData`, and returns the
stabilizing solution together with the data of the outer factor.
"""
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg as sla

from . import _core
from .errors import (
    IndefiniteSchurComplement,
    NotHermitian,
    NotStabilizable,
    ShapeMismatch,
    SpectraNotDisjoint,
    SpectralRadiusViolation,
)
from .linalg import as_matrix, ct, hermitian_sqrt_psd, norm2, spectral_radius

__all__ = [
    "DareSolution",
    "solve_stein",
    "solve_sylvester",
    "solve_constrained_sylvester",
    "spectral_gap",
    "sylvester_separation",
    "gramian_factor",
    "solve_dare",
]

SDA_MAXIT = 200
SDA_TOL = 1e-13
FIXED_POINT_MAXIT = 20000
STABILITY_MARGIN = 1e-7


def _schur(M):
    T, Z = sla.schur(M, output="complex")
    return np.ascontiguousarray(T), Z


def _check_shapes(A, B, C):
    n, k = A.shape[0], B.shape[0]
    if A.shape != (n, n) or B.shape != (k, k):
        raise ShapeMismatch("coefficient matrices must be square")
    if C.shape != (n, k):
        raise ShapeMismatch(f"right-hand side has shape {C.shape}, expected {(n, k)}")
    return n, k


def solve_stein(A, B, C):
    """Solve ``X - A X B = C``.

    Requires ``spectral_radius(A) * spectral_radius(B) < 1``, which makes the
    solution unique and equal to ``sum_j A^j C B^j``.
    """
    A, B = as_matrix(A), as_matrix(B)
    C = as_matrix(C, A.shape[0], B.shape[0])
    n, k = _check_shapes(A, B, C)
    if n == 0 or k == 0:
        return np.zeros((n, k), dtype=np.complex128)
    rho = spectral_radius(A) * spectral_radius(B)
    if rho >= 1.0:
        raise SpectralRadiusViolation(f"rho(A)*rho(B) = {rho:.6g} >= 1")
    TA, U = _schur(A)
    TB, V = _schur(B)
    F = np.ascontiguousarray(ct(U) @ C @ V)
    Y = _core.stein_triangular(TA, TB, F)
    return U @ Y @ ct(V)


GRAMIAN_MAXIT = 64


def gramian_factor(A, C):
    """Upper triangular `L` with ``L* L = P`` where ``P - A* P A = C* C``.

    Square-root doubling: ``P = sum_k (A*)^k C* C A^k`` is accumulated as
    the triangular factor of the stacked matrix ``[L; L A^(2^j)]`` with one
    QR compression per step, so `P` is never formed. Working with the
    factor keeps the error in ``L^{-1}`` at the level of ``cond(L)`` rather
    than ``cond(P) = cond(L)^2``. The diagonal of `L` is made real and
    nonnegative. Requires ``rho(A) < 1``.
    """
    A = as_matrix(A)
    n = A.shape[0]
    C = as_matrix(C, 0, n) if np.size(C) == 0 else as_matrix(C)
    if C.shape[1] != n:
        raise ShapeMismatch(f"C has {C.shape[1]} columns for a state dimension of {n}")
    if n == 0:
        return np.zeros((0, 0), dtype=np.complex128)
    rho = spectral_radius(A)
    if rho >= 1.0:
        raise SpectralRadiusViolation(f"rho(A) = {rho:.6g} >= 1")
    L = np.linalg.qr(C, mode="r") if C.shape[0] else np.zeros((0, n), dtype=np.complex128)
    Ak = A.copy()
    for _ in range(GRAMIAN_MAXIT):
        tail = L @ Ak
        if norm2(tail) <= np.finfo(float).eps * 1e-2 * max(norm2(L), np.finfo(float).tiny):
            break
        L = np.linalg.qr(np.vstack([L, tail]), mode="r")
        Ak = Ak @ Ak
    else:
        raise SpectralRadiusViolation(f"gramian series did not converge in {GRAMIAN_MAXIT} doublings")
    if L.shape[0] < n:
        L = np.vstack([L, np.zeros((n - L.shape[0], n), dtype=np.complex128)])
    L = L[:n]
    d = np.diag(L)
    phase = np.where(np.abs(d) > 0, np.conj(d) / np.where(np.abs(d) > 0, np.abs(d), 1.0), 1.0)
    return np.ascontiguousarray(phase[:, None] * L)


def spectral_gap(A, B):
    """Smallest distance between an eigenvalue of `A` and one of `B`."""
    if A.size == 0 or B.size == 0:
        return np.inf
    la = np.linalg.eigvals(A)
    lb = np.linalg.eigvals(B)
    return float(np.min(np.abs(la[:, None] - lb[None, :])))


def sylvester_separation(A, B):
    """``sep(A, B)``: smallest singular value of ``P -> A P - P B``,
    relative to ``max(1, ||A|| + ||B||)``.

    Unlike the eigenvalue gap this is not fooled by a perturbed Jordan
    block, whose eigenvalues spread by ``eps^(1/k)`` while the operator stays
    numerically singular. Returns ``inf`` for empty operands.
    """
    A, B = as_matrix(A), as_matrix(B)
    n, k = A.shape[0], B.shape[0]
    if n == 0 or k == 0:
        return np.inf
    K = np.kron(np.eye(k), A) - np.kron(B.T, np.eye(n))
    smin = np.linalg.svd(K, compute_uv=False)[-1]
    return float(smin / max(1.0, norm2(A) + norm2(B)))


def solve_sylvester(A, B, C):
    """Solve ``A P - P B = C`` for `A`, `B` with disjoint spectra."""
    A, B = as_matrix(A), as_matrix(B)
    C = as_matrix(C, A.shape[0], B.shape[0])
    n, k = _check_shapes(A, B, C)
    if n == 0 or k == 0:
        return np.zeros((n, k), dtype=np.complex128)
    gap = spectral_gap(A, B)
    floor = 1e-8 * (norm2(A) + norm2(B))
    if gap <= floor:
        raise SpectraNotDisjoint(
            f"spectra overlap: minimum eigenvalue gap {gap:.3e} <= {floor:.3e}", gap=gap
        )
    TA, U = _schur(A)
    TB, V = _schur(B)
    F = np.ascontiguousarray(ct(U) @ C @ V)
    Y = _core.sylvester_triangular(TA, TB, F)
    return U @ Y @ ct(V)


def solve_constrained_sylvester(A, B, C, E, F, tol=1e-8):
    """Solve ``A P - P B = C`` subject to ``P E = F``.

    When `A` and `B` share eigenvalues the Sylvester equation alone has an
    affine family of solutions (or none). The side condition singles out one
    member: if ``(B, E)`` is controllable the combined system has at most one
    solution, because ``A P = P B`` and ``P E = 0`` force
    ``P B^k E = A^k P E = 0`` for every k.

    The combined system is solved in vectorized form by least squares; it
    is small in this package (state dimensions of a few dozen at most).

    Raises
    ------
    SpectraNotDisjoint
        When the combined system is rank deficient (no unique solution) or
        inconsistent beyond `tol` relative to the data.
    """
    A, B = as_matrix(A), as_matrix(B)
    n, k = A.shape[0], B.shape[0]
    C = as_matrix(C, n, k)
    _check_shapes(A, B, C)
    if n == 0 or k == 0:
        return np.zeros((n, k), dtype=np.complex128)
    E, F = as_matrix(E), as_matrix(F)
    if E.shape[0] != k or F.shape != (n, E.shape[1]):
        raise ShapeMismatch(f"constraint blocks {E.shape}, {F.shape} do not fit P of shape {(n, k)}")
    # column-major vec: vec(A P) = (I kron A) vec P, vec(P B) = (B^T kron I) vec P
    In, Ik = np.eye(n), np.eye(k)
    K = np.vstack([np.kron(Ik, A) - np.kron(B.T, In), np.kron(E.T, In)])
    rhs = np.concatenate([C.reshape(-1, order="F"), F.reshape(-1, order="F")])
    sol, _, rank, sv = np.linalg.lstsq(K, rhs, rcond=None)
    scale = max(1.0, norm2(A) + norm2(B) + norm2(E))
    if rank < n * k or sv[-1] <= 1e-12 * scale:
        raise SpectraNotDisjoint(
            "Sylvester equation with side condition has no unique solution "
            f"(smallest singular value {sv[-1] if len(sv) else 0.0:.3e})",
            gap=0.0,
        )
    P = sol.reshape((n, k), order="F")
    defect = np.linalg.norm(K @ sol - rhs) / (1.0 + np.linalg.norm(rhs) + scale * np.linalg.norm(sol))
    if defect > tol:
        raise SpectraNotDisjoint(f"Sylvester equation with side condition is inconsistent ({defect:.3e})", gap=0.0)
    return P


@dataclass(frozen=True)
class DareSolution:
    Q: np.ndarray
    D: np.ndarray
    C0: np.ndarray
    B0: np.ndarray
    A0: np.ndarray
    iterations: int
    residual: float
    stein_residual: float = 0.0
    method: str = "doubling"
    closed_loop_radius: float = field(default=0.0)


def riccati_residual(pd, Q):
    """Norm of the Riccati defect for `Q`."""
    At, Bt, Ct, Dt = pd.Atilde, pd.Btilde, pd.Ctilde, pd.Dtilde
    E = Dt - Ct @ Q @ ct(Ct)
    L = Bt - At @ Q @ ct(Ct)
    R = Q - At @ Q @ ct(At) - L @ np.linalg.solve(E, ct(L))
    return norm2(R)


def _doubling(Abar, G, H):
    # X = Abar X (I + G X)^{-1} Abar* + H, iterated in the transposed SDA form.
    n = Abar.shape[0]
    Ak, Gk, Hk = ct(Abar), G, H
    eye = np.eye(n)
    for it in range(1, SDA_MAXIT + 1):
        W = eye + Gk @ Hk
        try:
            WA = np.linalg.solve(W, Ak)
            WG = np.linalg.solve(W, Gk)
        except np.linalg.LinAlgError:
            return None, it
        Hn = Hk + ct(Ak) @ Hk @ WA
        Gk = Gk + Ak @ WG @ ct(Ak)
        Ak = Ak @ WA
        Hn = 0.5 * (Hn + ct(Hn))
        if not np.all(np.isfinite(Hn)):
            return None, it
        delta = np.linalg.norm(Hn - Hk, 2)
        Hk = Hn
        if delta <= SDA_TOL * max(1.0, norm2(Hk)):
            return Hk, it
    return None, SDA_MAXIT


def _fixed_point(pd):
    # Q <- A Q A0(Q) + B D(Q)^{-2} C0(Q), i.e. the Riccati map in Stein form,
    # started at 0; converges monotonically to the stabilizing solution.
    At, Bt, Ct, Dt = pd.Atilde, pd.Btilde, pd.Ctilde, pd.Dtilde
    Q = np.zeros_like(At)
    for it in range(1, FIXED_POINT_MAXIT + 1):
        E = Dt - Ct @ Q @ ct(Ct)
        C0 = ct(Bt) - Ct @ Q @ ct(At)
        try:
            K = np.linalg.solve(E, C0)
        except np.linalg.LinAlgError:
            return None, it
        A0 = ct(At) - ct(Ct) @ K
        Qn = At @ Q @ A0 + Bt @ K
        Qn = 0.5 * (Qn + ct(Qn))
        if not np.all(np.isfinite(Qn)):
            return None, it
        delta = np.linalg.norm(Qn - Q, 2)
        Q = Qn
        if delta <= SDA_TOL * max(1.0, norm2(Q)):
            return Q, it
    return None, FIXED_POINT_MAXIT


def _certify(pd, Q, iterations, method):
    At, Bt, Ct, Dt = pd.Atilde, pd.Btilde, pd.Ctilde, pd.Dtilde
    E = Dt - Ct @ Q @ ct(Ct)
    E = 0.5 * (E + ct(E))
    emin = np.linalg.eigvalsh(E).min()
    if emin <= 1e-12 * max(1.0, norm2(Dt)):
        raise IndefiniteSchurComplement(
            f"D~ - C~ Q C~* has smallest eigenvalue {emin:.3e}; "
            "the function has a zero on the unit circle"
        )
    D = hermitian_sqrt_psd(E)
    Dinv2 = np.linalg.inv(E)
    C0 = ct(Bt) - Ct @ Q @ ct(At)
    B0 = ct(Ct)
    A0 = ct(At) - B0 @ Dinv2 @ C0
    rho = spectral_radius(A0)
    if rho >= 1.0 - STABILITY_MARGIN:
        raise NotStabilizable(f"closed loop matrix A0 has spectral radius {rho:.12f}")
    res = riccati_residual(pd, Q)
    qn = norm2(Q)
    stein = Q - At @ Q @ A0 - Bt @ Dinv2 @ C0
    stein_res = norm2(stein)
    if res > 1e-10 * (1.0 + qn) or stein_res > 1e-10 * (1.0 + qn):
        raise NotStabilizable(f"Riccati residual {res:.3e} exceeds 1e-10*(1+||Q||)")
    return DareSolution(
        Q=Q, D=D, C0=C0, B0=B0, A0=A0, iterations=iterations, residual=res,
        stein_residual=stein_res, method=method, closed_loop_radius=rho,
    )


def solve_dare(pd):
    """Stabilizing solution of the spectral factorization Riccati equation.

    Structure-preserving doubling runs first; if it breaks down, fails to
    converge, or its result does not pass certification, the Riccati map is
    iterated directly from zero. Whatever path produced `Q`, the returned
    solution has been checked from scratch: ``D~ - C~ Q C~*`` positive
    definite, ``rho(A0) < 1`` and the equation residual below
    ``1e-10 * (1 + ||Q||)``.

    Raises
    ------
    IndefiniteSchurComplement
        ``D~ - C~ Q C~*`` is not positive definite.
    NotStabilizable
        No certified stabilizing solution was found.
    """
    At, Bt, Ct, Dt = (as_matrix(x) for x in (pd.Atilde, pd.Btilde, pd.Ctilde, pd.Dtilde))
    n, m = At.shape[0], Dt.shape[0]
    if norm2(Dt - ct(Dt)) > 1e-12 * max(1.0, norm2(Dt)):
        raise NotHermitian("D~ is not Hermitian")
    if n == 0:
        Q = np.zeros((0, 0), dtype=np.complex128)
        return _certify(pd, Q, 0, "trivial")

    if np.linalg.eigvalsh(0.5 * (Dt + ct(Dt))).min() <= 0:
        raise IndefiniteSchurComplement("D~ is not positive definite")
    Dinv = np.linalg.inv(Dt)
    Abar = At - Bt @ Dinv @ Ct
    G = -ct(Ct) @ Dinv @ Ct
    H = Bt @ Dinv @ ct(Bt)
    H = 0.5 * (H + ct(H))

    Q, it = _doubling(Abar, G, H)
    first_error = None
    if Q is not None:
        try:
            return _certify(pd, Q, it, "doubling")
        except (NotStabilizable, IndefiniteSchurComplement) as exc:
            first_error = exc
    Q, it2 = _fixed_point(pd)
    if Q is None:
        if isinstance(first_error, IndefiniteSchurComplement):
            raise first_error
        raise NotStabilizable(
            f"Riccati iteration did not converge ({it} doubling steps, {it2} fixed-point steps)"
        )
    return _certify(pd, Q, it + it2, "fixed-point")
