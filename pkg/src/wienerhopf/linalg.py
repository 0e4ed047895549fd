"""Dense complex matrix kernels with explicit tolerance control.

Every routine accepts zero-dimensional shapes and treats them as empty linear
maps. Nothing here is randomized.
"""
from dataclasses import dataclass

import numpy as np
from scipy import linalg as sla

from .errors import NotHermitian, NotIsometric, NotPositiveSemidefinite

DEFAULT_TOL = 1e-9

__all__ = [
    "DEFAULT_TOL",
    "RankResult",
    "numerical_rank",
    "as_matrix",
    "ct",
    "norm2",
    "rank_and_kernel",
    "hermitian_sqrt_psd",
    "unitary_completion",
    "spectral_radius",
]


def as_matrix(M, rows=None, cols=None):
    """Return `M` as a 2-D complex128 array.

    Scalars become 1x1. Empty inputs take the shape ``(rows, cols)`` when
    those are given, which is how the empty blocks of a realization keep
    their conformable shapes.
    """
    a = np.asarray(M, dtype=np.complex128)
    if a.ndim == 0:
        a = a.reshape(1, 1)
    elif a.ndim == 1:
        a = a.reshape(1, -1) if a.size else a.reshape(0, 0)
    if a.size == 0 and rows is not None and cols is not None:
        a = np.zeros((rows, cols), dtype=np.complex128)
    return a


def ct(M):
    """Conjugate transpose."""
    return M.conj().T


def norm2(M):
    """Spectral norm; 0 for an empty matrix."""
    M = np.asarray(M)
    return float(np.linalg.norm(M, 2)) if M.size else 0.0


@dataclass(frozen=True)
class RankResult:
    rank: int
    kernel_basis: np.ndarray
    singular_values: np.ndarray
    gap_ratio: float

    @property
    def nullity(self):
        return self.kernel_basis.shape[1]


def numerical_rank(s, shape, tol=DEFAULT_TOL, scale=None):
    """Rank and gap ratio from nonincreasing singular values `s` of a matrix
    of the given shape; see :func:`rank_and_kernel` for the threshold."""
    if len(s) == 0:
        return 0, np.inf
    ref = s[0] if scale is None else float(scale)
    thresh = tol * ref * max(shape)
    rank = int(np.count_nonzero(s > thresh)) if ref > 0 else 0
    if rank == len(s):
        return rank, np.inf
    upper = s[rank - 1] if rank > 0 else ref
    return rank, (np.inf if s[rank] == 0 else float(upper / s[rank]))


def rank_and_kernel(M, tol=DEFAULT_TOL, scale=None):
    """Numerical rank and an orthonormal kernel basis of `M`.

    A singular value counts toward the rank when it exceeds
    ``tol * ref * max(rows, cols)`` where ``ref`` is the largest singular
    value, or `scale` when that is given. Passing `scale` turns the test into
    an absolute one, which is what the staircase reductions need: a block
    that is pure rounding noise must come out as rank zero rather than be
    measured against its own size.

    Parameters
    ----------
    M : array_like
        Matrix of any shape, including 0 x n and n x 0.
    tol : float
        Relative threshold, must be positive.
    scale : float, optional
        Reference magnitude replacing the largest singular value.

    Returns
    -------
    RankResult
        ``gap_ratio`` is ``sigma[rank-1] / sigma[rank]`` (``inf`` when no
        singular value was discarded). For rank zero the reference magnitude
        stands in for ``sigma[-1]``.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    M = as_matrix(M)
    rows, cols = M.shape
    if M.size == 0:
        return RankResult(0, np.eye(cols, dtype=np.complex128), np.zeros(0), np.inf)
    _, s, vh = np.linalg.svd(M, full_matrices=True)
    rank, gap = numerical_rank(s, M.shape, tol, scale)
    return RankResult(rank, np.ascontiguousarray(ct(vh[rank:])), s, gap)


def _check_hermitian(M, tol):
    norm = np.linalg.norm(M, 2) if M.size else 0.0
    if np.linalg.norm(M - ct(M), 2) > tol * max(norm, np.finfo(float).tiny):
        raise NotHermitian("matrix is not Hermitian within tolerance")
    return norm


def hermitian_sqrt_psd(M, tol=DEFAULT_TOL):
    """Positive semidefinite square root of a Hermitian PSD matrix.

    Eigenvalues in ``[-tol*||M||, 0)`` are treated as rounding and clipped to
    zero; anything more negative raises :class:`NotPositiveSemidefinite`.
    """
    M = as_matrix(M)
    if M.shape[0] != M.shape[1]:
        raise ValueError("square matrix required")
    if M.size == 0:
        return M.copy()
    norm = _check_hermitian(M, tol)
    w, U = np.linalg.eigh(0.5 * (M + ct(M)))
    if w.min() < -tol * norm:
        raise NotPositiveSemidefinite(
            f"smallest eigenvalue {w.min():.3e} below -tol*||M|| = {-tol * norm:.3e}"
        )
    w = np.sqrt(np.clip(w, 0.0, None))
    S = (U * w) @ ct(U)
    return 0.5 * (S + ct(S))


def _fix_column_phases(G):
    for j in range(G.shape[1]):
        col = G[:, j]
        i = int(np.argmax(np.abs(col)))
        if col[i] != 0:
            G[:, j] = col * (abs(col[i]) / col[i])
    return G


def unitary_completion(F, tol=1e-10):
    """Complete an isometry `F` (n x k) to a unitary ``[F G]``.

    The columns of G are an orthonormal basis of the orthogonal complement of
    ``range(F)``. Each column is rotated so that its entry of largest
    modulus (first such entry on ties) is real and positive, which makes the
    output deterministic.
    """
    F = as_matrix(F)
    n, k = F.shape
    if k > n:
        raise NotIsometric(f"{n}x{k} matrix cannot have orthonormal columns")
    if k == 0:
        return np.eye(n, dtype=np.complex128)
    dev = np.linalg.norm(ct(F) @ F - np.eye(k), 2)
    if dev > tol:
        raise NotIsometric(f"||F*F - I|| = {dev:.3e} exceeds {tol:.1e}")
    Q, _ = sla.qr(F, mode="full")
    G = np.array(Q[:, k:], dtype=np.complex128, order="C")
    return _fix_column_phases(G)


def spectral_radius(M):
    """Largest eigenvalue modulus; 0 for the empty matrix."""
    M = as_matrix(M)
    if M.shape[0] != M.shape[1]:
        raise ValueError("square matrix required")
    if M.size == 0:
        return 0.0
    return float(np.max(np.abs(np.linalg.eigvals(M))))
