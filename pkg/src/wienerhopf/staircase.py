"""Orthogonal staircase reductions for controllability and observability."""
from dataclasses import dataclass, field

import numpy as np

from .linalg import DEFAULT_TOL, as_matrix, ct, numerical_rank

__all__ = ["StaircaseResult", "controllable_subspace", "observable_subspace", "minimal_part"]


@dataclass(frozen=True)
class StaircaseResult:
    basis: np.ndarray  # orthonormal columns spanning the subspace
    block_ranks: list = field(default_factory=list)
    gap_ratios: list = field(default_factory=list)

    @property
    def dim(self):
        return self.basis.shape[1]


def system_scale(A, B=None, C=None):
    """Reference magnitude for absolute rank thresholds on a realization."""
    blocks = [x for x in (A, B, C) if x is not None and x.size]
    if not blocks:
        return 1.0
    return max(1.0, max(np.linalg.norm(x, 2) for x in blocks))


def controllable_subspace(A, B, tol=DEFAULT_TOL, scale=None):
    """Orthonormal basis of ``span{B, AB, A^2 B, ...}`` by the staircase
    algorithm.

    Each step splits the current input block with an SVD, keeps its range
    and pushes the next block ``A[k+r:, k:k+r]`` forward in the updated
    coordinates. Rank decisions use the absolute threshold
    ``tol * scale * max(block shape)``.
    """
    A, B = as_matrix(A), as_matrix(B)
    n = A.shape[0]
    B = as_matrix(B, n, 0) if B.size == 0 else B
    if scale is None:
        scale = system_scale(A, B)
    Z = np.eye(n, dtype=np.complex128)
    ranks, gaps = [], []
    k = 0
    block = B
    while k < n and block.shape[1] > 0:
        U, s, _ = np.linalg.svd(block, full_matrices=True)
        r, gap = numerical_rank(s, block.shape, tol, scale)
        if r == 0:
            gaps.append(gap)
            break
        ranks.append(r)
        gaps.append(gap)
        Z[:, k:] = Z[:, k:] @ U
        T = ct(Z) @ A @ Z
        block = T[k + r:, k:k + r]
        k += r
    return StaircaseResult(np.ascontiguousarray(Z[:, :k]), ranks, gaps)


def observable_subspace(C, A, tol=DEFAULT_TOL, scale=None):
    """Orthonormal basis of the orthogonal complement of the unobservable
    subspace of ``(C, A)``."""
    A, C = as_matrix(A), as_matrix(C)
    n = A.shape[0]
    if C.size == 0:
        C = np.zeros((0, n), dtype=np.complex128)
    if scale is None:
        scale = system_scale(A, None, C)
    return controllable_subspace(ct(A), ct(C), tol, scale)


def minimal_part(A, B, C, tol=DEFAULT_TOL, scale=None):
    """Controllable then observable restriction of ``(A, B, C)``.

    Returns ``(Z, log)`` where `Z` has orthonormal columns and the minimal
    realization is ``(Z* A Z, Z* B, C Z)``; `log` records the removed
    dimensions and the gap ratios of every rank decision.
    """
    A, B, C = as_matrix(A), as_matrix(B), as_matrix(C)
    n = A.shape[0]
    if scale is None:
        scale = system_scale(A, B, C)
    ctrb = controllable_subspace(A, B, tol, scale)
    Zc = ctrb.basis
    Ac, Cc = ct(Zc) @ A @ Zc, C @ Zc
    obs = observable_subspace(Cc, Ac, tol, scale)
    Z = Zc @ obs.basis
    log = {
        "uncontrollable_removed": n - ctrb.dim,
        "unobservable_removed": ctrb.dim - obs.dim,
        "gap_ratios": [g for g in ctrb.gap_ratios + obs.gap_ratios],
    }
    return Z, log
