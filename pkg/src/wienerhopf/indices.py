"""Right Wiener-Hopf indices from the coupling matrix of a DSS factorization.

With ``Xi = V W*`` given by unitary realizations and ``X`` the coupling
matrix,

* the number of negative indices is ``dim Ker X - dim Ker [B_W*; X A_W*]``
  and their magnitudes are read off the successive drops of
  ``dim Ker_k([B_W*; X A_W*], A_W*)``;
* the number of positive indices is ``rank [B_V, A_V X] - rank X`` and
  their values are read off the successive gains of
  ``dim Im_k(A_V, [B_V, A_V X])``.
"""
import logging
import warnings
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import AmbiguousRank, NumericalError
from .factorization import (
    dss_factorize,
    left_unitary_factor,
    minimal_reduce,
    outer_factor,
    reconstruct_from_coupling,
)
from .linalg import DEFAULT_TOL, as_matrix, ct, rank_and_kernel
from .realization import balance, product_data, validate, winding_number
from .solvers import solve_dare

log = logging.getLogger(__name__)

__all__ = [
    "AMBIGUOUS_GAP",
    "WienerHopfIndices",
    "DimensionSequence",
    "VerificationReport",
    "kernel_sequence",
    "image_sequence",
    "wiener_hopf_indices",
    "indices_of",
    "analyze",
    "PipelineResult",
    "run_pipeline",
]

AMBIGUOUS_GAP = 1e3
# Rank decisions on unitary realizations are taken against this absolute
# scale; every block involved has norm at most about one.
UNIT_SCALE = 1.0


@dataclass
class WienerHopfIndices:
    negatives: list
    zeros: int
    positives: list

    @property
    def m(self):
        return len(self.negatives) + self.zeros + len(self.positives)

    def as_list(self):
        """All indices in ascending order, negatives as negative integers."""
        return sorted([-a for a in self.negatives] + [0] * self.zeros + list(self.positives))

    @property
    def total(self):
        return sum(self.positives) - sum(self.negatives)

    def to_dict(self):
        return {"negatives": list(self.negatives), "zeros": self.zeros, "positives": list(self.positives)}


@dataclass
class DimensionSequence:
    dims: list
    gap_ratios: list = field(default_factory=list)

    def drops(self):
        return [a - b for a, b in zip(self.dims, self.dims[1:])]

    def gains(self):
        return [b - a for a, b in zip(self.dims, self.dims[1:])]


def kernel_sequence(C, A, tol=DEFAULT_TOL, scale=None):
    """``dims[k] = dim of the intersection of Ker C A^j for j < k``.

    Stops once two consecutive values agree, the kernel is zero, or
    ``k = n + 1``.
    """
    A = as_matrix(A)
    n = A.shape[0]
    C = as_matrix(C, 0, n) if np.size(C) == 0 else as_matrix(C)
    dims, gaps = [n], []
    block, stacked = C, np.zeros((0, n), dtype=np.complex128)
    for _ in range(n + 1):
        if dims[-1] == 0:
            break
        stacked = np.vstack([stacked, block])
        res = rank_and_kernel(stacked, tol, scale)
        gaps.append(res.gap_ratio)
        dims.append(n - res.rank)
        if dims[-1] == dims[-2]:
            break
        block = block @ A
    return DimensionSequence(dims, gaps)


def image_sequence(A, B, tol=DEFAULT_TOL, scale=None):
    """``dims[k] = rank [B, AB, ..., A^{k-1} B]``, with ``dims[0] = 0``."""
    A = as_matrix(A)
    n = A.shape[0]
    B = as_matrix(B, n, 0) if np.size(B) == 0 else as_matrix(B)
    dims, gaps = [0], []
    block, stacked = B, np.zeros((n, 0), dtype=np.complex128)
    for _ in range(n + 1):
        if dims[-1] == n:
            break
        stacked = np.hstack([stacked, block])
        res = rank_and_kernel(stacked, tol, scale)
        gaps.append(res.gap_ratio)
        dims.append(res.rank)
        if dims[-1] == dims[-2]:
            break
        block = A @ block
    return DimensionSequence(dims, gaps)


def _conjugate_partition(steps, count):
    # value_j = #{k : steps[k] >= j} for j = 1..count
    return [sum(1 for d in steps if d >= j) for j in range(1, count + 1)]


def wiener_hopf_indices(dss, m=None, tol=DEFAULT_TOL, scale=UNIT_SCALE):
    """Right Wiener-Hopf indices from a normalized DSS factorization.

    Returns ``(indices, decisions)`` where `decisions` lists every rank
    decision with its gap ratio. A gap ratio below ``AMBIGUOUS_GAP`` issues
    an :class:`~wienerhopf.errors.AmbiguousRank` warning; the result is
    returned regardless.
    """
    V, W, X = dss.V, dss.W, dss.X
    m = dss.m if m is None else m
    nV, nW = V.n, W.n
    AWs = ct(W.A)
    decisions = []

    def rank(M, label):
        M = as_matrix(M)
        res = rank_and_kernel(M, tol, scale)
        decisions.append({"what": label, "rank": res.rank, "gap_ratio": res.gap_ratio})
        return res.rank

    rX = rank(X if X.size else np.zeros((nV, nW)), "rank X")
    Cneg = np.vstack([ct(W.B), X @ AWs]) if nW else np.zeros((m + nV, 0))
    s = (nW - rX) - (nW - rank(Cneg, "rank [B_W*; X A_W*]"))
    kseq = kernel_sequence(Cneg, AWs, tol, scale)
    for k, g in enumerate(kseq.gap_ratios, start=1):
        decisions.append({"what": f"dim Ker_{k}", "rank": kseq.dims[k], "gap_ratio": g})
    negatives = _conjugate_partition(kseq.drops(), s)

    Bpos = np.hstack([V.B, V.A @ X]) if nV else np.zeros((0, m + nW))
    t = rank(Bpos, "rank [B_V, A_V X]") - rX
    iseq = image_sequence(V.A, Bpos, tol, scale)
    for k, g in enumerate(iseq.gap_ratios, start=1):
        decisions.append({"what": f"dim Im_{k}", "rank": iseq.dims[k], "gap_ratio": g})
    positives = _conjugate_partition(iseq.gains(), t)

    flags = []
    for d in decisions:
        if d["gap_ratio"] < AMBIGUOUS_GAP:
            flags.append(f"AmbiguousRank: {d['what']} = {d['rank']} (gap ratio {d['gap_ratio']:.3g})")
    for f in flags:
        warnings.warn(f, AmbiguousRank, stacklevel=2)
    zeros = m - s - t
    if s < 0 or t < 0 or zeros < 0:
        raise NumericalError(f"inconsistent index counts s={s}, t={t}, m={m}")
    return WienerHopfIndices(negatives, zeros, positives), decisions, flags


@dataclass
class VerificationReport:
    tol: float
    winding: int
    sum_rule: bool
    residuals: dict
    flags: list
    rank_decisions: list
    reduction: dict
    dims: dict

    def to_dict(self):
        return asdict(self)


class _Stage:
    def __init__(self, name):
        self.name = name

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        if exc is not None and isinstance(exc, NumericalError) and exc.stage is None:
            exc.stage = self.name
        return False


def run_pipeline(r, tol=DEFAULT_TOL):
    """All factorization stages; returns ``(psi, xi, xi_min, dss)``.

    `r` is balanced first, so `psi` and `xi` may be realized in rescaled
    state coordinates; the functions they represent are unchanged.
    """
    r = balance(r)
    with _Stage("product_data"):
        pd = product_data(r)
    with _Stage("solve_dare"):
        sol = solve_dare(pd)
    with _Stage("outer_factor"):
        psi = outer_factor(r, pd=pd, dare=sol)
    with _Stage("left_unitary_factor"):
        xi = left_unitary_factor(r, psi)
    with _Stage("minimal_reduce"):
        xi_min = minimal_reduce(xi, tol)
    with _Stage("dss_factorize"):
        dss = dss_factorize(xi_min, tol)
    return psi, xi, xi_min, dss


@dataclass
class PipelineResult:
    """Every stage of one pipeline run."""

    indices: WienerHopfIndices
    report: VerificationReport
    psi: object
    xi: object
    xi_min: object
    dss: object


def analyze(r, tol=DEFAULT_TOL, winding_samples=4096, validate_samples=1024):
    """Run the full pipeline on `r` and keep all intermediate factors.

    See :func:`indices_of`, which returns only the indices and the report.
    """
    with _Stage("validate"):
        diag = validate(r, validate_samples)
    psi, xi, xi_min, dss = run_pipeline(r, tol)
    with _Stage("wiener_hopf_indices"):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", AmbiguousRank)
            idx, decisions, flags = wiener_hopf_indices(dss, r.m, tol)
    with _Stage("winding_number"):
        w = winding_number(r, winding_samples)
    residuals = {
        "spectral_identity": psi.residuals["spectral_identity"],
        "psi_inverse": psi.residuals["inverse"],
        "riccati": psi.residuals["riccati"],
        "closed_loop_radius": psi.residuals["closed_loop_radius"],
        "xi_unitarity": xi.residuals["unitarity"],
        "factor_product": xi.residuals["factor_product"],
        "y_stein": xi.residuals["y_stein"],
        **dss.residuals,
        "coupling_reconstruction": reconstruct_from_coupling(dss),
        "min_abs_det": diag.min_abs_det,
    }
    sum_rule = idx.total == w
    if not sum_rule:
        flags = flags + [f"SumRule: indices sum to {idx.total} but winding number is {w}"]
    for f in flags:
        warnings.warn(f, AmbiguousRank, stacklevel=3)
    report = VerificationReport(
        tol=tol, winding=w, sum_rule=sum_rule, residuals=residuals, flags=flags,
        rank_decisions=decisions, reduction=xi_min.reduction,
        dims={"n_plus": r.n_plus, "n_minus": r.n_minus, "n_V": dss.V.n, "n_W": dss.W.n},
    )
    return PipelineResult(idx, report, psi, xi, xi_min, dss)


def indices_of(r, tol=DEFAULT_TOL, winding_samples=4096, validate_samples=1024):
    """Right Wiener-Hopf indices of the function realized by `r`.

    Runs the full pipeline and cross-checks the result against the winding
    number of ``det R`` on the circle. Numerical failures propagate with
    their ``stage`` attribute set. Every ambiguous rank decision and a
    failed sum rule are issued as :class:`AmbiguousRank` warnings and listed
    in ``report.flags``.

    Returns
    -------
    (WienerHopfIndices, VerificationReport)
    """
    res = analyze(r, tol, winding_samples, validate_samples)
    return res.indices, res.report
