"""Random problems with prescribed right Wiener-Hopf indices.

A problem is the product ``W_minus(z) D(z) W_plus(z)`` with ``D(z)`` a
diagonal of powers of z and ``W_minus``, ``W_plus`` invertible on the
appropriate side of the circle. The indices of the product are therefore
known exactly, independently of the factorization pipeline.
"""
from dataclasses import dataclass

import numpy as np

from .errors import GrowthExhausted, ValidationError
from .linalg import spectral_radius
from .realization import TwoSidedRealization, circle_grid, direct_sum, evaluate_many, multiply, validate

__all__ = [
    "ProblemSpec",
    "make_plus_factor",
    "make_minus_factor",
    "make_middle",
    "generate_problem",
    "partition_indices",
    "ensemble_spec",
]

ZERO_RADIUS_CAP = 0.95
MAX_DOUBLINGS = 60


@dataclass(frozen=True)
class ProblemSpec:
    m: int
    indices: tuple
    statePlus: int = 2
    stateMinus: int = 2
    seed: int = 0
    spectralCap: float = 0.6

    def __post_init__(self):
        if len(self.indices) != self.m:
            raise ValidationError(f"{len(self.indices)} indices given for m = {self.m}")
        if not 0.0 < self.spectralCap < 1.0:
            raise ValidationError("spectralCap must lie in (0, 1)")
        if self.statePlus < 0 or self.stateMinus < 0:
            raise ValidationError("state dimensions must be nonnegative")
        object.__setattr__(self, "indices", tuple(sorted(int(k) for k in self.indices)))


def _streams(spec):
    # independent substreams so the two factors do not depend on each other's sizes
    return np.random.SeedSequence(spec.seed).spawn(2)


def _cgauss(rng, *shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def _random_stable(rng, n, cap):
    A = _cgauss(rng, n, n)
    rho = spectral_radius(A)
    if rho > cap:
        A *= cap / rho
    return A


def _grow_constant(A, B, C, m, build):
    rho = 1.0
    for _ in range(MAX_DOUBLINGS + 1):
        zero_matrix = A - B @ C / rho
        if spectral_radius(zero_matrix) <= ZERO_RADIUS_CAP:
            return build(rho * np.eye(m, dtype=np.complex128))
        rho *= 2.0
    raise GrowthExhausted(f"constant term exceeded 2**{MAX_DOUBLINGS} without stabilizing the inverse")


def make_plus_factor(spec):
    """``W_plus(z) = rho I + z C (I - z A)^{-1} B``, no poles or zeros on the
    closed disc.

    `A` is complex Gaussian rescaled to spectral radius at most
    ``spec.spectralCap``; ``rho`` starts at 1 and doubles until
    ``A - B C / rho`` has spectral radius at most 0.95.
    """
    rng = np.random.default_rng(_streams(spec)[0])
    n, m = spec.statePlus, spec.m
    A = _random_stable(rng, n, spec.spectralCap)
    B, C = _cgauss(rng, n, m), _cgauss(rng, m, n)
    return _grow_constant(A, B, C, m, lambda D: TwoSidedRealization.build(D, (A, B, C)))


def make_minus_factor(spec):
    """``W_minus(z) = rho I + gamma (zI - alpha)^{-1} beta``, no poles or
    zeros outside the open disc, infinity included."""
    rng = np.random.default_rng(_streams(spec)[1])
    n, m = spec.stateMinus, spec.m
    al = _random_stable(rng, n, spec.spectralCap)
    be, ga = _cgauss(rng, n, m), _cgauss(rng, m, n)
    return _grow_constant(al, be, ga, m, lambda D: TwoSidedRealization.build(D, None, (al, be, ga)))


def _shift(k):
    S = np.zeros((k, k), dtype=np.complex128)
    S[np.arange(1, k), np.arange(k - 1)] = 1.0
    return S


def _monomial(kappa):
    if kappa == 0:
        return TwoSidedRealization.constant(np.ones((1, 1)))
    k = abs(kappa)
    first = np.zeros((k, 1), dtype=np.complex128)
    first[0, 0] = 1.0
    last = np.zeros((1, k), dtype=np.complex128)
    last[0, -1] = 1.0
    if kappa > 0:
        # z * e_k^T (I - z S)^{-1} e_1 = z^k
        return TwoSidedRealization.build(np.zeros((1, 1)), (_shift(k), first, last))
    return TwoSidedRealization.build(np.zeros((1, 1)), None, (_shift(k), first, last))


def make_middle(indices, check_samples=16):
    """``diag(z^k for k in indices)`` as a direct sum of nilpotent shifts."""
    indices = [int(k) for k in indices]
    if not indices:
        return TwoSidedRealization.constant(np.zeros((0, 0)))
    mid = direct_sum(*(_monomial(k) for k in indices))
    zs = circle_grid(check_samples)
    vals = evaluate_many(mid, zs)
    expected = np.stack([np.diag(z ** np.array(indices, dtype=float)) for z in zs])
    if not np.allclose(vals, expected, rtol=1e-12, atol=1e-12):
        raise AssertionError("middle factor does not evaluate to the prescribed monomials")
    return mid


def partition_indices(indices):
    """Split a list of indices into (negatives, zeros, positives) in the
    reporting convention: exponents as positive integers, nonincreasing."""
    from .indices import WienerHopfIndices

    neg = sorted((-k for k in indices if k < 0), reverse=True)
    pos = sorted((k for k in indices if k > 0), reverse=True)
    return WienerHopfIndices(neg, sum(1 for k in indices if k == 0), pos)


def generate_problem(spec):
    """``W_minus * D_mid * W_plus`` together with its known indices."""
    r = multiply(multiply(make_minus_factor(spec), make_middle(spec.indices)), make_plus_factor(spec))
    validate(r)
    return r, partition_indices(spec.indices)


def ensemble_spec(seed, max_m=4, max_index=3, max_state=6):
    """Problem parameters for one member of the seeded test ensemble.

    Draws ``m`` in ``1..max_m``, indices in ``-max_index..max_index`` and
    factor state dimensions in ``0..max_state`` from a generator seeded with
    `seed`; the same seed also drives the factor entries.
    """
    rng = np.random.default_rng(np.random.SeedSequence([seed, 7919]))
    m = int(rng.integers(1, max_m + 1))
    indices = tuple(int(k) for k in rng.integers(-max_index, max_index + 1, size=m))
    n_plus, n_minus = (int(k) for k in rng.integers(0, max_state + 1, size=2))
    return ProblemSpec(m, indices, statePlus=n_plus, stateMinus=n_minus, seed=seed)
