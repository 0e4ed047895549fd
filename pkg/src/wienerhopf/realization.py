"""Two-sided realizations of rational matrix functions.

A :class:`TwoSidedRealization` represents

    R(z) = R0 + z C (I - z A)^{-1} B + gamma (z I - alpha)^{-1} beta

with `A` and `alpha` stable. The `A` part collects the poles outside the
closed disc (a nilpotent `A` gives a polynomial, i.e. poles at infinity), the
`alpha` part the poles inside the open disc. Either part may have state
dimension zero.
"""
from dataclasses import dataclass

import numpy as np

from .errors import PhaseStepTooLarge, ShapeMismatch, SingularResolvent, UnstableStateMatrix
from .linalg import as_matrix, ct, spectral_radius
from .solvers import solve_stein

__all__ = [
    "STABILITY_MARGIN",
    "TwoSidedRealization",
    "ProductData",
    "Diagnostics",
    "circle_grid",
    "validate",
    "evaluate",
    "evaluate_many",
    "evaluate_adjoint",
    "observability_gramians",
    "product_data",
    "multiply",
    "direct_sum",
    "scale",
    "balance",
    "winding_number",
]

STABILITY_MARGIN = 1e-8
_RCOND_FLOOR = 1e-14


@dataclass(frozen=True, eq=False)
class TwoSidedRealization:
    R0: np.ndarray
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    alpha: np.ndarray
    beta: np.ndarray
    gamma: np.ndarray

    @classmethod
    def build(cls, R0, plus=None, minus=None):
        """Normalize shapes and dtypes; `plus` is ``(A, B, C)``, `minus` is
        ``(alpha, beta, gamma)``. Missing parts become empty."""
        R0 = as_matrix(R0)
        m = R0.shape[0]
        A, B, C = plus if plus is not None else ((), (), ())
        al, be, ga = minus if minus is not None else ((), (), ())
        A = as_matrix(A)
        n = A.shape[0] if A.size else 0
        A = as_matrix(A, n, n)
        B, C = as_matrix(B, n, m), as_matrix(C, m, n)
        al = as_matrix(al)
        k = al.shape[0] if al.size else 0
        al = as_matrix(al, k, k)
        be, ga = as_matrix(be, k, m), as_matrix(ga, m, k)
        r = cls(R0, A, B, C, al, be, ga)
        r.check_shapes()
        return r

    @classmethod
    def constant(cls, R0):
        return cls.build(R0)

    @property
    def m(self):
        return self.R0.shape[0]

    @property
    def n_plus(self):
        return self.A.shape[0]

    @property
    def n_minus(self):
        return self.alpha.shape[0]

    def check_shapes(self):
        m, n, k = self.R0.shape[0], self.A.shape[0], self.alpha.shape[0]
        expected = {
            "R0": (m, m), "A": (n, n), "B": (n, m), "C": (m, n),
            "alpha": (k, k), "beta": (k, m), "gamma": (m, k),
        }
        for name, shape in expected.items():
            got = getattr(self, name).shape
            if got != shape:
                raise ShapeMismatch(f"{name} has shape {got}, expected {shape}")

    def __call__(self, z):
        return evaluate(self, z)


@dataclass(frozen=True)
class Diagnostics:
    rho_plus: float
    rho_minus: float
    min_abs_det: float
    samples: int


def circle_grid(n):
    """`n` equispaced points ``exp(2 pi i k / n)`` on the unit circle."""
    return np.exp(2j * np.pi * np.arange(n) / n)


def validate(r, samples=1024):
    """Check shapes and stability margins, and sample ``|det R|`` on the circle.

    The determinant minimum is a heuristic for zeros near the circle; it is
    reported, never enforced.
    """
    r.check_shapes()
    rho_p, rho_m = spectral_radius(r.A), spectral_radius(r.alpha)
    for name, rho in (("A", rho_p), ("alpha", rho_m)):
        if rho > 1.0 - STABILITY_MARGIN:
            raise UnstableStateMatrix(
                f"spectral radius of {name} is {rho:.12g}; must be <= 1 - {STABILITY_MARGIN:g}"
            )
    dets = np.linalg.det(evaluate_many(r, circle_grid(samples))) if r.m else np.ones(samples)
    return Diagnostics(rho_p, rho_m, float(np.min(np.abs(dets))), samples)


def _resolvent_solve(M, rhs):
    if M.shape[0] and np.linalg.cond(M) * _RCOND_FLOOR >= 1.0:
        raise SingularResolvent("resolvent is numerically singular at the requested point")
    return np.linalg.solve(M, rhs)


def evaluate(r, z):
    """Value of the realized function at the scalar `z`."""
    z = complex(z)
    val = r.R0.copy()
    if r.n_plus:
        M = np.eye(r.n_plus) - z * r.A
        val += z * r.C @ _resolvent_solve(M, r.B)
    if r.n_minus:
        M = z * np.eye(r.n_minus) - r.alpha
        val += r.gamma @ _resolvent_solve(M, r.beta)
    return val


def evaluate_many(r, zs):
    """Values at every point of `zs`, stacked as an ``(N, m, m)`` array."""
    zs = np.asarray(zs, dtype=np.complex128).ravel()
    out = np.broadcast_to(r.R0, (zs.size,) + r.R0.shape).copy()
    if r.n_plus:
        M = np.eye(r.n_plus)[None] - zs[:, None, None] * r.A[None]
        X = np.linalg.solve(M, np.broadcast_to(r.B, (zs.size,) + r.B.shape))
        out += zs[:, None, None] * (r.C[None] @ X)
    if r.n_minus:
        M = zs[:, None, None] * np.eye(r.n_minus)[None] - r.alpha[None]
        X = np.linalg.solve(M, np.broadcast_to(r.beta, (zs.size,) + r.beta.shape))
        out += r.gamma[None] @ X
    return out


def _reflect(z):
    z = complex(z)
    if abs(abs(z) - 1.0) <= 4 * np.finfo(float).eps:
        return z
    return 1.0 / z.conjugate()


def evaluate_adjoint(r, z):
    """``R*(z) = R(1/conj(z))*``; on the unit circle this is exactly
    ``evaluate(r, z)`` conjugate-transposed."""
    return ct(evaluate(r, _reflect(z)))


def observability_gramians(r):
    """Solutions of ``P+ - A* P+ A = C* C`` and ``P- - alpha* P- alpha = gamma* gamma``."""
    Pp = solve_stein(ct(r.A), r.A, ct(r.C) @ r.C)
    Pm = solve_stein(ct(r.alpha), r.alpha, ct(r.gamma) @ r.gamma)
    return 0.5 * (Pp + ct(Pp)), 0.5 * (Pm + ct(Pm))


@dataclass(frozen=True, eq=False)
class ProductData:
    """Realization of ``R*(z) R(z)`` in the symmetric form
    ``Dt + Ct (zI - At)^{-1} Bt + z Bt* (I - z At*)^{-1} Ct*``."""

    Atilde: np.ndarray
    Btilde: np.ndarray
    Ctilde: np.ndarray
    Dtilde: np.ndarray
    Pplus: np.ndarray
    Pminus: np.ndarray

    def evaluate(self, z):
        z = complex(z)
        val = self.Dtilde.copy()
        n = self.Atilde.shape[0]
        if n:
            val += self.Ctilde @ np.linalg.solve(z * np.eye(n) - self.Atilde, self.Btilde)
            val += z * ct(self.Btilde) @ np.linalg.solve(
                np.eye(n) - z * ct(self.Atilde), ct(self.Ctilde)
            )
        return val


def product_data(r):
    """Assemble the realization of ``R*(z) R(z)``.

    The state matrix is block upper triangular, ``[[A*, C* gamma], [0, alpha]]``,
    and therefore stable whenever `A` and `alpha` are.
    """
    Pp, Pm = observability_gramians(r)
    n, k = r.n_plus, r.n_minus
    At = np.zeros((n + k, n + k), dtype=np.complex128)
    At[:n, :n] = ct(r.A)
    At[:n, n:] = ct(r.C) @ r.gamma
    At[n:, n:] = r.alpha
    Bt = np.vstack([ct(r.C) @ r.R0 + ct(r.A) @ Pp @ r.B, r.beta])
    Ct = np.hstack([ct(r.B), ct(r.R0) @ r.gamma + ct(r.beta) @ Pm @ r.alpha])
    Dt = ct(r.R0) @ r.R0 + ct(r.B) @ Pp @ r.B + ct(r.beta) @ Pm @ r.beta
    Dt = 0.5 * (Dt + ct(Dt))
    return ProductData(At, Bt, Ct, Dt, Pp, Pm)


def multiply(f, g):
    """Two-sided realization of the pointwise product ``f(z) g(z)``.

    The plus parts and the minus parts are each cascaded; the mixed products
    ``f_plus g_minus`` and ``f_minus g_plus`` are split back into a plus, a
    minus and a constant piece with the Stein solutions

        M - A_f M alpha_g = B_f gamma_g,   N - alpha_f N A_g = beta_f C_g.

    State dimensions add.
    """
    if f.m != g.m:
        raise ShapeMismatch(f"cannot multiply {f.m}x{f.m} by {g.m}x{g.m}")
    M = solve_stein(f.A, g.alpha, f.B @ g.gamma)
    N = solve_stein(f.alpha, g.A, f.beta @ g.C)

    nf, ng = f.n_plus, g.n_plus
    A = np.zeros((nf + ng, nf + ng), dtype=np.complex128)
    A[:nf, :nf] = f.A
    A[:nf, nf:] = f.B @ g.C
    A[nf:, nf:] = g.A
    B = np.vstack([f.B @ g.R0 + f.A @ M @ g.beta, g.B])
    C = np.hstack([f.C, f.R0 @ g.C + f.gamma @ N @ g.A])

    kf, kg = f.n_minus, g.n_minus
    al = np.zeros((kf + kg, kf + kg), dtype=np.complex128)
    al[:kf, :kf] = f.alpha
    al[:kf, kf:] = f.beta @ g.gamma
    al[kf:, kf:] = g.alpha
    be = np.vstack([f.beta @ g.R0 + f.alpha @ N @ g.B, g.beta])
    ga = np.hstack([f.gamma, f.R0 @ g.gamma + f.C @ M @ g.alpha])

    R0 = f.R0 @ g.R0 + f.C @ M @ g.beta + f.gamma @ N @ g.B
    return TwoSidedRealization.build(R0, (A, B, C), (al, be, ga))


def direct_sum(*parts):
    """Block diagonal realization ``diag(f_1(z), ..., f_p(z))``."""
    def bd(mats):
        mats = list(mats)
        rows = sum(x.shape[0] for x in mats)
        cols = sum(x.shape[1] for x in mats)
        out = np.zeros((rows, cols), dtype=np.complex128)
        i = j = 0
        for x in mats:
            out[i:i + x.shape[0], j:j + x.shape[1]] = x
            i += x.shape[0]
            j += x.shape[1]
        return out

    return TwoSidedRealization.build(
        bd(p.R0 for p in parts),
        (bd(p.A for p in parts), bd(p.B for p in parts), bd(p.C for p in parts)),
        (bd(p.alpha for p in parts), bd(p.beta for p in parts), bd(p.gamma for p in parts)),
    )


def scale(r, c):
    """Realization of ``c * R(z)`` for a scalar `c`."""
    return TwoSidedRealization.build(
        c * r.R0, (r.A, r.B, c * r.C), (r.alpha, r.beta, c * r.gamma)
    )


def _gain_split(B, C):
    nb, nc = np.linalg.norm(B), np.linalg.norm(C)
    if nb == 0.0 or nc == 0.0:
        return 1.0
    # power of two keeps the rescaling exact
    return 2.0 ** np.round(0.5 * np.log2(nc / nb))


def balance(r):
    """Same function, with input and output gains of each part equalized.

    The plus state is rescaled so that ``||B|| ~ ||C||``, likewise the minus
    state for ``beta`` and ``gamma``. The Riccati data mix these gains in
    one matrix, and a large output gain there costs accuracy far beyond its
    size.
    """
    t, u = _gain_split(r.B, r.C), _gain_split(r.beta, r.gamma)
    if t == 1.0 and u == 1.0:
        return r
    return TwoSidedRealization.build(
        r.R0, (r.A, t * r.B, r.C / t), (r.alpha, u * r.beta, r.gamma / u)
    )


def winding_number(r, samples=1024, max_samples=2 ** 20):
    """Winding number of ``det R(z)`` around the origin along the unit circle.

    Phase increments between consecutive grid points must stay below pi/2;
    otherwise the grid is doubled, up to `max_samples` points.
    """
    if samples < 256:
        raise ValueError("samples must be at least 256")
    if r.m == 0:
        return 0
    n = samples
    while n <= max_samples:
        dets = np.linalg.det(evaluate_many(r, circle_grid(n)))
        if np.any(dets == 0) or not np.all(np.isfinite(dets)):
            raise PhaseStepTooLarge("det R vanishes or is undefined on the sampling grid")
        steps = np.angle(np.roll(dets, -1) / dets)
        if np.max(np.abs(steps)) < np.pi / 2:
            return int(np.rint(steps.sum() / (2 * np.pi)))
        n *= 2
    raise PhaseStepTooLarge(
        f"phase of det R still jumps by >= pi/2 with {max_samples} samples; "
        "det R is (nearly) zero on the circle"
    )
