"""Independent reference computations used only by the tests.

Nothing here calls into the package's solvers; each oracle takes a different
route (vectorized dense solves, truncated series, dense inverses, scipy's
Riccati solver) to the quantity it checks.
"""
import numpy as np
from scipy import linalg as sla


def cgauss(rng, *shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def stable(rng, n, rho=0.7):
    A = cgauss(rng, n, n)
    r = max(np.abs(np.linalg.eigvals(A))) if n else 0.0
    return A * (rho / r) if r > 0 else A


def vec(M):
    return M.reshape(-1, order="F")


def unvec(x, shape):
    return x.reshape(shape, order="F")


def kron_stein(A, B, C):
    """``X - A X B = C`` through one dense ``(n k)``-dimensional solve."""
    n, k = C.shape
    K = np.eye(n * k) - np.kron(B.T, A)
    return unvec(np.linalg.solve(K, vec(C)), (n, k))


def kron_sylvester(A, B, C):
    """``A X - X B = C`` through one dense solve."""
    n, k = C.shape
    K = np.kron(np.eye(k), A) - np.kron(B.T, np.eye(n))
    return unvec(np.linalg.solve(K, vec(C)), (n, k))


def series_stein(A, B, C, tol=1e-16):
    X, term = np.zeros_like(C), C.copy()
    for _ in range(100000):
        X = X + term
        if np.linalg.norm(term) <= tol * max(1.0, np.linalg.norm(X)):
            return X
        term = A @ term @ B
    raise RuntimeError("series did not converge")


def dense_eval(R0, plus, minus, z):
    """``R0 + z C (I - z A)^{-1} B + gamma (z I - alpha)^{-1} beta`` with
    explicit inverses."""
    A, B, C = plus
    al, be, ga = minus
    out = np.array(R0, dtype=complex)
    if np.size(A):
        out = out + z * C @ np.linalg.inv(np.eye(len(A)) - z * A) @ B
    if np.size(al):
        out = out + ga @ np.linalg.inv(z * np.eye(len(al)) - al) @ be
    return out


def eval_realization(r, z):
    return dense_eval(r.R0, (r.A, r.B, r.C), (r.alpha, r.beta, r.gamma), z)


def scipy_dare(pd):
    """Stabilizing ``Q`` of ``Q - At Q At* = (Bt - At Q Ct*)(Dt - Ct Q Ct*)^{-1}(Bt* - Ct Q At*)``.

    With ``Q = -X`` this is scipy's equation for ``a = At*``, ``b = Ct*``,
    ``s = Bt``, ``r = Dt``, ``q = 0``, whose stabilizing closed loop
    coincides with ``A0``.
    """
    At, Bt, Ct, Dt = pd.Atilde, pd.Btilde, pd.Ctilde, pd.Dtilde
    n = At.shape[0]
    X = sla.solve_discrete_are(At.conj().T, Ct.conj().T, np.zeros((n, n)), Dt, s=Bt)
    return -X


def scalar_dare_roots(b, c, d):
    """Roots of ``q (d - c^2 q) = b^2`` for real scalar data with a = 0."""
    return np.roots([c * c, -d, b * b])



def toeplitz_coupling_series(V, W, xi, terms):
    """``Gamma_V* T_Xi Gamma_W`` by explicit truncated block sums over the
    Fourier coefficients of ``Xi``."""
    m = xi.Xi0.shape[0]
    coeff = {0: xi.Xi0}
    Ap, alp = np.eye(xi.A0.shape[0]), np.eye(xi.alpha.shape[0])
    B1 = xi.B1
    for k in range(1, terms):
        coeff[k] = xi.C1 @ Ap @ B1 if Ap.size else np.zeros((m, m))
        coeff[-k] = xi.gamma @ alp @ xi.beta1 if alp.size else np.zeros((m, m))
        Ap, alp = Ap @ xi.A0, alp @ xi.alpha

    def blocks(F):
        out, P = [], np.eye(F.A.shape[0])
        for _ in range(terms):
            out.append(F.C @ P)
            P = P @ F.A
        return out

    GV, GW = blocks(V), blocks(W)
    X = np.zeros((V.A.shape[0], W.A.shape[0]), dtype=complex)
    for i in range(terms):
        for j in range(terms):
            X += GV[i].conj().T @ coeff[i - j] @ GW[j]
    return X


def _mp(M):
    import mpmath

    M = np.atleast_2d(np.asarray(M, dtype=np.complex128))
    return mpmath.matrix([[mpmath.mpc(complex(v)) for v in row] for row in M])


def mp_coupling(A0, C1, alpha, gamma, dps=40):
    """``P0^{-1} P1`` in `dps`-digit arithmetic, where
    ``P0 - A0* P0 A0 = C1* C1`` and ``A0* P1 - P1 alpha = -C1* gamma``.

    Both equations are solved entrywise in the eigenbases of ``A0`` and
    ``alpha`` (random test matrices are diagonalizable). Double precision is
    not enough here: with ``cond(P0)`` near 1e9 a dense double solve alone
    loses more than the tolerance under test.
    """
    import mpmath

    n, k = A0.shape[0], alpha.shape[0]
    with mpmath.workdps(dps):
        lam, VA = mpmath.eig(_mp(A0))
        mu, Val = mpmath.eig(_mp(alpha))
        C1m = _mp(C1)
        # A0 = VA diag(lam) VA^{-1}: P0t = VA* P0 VA solves P0t - conj(lam) P0t lam = VA* C1* C1 VA
        Q0 = VA.H * C1m.H * C1m * VA
        P0t = mpmath.matrix(n, n)
        for i in range(n):
            for j in range(n):
                P0t[i, j] = Q0[i, j] / (1 - mpmath.conj(lam[i]) * lam[j])
        # P1t = VA* P1 Val solves conj(lam) P1t - P1t mu = -VA* C1* gamma Val
        Q1 = -(VA.H * C1m.H * _mp(gamma) * Val)
        P1t = mpmath.matrix(n, k)
        for i in range(n):
            for j in range(k):
                P1t[i, j] = Q1[i, j] / (mpmath.conj(lam[i]) - mu[j])
        # X = P0^{-1} P1 = VA P0t^{-1} P1t Val^{-1}
        X = VA * (mpmath.inverse(P0t) * P1t) * mpmath.inverse(Val)
        return np.array(X.tolist(), dtype=np.complex128)
