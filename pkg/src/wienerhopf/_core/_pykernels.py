"""Pure numpy fallback for the compiled triangular solvers."""
import numpy as np
from scipy.linalg import solve_triangular


def stein_triangular(TA, TB, F):
    """Solve ``Y - TA @ Y @ TB = F``."""
    n, k = F.shape
    Y = np.zeros((n, k), dtype=np.complex128)
    eye = np.eye(n, dtype=np.complex128)
    for j in range(k):
        rhs = F[:, j] + TA @ (Y[:, :j] @ TB[:j, j])
        Y[:, j] = solve_triangular(eye - TB[j, j] * TA, rhs)
    return Y


def sylvester_triangular(TA, TB, F):
    """Solve ``TA @ Y - Y @ TB = F``."""
    n, k = F.shape
    Y = np.zeros((n, k), dtype=np.complex128)
    eye = np.eye(n, dtype=np.complex128)
    for j in range(k):
        rhs = F[:, j] + Y[:, :j] @ TB[:j, j]
        Y[:, j] = solve_triangular(TA - TB[j, j] * eye, rhs)
    return Y
