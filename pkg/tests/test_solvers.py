import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from wienerhopf.errors import (
    IndefiniteSchurComplement,
    NotStabilizable,
    ShapeMismatch,
    SpectraNotDisjoint,
    SpectralRadiusViolation,
)
from wienerhopf.realization import product_data
from wienerhopf.solvers import (
    gramian_factor,
    riccati_residual,
    solve_constrained_sylvester,
    solve_dare,
    solve_stein,
    solve_sylvester,
    sylvester_separation,
)
from wienerhopf.testgen import ensemble_spec, generate_problem

from conftest import identity, one_plus_z, scalar_z, two_plus_z
from oracles import cgauss, kron_stein, kron_sylvester, scalar_dare_roots, scipy_dare, series_stein, stable

seeds = st.integers(0, 2 ** 31 - 1)


class TestStein:
    def test_scalar(self):
        assert solve_stein(np.array([[0.5]]), np.array([[0.5]]), np.array([[0.75]]))[0, 0] == pytest.approx(1.0)

    def test_empty(self):
        assert solve_stein(np.zeros((0, 0)), np.eye(2) * 0.1, np.zeros((0, 2))).shape == (0, 2)
        assert solve_stein(np.eye(3) * 0.1, np.zeros((0, 0)), np.zeros((3, 0))).shape == (3, 0)

    def test_vectorization_oracle(self, rng):
        A, B, C = stable(rng, 6), stable(rng, 6), cgauss(rng, 6, 6)
        X = solve_stein(A, B, C)
        assert np.allclose(X, kron_stein(A, B, C), atol=1e-10)
        assert np.linalg.norm(X - A @ X @ B - C) <= 1e-12 * (1 + np.linalg.norm(C)) * 10

    def test_radius_violation(self):
        with pytest.raises(SpectralRadiusViolation):
            solve_stein(np.array([[1.0]]), np.array([[1.0]]), np.array([[1.0]]))

    def test_shape_mismatch(self):
        with pytest.raises(ShapeMismatch):
            solve_stein(np.eye(2) * 0.1, np.eye(3) * 0.1, np.zeros((3, 3)))

    @given(seeds, st.integers(1, 4), st.integers(1, 4))
    def test_series_oracle(self, seed, n, k):
        rng = np.random.default_rng(seed)
        A, B, C = stable(rng, n, 0.6), stable(rng, k, 0.6), cgauss(rng, n, k)
        assert np.allclose(solve_stein(A, B, C), series_stein(A, B, C), atol=1e-10)


class TestSylvester:
    def test_scalar(self):
        assert solve_sylvester(np.array([[0.5]]), np.array([[0.25]]), np.array([[1.0]]))[0, 0] == pytest.approx(4.0)

    def test_zero_rhs(self, rng):
        A, B = stable(rng, 3), stable(rng, 2) + 3
        assert np.allclose(solve_sylvester(A, B, np.zeros((3, 2))), 0)

    def test_common_eigenvalue(self):
        with pytest.raises(SpectraNotDisjoint):
            solve_sylvester(np.diag([0.5, 0.1]), np.array([[0.5]]), np.ones((2, 1)))

    @given(seeds, st.integers(1, 5), st.integers(1, 5))
    def test_vectorization_oracle(self, seed, n, k):
        rng = np.random.default_rng(seed)
        A, B, C = stable(rng, n), stable(rng, k) + 2.0, cgauss(rng, n, k)
        assert np.allclose(solve_sylvester(A, B, C), kron_sylvester(A, B, C), atol=1e-10)

    def test_separation(self):
        assert sylvester_separation(np.zeros((0, 0)), np.eye(2)) == np.inf
        assert sylvester_separation(np.array([[0.5]]), np.array([[0.5]])) == 0.0


class TestConstrainedSylvester:
    def test_recovers_unique_solution(self, rng):
        # A X - X B = C plus X E = F with the true solution; A, B share an eigenvalue
        A = np.diag([0.0, 0.3])
        B = np.array([[0.0]])
        E = np.array([[1.0]])
        X = cgauss(rng, 2, 1)
        X[0, 0] = 0.7
        C, F = A @ X - X @ B, X @ E
        assert np.allclose(solve_constrained_sylvester(A, B, C, E, F), X, atol=1e-12)

    def test_inconsistent(self):
        with pytest.raises(SpectraNotDisjoint):
            solve_constrained_sylvester(
                np.array([[0.0]]), np.array([[0.0]]), np.array([[1.0]]), np.array([[1.0]]), np.array([[1.0]])
            )

    @given(seeds)
    def test_matches_plain_route_when_separated(self, seed):
        rng = np.random.default_rng(seed)
        A, B, C = stable(rng, 3), stable(rng, 2) + 2.0, cgauss(rng, 3, 2)
        X = kron_sylvester(A, B, C)
        E = cgauss(rng, 2, 2)
        assert np.allclose(solve_constrained_sylvester(A, B, C, E, X @ E), X, atol=1e-9)


class TestGramianFactor:
    @given(seeds, st.integers(1, 6), st.integers(1, 3))
    def test_factor_of_gramian(self, seed, n, p):
        rng = np.random.default_rng(seed)
        A, C = stable(rng, n, 0.9), cgauss(rng, p, n)
        L = gramian_factor(A, C)
        P = kron_stein(A.conj().T, A, C.conj().T @ C)
        assert np.allclose(np.triu(L), L)
        assert np.all(np.diag(L).real >= 0) and np.allclose(np.diag(L).imag, 0)
        assert np.linalg.norm(L.conj().T @ L - P) <= 1e-10 * (1 + np.linalg.norm(P))

    def test_empty(self):
        assert gramian_factor(np.zeros((0, 0)), np.zeros((1, 0))).shape == (0, 0)

    def test_unstable(self):
        with pytest.raises(SpectralRadiusViolation):
            gramian_factor(np.array([[1.0]]), np.array([[1.0]]))


class TestDare:
    def test_two_plus_z(self):
        sol = solve_dare(product_data(two_plus_z()))
        assert sol.Q[0, 0] == pytest.approx(1.0, abs=1e-12)
        assert sol.D[0, 0] == pytest.approx(2.0, abs=1e-12)
        assert sol.C0[0, 0] == pytest.approx(2.0, abs=1e-12)
        assert sol.A0[0, 0] == pytest.approx(-0.5, abs=1e-12)
        # the other root of q (5 - q) = 4 gives D^2 = 1, C0 = 2, A0 = -2: not stabilizing
        roots = sorted(scalar_dare_roots(2.0, 1.0, 5.0).real)
        assert roots == pytest.approx([1.0, 4.0])
        d2, c0 = 5.0 - roots[1], 2.0
        assert abs(0.0 - c0 / d2) > 1

    def test_z(self):
        sol = solve_dare(product_data(scalar_z()))
        assert np.allclose([sol.Q[0, 0], sol.D[0, 0], sol.C0[0, 0], sol.A0[0, 0]], [0, 1, 0, 0], atol=1e-14)

    def test_identity(self):
        sol = solve_dare(product_data(identity(3)))
        assert sol.Q.shape == (0, 0) and np.allclose(sol.D, np.eye(3))

    def test_zero_on_circle(self):
        with pytest.raises((IndefiniteSchurComplement, NotStabilizable)):
            solve_dare(product_data(one_plus_z()))

    @pytest.mark.parametrize("seed", [1, 2, 3, 4, 5, 11, 23, 48, 55, 93])
    def test_scipy_oracle(self, seed):
        r, _ = generate_problem(ensemble_spec(seed))
        pd = product_data(r)
        sol = solve_dare(pd)
        if pd.Atilde.shape[0] == 0:
            return
        Q = scipy_dare(pd)
        assert np.linalg.norm(sol.Q - Q) <= 1e-9 * (1 + np.linalg.norm(Q))
        assert np.linalg.norm(sol.Q - sol.Q.conj().T) <= 1e-12 * (1 + np.linalg.norm(sol.Q))
        assert max(abs(np.linalg.eigvals(sol.A0))) < 1
        assert np.all(np.linalg.eigvalsh(sol.D) > 0)
        assert riccati_residual(pd, sol.Q) <= 1e-10 * (1 + np.linalg.norm(sol.Q))
