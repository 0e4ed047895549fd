import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wienerhopf.errors import ValidationError
from wienerhopf.linalg import spectral_radius
from wienerhopf.realization import circle_grid, evaluate_many, validate, winding_number
from wienerhopf.testgen import (
    ProblemSpec,
    ensemble_spec,
    generate_problem,
    make_middle,
    make_minus_factor,
    make_plus_factor,
)


def same(r1, r2):
    return all(np.array_equal(getattr(r1, f), getattr(r2, f)) for f in ("R0", "A", "B", "C", "alpha", "beta", "gamma"))


class TestProblemSpec:
    def test_sorted(self):
        assert ProblemSpec(3, (2, -1, 0)).indices == (-1, 0, 2)

    def test_arity(self):
        with pytest.raises(ValidationError):
            ProblemSpec(2, (1,))

    def test_cap(self):
        with pytest.raises(ValidationError):
            ProblemSpec(1, (0,), spectralCap=1.0)


class TestFactors:
    def test_plus_constant(self):
        W = make_plus_factor(ProblemSpec(2, (0, 0), statePlus=0))
        assert W.n_plus == 0 and np.allclose(W.R0, W.R0[0, 0] * np.eye(2))

    def test_minus_constant(self):
        assert make_minus_factor(ProblemSpec(2, (0, 0), stateMinus=0)).n_minus == 0

    @given(st.integers(0, 2 ** 31 - 1), st.integers(1, 3), st.integers(0, 5))
    def test_certificates(self, seed, m, n):
        spec = ProblemSpec(m, (0,) * m, n, n, seed)
        Wp, Wm = make_plus_factor(spec), make_minus_factor(spec)
        Dp, Dm = np.linalg.inv(Wp.R0), np.linalg.inv(Wm.R0)
        assert spectral_radius(Wp.A) <= 0.6 + 1e-12
        assert spectral_radius(Wp.A - Wp.B @ Dp @ Wp.C) <= 0.95
        assert spectral_radius(Wm.alpha) <= 0.6 + 1e-12
        assert spectral_radius(Wm.alpha - Wm.beta @ Dm @ Wm.gamma) <= 0.95
        validate(Wp), validate(Wm)
        assert winding_number(Wp, 1024) == winding_number(Wm, 1024) == 0

    def test_deterministic(self):
        spec = ProblemSpec(2, (0, 0), statePlus=3, seed=42)
        assert same(make_plus_factor(spec), make_plus_factor(spec))


class TestMiddle:
    def test_z(self):
        mid = make_middle([1])
        assert np.allclose(evaluate_many(mid, circle_grid(8))[:, 0, 0], circle_grid(8))

    def test_inv_z(self):
        mid = make_middle([-1])
        assert np.allclose(evaluate_many(mid, circle_grid(8))[:, 0, 0], 1 / circle_grid(8))

    def test_mixed(self):
        zs = circle_grid(32)
        vals = evaluate_many(make_middle([-1, 0, 2]), zs)
        for z, v in zip(zs, vals):
            assert np.allclose(v, np.diag([1 / z, 1, z ** 2]), atol=1e-13)


class TestGenerateProblem:
    def test_constant(self):
        r, truth = generate_problem(ProblemSpec(1, (0,), 0, 0))
        assert r.n_plus == r.n_minus == 0 and truth.zeros == 1

    def test_winding(self):
        r, _ = generate_problem(ProblemSpec(3, (-2, 0, 1), seed=11))
        assert winding_number(r, 4096) == -1

    def test_bit_identical(self):
        spec = ProblemSpec(3, (-1, 0, 2), 2, 2, 42)
        assert same(generate_problem(spec)[0], generate_problem(spec)[0])

    @settings(max_examples=25)
    @given(st.lists(st.integers(-3, 3), min_size=1, max_size=4), st.integers(0, 2 ** 31 - 1))
    def test_ground_truth_winding(self, indices, seed):
        r, truth = generate_problem(ProblemSpec(len(indices), tuple(indices), 2, 2, seed))
        assert winding_number(r, 4096) == sum(indices) == truth.total

    def test_ensemble_spec_ranges(self):
        for seed in range(1, 101):
            spec = ensemble_spec(seed)
            assert 1 <= spec.m <= 4 and all(-3 <= k <= 3 for k in spec.indices)
            assert 0 <= spec.statePlus <= 6 and 0 <= spec.stateMinus <= 6
