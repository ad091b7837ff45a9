"""Tests for quantum random walks and limit cocycles."""

import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from src.config import config
from src.dynamics.cocycle import (
    SemigroupGen,
    cocycle_matrix_element,
    cocycle_matrix_elements,
    euler_compare,
    jgj_matrix_element_check,
    semigroup_generator,
    time_grid,
    time_partition,
    vacuum_semigroup,
)
from src.dynamics.walk import (
    StepFunction,
    completed_steps,
    inner_integral,
    step_average,
    toyfock_flow,
    toyfock_walk,
    walk_matrix_element,
    walk_matrix_elements,
    walk_step_matrix,
)
from src.errors import DimensionError, StructureError, ToyFockCapError
from src.generators.ito import GeneratorParams, assemble_FZLW, structure_report
from src.linalg.block import BlockOperator, compress, delta_perp, scale_h
from src.linalg.mat import mat_exp, op_norm
from src.linalg.random import (
    make_rng,
    random_contraction,
    random_matrix,
    random_skewadjoint,
    random_unitary,
    scaled,
)
from src.models.families import realize_coisometric, realize_isometric


def random_block(rng, d=2, k=1, bound=1.0):
    return BlockOperator(d, k, scaled(random_matrix(rng, d * (1 + k)), bound))


def isometric_params(rng, d=2, k=1):
    m = d * k
    return GeneratorParams(scaled(random_skewadjoint(rng, d), 1.0), scaled(random_matrix(rng, m, d), 1.0), random_unitary(rng, m))


@pytest.fixture
def pair():
    f = StepFunction([0.0, 0.5], [[0.5 + 0.5j], [1.0]])
    g = StepFunction([0.0, 0.25, 0.75], [[0.2], [-1j], [0.4]])
    return f, g


class TestStepFunction:
    """Tests for step functions."""

    def test_evaluate_is_right_continuous(self, pair):
        """Test values switch at the breakpoint."""
        f, _ = pair
        assert f.evaluate(0.4999)[0] == 0.5 + 0.5j
        assert f.evaluate(0.5)[0] == 1.0
        assert f.evaluate(100.0)[0] == 1.0

    def test_integral(self, pair):
        """Test the integral over an interval straddling a breakpoint."""
        f, _ = pair
        assert f.integral(0.25, 1.0)[0] == pytest.approx(0.25 * (0.5 + 0.5j) + 0.5)

    def test_breakpoints_must_start_at_zero(self):
        """Test the first breakpoint must be 0."""
        with pytest.raises(ValueError):
            StepFunction([0.1, 0.5], [[1.0], [2.0]])

    def test_breakpoints_must_ascend(self):
        """Test breakpoints must be strictly ascending."""
        with pytest.raises(ValueError):
            StepFunction([0.0, 0.5, 0.5], [[1.0], [2.0], [3.0]])

    def test_values_must_match_breakpoints(self):
        """Test one value row per breakpoint."""
        with pytest.raises(DimensionError):
            StepFunction([0.0, 0.5], [[1.0, 0.0], [2.0, 0.0], [3.0, 0.0]])

    def test_flat_values_are_scalar_noise(self):
        """Test a 1-D value array holds one scalar per breakpoint."""
        f = StepFunction([0.0, 0.5], [0.3, 1j])
        assert f.dim_k == 1
        assert f.evaluate(0.6)[0] == 1j

    def test_flat_values_never_become_a_vector(self):
        """Test a 1-D array with more entries than breakpoints is rejected."""
        with pytest.raises(DimensionError):
            StepFunction([0.0], [0.3, 1j])
        with pytest.raises(DimensionError):
            StepFunction([0.0, 0.5], [1.0, 2.0, 3.0, 4.0])

    def test_shifted(self, pair):
        """Test u -> f(u + s)."""
        f, _ = pair
        later = f.shifted(0.3)
        assert later.evaluate(0.1)[0] == 0.5 + 0.5j
        assert later.evaluate(0.2)[0] == 1.0

    def test_mapped(self):
        """Test u -> J f(u)."""
        f = StepFunction.constant([1.0, 2.0])
        J = np.array([[1.0, 0.0], [0.0, 1.0], [0.0, 0.0]])
        assert_allclose(f.mapped(J).evaluate(0.0), [1.0, 2.0, 0.0])

    def test_inner_integral_is_antilinear_in_f(self, pair):
        """Test conjugate linearity in the first argument."""
        f, g = pair
        scaled_f = StepFunction(f.breakpoints, 1j * f.values)
        assert inner_integral(scaled_f, g, 0.0, 1.0) == pytest.approx(-1j * inner_integral(f, g, 0.0, 1.0))

    def test_inner_integral_of_constants(self):
        """Test the integral of <c, d> over [a, b]."""
        c, d = StepFunction.constant([1j]), StepFunction.constant([2.0])
        assert inner_integral(c, d, 0.5, 2.0) == pytest.approx(1.5 * (-2j))
        assert inner_integral(c, d, 1.0, 1.0) == 0

    def test_step_average(self, pair):
        """Test the average over a step containing a breakpoint."""
        _, g = pair
        assert step_average(g, 1, 0.5)[0] == pytest.approx((0.25 * -1j + 0.25 * 0.4) / 0.5)


class TestCompletedSteps:
    """Tests for the floor(t/h) step count."""

    def test_snaps_upward(self):
        """Test 0.3/0.1 counts three steps."""
        assert completed_steps(0.3, 0.1) == 3

    def test_partial_step(self):
        """Test incomplete steps are not counted."""
        assert completed_steps(0.29, 0.1) == 2

    def test_rejects_nonpositive_h(self):
        """Test h must be positive."""
        with pytest.raises(StructureError):
            completed_steps(1.0, 0.0)


class TestEmbeddedWalk:
    """Tests for walk matrix elements."""

    def test_identity_walk(self):
        """Test G = I gives (1 + h <c, d>)^n e^{tail} for constant c, d."""
        c, d = 0.3 + 0.1j, 0.5 - 0.2j
        f, g = StepFunction.constant([c]), StepFunction.constant([d])
        G = BlockOperator.identity(1, 1)
        h, t = 0.1, 0.35
        inner = np.conj(c) * d
        expected = (1 + h * inner) ** 3 * np.exp(0.05 * inner)
        assert walk_matrix_element(G, f, g, h, t)[0, 0] == pytest.approx(expected)

    def test_before_first_step(self, pair):
        """Test only the exponential tail remains for t < h."""
        f, g = pair
        G = random_block(make_rng(30), d=1)
        element = walk_matrix_element(G, f, g, 0.5, 0.2)
        assert element[0, 0] == pytest.approx(np.exp(inner_integral(f, g, 0.0, 0.2)))

    def test_vacuum_element_is_power(self):
        """Test f = g = 0 gives the n-th power of the vacuum block."""
        G = random_block(make_rng(31))
        zero = StepFunction.zero(1)
        element = walk_matrix_element(G, zero, zero, 0.25, 1.0)
        assert_allclose(element, np.linalg.matrix_power(G.A, 4), atol=1e-13)

    def test_elements_do_not_depend_on_query_order(self, pair):
        """Test the incremental sweep against single evaluations."""
        f, g = pair
        G = random_block(make_rng(32), d=2)
        times = [0.9, 0.1, 0.5, 0.5, 0.0]
        swept = walk_matrix_elements(G, f, g, 0.125, times)
        for t, element in zip(times, swept):
            assert_allclose(element, walk_matrix_element(G, f, g, 0.125, t), atol=1e-14)

    def test_step_matrix(self):
        """Test a single step at c = d = 0 is the vacuum block."""
        G = random_block(make_rng(33))
        zero = StepFunction.zero(1)
        assert_allclose(walk_step_matrix(G, zero, zero, 0, 0.1), G.A, atol=1e-14)

    def test_products_over_adjacent_step_ranges(self, pair):
        """Test the steps over [0, 3h) and [3h, 8h) multiply to the walk at 8h."""
        f, g = pair
        G = random_block(make_rng(47), d=2)
        h = 0.125

        def steps(lo, hi):
            product = np.eye(2, dtype=np.complex128)
            for n in range(lo, hi):
                product = product @ walk_step_matrix(G, f, g, n, h)
            return product

        assert_allclose(steps(0, 3) @ steps(3, 8), steps(0, 8), atol=1e-13)
        assert_allclose(walk_matrix_element(G, f, g, h, 8 * h), steps(0, 8), atol=1e-13)

    def test_step_bounded_by_range_of_test_functions(self, pair):
        """Test |step - I| <= h max over values (c, d) of |compressed scaled increment|."""
        f, g = pair
        G = random_block(make_rng(48), d=2, bound=2.0)
        h = 0.2
        S = scale_h(G - delta_perp(2, 1), h)
        bound = h * max(op_norm(compress(S, c, d)) for c in f.values for d in g.values)
        for n in range(6):
            assert op_norm(walk_step_matrix(G, f, g, n, h) - np.eye(2)) <= bound * (1 + 1e-12)


class TestToyFock:
    """Tests for the exact walk on truncated toy Fock space."""

    def test_one_step_is_generator(self):
        """Test W_1 = G in Kronecker order."""
        G = random_block(make_rng(34))
        assert_allclose(toyfock_walk(G, 1).matrix, G.to_kron())

    def test_zero_steps_is_identity(self):
        """Test W_0 = I on h."""
        W = toyfock_walk(random_block(make_rng(35)), 0)
        assert_allclose(W.matrix, np.eye(2))

    def test_unitary_steps_give_unitary_walk(self):
        """Test a unitary generator yields a unitary walk."""
        G = BlockOperator(1, 1, random_unitary(make_rng(36), 2))
        W = toyfock_walk(G, 5).matrix
        assert_allclose(W @ W.conj().T, np.eye(32), atol=1e-12)

    def test_vacuum_element_matches_embedded_walk(self):
        """Test both walk representations agree on the vacuum."""
        G = random_block(make_rng(37))
        zero = StepFunction.zero(1)
        exact = toyfock_walk(G, 3).vacuum_element()
        assert_allclose(exact, walk_matrix_element(G, zero, zero, 0.25, 0.75), atol=1e-13)

    @pytest.mark.parametrize("n", range(7))
    def test_norm_bound(self, n):
        """Test |W_n| <= |G|^n."""
        G = random_block(make_rng(38 + n), bound=1.5)
        assert toyfock_walk(G, n).norm() <= G.norm() ** n * (1 + 1e-12)

    def test_second_step_acts_on_second_factor(self):
        """Test W_2 = (G (x) I)(I-flipped G) by explicit permutation."""
        G = random_block(make_rng(39), d=1)
        Gk = G.to_kron()
        first = np.kron(Gk, np.eye(2))
        swap = np.eye(4)[[0, 2, 1, 3]]
        second = swap @ np.kron(Gk, np.eye(2)) @ swap
        assert_allclose(toyfock_walk(G, 2).matrix, first @ second, atol=1e-14)

    def test_cap(self, monkeypatch):
        """Test the dimension cap is enforced."""
        monkeypatch.setattr(config, "toyfock_cap", 10)
        with pytest.raises(ToyFockCapError):
            toyfock_walk(BlockOperator.identity(1, 1), 4)

    def test_flow_of_identity(self):
        """Test j_n(I) = I for a unitary walk."""
        G = BlockOperator(2, 1, random_unitary(make_rng(40), 4))
        flow = toyfock_flow(G, np.eye(2), 3)
        assert_allclose(flow.matrix, np.eye(16), atol=1e-12)

    def test_isometric_steps_give_isometric_walk(self):
        """Test G(h) from an isometric family yields W_n* W_n = I."""
        G = realize_isometric(isometric_params(make_rng(49)))(0.25)
        W = toyfock_walk(G, 3).matrix
        assert_allclose(W.conj().T @ W, np.eye(16), atol=1e-12)

    def test_coisometric_steps_give_coisometric_walk(self):
        """Test G(h) from a coisometric family yields W_n W_n* = I."""
        G = realize_coisometric(isometric_params(make_rng(50)))(0.25)
        W = toyfock_walk(G, 3).matrix
        assert_allclose(W @ W.conj().T, np.eye(16), atol=1e-12)

    def test_flow_with_no_steps(self):
        """Test j_0(x) = x."""
        x = random_matrix(make_rng(51), 2)
        G = BlockOperator(2, 1, random_unitary(make_rng(52), 4))
        assert_allclose(toyfock_flow(G, x, 0).matrix, x)

    def test_flow_keeps_unitaries_unitary(self):
        """Test j_n(u) is unitary for unitary G and u."""
        rng = make_rng(53)
        G = BlockOperator(2, 1, random_unitary(rng, 4))
        u = random_unitary(rng, 2)
        J = toyfock_flow(G, u, 3).matrix
        assert_allclose(J @ J.conj().T, np.eye(16), atol=1e-12)

    def test_flow_is_multiplicative(self):
        """Test j_n(xy) = j_n(x) j_n(y) for unitary G."""
        rng = make_rng(54)
        G = BlockOperator(2, 1, random_unitary(rng, 4))
        x, y = random_matrix(rng, 2), random_matrix(rng, 2)
        product = toyfock_flow(G, x, 2).matrix @ toyfock_flow(G, y, 2).matrix
        assert_allclose(toyfock_flow(G, x @ y, 2).matrix, product, atol=1e-12)

    def test_flow_rejects_wrong_shape(self):
        """Test x must act on the initial space."""
        with pytest.raises(DimensionError):
            toyfock_flow(BlockOperator.identity(2, 1), np.eye(3), 1)


class TestCocycle:
    """Tests for cocycle matrix elements."""

    def test_zero_generator(self, pair):
        """Test F = 0 gives exp of the inner-product integral."""
        f, g = pair
        element = cocycle_matrix_element(BlockOperator.zeros(1, 1), f, g, 1.0)
        assert element[0, 0] == pytest.approx(np.exp(inner_integral(f, g, 0.0, 1.0)))

    def test_constant_functions(self):
        """Test constant f, g give a single semigroup."""
        F = random_block(make_rng(41))
        c, d = [0.3], [0.1j]
        element = cocycle_matrix_element(F, StepFunction.constant(c), StepFunction.constant(d), 0.7)
        assert_allclose(element, SemigroupGen.of(F, c, d).at(0.7), atol=1e-14)

    def test_vacuum(self):
        """Test f = g = 0 gives the vacuum semigroup."""
        F = random_block(make_rng(42))
        zero = StepFunction.zero(1)
        assert_allclose(cocycle_matrix_element(F, zero, zero, 0.6), vacuum_semigroup(F, 0.6), atol=1e-14)

    def test_semigroup_generator(self):
        """Test the generator is the compression plus <c, d> I."""
        F = BlockOperator.zeros(2, 1)
        assert_allclose(semigroup_generator(F, [2.0], [1j]), 2j * np.eye(2))

    def test_partition(self, pair):
        """Test the partition holds 0, inner breakpoints and t."""
        f, g = pair
        assert time_partition(f, g, 0.6) == [0.0, 0.25, 0.5, 0.6]
        assert time_partition(f, g, 0.0) == [0.0]

    def test_factorises_over_breakpoints(self, pair):
        """Test X_t = X_s (shifted X)_{t-s} at a breakpoint s."""
        f, g = pair
        F = random_block(make_rng(43))
        whole = cocycle_matrix_element(F, f, g, 1.0)
        head = cocycle_matrix_element(F, f, g, 0.5)
        tail = cocycle_matrix_element(F, f.shifted(0.5), g.shifted(0.5), 0.5)
        assert_allclose(whole, head @ tail, atol=1e-13)

    def test_sweep_matches_single(self, pair):
        """Test the incremental sweep against single evaluations."""
        f, g = pair
        F = random_block(make_rng(44))
        times = [1.0, 0.3, 0.0, 0.75, 0.25]
        for t, element in zip(times, cocycle_matrix_elements(F, f, g, times)):
            assert_allclose(element, cocycle_matrix_element(F, f, g, t), atol=1e-13)

    @pytest.mark.parametrize("t", [0.3, 0.6, 1.0])
    def test_quasicontractive_bound(self, pair, t):
        """Test |<e(f), X_t e(g)>| <= e^{beta t} |e(f)| |e(g)| with beta the growth bound of F."""
        f, g = pair
        rng = make_rng(55)
        p = GeneratorParams(
            scaled(random_matrix(rng, 2), 1.0), scaled(random_matrix(rng, 2), 1.0), random_contraction(rng, 2)
        )
        F = assemble_FZLW(p)
        beta = structure_report(F).beta0
        norms = inner_integral(f, f, 0.0, t).real + inner_integral(g, g, 0.0, t).real
        bound = math.exp(beta * t + 0.5 * norms)
        assert op_norm(cocycle_matrix_element(F, f, g, t)) <= bound * (1 + 1e-8)

    def test_adjoint_generator_constant_functions(self):
        """Test the F* element at (g, f) is the adjoint of the F element at (f, g)."""
        F = random_block(make_rng(56), d=2)
        f, g = StepFunction.constant([0.4 - 0.2j]), StepFunction.constant([0.1 + 0.6j])
        element = cocycle_matrix_element(F, f, g, 0.7)
        dual = cocycle_matrix_element(F.adjoint(), g, f, 0.7)
        assert_allclose(dual, element.conj().T, atol=1e-12)

    def test_adjoint_generator_scalar_system(self, pair):
        """Test the adjoint relation for step functions when the system is one-dimensional."""
        f, g = pair
        F = random_block(make_rng(57), d=1)
        element = cocycle_matrix_element(F, f, g, 1.0)
        dual = cocycle_matrix_element(F.adjoint(), g, f, 1.0)
        assert_allclose(dual, element.conj().T, atol=1e-12)

    def test_noise_dimension_checked(self):
        """Test test functions must live in the noise space of F."""
        with pytest.raises(DimensionError):
            cocycle_matrix_element(BlockOperator.zeros(1, 2), StepFunction.zero(1), StepFunction.zero(1), 1.0)


class TestComparisons:
    """Tests for the Euler, noise-embedding and time-grid helpers."""

    def test_euler_spot_value(self):
        """Test |1.1^10 - e| for a = 1, h = 0.1."""
        assert euler_compare(1.0, lambda h: 1.0, 0.1, 0.0, 1.0) == pytest.approx(math.e - 1.1**10, abs=1e-6)

    def test_euler_first_order(self):
        """Test halving h roughly halves the error."""
        a = np.array([[0.7]])
        errors = [euler_compare(a, lambda h: a, h, 0.0, 1.0) for h in (2**-8, 2**-9)]
        assert errors[0] / errors[1] == pytest.approx(2.0, rel=0.05)

    def test_euler_requires_ordered_times(self):
        """Test r <= t."""
        with pytest.raises(ValueError):
            euler_compare(1.0, lambda h: 1.0, 0.1, 1.0, 0.5)

    def test_noise_embedding_cocycle(self, pair):
        """Test compressing F through J matches the big cocycle at (Jf, Jg)."""
        f, g = pair
        rng = make_rng(45)
        F_big = random_block(rng, d=2, k=3)
        J = np.eye(3)[:, :1]
        assert jgj_matrix_element_check(F_big, J, f, g, 1.0) < 1e-12
        assert jgj_matrix_element_check(F_big, J, f, g, 1.0, h=0.125) < 1e-12

    def test_time_grid(self, pair):
        """Test the grid holds step multiples, breakpoints and T."""
        f, g = pair
        grid = time_grid(0.3, 1.0, f, g, extra=1)
        assert grid[0] == 0.0 and grid[-1] == 1.0
        for t in (0.25, 0.3, 0.5, 0.6, 0.75, 0.9):
            assert np.any(np.isclose(grid, t))
        assert np.all(np.diff(grid) > 0)

    def test_exp_of_generator(self):
        """Test SemigroupGen.at is the matrix exponential."""
        F = random_block(make_rng(46))
        gen = SemigroupGen.of(F, [0.2], [0.3])
        assert_allclose(gen.at(0.4), mat_exp(0.4 * gen.generator))
