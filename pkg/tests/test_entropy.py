import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from rcc import (
    EntropyValue,
    LeakageError,
    ValidationError,
    bernoulli_kl,
    binary_entropy,
    hypothesis_testing_divergence,
    leakage_adjusted_divergence,
    max_relative_to_reference,
    min_entropy,
    pinch,
    purity_upper_bound,
    relative_to_reference,
    shannon,
    spectral_skew,
    validate_density,
    von_neumann,
)
from conftest import (
    embed_state,
    embedded_reference,
    full_reference,
    random_density,
    random_partition,
    random_pure,
)
from oracles import hypothesis_testing_grid_oracle, shannon_bits_oracle


def diag_state(*p):
    return validate_density(np.diag(np.array(p, dtype=float)))


class TestVonNeumann:
    def test_pure_state(self, rng):
        assert von_neumann(random_pure(rng, 6)).bits == pytest.approx(0.0, abs=1e-12)

    def test_balanced_bit(self):
        assert von_neumann(diag_state(0.5, 0.5)).bits == 1.0

    def test_direct_sum(self):
        assert von_neumann(diag_state(0.5, 0.25, 0.25)).bits == pytest.approx(1.5, abs=1e-14)

    def test_range(self, rng):
        for _ in range(25):
            dim = int(rng.integers(2, 17))
            s = von_neumann(random_density(rng, dim)).bits
            assert -1e-12 <= s <= math.log2(dim) + 1e-12


class TestMinEntropy:
    def test_pure(self, rng):
        assert min_entropy(random_pure(rng, 5)).bits == pytest.approx(0.0, abs=1e-12)

    def test_balanced(self):
        assert min_entropy(diag_state(0.5, 0.5)).bits == 1.0

    def test_top_eigenvalue(self):
        assert min_entropy(diag_state(0.5, 0.25, 0.25)).bits == 1.0


class TestSpectralSkew:
    def test_pure_state_vanishes(self, rng):
        assert spectral_skew(random_pure(rng, 7)).bits == pytest.approx(0.0, abs=1e-12)

    def test_flat_spectrum_vanishes(self):
        assert spectral_skew(diag_state(0.25, 0.25, 0.25, 0.25)).bits == pytest.approx(0.0, abs=1e-14)

    def test_half_bit(self):
        assert spectral_skew(diag_state(0.5, 0.25, 0.25)).bits == pytest.approx(0.5, abs=1e-14)


class TestRelativeToReference:
    def test_vacuum_is_zero(self):
        ref = full_reference(4)
        sigma = diag_state(0.25, 0.25, 0.25, 0.25)
        assert relative_to_reference(sigma, ref).bits == pytest.approx(0.0, abs=1e-14)

    def test_pure_state_saturates(self):
        ref = embedded_reference(8, 8)
        pure = diag_state(1.0, *([0.0] * 7))
        assert relative_to_reference(pure, ref).bits == 3.0

    def test_closed_form(self):
        ref = full_reference(3)
        rho = diag_state(0.5, 0.25, 0.25)
        assert relative_to_reference(rho, ref).bits == pytest.approx(
            math.log2(3) - 1.5, abs=1e-14
        )

    def test_leakage_reported(self):
        ref = embedded_reference(2, 4)
        rho = diag_state(0.5, 0.3, 0.2, 0.0)
        with pytest.raises(LeakageError) as err:
            relative_to_reference(rho, ref)
        assert err.value.leaked == pytest.approx(0.2, abs=1e-12)

    def test_matrix_log_cross_check(self, rng):
        # closed form vs Tr[rho(log rho - log sigma)] evaluated on the support
        for _ in range(25):
            d_r, dim = 6, 9
            ref = embedded_reference(d_r, dim)
            rho = embed_state(random_density(rng, d_r), dim)
            closed = relative_to_reference(rho, ref).bits
            w, v = np.linalg.eigh(rho.matrix)
            pos = w > 1e-12
            log_rho = (v[:, pos] * np.log2(w[pos])) @ v[:, pos].conj().T
            log_sigma = ref.total.matrix * math.log2(1.0 / d_r)
            direct = float(np.trace(rho.matrix @ (log_rho - log_sigma)).real)
            assert closed == pytest.approx(direct, abs=1e-8)


class TestMaxRelative:
    def test_vacuum_zero(self):
        ref = full_reference(4)
        assert max_relative_to_reference(diag_state(*[0.25] * 4), ref).bits == pytest.approx(
            0.0, abs=1e-14
        )

    def test_closed_form(self):
        ref = full_reference(3)
        assert max_relative_to_reference(diag_state(0.5, 0.25, 0.25), ref).bits == pytest.approx(
            math.log2(3) - 1.0, abs=1e-14
        )

    def test_pure_state(self):
        ref = embedded_reference(8, 8)
        assert max_relative_to_reference(diag_state(1.0, *[0.0] * 7), ref).bits == 3.0

    def test_entropy_identity(self, rng):
        for _ in range(100):
            d_r = int(rng.integers(2, 65))
            ref = full_reference(d_r)
            rho = random_density(rng, d_r)
            gap = max_relative_to_reference(rho, ref).bits - relative_to_reference(rho, ref).bits
            assert abs(gap - spectral_skew(rho).bits) <= 1e-9


class TestHypothesisTesting:
    def test_vacuum_rate(self):
        ref = full_reference(2)
        sigma = diag_state(0.5, 0.5)
        assert hypothesis_testing_divergence(sigma, ref, 0.25).bits == pytest.approx(
            -math.log2(0.75), abs=1e-12
        )

    def test_pure_fractional_weight(self):
        ref = full_reference(2)
        assert hypothesis_testing_divergence(diag_state(1.0, 0.0), ref, 0.25).bits == pytest.approx(
            1.0, abs=1e-12
        )

    def test_integer_budget(self):
        ref = full_reference(4)
        got = hypothesis_testing_divergence(diag_state(0.7, 0.3, 0.0, 0.0), ref, 0.25).bits
        assert got == pytest.approx(-math.log2(0.3), abs=1e-12)

    def test_infinite_when_beta_vanishes(self):
        ref = full_reference(2)
        assert hypothesis_testing_divergence(diag_state(1.0, 0.0), ref, 0.6).bits == math.inf

    def test_eta_domain(self):
        ref = full_reference(2)
        with pytest.raises(ValidationError):
            hypothesis_testing_divergence(diag_state(0.5, 0.5), ref, 1.0)

    def test_matches_grid_oracle(self, rng):
        for _ in range(40):
            d_r = int(rng.integers(2, 33))
            p = rng.dirichlet(np.ones(d_r))
            rho = validate_density(np.diag(p))
            ref = full_reference(d_r)
            eta = float(rng.choice([0.01, 0.1, 0.25, 0.5]))
            mine = hypothesis_testing_divergence(rho, ref, eta).bits
            oracle = hypothesis_testing_grid_oracle(p, d_r, eta)
            assert mine == pytest.approx(oracle, abs=1e-6)

    def test_nondecreasing_in_eta(self, rng):
        ref = full_reference(8)
        rho = random_density(rng, 8)
        values = [
            hypothesis_testing_divergence(rho, ref, eta).bits
            for eta in (0.05, 0.1, 0.2, 0.4, 0.6)
        ]
        assert all(b >= a - 1e-12 for a, b in zip(values, values[1:]))


class TestClassical:
    def test_uniform_eight(self):
        assert shannon(np.full(8, 0.125)).bits == 3.0

    def test_binary_half(self):
        assert binary_entropy(0.5).bits == 1.0

    def test_binary_small(self):
        # frozen from direct evaluation of -v log2 v - (1-v) log2(1-v)
        assert binary_entropy(0.059338).bits == pytest.approx(0.3248114020, abs=1e-9)

    def test_shannon_oracle(self, rng):
        for _ in range(20):
            p = rng.dirichlet(np.ones(int(rng.integers(2, 20))))
            assert shannon(p).bits == pytest.approx(shannon_bits_oracle(p), abs=1e-12)

    def test_kl_zero(self):
        assert bernoulli_kl(0.3, 0.3).bits == 0.0

    def test_kl_certain(self):
        assert bernoulli_kl(1.0, 0.5).bits == 1.0

    def test_kl_direct_formula(self):
        # frozen from 0.98*log2(0.98/0.99) + 0.02*log2(0.02/0.01)
        assert bernoulli_kl(0.98, 0.99).bits == pytest.approx(0.0056461596, abs=1e-9)

    @given(st.floats(0.0, 1.0), st.floats(1e-9, 1.0 - 1e-9))
    def test_kl_nonnegative(self, q, p):
        assert bernoulli_kl(q, p).bits >= 0.0

    @given(st.floats(0.0, 1.0))
    def test_binary_entropy_bounds(self, v):
        assert 0.0 <= binary_entropy(v).bits <= 1.0


class TestUnits:
    def test_exact_conversion_roundtrip(self):
        v = EntropyValue(1.75, "bits")
        assert v.to("nats").to("bits").value == pytest.approx(1.75, abs=1e-15)
        assert v.nats == pytest.approx(1.75 * math.log(2), abs=1e-15)

    @given(st.floats(-1e6, 1e6))
    def test_bits_nats_factor(self, x):
        assert EntropyValue(x, "nats").bits * math.log(2) == pytest.approx(x, rel=1e-12, abs=1e-12)


class TestPurity:
    def test_pure_state_gives_exact_complexity(self):
        ref = embedded_reference(8, 8, g=2, units=2)
        ceiling = purity_upper_bound(diag_state(1.0, *[0.0] * 7), ref)
        assert ceiling.value_structons == pytest.approx(1.5, abs=1e-12)
        assert ceiling.direction == "upper"

    def test_vacuum_zero(self):
        ref = full_reference(8)
        sigma = diag_state(*[0.125] * 8)
        assert purity_upper_bound(sigma, ref).value_structons == pytest.approx(0.0, abs=1e-12)

    def test_half_mixed(self):
        ref = full_reference(4, g=2, units=2)
        rho = diag_state(0.5, 0.5, 0.0, 0.0)
        assert purity_upper_bound(rho, ref).value_structons == pytest.approx(0.5, abs=1e-12)

    def test_ceiling_dominates_true_complexity(self, rng):
        from rcc import rcc as rcc_value

        for _ in range(50):
            d_r = int(rng.integers(2, 17))
            ref = full_reference(d_r)
            rho = random_density(rng, d_r)
            assert purity_upper_bound(rho, ref).value_structons >= rcc_value(rho, ref) - 1e-10


class TestLeakageAdjusted:
    def test_no_leak_unchanged(self):
        ref = embedded_reference(4, 4)
        rho = diag_state(0.5, 0.5, 0.0, 0.0)
        direct = relative_to_reference(rho, ref).bits
        assert leakage_adjusted_divergence(rho, ref).bits == pytest.approx(direct, abs=1e-12)

    def test_multiplicative_reduction(self):
        # q = 0.98 against a d_R = 8 subspace holding a pure state: core 3 bits
        dim, d_r = 10, 8
        ref = embedded_reference(d_r, dim)
        diag = np.zeros(dim)
        diag[0] = 0.98
        diag[d_r] = 0.02
        rho = diag_state(*diag)
        got = leakage_adjusted_divergence(rho, ref, mode="multiplicative").bits
        assert got == pytest.approx(0.98 * 3.0, abs=1e-12)

    def test_full_mode_at_matched_delta(self):
        dim, d_r = 10, 8
        ref = embedded_reference(d_r, dim)
        diag = np.zeros(dim)
        diag[0] = 0.98
        diag[d_r] = 0.02
        rho = diag_state(*diag)
        got = leakage_adjusted_divergence(rho, ref, mode="full", delta=0.02).bits
        assert got == pytest.approx(0.98 * 3.0, abs=1e-12)

    def test_full_mode_needs_delta(self):
        ref = embedded_reference(2, 4)
        with pytest.raises(ValidationError):
            leakage_adjusted_divergence(diag_state(1.0, 0.0, 0.0, 0.0), ref, mode="full")


class TestExplicitTestBound:
    def test_matches_exact_optimum_for_optimal_test(self):
        from rcc import explicit_test_divergence_bound
        from rcc.harness import optimal_test_projector

        ref = full_reference(4)
        rho = diag_state(0.7, 0.2, 0.1, 0.0)
        t = optimal_test_projector(rho, ref, 0.25)
        got = explicit_test_divergence_bound(rho, ref.sigma_matrix(), t, 0.25)
        exact = hypothesis_testing_divergence(rho, ref, 0.25)
        assert got.bits == pytest.approx(exact.bits, abs=1e-10)

    def test_suboptimal_test_stays_below_optimum(self, rng):
        from rcc import explicit_test_divergence_bound

        ref = full_reference(6)
        rho = random_density(rng, 6)
        # crude test: project on the first two basis states
        t = np.diag([1.0, 1.0, 0, 0, 0, 0]).astype(complex)
        alpha = 2 / 6
        got = explicit_test_divergence_bound(rho, ref.sigma_matrix(), t, alpha + 1e-9)
        exact = hypothesis_testing_divergence(rho, ref, alpha + 1e-9)
        assert got.bits <= exact.bits + 1e-10

    def test_alpha_violation_rejected(self):
        from rcc import explicit_test_divergence_bound

        ref = full_reference(4)
        rho = diag_state(0.7, 0.2, 0.1, 0.0)
        t = np.diag([1.0, 1.0, 0, 0]).astype(complex)
        with pytest.raises(ValidationError, match="type-I"):
            explicit_test_divergence_bound(rho, ref.sigma_matrix(), t, 0.25)

    def test_works_against_smoothed_reference(self):
        # leaked state vs full-rank smoothed vacuum (non-commuting territory)
        from rcc import explicit_test_divergence_bound, smooth_reference

        ref = embedded_reference(2, 4)
        smoothed = smooth_reference(ref, 0.02, 4)
        rho = diag_state(0.9, 0.08, 0.02, 0.0)
        t = np.diag([1.0, 0.0, 0.0, 0.0]).astype(complex)
        alpha = float(np.trace(t @ smoothed.density_matrix()).real)
        got = explicit_test_divergence_bound(
            rho, smoothed.density_matrix(), t, alpha + 1e-9
        )
        assert got.bits == pytest.approx(-math.log2(0.1), abs=1e-12)


class TestStructuralProperties:
    def test_data_processing_under_pinch(self, rng):
        for _ in range(60):
            d_r = int(rng.integers(2, 17))
            ref = full_reference(d_r)
            rho = random_density(rng, d_r)
            part = random_partition(rng, range(d_r))
            before = relative_to_reference(rho, ref).bits
            after = relative_to_reference(pinch(rho, part), ref).bits
            assert after <= before + 1e-12

    def test_convexity(self, rng):
        for _ in range(60):
            d_r = int(rng.integers(2, 13))
            ref = full_reference(d_r)
            states = [random_density(rng, d_r) for _ in range(3)]
            weights = rng.dirichlet(np.ones(3))
            mix = validate_density(sum(w * s.matrix for w, s in zip(weights, states)))
            lhs = relative_to_reference(mix, ref).bits
            rhs = sum(w * relative_to_reference(s, ref).bits for w, s in zip(weights, states))
            assert lhs <= rhs + 1e-10

    def test_unitary_invariance(self, rng):
        for _ in range(60):
            d_r, dim = 5, 8
            ref = embedded_reference(d_r, dim)
            rho = embed_state(random_density(rng, d_r), dim)
            u_in = np.linalg.qr(rng.normal(size=(d_r, d_r)) + 1j * rng.normal(size=(d_r, d_r)))[0]
            u_out = np.linalg.qr(
                rng.normal(size=(dim - d_r, dim - d_r)) + 1j * rng.normal(size=(dim - d_r, dim - d_r))
            )[0]
            u = np.zeros((dim, dim), dtype=complex)
            u[:d_r, :d_r] = u_in
            u[d_r:, d_r:] = u_out
            rotated = validate_density(u @ rho.matrix @ u.conj().T)
            assert relative_to_reference(rotated, ref).bits == pytest.approx(
                relative_to_reference(rho, ref).bits, abs=1e-10
            )

    def test_degenerate_subspace_basis_is_immaterial(self, rng):
        # rotations inside a degenerate eigenspace must not move any output
        ref = full_reference(4)
        base = np.diag([0.4, 0.4, 0.15, 0.05]).astype(complex)
        for _ in range(20):
            u2 = np.linalg.qr(rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)))[0]
            u = np.eye(4, dtype=complex)
            u[:2, :2] = u2
            rotated = validate_density(u @ base @ u.conj().T)
            original = validate_density(base)
            assert von_neumann(rotated).bits == pytest.approx(
                von_neumann(original).bits, abs=1e-12
            )
            assert min_entropy(rotated).bits == pytest.approx(
                min_entropy(original).bits, abs=1e-12
            )
            assert hypothesis_testing_divergence(rotated, ref, 0.3).bits == pytest.approx(
                hypothesis_testing_divergence(original, ref, 0.3).bits, abs=1e-10
            )

    def test_divergences_nonnegative(self, rng):
        for _ in range(40):
            d_r = int(rng.integers(2, 33))
            ref = full_reference(d_r)
            rho = random_density(rng, d_r)
            assert relative_to_reference(rho, ref).bits >= 0.0
            assert max_relative_to_reference(rho, ref).bits >= 0.0
            assert hypothesis_testing_divergence(rho, ref, 0.2).bits >= 0.0
