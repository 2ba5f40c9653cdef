import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rcc import (
    CertifiedBound,
    MeasurementRecord,
    ProtocolInvalidError,
    ValidationError,
    bonferroni,
    clopper_pearson_lower,
    clopper_pearson_upper,
    combine_bounds,
    dephase_protocol,
    ht_protocol,
    ht_sample_plan,
    purity_upper_bound,
    smoothed_lower_bound,
    validate_density,
    witness_protocol,
    witness_sample_plan,
)
from conftest import embedded_reference, full_reference
from oracles import clopper_pearson_lower_oracle, clopper_pearson_upper_oracle


def ht_record(null_h1, null_h0, alt_h1, alt_h0):
    counts = {
        "null_accept_h1": null_h1,
        "null_accept_h0": null_h0,
        "alt_accept_h1": alt_h1,
        "alt_accept_h0": alt_h0,
    }
    return MeasurementRecord("hypothesis_test", sum(counts.values()), counts)


def witness_record(successes, n):
    return MeasurementRecord(
        "witness", n, {"success": successes, "failure": n - successes}
    )


class TestClopperPearson:
    def test_zero_count_closed_form(self):
        assert clopper_pearson_upper(0, 100, 0.05) == pytest.approx(
            1 - 0.05 ** (1 / 100), abs=1e-9
        )

    def test_full_count_closed_form(self):
        assert clopper_pearson_lower(100, 100, 0.05) == pytest.approx(
            0.05 ** (1 / 100), abs=1e-9
        )

    def test_zero_count_limit(self):
        previous = 1.0
        for n in (10, 100, 1000, 10000, 100000):
            upper = clopper_pearson_upper(0, n, 0.05)
            assert upper < previous
            previous = upper
        assert previous < 1e-4

    def test_degenerate_endpoints(self):
        assert clopper_pearson_upper(7, 7, 0.05) == 1.0
        assert clopper_pearson_lower(0, 7, 0.05) == 0.0

    def test_invalid_args(self):
        with pytest.raises(ValidationError):
            clopper_pearson_upper(5, 4, 0.05)
        with pytest.raises(ValidationError):
            clopper_pearson_lower(1, 4, 1.5)

    def test_matches_direct_pmf_oracle(self, rng):
        for _ in range(40):
            n = int(rng.integers(1, 400))
            k = int(rng.integers(0, n + 1))
            delta = float(rng.choice([0.01, 0.05, 0.25]))
            assert clopper_pearson_upper(k, n, delta) == pytest.approx(
                clopper_pearson_upper_oracle(k, n, delta), abs=1e-8
            )
            assert clopper_pearson_lower(k, n, delta) == pytest.approx(
                clopper_pearson_lower_oracle(k, n, delta), abs=1e-8
            )

    def test_brackets_empirical_rate_exhaustively(self):
        for delta in (0.05, 0.25):
            for n in range(1, 51):
                for k in range(n + 1):
                    lower = clopper_pearson_lower(k, n, delta)
                    upper = clopper_pearson_upper(k, n, delta)
                    assert lower - 1e-9 <= k / n <= upper + 1e-9


class TestHtProtocol:
    def test_zero_failures(self):
        # beta side at delta_beta = 0.05 needs a total delta of 0.1 when split evenly
        record = ht_record(null_h1=5, null_h0=95, alt_h1=100, alt_h0=0)
        bound = ht_protocol(record, eta=0.25, delta=0.1)
        assert bound.value == pytest.approx(-math.log2(1 - 0.05 ** (1 / 100)), abs=1e-9)
        assert bound.quantity == "D_H"
        assert bound.confidence == pytest.approx(0.9)

    def test_test_never_fires(self):
        record = ht_record(null_h1=0, null_h0=100, alt_h1=0, alt_h0=100)
        bound = ht_protocol(record, eta=0.25, delta=0.1)
        assert bound.value == pytest.approx(0.0, abs=1e-12)

    def test_type_ii_inversion(self):
        record = ht_record(null_h1=50, null_h0=950, alt_h1=990, alt_h0=10)
        bound = ht_protocol(record, eta=0.25, delta=0.1)
        expected = -math.log2(clopper_pearson_upper(10, 1000, 0.05))
        assert bound.value == pytest.approx(expected, abs=1e-12)

    def test_alpha_certification_failure(self):
        record = ht_record(null_h1=30, null_h0=70, alt_h1=100, alt_h0=0)
        with pytest.raises(ProtocolInvalidError, match="type-I"):
            ht_protocol(record, eta=0.25, delta=0.1)

    def test_missing_labels(self):
        record = MeasurementRecord("hypothesis_test", 10, {"null_accept_h1": 10})
        with pytest.raises(ValidationError, match="missing"):
            ht_protocol(record, eta=0.25, delta=0.1)


class TestPlanners:
    def test_ht_plan_example(self):
        assert ht_sample_plan(10, 0.05) == 3068

    def test_ht_plan_zero_target(self):
        assert ht_sample_plan(0, 0.05) == 3

    def test_ht_plan_delta_one_limit(self):
        assert ht_sample_plan(5, 1.0) == 0

    def test_witness_plan_example(self):
        # p* = 0.8 realized as 2^2 * 1 / 5
        assert witness_sample_plan(0.9, 2.0, 1, 5, 0.05) == 150

    def test_witness_plan_unreachable(self):
        with pytest.raises(ValidationError, match="unreachable"):
            witness_sample_plan(0.7, 2.0, 1, 5, 0.05)

    def test_witness_plan_unit_log(self):
        assert witness_sample_plan(0.9, 2.0, 1, 5, math.exp(-1.0)) == 50

    def test_planners_monotone(self):
        previous = 0
        for target in (1.0, 2.0, 4.0, 8.0):
            n = ht_sample_plan(target, 0.05)
            assert n >= previous
            previous = n
        previous = 0
        for delta in (0.2, 0.1, 0.05, 0.01):
            n = ht_sample_plan(4.0, delta)
            assert n >= previous
            previous = n


class TestWitnessProtocol:
    def test_direct_formula(self):
        # successes tuned so p_L is near 0.75; check against the formula itself
        ref = embedded_reference(16, 16)
        record = witness_record(80, 100)
        bound = witness_protocol(record, ref, rank=2, delta=0.05)
        p_lower = clopper_pearson_lower(80, 100, 0.05)
        assert bound.value == pytest.approx(math.log2(p_lower * 16 / 2), abs=1e-12)

    def test_clamped_to_zero(self):
        ref = embedded_reference(4, 4)
        record = witness_record(10, 100)
        bound = witness_protocol(record, ref, rank=2, delta=0.05)
        assert bound.value == 0.0

    def test_all_successes_closed_form(self):
        ref = embedded_reference(8, 8)
        record = witness_record(100, 100)
        bound = witness_protocol(record, ref, rank=1, delta=0.05)
        assert bound.value == pytest.approx(math.log2(0.05 ** (1 / 100) * 8), abs=1e-7)

    def test_rank_above_dimension(self):
        ref = embedded_reference(4, 4)
        with pytest.raises(ValidationError, match="rank"):
            witness_protocol(witness_record(3, 10), ref, rank=5, delta=0.05)

    def test_leaky_projector_rejected(self):
        ref = embedded_reference(2, 4)
        leaky = np.diag([1.0, 0.0, 1.0, 0.0])
        with pytest.raises(ValidationError, match="leak"):
            witness_protocol(witness_record(5, 10), ref, rank=2, delta=0.05, projector=leaky)


class TestDephaseProtocol:
    def test_epsilon_and_v_values(self):
        # N=2000, M=16, delta=0.05
        ref = embedded_reference(16, 16)
        counts = {str(i): 125 for i in range(16)}
        record = MeasurementRecord("dephase", 2000, counts)
        bound = dephase_protocol(record, ref, delta=0.05)
        assert bound.params["eps_n"] == pytest.approx(
            math.sqrt((2 / 2000) * (16 * math.log(2) + math.log(20))), abs=1e-9
        )
        assert bound.params["eps_n"] == pytest.approx(0.118685, abs=1e-6)
        assert bound.params["v"] == pytest.approx(0.0593424, abs=1e-6)

    def test_concentrated_distribution(self):
        ref = embedded_reference(16, 16)
        record = MeasurementRecord("dephase", 2000, {"0": 2000})
        bound = dephase_protocol(record, ref, delta=0.05)
        v = bound.params["v"]
        expected_hu = v * math.log2(15) + (-v * math.log2(v) - (1 - v) * math.log2(1 - v))
        assert bound.params["entropy_upper_bits"] == pytest.approx(expected_hu, abs=1e-12)
        assert bound.params["entropy_upper_bits"] == pytest.approx(0.556668, abs=1e-5)
        assert bound.value == pytest.approx(4.0 - expected_hu, abs=1e-12)

    def test_uniform_floors_at_zero(self):
        ref = embedded_reference(16, 16)
        counts = {str(i): 125 for i in range(16)}
        record = MeasurementRecord("dephase", 2000, counts)
        assert dephase_protocol(record, ref, delta=0.05).value == 0.0

    def test_outcome_mismatch(self):
        ref = embedded_reference(2, 2)
        record = MeasurementRecord("dephase", 30, {"0": 10, "1": 10, "2": 10})
        with pytest.raises(ValidationError, match="outcome"):
            dephase_protocol(record, ref, delta=0.05)

    def test_deterministic_limit(self):
        # exact empirical probabilities at N = 10^6 land within 0.02 bits of
        # the noiseless dephasing bound
        ref = embedded_reference(2, 2)
        n = 10**6
        record = MeasurementRecord("dephase", n, {"0": int(0.8 * n), "1": int(0.2 * n)})
        bound = dephase_protocol(record, ref, delta=0.05)
        h = -(0.8 * math.log2(0.8) + 0.2 * math.log2(0.2))
        assert abs(bound.value - (1.0 - h)) < 0.02


class TestBonferroni:
    def test_single(self):
        assert bonferroni(0.05, 1) == 0.05

    def test_split(self):
        assert bonferroni(0.05, 5) == pytest.approx(0.01)

    def test_invalid(self):
        with pytest.raises(ValidationError):
            bonferroni(0.05, 0)


class TestCombineBounds:
    def _dh(self, value, eta=0.05, delta=0.05):
        return CertifiedBound(
            "D_H", value, "bits", 1 - delta, "hypothesis_test", {"eta": eta, "delta": delta}
        )

    def _d(self, value, delta=0.05):
        return CertifiedBound("D", value, "bits", 1 - delta, "dephase", {"delta": delta})

    def _dmax(self, value, delta=0.05):
        return CertifiedBound("D_max", value, "bits", 1 - delta, "witness", {"delta": delta})

    def test_single_bound_is_its_own_winner(self):
        ref = full_reference(4)
        combined = combine_bounds([self._dh(12.0)], ref, epsilon=0.05)
        assert combined.winner == "hypothesis_test"
        assert combined.confidence == pytest.approx(0.95)
        direct = smoothed_lower_bound(12.0, ref, 0.05, 0.05)
        assert combined.value_structons == direct.final

    def test_max_wins(self):
        ref = full_reference(16)
        combined = combine_bounds([self._d(3.0), self._dmax(2.0)], ref, epsilon=0.05)
        assert combined.winner == "dephase"
        assert combined.per_path["dephase"] >= combined.per_path["witness"]

    def test_three_paths_confidence_cap(self):
        ref = full_reference(16)
        combined = combine_bounds(
            [self._dh(6.0), self._d(3.0), self._dmax(2.0)], ref, epsilon=0.05
        )
        assert combined.confidence == pytest.approx(0.85)
        assert len(combined.contributing) == 3

    def test_empty_rejected(self):
        ref = full_reference(4)
        with pytest.raises(ValidationError):
            combine_bounds([], ref, epsilon=0.05)

    def test_purity_ceiling_refused(self):
        ref = full_reference(4)
        sigma = validate_density(np.eye(4) / 4)
        ceiling = purity_upper_bound(sigma, ref)
        with pytest.raises(ValidationError):
            combine_bounds([ceiling], ref, epsilon=0.05)


class TestRecordValidation:
    def test_counts_must_sum(self):
        with pytest.raises(ValidationError):
            MeasurementRecord("dephase", 5, {"0": 2, "1": 2})

    def test_unknown_protocol(self):
        with pytest.raises(ValidationError):
            MeasurementRecord("tomography", 4, {"0": 4})

    @given(st.integers(1, 200), st.floats(0.01, 0.4))
    @settings(max_examples=30, deadline=None)
    def test_cp_endpoints_ordered(self, n, delta):
        k = n // 2
        assert clopper_pearson_lower(k, n, delta) <= clopper_pearson_upper(k, n, delta)
