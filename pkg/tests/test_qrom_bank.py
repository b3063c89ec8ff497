import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qrecog.errors import DimensionMismatchError, InputError
from qrecog.hilbert import QuantumState, embed, fidelity, random_state, ray_equal
from qrecog.image_space import random_unit_vector
from qrecog.qrom_bank import (
    _arm_accepts,
    FilterBank,
    TrialCounts,
    bank_from_dict,
    bank_to_dict,
    build_filter,
    counts_to_csv,
    dumps_bank,
    filter_pass,
    recognize_argmax,
    run_beam_trials,
    split_intensities,
)


def e(dim, i):
    return QuantumState.basis(dim, i)


def orthonormal_bank(n, intensity=1.0):
    return FilterBank.from_states([e(n, i) for i in range(n)], input_intensity=intensity)


def random_bank(n, dim, seed, intensity=1.0):
    return FilterBank.from_states(
        [embed(random_unit_vector(dim, seed * 1000 + i)) for i in range(n)],
        input_intensity=intensity,
    )


class TestFilter:
    def test_basis_filter(self):
        f = build_filter(e(3, 0), "a")
        assert f.stored == e(3, 0) and f.label == "a"

    def test_stores_ray(self):
        psi = random_state(6, 1)
        a = build_filter(psi).stored
        b = build_filter(QuantumState(1j * psi.amplitudes)).stored
        assert ray_equal(a, b, 1e-12)
        np.testing.assert_allclose(a.amplitudes, b.amplitudes, atol=1e-12)

    def test_own_state_always_passes(self):
        psi = random_state(8, 2)
        f = build_filter(psi)
        rng = np.random.default_rng(0)
        assert all(filter_pass(f, psi, rng) is f.stored for _ in range(2000))

    def test_orthogonal_never_passes(self):
        f = build_filter(e(4, 0))
        rng = np.random.default_rng(0)
        assert all(filter_pass(f, e(4, 1), rng) is None for _ in range(2000))

    def test_half_fidelity_binomial(self):
        f = build_filter(e(2, 0))
        probe = QuantumState.from_vector([1, 1j])
        assert fidelity(f.stored, probe) == pytest.approx(0.5)
        rng = np.random.default_rng(11)
        n = 100_000
        rate = sum(filter_pass(f, probe, rng) is not None for _ in range(n)) / n
        assert abs(rate - 0.5) <= 3 * math.sqrt(0.25 / n)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            filter_pass(build_filter(e(2, 0)), e(3, 0), np.random.default_rng(0))


class TestBank:
    def test_needs_filters(self):
        with pytest.raises(InputError):
            FilterBank(())

    def test_mixed_dims(self):
        with pytest.raises(DimensionMismatchError):
            FilterBank.from_states([e(2, 0), e(3, 0)])

    def test_positive_intensity(self):
        with pytest.raises(InputError):
            FilterBank.from_states([e(2, 0)], input_intensity=0)


class TestSplitIntensities:
    def test_single_arm(self):
        psi = random_state(5, 0)
        np.testing.assert_allclose(
            split_intensities(FilterBank.from_states([psi]), psi), [1.0], atol=1e-12
        )

    def test_orthonormal_hit(self):
        bank = orthonormal_bank(4, intensity=8.0)
        np.testing.assert_allclose(split_intensities(bank, e(4, 2)), [0, 0, 2.0, 0])

    def test_argmax_matches_fidelity(self):
        bank = random_bank(8, 64, 3, intensity=5.0)
        probe = embed(random_unit_vector(64, 99))
        fids = [fidelity(f.stored, probe) for f in bank.filters]
        assert np.argmax(split_intensities(bank, probe)) == np.argmax(fids)

    @given(st.integers(1, 10), st.integers(0, 2**31), st.floats(0.1, 100))
    def test_bounds(self, n, seed, intensity):
        bank = random_bank(n, 12, seed % 1000, intensity)
        ints = split_intensities(bank, random_state(12, seed))
        assert np.all(ints >= 0)
        assert np.all(ints <= intensity / n * (1 + 1e-12))
        assert ints.sum() <= intensity * (1 + 1e-12)

    @given(st.integers(1, 10), st.integers(0, 2**31))
    def test_complete_orthonormal_sums_to_share(self, n, seed):
        rng = np.random.default_rng(seed)
        q, _ = np.linalg.qr(rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)))
        bank = FilterBank.from_states([QuantumState(q[:, i]) for i in range(n)], input_intensity=3.0)
        total = split_intensities(bank, random_state(n, seed)).sum()
        assert total == pytest.approx(3.0 / n, abs=1e-10)

    @given(st.integers(0, 2**31), st.floats(0.01, 1000))
    def test_argmax_scale_invariant(self, seed, scale):
        bank = random_bank(6, 16, seed % 500)
        probe = random_state(16, seed)
        scaled = FilterBank(bank.filters, scale)
        a = recognize_argmax(split_intensities(bank, probe), 0.1, input_intensity=1.0)
        b = recognize_argmax(split_intensities(scaled, probe), 0.1, input_intensity=scale)
        assert a.best_index == b.best_index
        assert a.score == pytest.approx(b.score, rel=1e-12)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            split_intensities(orthonormal_bank(3), e(4, 0))


class TestBeamTrials:
    def test_orthonormal_exact(self):
        bank = orthonormal_bank(5)
        counts = run_beam_trials(bank, e(5, 3), 777, seed=1)
        assert counts.accepts == (0, 0, 0, 777, 0)

    def test_deterministic(self):
        bank = random_bank(8, 64, 1)
        probe = random_state(64, 4)
        assert run_beam_trials(bank, probe, 5000, 42) == run_beam_trials(bank, probe, 5000, 42)
        assert run_beam_trials(bank, probe, 5000, 42) != run_beam_trials(bank, probe, 5000, 43)

    def test_concurrent_matches_serial(self):
        bank = random_bank(8, 32, 2)
        probe = random_state(32, 5)
        assert run_beam_trials(bank, probe, 10_000, 9, workers=4) == run_beam_trials(
            bank, probe, 10_000, 9
        )

    def test_reverse_arm_order(self):
        # arm k draws from its own (seed, k) stream, so evaluating arms
        # individually in reverse reproduces the batch result
        bank = random_bank(6, 16, 7)
        probe = random_state(16, 8)
        full = run_beam_trials(bank, probe, 4000, 3).accepts
        rev = {k: _arm_accepts(bank, probe, k, 4000, 3) for k in reversed(range(6))}
        assert tuple(rev[k] for k in range(6)) == full

    def test_quarter_probability_arm(self):
        bank = FilterBank.from_states([e(2, 0)])
        probe = QuantumState.from_vector([1, math.sqrt(3)])
        p = fidelity(bank.filters[0].stored, probe)
        assert p == pytest.approx(0.25)
        shots = 100_000
        rate = run_beam_trials(bank, probe, shots, 17).accepts[0] / shots
        assert abs(rate - p) <= 3 * math.sqrt(p * (1 - p) / shots)

    def test_sampled_vs_exact(self):
        bank = random_bank(8, 64, 11, intensity=2.0)
        probe = embed(random_unit_vector(64, 11_000))  # same as filter 0
        shots = 100_000
        rates = np.array(run_beam_trials(bank, probe, shots, 5).accepts) / shots
        exact = split_intensities(bank, probe) * len(bank) / bank.input_intensity
        sigma = np.sqrt(exact * (1 - exact) / shots)
        assert np.all(np.abs(rates - exact) <= 3 * sigma + 1e-15)

    def test_argmax_agrees_with_exact_when_separated(self):
        # top-two fidelity gap >= 0.1: sampled argmax should match exact
        agree = 0
        runs = 200
        for seed in range(runs):
            bank = random_bank(8, 64, 200 + seed)
            target = bank.filters[seed % 8].stored
            noisy = QuantumState.from_vector(
                target.amplitudes + 0.05 * np.random.default_rng(seed).standard_normal(64)
            )
            exact = recognize_argmax(split_intensities(bank, noisy), 0.1, input_intensity=1.0)
            f = sorted(fidelity(fl.stored, noisy) for fl in bank.filters)
            assert f[-1] - f[-2] >= 0.1
            sampled = recognize_argmax(run_beam_trials(bank, noisy, 10_000, seed), 0.1)
            agree += sampled.best_index == exact.best_index
        assert agree == runs

    def test_bad_shots(self):
        with pytest.raises(InputError):
            run_beam_trials(orthonormal_bank(2), e(2, 0), 0, 1)


class TestRecognizeArgmax:
    def test_clear_winner(self):
        r = recognize_argmax([0.01, 0.98, 0.02], 0.1)
        assert (r.best_index, r.accepted, r.score) == (1, True, 0.98)

    def test_flat_rejected(self):
        r = recognize_argmax([0.01, 0.01, 0.01], 0.1)
        assert (r.best_index, r.accepted) == (0, False)

    def test_tie_lowest_index(self):
        assert recognize_argmax([0.5, 0.5], 0.1).best_index == 0

    def test_threshold_is_strict(self):
        assert not recognize_argmax([0.9], 0.1).accepted
        assert recognize_argmax([0.9 + 1e-9], 0.1).accepted

    def test_counts_input(self):
        r = recognize_argmax(TrialCounts(100, (3, 95, 2)), 0.1, labels=["a", "b", "c"])
        assert (r.best_index, r.label, r.score, r.accepted) == (1, "b", 0.95, True)

    def test_intensities_input(self):
        r = recognize_argmax([0.1, 0.45, 0.2], 0.2, input_intensity=2.0)
        assert r.best_index == 1 and r.score == pytest.approx(0.675)

    def test_empty(self):
        with pytest.raises(InputError):
            recognize_argmax([], 0.1)

    @pytest.mark.parametrize("eps", [0.0, 1.0, -0.1])
    def test_bad_epsilon(self, eps):
        with pytest.raises(InputError):
            recognize_argmax([0.5], eps)


class TestTrialCounts:
    def test_invariant(self):
        with pytest.raises(InputError):
            TrialCounts(10, (11,))

    def test_csv(self):
        text = counts_to_csv(TrialCounts(4, (1, 4)), ["x", "y"])
        assert text == "arm,label,accepts,shots,rate\n0,x,1,4,0.25\n1,y,4,4,1.0\n"


class TestBankSerialization:
    def test_layout(self):
        d = bank_to_dict(FilterBank.from_states([e(2, 1)], ["only"], 2.5))
        assert d == {
            "intensity": 2.5,
            "filters": [{"label": "only", "state": {"dim": 2, "re": [0.0, 1.0], "im": [0.0, 0.0]}}],
        }

    def test_round_trip_bytes(self):
        bank = random_bank(5, 9, 4, intensity=3.0)
        text = dumps_bank(bank)
        again = bank_from_dict(json.loads(text))
        assert dumps_bank(again) == text
        for a, b in zip(bank.filters, again.filters):
            assert ray_equal(a.stored, b.stored, 1e-12)

    def test_malformed(self):
        with pytest.raises(InputError):
            bank_from_dict({"filters": [{"state": {}}]})
