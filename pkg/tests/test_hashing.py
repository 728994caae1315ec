import itertools

import numpy as np
import pytest

from catpurify.ensemble import werner_single
from catpurify.errors import CapacityError, DimensionError
from catpurify.hashing import (
    HashingRun,
    binary_entropy,
    multiparty_hashing_yield,
    simulate_hashing,
    two_party_hashing_yield,
    werner_hashing_yield,
    werner_hashing_yield_limit,
)

# Frozen by independent extended-precision evaluation.
MP_HASH_N2_F07 = -0.4438561897747247
MP_HASH_N4_F09 = 0.3992171652704363
TWO_PARTY_THRESHOLD = 0.8107103750847682
MP_HASH_N2_THRESHOLD = 0.8349582033424607


def bisect_zero(fn, lo, hi, tol=1e-9):
    assert fn(lo) < 0 < fn(hi)
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if fn(mid) < 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def test_binary_entropy_examples():
    assert binary_entropy(0.5) == 1.0
    assert binary_entropy(0.0) == 0.0
    assert binary_entropy(1.0) == 0.0
    assert abs(binary_entropy(0.110028) - 0.5) < 1e-4
    with pytest.raises(ValueError):
        binary_entropy(-0.1)
    with pytest.raises(ValueError):
        binary_entropy(1.1)


def test_multiparty_yield_examples():
    for n in (2, 3, 4):
        assert multiparty_hashing_yield(werner_single(n, 1.0)) == 1.0
    value = multiparty_hashing_yield(werner_single(2, 0.7))
    assert abs(value - MP_HASH_N2_F07) < 1e-12


def test_multiparty_yield_matches_closed_form_n3():
    rng = np.random.default_rng(42)
    for f in rng.uniform(0.125, 1.0, size=20):
        f = float(f)
        direct = multiparty_hashing_yield(werner_single(3, f))
        closed = werner_hashing_yield(3, f)
        assert abs(direct - closed) < 1e-12


def test_werner_yield_examples():
    for n in (2, 3, 4):
        assert werner_hashing_yield(n, 1.0) == 1.0
    assert abs(werner_hashing_yield(4, 0.9) - MP_HASH_N4_F09) < 1e-12
    with pytest.raises(ValueError):
        werner_hashing_yield(2, 0.1)


def test_werner_yield_zero_crossing():
    crossing = bisect_zero(lambda f: werner_hashing_yield(2, f), 0.7, 0.95)
    assert abs(crossing - 0.8350) < 1e-3
    assert abs(crossing - MP_HASH_N2_THRESHOLD) < 1e-4


def test_limit_examples():
    assert werner_hashing_yield_limit(1.0) == 1.0
    assert werner_hashing_yield_limit(0.0) == -1.0
    for f in (0.85, 0.9, 0.95):
        d8 = abs(werner_hashing_yield(8, f) - werner_hashing_yield_limit(f))
        d16 = abs(werner_hashing_yield(16, f) - werner_hashing_yield_limit(f))
        assert d16 < d8


def test_two_party_yield_examples():
    assert two_party_hashing_yield(werner_single(2, 1.0)) == 1.0
    assert abs(two_party_hashing_yield(werner_single(2, 0.25)) - (-1.0)) < 1e-12
    with pytest.raises(DimensionError):
        two_party_hashing_yield(werner_single(3, 0.9))


def test_two_party_threshold():
    crossing = bisect_zero(
        lambda f: two_party_hashing_yield(werner_single(2, f)), 0.7, 0.95
    )
    assert abs(crossing - 0.8107) < 1e-3
    assert abs(crossing - TWO_PARTY_THRESHOLD) < 1e-4


def test_separate_string_hashing_never_beats_joint():
    for k in range(25, 101):
        f = k / 100.0
        assert multiparty_hashing_yield(werner_single(2, f)) <= two_party_hashing_yield(
            werner_single(2, f)
        ) + 1e-12


def replay_transcript(run: HashingRun):
    """Independent replay: re-derive every parity from the initial labels
    and the recorded wiring, checking the measured bits as it goes."""
    n = run.n_parties
    amp_mask = (1 << (n - 1)) - 1
    phases = ((run.initial_codes >> (n - 1)) & 1).astype(int)
    amps = (run.initial_codes & amp_mask).astype(int)
    for rnd in run.amp_rounds:
        members = rnd.members
        parity = int(np.bitwise_xor.reduce(amps[members]))
        assert parity == rnd.measured
        sources = members[members != rnd.target]
        phases[sources] ^= phases[rnd.target]
        amps[rnd.target] = parity
    for rnd in run.phase_rounds:
        members = rnd.members
        parity = int(np.bitwise_xor.reduce(phases[members]))
        assert parity == rnd.measured
        others = members[members != rnd.target]
        phases[rnd.target] = parity
        amps[others] ^= amps[rnd.target]
    return phases, amps


def test_simulate_pure_input():
    success, empirical_yield, run = simulate_hashing(
        3, 32, werner_single(3, 1.0), seed=9, safety_bits=0
    )
    assert success
    assert empirical_yield == 1.0 - len(run.consumed) / 32
    assert empirical_yield == 1.0
    assert np.all(run.decoded_amps == 0)
    assert np.all(run.decoded_survivor_phases == 0)


def test_simulate_pure_input_with_safety_rounds():
    success, empirical_yield, run = simulate_hashing(
        3, 32, werner_single(3, 1.0), seed=9, safety_bits=3
    )
    assert success
    assert run.rounds_a == run.rounds_b == 3
    assert empirical_yield == 1.0 - 6 / 32


@pytest.mark.parametrize("seed", [0, 1, 2, 3, 4])
def test_parity_ground_truth_and_replay(seed):
    success, _, run = simulate_hashing(
        2, 48, werner_single(2, 0.9), seed=seed, safety_bits=4
    )
    phases, amps = replay_transcript(run)
    survivors = run.survivors
    # When the decode succeeded, its beliefs must match the replayed truth.
    if success:
        np.testing.assert_array_equal(
            run.decoded_survivor_phases, phases[survivors] & 1
        )


def test_reproducible_transcripts():
    single = werner_single(3, 0.9)
    runs = [simulate_hashing(3, 64, single, seed=5, safety_bits=4)[2] for _ in range(2)]
    assert runs[0].to_text() == runs[1].to_text()
    other = simulate_hashing(3, 64, single, seed=6, safety_bits=4)[2]
    assert other.to_text() != runs[0].to_text()


def test_transcript_round_trip():
    _, _, run = simulate_hashing(3, 24, werner_single(3, 0.9), seed=2, safety_bits=2)
    amp, phase = HashingRun.parse_rounds(run.to_text())
    assert len(amp) == run.rounds_a and len(phase) == run.rounds_b
    for parsed, original in zip(amp + phase, run.amp_rounds + run.phase_rounds):
        np.testing.assert_array_equal(parsed.members, original.members)
        assert parsed.target == original.target
        assert parsed.measured == original.measured


def test_safety_monotonicity_weak_form():
    # Observed failure counts must be non-increasing in the safety margin.
    single = werner_single(2, 0.92)
    failures = []
    for safety in (0, 8, 16, 24):
        count = 0
        for seed in range(200):
            ok, _, _ = simulate_hashing(2, 256, single, seed=seed, safety_bits=safety)
            count += 0 if ok else 1
        failures.append(count)
    assert all(a >= b for a, b in zip(failures, failures[1:]))


def test_block_too_small_for_rounds_is_ambiguous():
    success, _, run = simulate_hashing(2, 1, werner_single(2, 0.8), seed=0, safety_bits=0)
    assert not success
    assert run.failure_reason == "ambiguous"
    success, empirical_yield, _ = simulate_hashing(
        2, 1, werner_single(2, 1.0), seed=0, safety_bits=0
    )
    assert success and empirical_yield == 1.0


def test_solver_cap_enforced():
    with pytest.raises(CapacityError):
        simulate_hashing(3, 10000, werner_single(3, 0.9), seed=0)


def consistent_amp_candidates(run: HashingRun):
    """All amplitude strings (N=2) consistent with the recorded parities."""
    m = run.block_size
    consistent = []
    for bits in itertools.product((0, 1), repeat=m):
        cand = np.array(bits, dtype=np.uint8)
        ok = all(
            int(cand[rnd.members].sum() & 1) == rnd.measured
            for rnd in run.amp_rounds
        )
        if ok:
            consistent.append(cand)
    return consistent


@pytest.mark.parametrize("seed", range(50))
def test_small_instance_decoder_matches_enumeration(seed):
    # N=2, m=10: the GF(2) decode must agree exactly with brute force over
    # all 2^10 candidate amplitude strings.
    single = werner_single(2, 0.85)
    x = float(2 * (1 - 0.85) / 3)
    _, _, run = simulate_hashing(2, 10, single, seed=seed, safety_bits=1)
    candidates = consistent_amp_candidates(run)
    assert candidates, "true string is always consistent"
    weights = np.array([int(c.sum()) for c in candidates])
    best = weights.min()
    n_best = int((weights == best).sum())
    if n_best > 1:
        assert run.amp_decode_status == "ambiguous"
        assert run.decoded_amps is None
    else:
        assert run.decoded_amps is not None
        expected = candidates[int(weights.argmin())]
        np.testing.assert_array_equal(run.decoded_amps.astype(np.uint8), expected)
    assert x < 0.5  # the weight ordering above assumes the biased prior


def test_three_party_run_decodes_both_amplitude_strings():
    # One shared hash matrix serves every amplitude bit position; a
    # successful run must therefore have both decoded strings equal to the
    # replayed truth on the surviving states.
    success, _, run = simulate_hashing(
        3, 40, werner_single(3, 0.95), seed=8, safety_bits=6
    )
    assert run.rounds_a == len({r.index for r in run.amp_rounds})
    phases, _ = replay_transcript(run)
    if success:
        survivors = run.survivors
        initial_amps = (run.initial_codes & 0b11)[survivors]
        np.testing.assert_array_equal(run.decoded_amps[survivors], initial_amps)
        np.testing.assert_array_equal(
            run.decoded_survivor_phases, phases[survivors] & 1
        )


def test_large_block_monte_carlo_quick():
    single = werner_single(3, 0.9)
    results = [
        simulate_hashing(3, 2000, single, seed=1000 + k, safety_bits=20)
        for k in range(3)
    ]
    assert all(ok for ok, _, _ in results)
    for _, empirical_yield, run in results:
        assert run.decode_mode == "certified"
        assert abs(empirical_yield - 696 / 2000) < 1e-12
