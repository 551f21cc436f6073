import itertools

import numpy as np
import pytest

from conftest import ScriptRng
from ottlab import protocols as otp
from ottlab import quantum as qk
from ottlab.protocols import (
    NOISELESS, NoiseModel, OneTimeTable, ProtocolError,
    apply_channel_noise, bell_outcome_statistic, declare_failure,
    detector_threshold, entangled_input, fixed_measurement, generate_batch,
    honest, honest_but_curious, ideal_tables, run_nland, run_nland2,
    run_nland3,
)
from ottlab.quantum import Gate, PureState


def rng(seed=0):
    return np.random.default_rng(seed)


CHEAT_STATE = PureState(2, np.array([0.5, 0.5, 0.5, -0.5], dtype=complex))


# ---------------------------------------------------------------- protocol 1

def test_nland_honest_exhaustive_over_internal_bits():
    # All 2^7 combinations of (x, s, t, y, h1, h2, p); honest noiseless
    # measurement outcomes are then deterministic.
    for bits in itertools.product((0, 1), repeat=7):
        table, tr = run_nland(honest("alice"), honest("bob"), NOISELESS,
                              ScriptRng(bits))
        assert table is not None
        assert table.e ^ table.f == table.x & table.y
        assert tr.h == tr.h1 ^ tr.h2
        assert table.f == tr.h
        assert tr.w is None


def test_nland_honest_seeded_runs_always_correct():
    r = rng(1)
    for _ in range(500):
        table, _ = run_nland(honest("alice"), honest("bob"), NOISELESS, r)
        assert table.is_correct


def test_nland_output_marginals_uniform():
    r = rng(2)
    es, fs = [], []
    for _ in range(4000):
        table, _ = run_nland(honest("alice"), honest("bob"), NOISELESS, r)
        es.append(table.e)
        fs.append(table.f)
    assert abs(np.mean(es) - 0.5) < 0.02
    assert abs(np.mean(fs) - 0.5) < 0.02


def test_nland_returned_state_averages_to_maximally_mixed():
    # For every honest preparation, averaging over Bob's withheld bits
    # (y, h1, h2, p) yields I/4 exactly.
    for x, s, t in itertools.product((0, 1), repeat=3):
        psi = otp._prepare_honest_nland(x, s, t)
        acc = np.zeros((4, 4), dtype=complex)
        for y, h1, h2, p in itertools.product((0, 1), repeat=4):
            out = otp.apply_bob_branch(psi, y, h1, h2, p)
            acc += np.outer(out.amplitudes, out.amplitudes.conj())
        assert np.max(np.abs(acc / 16 - np.eye(4) / 4)) < 1e-12


def test_bob_fixed_measurement_guesses_x_at_three_quarters():
    strat = fixed_measurement("bob", {0: "Z", 1: "X"})
    r = rng(3)
    hits = n = 0
    for _ in range(6000):
        table, tr = run_nland(honest("alice"), strat, NOISELESS, r)
        hits += tr.bob_guess_x == table.x
        n += 1
    assert abs(hits / n - 0.75) < 0.02


def test_alice_entangled_input_learns_y_but_breaks_correctness():
    strat = entangled_input(CHEAT_STATE)
    r = rng(4)
    guesses = correct = 0
    n = 4000
    for _ in range(n):
        table, tr = run_nland(strat, honest("bob"), NOISELESS, r)
        guesses += tr.alice_guess_y == table.y
        correct += table.is_correct
    assert guesses / n >= 0.999
    assert abs(correct / n - 0.5) < 0.025


def test_honest_but_curious_changes_nothing():
    for seed in range(30):
        t1, tr1 = run_nland(honest("alice"), honest("bob"), NOISELESS, rng(seed))
        t2, tr2 = run_nland(honest_but_curious("alice"),
                            honest_but_curious("bob"), NOISELESS, rng(seed))
        assert t1 == t2
        assert (tr1.s, tr1.t, tr1.y, tr1.h, tr1.alice_outcomes) == \
               (tr2.s, tr2.t, tr2.y, tr2.h, tr2.alice_outcomes)
        assert tr2.curious_notes  # the only difference


# ---------------------------------------------------------------- protocol 2

def test_nland3_honest_exhaustive_over_internal_bits():
    # (i1..i4, y, s) enumerated; measurement branches sampled per combo.
    for bits in itertools.product((0, 1), repeat=6):
        for meas_seed in (0, 1):
            script = ScriptRng(bits, fallback_seed=meas_seed)
            table, tr = run_nland3(honest("alice"), honest("bob"),
                                   NOISELESS, script)
            assert table.e ^ table.f == table.x & table.y


def test_nland3_cheating_bob_forces_x_but_randomizes_table():
    state = PureState.from_bits([0, 0, 0, 0])
    state = qk.apply_gate(state, Gate("H", (1,)))  # |0>|+>|0>|0>
    strat = entangled_input(state, role="bob", w_claim=0, y_claim=0, f_claim=0)
    r = rng(5)
    n = 4000
    xs = []
    correct = 0
    for _ in range(n):
        table, _ = run_nland3(honest("alice"), strat, NOISELESS, r)
        xs.append(table.x)
        correct += table.is_correct
    assert all(x == 0 for x in xs)  # x forced by the product preparation
    assert abs(correct / n - 0.5) < 0.025


def test_nland3_optimal_distinguisher_guesses_y_at_three_quarters():
    dist = otp.optimal_nland3_distinguisher()
    assert abs(dist.trace_distance - 0.5) < 1e-9
    r = rng(6)
    hits = n = 0
    for _ in range(4000):
        table, tr = run_nland3(honest("alice"), honest("bob"), NOISELESS, r,
                               record_states=True)
        tag, amps = tr.sent_states[0]
        state = PureState(4, np.array(amps))
        hits += dist.guess(state, tr.w, r) == table.y
        n += 1
    assert abs(hits / n - 0.75) < 0.02


# ---------------------------------------------------------------- protocol 11

def test_nland2_honest_seeded_runs_always_correct():
    r = rng(7)
    for _ in range(2000):
        table, tr = run_nland2(honest("alice"), honest("bob"), NOISELESS, r)
        assert table.is_correct
        assert tr.w == np.bitwise_xor.reduce(tr.bob_bell_bits)


def test_nland2_distribution_matches_nland():
    # Both protocols induce the uniform distribution over the 8 valid
    # (x, y, e) cells with f determined; compare by chi-square.
    r = rng(8)
    counts = {p: np.zeros(8) for p in ("nland", "nland2")}
    n = 6000
    for _ in range(n):
        t1, _ = run_nland(honest("alice"), honest("bob"), NOISELESS, r)
        t2, _ = run_nland2(honest("alice"), honest("bob"), NOISELESS, r)
        for p, t in (("nland", t1), ("nland2", t2)):
            assert t.is_correct
            counts[p][(t.x << 2) | (t.y << 1) | t.e] += 1
    for p in counts:
        chi2 = np.sum((counts[p] - n / 8) ** 2 / (n / 8))
        assert chi2 < 26.1  # chi2(7) at the 0.9995 level


def test_nland2_declare_failure_skews_bob_statistics():
    cheat = declare_failure("alice", lambda rec: any(rec[1]))
    r = rng(9)
    honest_trs, cheat_trs = [], []
    for _ in range(3000):
        _, tr = run_nland2(honest("alice"), honest("bob"), NOISELESS, r)
        honest_trs.append(tr)
        _, tr = run_nland2(cheat, honest("bob"), NOISELESS, r)
        cheat_trs.append(tr)
    thresh = detector_threshold()
    honest_report = bell_outcome_statistic(honest_trs)
    cheat_report = bell_outcome_statistic(
        [t for t in cheat_trs if not t.aborted])
    assert not honest_report.flags(thresh)
    assert cheat_report.n > 50
    assert cheat_report.flags(thresh)


# ---------------------------------------------------------------- noise

def test_channel_noise_zero_is_identity():
    psi = qk.haar_state(2, rng(10))
    out = apply_channel_noise(psi, NOISELESS, rng(11))
    assert qk.fidelity(psi, out) > 1 - 1e-12


def test_full_noise_on_epr_half_preserves_marginal():
    r = rng(12)
    for _ in range(20):
        noisy = apply_channel_noise(qk.bell_pair(), NoiseModel(eps_noise=1.0),
                                    r, qubits=(0,))
        red = qk.reduced_state(noisy, [1])
        assert np.max(np.abs(red.mat - np.eye(2) / 2)) < 1e-12


def test_noisy_protocol_error_rate_positive_and_reproducible():
    noise = NoiseModel(eps_noise=0.05)

    def run_batch(seed):
        tables, _ = generate_batch("nland", 2000, honest("alice"),
                                   honest("bob"), noise, seed)
        return tables

    t1, t2 = run_batch(21), run_batch(21)
    assert t1 == t2
    errors = sum(not t.is_correct for t in t1)
    assert errors > 0


def test_eps_fail_drops_runs():
    noise = NoiseModel(eps_fail=0.5)
    tables, trs = generate_batch("nland", 200, honest("alice"),
                                 honest("bob"), noise, 4)
    aborted = sum(tr.aborted for tr in trs)
    assert 50 < aborted < 150
    assert len(tables) == 200 - aborted
    assert [t.id for t in tables] == list(range(len(tables)))


def test_noise_model_validation():
    with pytest.raises(ProtocolError):
        NoiseModel(eps_noise=1.5)


# ---------------------------------------------------------------- plumbing

def test_ideal_tables_are_correct_and_uniform():
    tables = ideal_tables(2000, rng(13))
    assert all(t.is_correct for t in tables)
    assert abs(np.mean([t.x for t in tables]) - 0.5) < 0.05


def test_views_expose_only_own_bits():
    t = OneTimeTable(1, 0, 1, 1, 7)
    av, bv = t.alice_view(), t.bob_view()
    assert (av.id, av.x, av.e) == (7, 1, 1)
    assert (bv.id, bv.y, bv.f) == (7, 0, 1)
    assert not hasattr(av, "y") and not hasattr(av, "f")
    assert not hasattr(bv, "x") and not hasattr(bv, "e")
    assert otp.join_views(av, bv) == t


def test_generate_batch_deterministic():
    args = ("nland3", 50, honest("alice"), honest("bob"), NOISELESS, 99)
    t1, _ = generate_batch(*args)
    t2, _ = generate_batch(*args)
    assert t1 == t2


def test_unsupported_strategy_combo_rejected():
    with pytest.raises(ProtocolError):
        run_nland2(entangled_input(CHEAT_STATE), honest("bob"), NOISELESS, rng())
