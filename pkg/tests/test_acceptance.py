"""Acceptance suite: one test per criterion, each printing a PASS line with
the measured values (run with ``pytest tests/test_acceptance.py -v -s``)."""

import itertools
import time

import numpy as np

from ottlab import factory, lab, mpc, protocols, qhe, reports
from ottlab.cli import main as cli_main
from ottlab.protocols import (NOISELESS, entangled_input, fixed_measurement,
                              honest, ideal_tables, run_nland, run_nland2,
                              run_nland3)
from ottlab.quantum import PureState, fidelity, haar_state, haar_unitary
from ottlab.seeds import substream

CHEAT_STATE = PureState(2, np.array([0.5, 0.5, 0.5, -0.5], dtype=complex))


def report(criterion, ok, detail):
    line = f"[criterion {criterion:02d}] {'PASS' if ok else 'FAIL'}: {detail}"
    print(line)
    assert ok, line


def test_criterion_01_honest_correctness():
    t0 = time.monotonic()
    runs = 10_000
    counts = {}
    for name, fn in (("nland", run_nland), ("nland3", run_nland3),
                     ("nland2", run_nland2)):
        rng = substream(101, name)
        good = 0
        for _ in range(runs):
            table, _ = fn(honest("alice"), honest("bob"), NOISELESS, rng)
            good += table.is_correct
        counts[name] = good
    elapsed = time.monotonic() - t0
    ok = all(v == runs for v in counts.values()) and elapsed < 60
    report(1, ok, f"correct {counts} of {runs} each, {elapsed:.1f}s (< 60s)")


def test_criterion_02_bob_fixed_measurement_guess_rate():
    strat = fixed_measurement("bob", {0: "Z", 1: "X"})
    rng = substream(102, "guess")
    hits = 0
    runs = 10_000
    for _ in range(runs):
        table, tr = run_nland(honest("alice"), strat, NOISELESS, rng)
        hits += tr.bob_guess_x == table.x
    rate = hits / runs
    report(2, abs(rate - 0.75) < 0.02, f"guess rate {rate:.4f} = 0.75 +/- 0.02")


def test_criterion_03_trace_distance_and_accessible_info():
    from ottlab.quantum import trace_distance
    rho0, rho1 = lab.bob_view_of_x()
    td = trace_distance(rho0, rho1)
    _, best = lab.max_projective_info(((0.5, rho0), (0.5, rho1)),
                                      restarts=8, rng=substream(103, "opt"))
    ok = abs(td - 0.5) < 1e-9 and abs(best - 0.5) < 0.02
    report(3, ok, f"trace distance {td:.12f} (=0.5 +/- 1e-9), "
                  f"measured info {best:.4f} (=0.5 +/- 0.02)")


def test_criterion_04_tradeoff_scan_bands():
    t0 = time.monotonic()
    _, with_anc = lab.tradeoff_scan(10_000, 2, master_seed=104)
    _, no_anc = lab.tradeoff_scan(10_000, 0, master_seed=104)
    elapsed = time.monotonic() - t0
    ok = (1.30 <= with_anc.max_sum <= 1.40
          and no_anc.max_sum <= 1.0 + 1e-6 and elapsed < 600)
    report(4, ok, f"ancilla=2 max {with_anc.max_sum:.4f} in [1.30, 1.40]; "
                  f"ancilla=0 max {no_anc.max_sum:.6f} <= 1; {elapsed:.1f}s (< 600s)")


def test_criterion_05_envelope_gates():
    points, _ = lab.tradeoff_scan(10_000, 2, master_seed=104)
    # The Haar scan rarely reaches the tradeoff corner, so the envelope point
    # set is augmented with valid near-endpoint send states.
    rng = substream(105, "probe")
    probes = [lab.chi_point(lab.near_endpoint_sigma(rng.uniform(0, 0.1), rng),
                            seed=-1) for _ in range(400)]
    bins = lab.f_envelope(points + probes, [0.1, 0.01])
    b01, b001 = bins
    ok = (b01.count > 0 and b01.f_value <= 0.35
          and b001.count > 0 and b001.f_value <= 0.10)
    report(5, ok, f"f(0.1) = {b01.f_value:.4f} <= 0.35 ({b01.count} pts); "
                  f"f(0.01) = {b001.f_value:.4f} <= 0.10 ({b001.count} pts)")


def test_criterion_06_inequality_suite():
    worst = 0.0
    for i in range(1000):
        rng = substream(106, "p1", i)
        sig = lab.SigmaA(haar_state(4, rng))
        infos = lab.prop1_infos(sig, haar_unitary(16, rng))
        worst = max(worst, infos["y"] + infos["r"], infos["y"] + infos["yr"],
                    infos["y"] + max(infos["r"], infos["yr"]))
    worst_swapped = 0.0
    bases = [lab.z_tensor_x_basis(), np.eye(4, dtype=complex)]
    bases += [haar_unitary(4, substream(106, "p2", i)) for i in range(998)]
    for u in bases:
        infos = lab.prop2_infos(u)
        worst_swapped = max(worst_swapped, infos["x"] + infos["rp"],
                            infos["x"] + infos["xrp"])
    ok = worst <= 1 + 1e-6 and worst_swapped <= 1 + 1e-6
    report(6, ok, f"1000 pairs each: max I-sum {worst:.6f} (Eqs on y,r), "
                  f"{worst_swapped:.6f} (role-swapped); all <= 1 + 1e-6")


def test_criterion_07_checking_power():
    aborts = 0
    trials = 100
    for trial in range(trials):
        tables = []
        for i in range(200):
            rng = substream(107, trial, i)
            if i % 5 == 0:
                a = entangled_input(CHEAT_STATE)
            else:
                a = honest("alice")
            t, _ = run_nland(a, honest("bob"), NOISELESS, rng, table_id=i)
            tables.append(t)
        cfg = factory.CheckConfig(m=200, k=100, threshold=0, seed=trial)
        aborts += factory.check_onesided(tables, cfg).aborted
    report(7, aborts >= 99, f"{aborts}/100 trials aborted (need >= 99)")


def test_criterion_08_combination_leakage():
    exact = all(lab.combined_table_leakage(k) == 2.0 ** (-k)
                for k in range(1, 9))
    cross = abs(lab.combined_leakage_chi(2) - 0.25)
    ok = exact and cross < 1e-9
    report(8, ok, f"2^-k exact for k=1..8; k=2 ensemble cross-check off by "
                  f"{cross:.2e} (< 1e-9)")


def test_criterion_09_mpc_oracle_equivalence():
    mismatches = 0
    cases = 0
    for gates in range(1, 7):
        for seed in range(20):
            rng = substream(109, gates, seed)
            circuit = mpc.random_circuit(gates, rng)
            plan = mpc.compile_circuit(circuit)
            n_a = sum(1 for _, o in circuit.wires
                      if o in ("alice", "distributed"))
            n_b = sum(1 for _, o in circuit.wires
                      if o in ("bob", "distributed"))
            for bits_a in itertools.product((0, 1), repeat=n_a):
                for bits_b in itertools.product((0, 1), repeat=n_b):
                    alice, bob = {}, {}
                    ia = ib = 0
                    for wid, owner in circuit.wires:
                        if owner in ("alice", "distributed"):
                            alice[wid] = bits_a[ia]; ia += 1
                        if owner in ("bob", "distributed"):
                            bob[wid] = bits_b[ib]; ib += 1
                    pool = mpc.TablePool(ideal_tables(plan.table_budget, rng))
                    got = mpc.eval_circuit(plan, alice, bob, pool)
                    want = mpc.direct_eval(circuit, alice, bob)
                    for side in ("alice", "bob"):
                        for wid, val in got.outputs[side].items():
                            cases += 1
                            mismatches += val != want[wid]
    report(9, mismatches == 0,
           f"{cases} output checks over circuits of 1..6 gates x 20 seeds, "
           f"{mismatches} mismatches")


def test_criterion_10_ot_and_commitment():
    correct = ids = 0
    tables8 = [protocols.OneTimeTable(x, y, (x & y) ^ r, r, i)
               for i, (x, y, r) in enumerate(itertools.product((0, 1), repeat=3))]
    for m0, m1, b in itertools.product((0, 1), repeat=3):
        for t in tables8:
            ids += 1
            correct += mpc.ot_1of2(m0, m1, b, t).bob_output == (m0, m1)[b]
    successes = attempts = 0
    for u_int in range(1, 16):
        u = tuple((u_int >> k) & 1 for k in range(4))
        pool = mpc.TablePool(ideal_tables(4, substream(110, u_int)))
        state = mpc.bit_commit(1, 4, pool, substream(110, "rng"), bob_inputs=u)
        for d_int in range(1, 16):
            delta = tuple((d_int >> k) & 1 for k in range(4))
            claimed = tuple(s ^ d for s, d in zip(state.alice_shares, delta))
            attempts += 1
            successes += mpc.bit_reveal(state, claimed) == 0
    ok = correct == ids == 64 and successes * 15 == attempts
    report(10, ok, f"OT exhaustive {correct}/{ids}; equivocation "
                   f"{successes}/{attempts} = 1/15 exactly")


def test_criterion_11_ns_box_statistics():
    results = []
    ok = True
    for e_param in (0.0, 0.36, 0.64, 1.0):
        for mode in ("one-sided", "symmetric"):
            rng = substream(111, mode, int(e_param * 100))
            tables = ideal_tables(10_000, rng)
            hits = ma = mb = 0
            for t in tables:
                a, b = int(rng.integers(2)), int(rng.integers(2))
                s = mpc.ns_box_sample(a, b, e_param, mode, t, rng)
                hits += (s.out_a ^ s.out_b) == (a & b)
                ma += s.out_a
                mb += s.out_b
            n = len(tables)
            rate, want = hits / n, 0.5 * (1 + e_param)
            ok &= abs(rate - want) < 0.02
            ok &= abs(ma / n - 0.5) < 0.02 and abs(mb / n - 0.5) < 0.02
            results.append(f"E={e_param} {mode}: {rate:.3f}~{want:.2f}")
    report(11, ok, "; ".join(results) + " (all +/- 0.02, marginals uniform)")


def test_criterion_12_qhe_end_to_end():
    t0 = time.monotonic()
    worst_fid = 1.0
    for seed in range(50):
        rng = substream(112, seed)
        n = int(rng.integers(1, 4))
        circuit = qhe.random_ct_circuit(n, int(rng.integers(1, 10)), rng,
                                        max_t=3)
        tables, _ = protocols.generate_batch(
            "nland", qhe.tables_needed(circuit), honest("alice"),
            honest("bob"), NOISELESS, seed=112_000 + seed)
        psi = haar_state(n, rng)
        res = qhe.run_scheme1(circuit, psi, mpc.TablePool(tables), rng)
        fid = fidelity(res.output, qhe.simulate_direct(circuit, psi))
        worst_fid = min(worst_fid, fid)
        r = circuit.t_count
        assert res.tables_consumed <= (2 * n + 4 * r) * (r + 2 * n)
    elapsed = time.monotonic() - t0
    ok = worst_fid >= 1 - 1e-9 and elapsed < 300
    report(12, ok, f"50 random circuits (n<=3, R<=3): min fidelity "
                   f"{worst_fid:.12f} >= 1 - 1e-9, quantum-generated tables "
                   f"within budget, {elapsed:.1f}s (< 300s)")


def test_criterion_13_error_reduction():
    worst = 0.0
    min_accepted = 10 ** 9
    for trial in range(50):
        stats = factory.reduction_trial(error_rate=0.05, q=20, targets=120,
                                        seed=113_000 + trial)
        worst = max(worst, stats.residual_rate)
        min_accepted = min(min_accepted, stats.accepted)
    ok = worst < 0.05 and min_accepted > 0
    report(13, ok, f"50 trials, q=20, 5% injected: max residual {worst:.4f} "
                   f"< 0.05, min accepted {min_accepted}")


def test_criterion_14_cli_determinism(tmp_path):
    tables = ideal_tables(80, np.random.default_rng(14))
    base_a, base_b = tmp_path / "in-a.json", tmp_path / "in-b.json"
    reports.write_batch_files(tables, base_a, base_b)
    circuit = tmp_path / "c.txt"
    circuit.write_text("wire a0 alice\nwire b0 bob\nAND g0 a0 b0\nOUT g0 both\n")
    qc = tmp_path / "qc.txt"
    qc.write_text("H 0\nT 0\nCNOT 0 1\n")

    def battery(d):
        d.mkdir()
        cmds = [
            ["gen-tables", "--protocol", "nland2", "--n", "30", "--seed", "5",
             "--out-alice", d / "ga.json", "--out-bob", d / "gb.json",
             "--transcripts", d / "runs.jsonl", "--out", d / "gen.json"],
            ["check", "--mode", "onesided", "--in-alice", base_a,
             "--in-bob", base_b, "--k", "20", "--seed", "5",
             "--out", d / "check.json", "--out-alice", d / "ca.json",
             "--out-bob", d / "cb.json"],
            ["combine", "--in-alice", base_a, "--in-bob", base_b, "--k", "2",
             "--out-alice", d / "coma.json", "--out-bob", d / "comb.json",
             "--out", d / "com.json"],
            ["error-reduce", "--curve-out", d / "curve.csv", "--plot",
             d / "curve.png", "--targets", "60", "--q-grid", "1,4,8",
             "--seed", "5", "--out", d / "er.json"],
            ["eval-circuit", "--circuit", circuit, "--alice-bits", "1",
             "--bob-bits", "1", "--in-alice", base_a, "--in-bob", base_b,
             "--out", d / "eval.json"],
            ["ot", "--m0", "0", "--m1", "1", "--b", "0", "--in-alice", base_a,
             "--in-bob", base_b, "--out", d / "ot.json"],
            ["commit", "--bit", "1", "--m", "6", "--seed", "5",
             "--in-alice", base_a, "--in-bob", base_b, "--out", d / "bc.json"],
            ["ns-box", "--e", "0.64", "--samples", "60", "--seed", "5",
             "--in-alice", base_a, "--in-bob", base_b, "--out", d / "ns.json",
             "--samples-out", d / "ns.jsonl"],
            ["holevo-scan", "--samples", "200", "--ancilla", "2", "--seed",
             "5", "--out", d / "scan.csv", "--plot", d / "scan.png",
             "--envelope", "0.1,0.01", "--report", d / "scan.json"],
            ["qhe", "--circuit", qc, "--seed", "5", "--out", d / "qhe.json"],
        ]
        for cmd in cmds:
            assert cli_main([str(c) for c in cmd]) == 0
        return {p.name: p.read_bytes() for p in sorted(d.iterdir())}

    one = battery(tmp_path / "one")
    two = battery(tmp_path / "two")
    ok = one == two and len(one) >= 20
    report(14, ok, f"{len(one)} artifacts from all 10 subcommands, "
                   f"byte-identical across re-runs")
