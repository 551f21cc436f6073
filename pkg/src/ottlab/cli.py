"""Command-line harness: reproducible scenario runs over all toolkit layers.

Every subcommand takes ``--seed`` (falling back to a ``--config`` JSON file,
then the OTTLAB_SEED environment variable, then 0) and derives all
randomness through labeled substreams, so re-running a command with the
same arguments reproduces its artifacts byte for byte.

Modeled aborts (a checking party refusing a batch) exit 0 with
``"outcome": "abort"`` in the report; only invalid configuration exits
nonzero, with a JSON error record on stderr.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import factory, lab, mpc, protocols, qhe, reports
from .seeds import substream


class CliError(ValueError):
    pass


def _strategy(name: str, role: str) -> protocols.AdversaryStrategy:
    from .quantum import Gate, PureState
    from . import quantum as qk
    if name == "honest":
        return protocols.honest(role)
    if name == "curious":
        return protocols.honest_but_curious(role)
    if name == "fixed-zx":
        if role != "bob":
            raise CliError("fixed-zx is a Bob strategy")
        return protocols.fixed_measurement("bob", {0: "Z", 1: "X"})
    if name == "entangled-cheat":
        if role != "alice":
            raise CliError("entangled-cheat is an Alice strategy")
        state = PureState(2, np.array([0.5, 0.5, 0.5, -0.5], dtype=complex))
        return protocols.entangled_input(state)
    if name == "force-x":
        if role != "bob":
            raise CliError("force-x is a Bob strategy")
        state = qk.apply_gate(PureState.from_bits([0, 0, 0, 0]),
                              Gate("H", (1,)))
        return protocols.entangled_input(state, role="bob")
    if name == "keep-zeros":
        return protocols.declare_failure(role, lambda rec: any(rec[1]))
    raise CliError(f"unknown adversary {name!r}")


STRATEGIES = ("honest", "curious", "fixed-zx", "entangled-cheat", "force-x",
              "keep-zeros")


# ---------------------------------------------------------------- handlers

def cmd_gen_tables(args) -> int:
    alice = _strategy(args.adversary_a, "alice")
    bob = _strategy(args.adversary_b, "bob")
    noise = protocols.NoiseModel(args.noise, args.fail)
    tables, transcripts = protocols.generate_batch(
        args.protocol, args.n, alice, bob, noise, args.seed)
    reports.write_batch_files(tables, args.out_alice, args.out_bob)
    if args.transcripts:
        reports.write_jsonl(args.transcripts,
                            (reports.transcript_record(t) for t in transcripts))
    failures = sum(t.aborted for t in transcripts)
    wrong = sum(not t.is_correct for t in tables)
    report = {
        "outcome": "ok",
        "protocol": args.protocol,
        "requested": args.n,
        "generated": len(tables),
        "channel_failures": failures,
        "incorrect_tables": wrong,
        "seed": args.seed,
    }
    if args.out:
        reports.write_json(args.out, report)
    print(json.dumps(report, sort_keys=True))
    return 0


def cmd_check(args) -> int:
    batch = reports.read_batch_files(args.in_alice, args.in_bob)
    if args.mode == "onesided":
        cfg = factory.CheckConfig(m=len(batch), k=args.k,
                                  threshold=args.threshold, seed=args.seed)
        outcome = factory.check_onesided(batch, cfg)
    else:
        cfg = factory.CheckConfig(m=len(batch), k_a=args.k_a, k_b=args.k_b,
                                  threshold=args.threshold, seed=args.seed)
        outcome = factory.check_twosided(batch, cfg)
    report = {
        "outcome": "abort" if outcome.aborted else "ok",
        "initiator": outcome.initiator,
        "failures": outcome.failures,
        "checked": outcome.checked,
        "cheat_rate": outcome.cheat_rate,
        "cheat_rate_interval": list(outcome.cheat_rate_interval),
        "survivors": len(outcome.passed),
        "seed": args.seed,
    }
    if args.out:
        reports.write_json(args.out, report)
    if args.out_alice and args.out_bob:
        reports.write_batch_files(outcome.passed, args.out_alice, args.out_bob)
    print(json.dumps(report, sort_keys=True))
    return 0


def cmd_combine(args) -> int:
    batch = reports.read_batch_files(args.in_alice, args.in_bob)
    spec = factory.groups_by_bob_bit(batch, args.k)
    combined = factory.combine_tables(batch, spec)
    reports.write_batch_files(combined, args.out_alice, args.out_bob)
    report = {"outcome": "ok", "groups": len(spec.groups),
              "group_size": args.k, "combined_tables": len(combined),
              "leakage_bits": lab.combined_table_leakage(args.k)}
    if args.out:
        reports.write_json(args.out, report)
    print(json.dumps(report, sort_keys=True))
    return 0


def cmd_error_reduce(args) -> int:
    if args.curve_out:
        qs = [int(v) for v in args.q_grid.split(",")]
        stats = [factory.reduction_trial(args.error_rate, q, args.targets,
                                         args.seed, attack=args.attack or None)
                 for q in qs]
        reports.write_reduction_csv(args.curve_out, stats)
        if args.plot:
            reports.plot_reduction_curve(stats, args.plot)
        report = {"outcome": "ok",
                  "curve": [reports.to_jsonable(s) for s in stats]}
    else:
        batch = reports.read_batch_files(args.in_alice, args.in_bob)
        group = args.q + 1
        accepted = []
        outcomes = []
        for lo in range(0, len(batch) - group + 1, group):
            chunk = batch[lo:lo + group]
            spec = factory.ErrorReduceSpec(chunk[0].id,
                                           tuple(t.id for t in chunk[1:]))
            res = factory.error_reduce(chunk, spec)
            outcomes.append({"target": res.target_id,
                             "accepted": res.accepted,
                             "checks_used": res.checks_used})
            if res.accepted:
                accepted.append(chunk[0])
        if args.out_alice and args.out_bob:
            reports.write_batch_files(accepted, args.out_alice, args.out_bob)
        report = {"outcome": "ok", "q": args.q, "targets": len(outcomes),
                  "accepted": len(accepted), "details": outcomes}
    if args.out:
        reports.write_json(args.out, report)
    print(json.dumps({k: v for k, v in report.items() if k != "details"},
                     sort_keys=True))
    return 0


def _circuit_inputs(circuit, alice_bits, bob_bits):
    alice, bob = {}, {}
    ia = ib = 0
    try:
        for wid, owner in circuit.wires:
            if owner in ("alice", "distributed"):
                alice[wid] = int(alice_bits[ia]); ia += 1
            if owner in ("bob", "distributed"):
                bob[wid] = int(bob_bits[ib]); ib += 1
    except IndexError:
        raise CliError("not enough input bits for the circuit wires") from None
    if ia != len(alice_bits) or ib != len(bob_bits):
        raise CliError("too many input bits for the circuit wires")
    return alice, bob


def cmd_eval_circuit(args) -> int:
    with open(args.circuit) as fh:
        circuit = mpc.BooleanCircuit.parse(fh.read())
    plan = mpc.compile_circuit(circuit)
    tables = reports.read_batch_files(args.in_alice, args.in_bob)
    alice, bob = _circuit_inputs(circuit, args.alice_bits, args.bob_bits)
    result = mpc.eval_circuit(plan, alice, bob, mpc.TablePool(tables))
    report = {"outcome": "ok", "table_budget": plan.table_budget,
              "tables_used": result.tables_used,
              "outputs": result.outputs}
    if args.out:
        reports.write_json(args.out, report)
    print(json.dumps(report, sort_keys=True))
    return 0


def cmd_ot(args) -> int:
    tables = reports.read_batch_files(args.in_alice, args.in_bob)
    if not tables:
        raise CliError("need at least one table")
    out = mpc.ot_1of2(args.m0, args.m1, args.b, tables[0])
    report = {"outcome": "ok", "bob_output": out.bob_output,
              "alice_saw": list(out.alice_saw), "bob_saw": list(out.bob_saw)}
    if args.out:
        reports.write_json(args.out, report)
    print(json.dumps(report, sort_keys=True))
    return 0


def cmd_commit(args) -> int:
    tables = reports.read_batch_files(args.in_alice, args.in_bob)
    pool = mpc.TablePool(tables)
    rng = substream(args.seed, "commit")
    state = mpc.bit_commit(args.bit, args.m, pool, rng)
    claimed = None
    if args.claim:
        claimed = tuple(int(c) for c in args.claim)
    decision = mpc.bit_reveal(state, claimed)
    report = {"outcome": "ok", "committed": args.bit, "m": args.m,
              "decision": decision, "seed": args.seed}
    if args.out:
        reports.write_json(args.out, report)
    print(json.dumps(report, sort_keys=True))
    return 0


def cmd_ns_box(args) -> int:
    tables = reports.read_batch_files(args.in_alice, args.in_bob)
    if len(tables) < args.samples:
        raise CliError(f"need {args.samples} tables, files hold {len(tables)}")
    rng = substream(args.seed, "ns-box")
    samples = []
    hits = 0
    marg_a = marg_b = 0
    for i in range(args.samples):
        a, b = int(rng.integers(2)), int(rng.integers(2))
        s = mpc.ns_box_sample(a, b, args.e, args.mode, tables[i], rng)
        samples.append(s)
        hits += (s.out_a ^ s.out_b) == (a & b)
        marg_a += s.out_a
        marg_b += s.out_b
    report = {
        "outcome": "ok", "e": args.e, "mode": args.mode,
        "samples": args.samples,
        "success_rate": hits / args.samples,
        "expected_success": 0.5 * (1 + args.e),
        "marginal_a": marg_a / args.samples,
        "marginal_b": marg_b / args.samples,
        "bob_can_recover_pr_box": args.mode == "one-sided",
        "seed": args.seed,
    }
    if args.samples_out:
        reports.write_jsonl(args.samples_out,
                            (reports.to_jsonable(s) for s in samples),
                            header="# ottlab ns-box samples v1")
    if args.out:
        reports.write_json(args.out, report)
    print(json.dumps(report, sort_keys=True))
    return 0


def cmd_holevo_scan(args) -> int:
    points, summary = lab.tradeoff_scan(args.samples, args.ancilla, args.seed)
    reports.write_scan_csv(args.out, points)
    report = {"outcome": "ok", "samples": summary.samples,
              "ancilla": summary.ancilla, "max_sum": summary.max_sum,
              "argmax_seed": summary.argmax_seed, "seed": args.seed}
    if args.envelope:
        grid = [float(v) for v in args.envelope.split(",")]
        report["envelope"] = [reports.to_jsonable(b)
                              for b in lab.f_envelope(points, grid)]
    if args.plot:
        reports.plot_scan(points, args.plot)
    if args.report:
        reports.write_json(args.report, report)
    print(json.dumps({k: v for k, v in report.items() if k != "envelope"},
                     sort_keys=True))
    return 0


def cmd_qhe(args) -> int:
    from .quantum import fidelity, haar_state
    with open(args.circuit) as fh:
        circuit = qhe.CliffordTCircuit.parse(fh.read())
    budget = qhe.tables_needed(circuit)
    if args.in_alice and args.in_bob:
        tables = reports.read_batch_files(args.in_alice, args.in_bob)
    else:
        tables, _ = protocols.generate_batch(
            "nland", budget, protocols.honest("alice"),
            protocols.honest("bob"), protocols.NOISELESS,
            args.seed)
    rng = substream(args.seed, "qhe")
    state = haar_state(circuit.num_qubits, rng)
    result = qhe.run_scheme1(circuit, state, mpc.TablePool(tables), rng)
    fid = fidelity(result.output, qhe.simulate_direct(circuit, state))
    n, r = circuit.num_qubits, circuit.t_count
    report = {
        "outcome": "ok",
        "fidelity": fid,
        "fidelity_ok": bool(fid >= 1 - 1e-9),
        "tables_consumed": result.tables_consumed,
        "table_bound": (2 * n + 4 * r) * (r + 2 * n),
        "variables": result.variable_count,
        "t_count": r,
        "qubits": n,
        "seed": args.seed,
    }
    if args.out:
        reports.write_json(args.out, report)
    print(json.dumps(report, sort_keys=True))
    return 0


# ---------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(
        prog="ottlab",
        description="quantum one-time-table simulator and analysis toolkit")
    top.add_argument("--config", help="JSON file with default option values")
    sub = top.add_subparsers(dest="command", required=True)

    def new(name, help_, fn):
        p = sub.add_parser(name, help=help_)
        p.set_defaults(handler=fn)
        p.add_argument("--seed", type=int, default=None,
                       help="master seed (default: $OTTLAB_SEED or 0)")
        return p

    p = new("gen-tables", "generate a table batch via a quantum protocol",
            cmd_gen_tables)
    p.add_argument("--protocol", choices=sorted(protocols.PROTOCOLS), required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--adversary-a", choices=STRATEGIES, default="honest")
    p.add_argument("--adversary-b", choices=STRATEGIES, default="honest")
    p.add_argument("--noise", type=float, default=0.0,
                   help="per-qubit depolarizing probability")
    p.add_argument("--fail", type=float, default=0.0,
                   help="per-run declared-loss probability")
    p.add_argument("--out-alice", required=True)
    p.add_argument("--out-bob", required=True)
    p.add_argument("--transcripts", help="JSONL transcript output")
    p.add_argument("--out", help="JSON summary output")

    p = new("check", "consume a batch through a checking protocol", cmd_check)
    p.add_argument("--mode", choices=("onesided", "twosided"), required=True)
    p.add_argument("--in-alice", required=True)
    p.add_argument("--in-bob", required=True)
    p.add_argument("--k", type=int)
    p.add_argument("--k-a", type=int)
    p.add_argument("--k-b", type=int)
    p.add_argument("--threshold", type=int, default=0)
    p.add_argument("--out")
    p.add_argument("--out-alice")
    p.add_argument("--out-bob")

    p = new("combine", "XOR-combine same-y tables in groups of k", cmd_combine)
    p.add_argument("--in-alice", required=True)
    p.add_argument("--in-bob", required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--out-alice", required=True)
    p.add_argument("--out-bob", required=True)
    p.add_argument("--out")

    p = new("error-reduce", "single-target error detection (batch or curve)",
            cmd_error_reduce)
    p.add_argument("--in-alice")
    p.add_argument("--in-bob")
    p.add_argument("--q", type=int, default=20)
    p.add_argument("--out-alice")
    p.add_argument("--out-bob")
    p.add_argument("--out")
    p.add_argument("--curve-out", help="CSV path; switches to Monte Carlo mode")
    p.add_argument("--plot", help="PNG path for the measured curve")
    p.add_argument("--error-rate", type=float, default=0.05)
    p.add_argument("--targets", type=int, default=200)
    p.add_argument("--q-grid", default="1,2,4,8,16,20")
    p.add_argument("--attack", choices=("", "guess"), default="")

    p = new("eval-circuit", "evaluate a boolean circuit over tables",
            cmd_eval_circuit)
    p.add_argument("--circuit", required=True)
    p.add_argument("--alice-bits", default="")
    p.add_argument("--bob-bits", default="")
    p.add_argument("--in-alice", required=True)
    p.add_argument("--in-bob", required=True)
    p.add_argument("--out")

    p = new("ot", "1-out-of-2 oblivious transfer from one table", cmd_ot)
    p.add_argument("--m0", type=int, choices=(0, 1), required=True)
    p.add_argument("--m1", type=int, choices=(0, 1), required=True)
    p.add_argument("--b", type=int, choices=(0, 1), required=True)
    p.add_argument("--in-alice", required=True)
    p.add_argument("--in-bob", required=True)
    p.add_argument("--out")

    p = new("commit", "cheat-sensitive bit commitment over m tables",
            cmd_commit)
    p.add_argument("--bit", type=int, choices=(0, 1), required=True)
    p.add_argument("--m", type=int, default=8)
    p.add_argument("--claim", help="reveal string override (cheating Alice)")
    p.add_argument("--in-alice", required=True)
    p.add_argument("--in-bob", required=True)
    p.add_argument("--out")

    p = new("ns-box", "sample the noisy PR-box family", cmd_ns_box)
    p.add_argument("--e", type=float, required=True)
    p.add_argument("--mode", choices=("one-sided", "symmetric"),
                   default="symmetric")
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--in-alice", required=True)
    p.add_argument("--in-bob", required=True)
    p.add_argument("--samples-out")
    p.add_argument("--out")

    p = new("holevo-scan", "tradeoff scatter over Haar-random send states",
            cmd_holevo_scan)
    p.add_argument("--samples", type=int, default=10000)
    p.add_argument("--ancilla", type=int, choices=(0, 2), default=2)
    p.add_argument("--out", required=True, help="CSV output path")
    p.add_argument("--plot", help="PNG scatter output")
    p.add_argument("--envelope", help="comma-separated eps grid for f(eps)")
    p.add_argument("--report", help="JSON summary output")

    p = new("qhe", "homomorphic Clifford+T evaluation over tables", cmd_qhe)
    p.add_argument("--circuit", required=True)
    p.add_argument("--in-alice")
    p.add_argument("--in-bob")
    p.add_argument("--out")

    return top


def _apply_config(args: argparse.Namespace) -> None:
    cfg = {}
    if args.config:
        with open(args.config) as fh:
            cfg = json.load(fh)
        if not isinstance(cfg, dict):
            raise CliError("config file must hold a JSON object")
    for key, value in cfg.items():
        attr = key.replace("-", "_")
        if getattr(args, attr, None) is None:
            setattr(args, attr, value)
    if args.seed is None:
        args.seed = int(os.environ.get("OTTLAB_SEED", "0"))


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _apply_config(args)
        return args.handler(args)
    except (CliError, ValueError, OSError) as exc:
        sys.stderr.write(json.dumps(
            {"error": str(exc), "kind": type(exc).__name__}) + "\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
