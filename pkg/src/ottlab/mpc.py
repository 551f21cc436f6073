"""Classical two-party computation driven by precomputed one-time tables.

Implements the nonlocal AND with distributed output, linear polynomial
evaluation, boolean circuit compilation/evaluation, 1-out-of-2 oblivious
transfer, cheat-sensitive bit commitment, and the noisy PR-box sampler.

Every table is strictly one-shot: operations draw from a :class:`TablePool`
that rejects double spending.  All wire messages are masked by fresh table
inputs, so transcripts carry no information about the honest inputs; the
outcome records keep those messages for audits.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .protocols import OneTimeTable

CHEAT_DETECTED = "cheat-detected"
AMBIGUOUS = "ambiguous"


class MpcError(ValueError):
    pass


class TableReuseError(MpcError):
    pass


class TableExhaustedError(MpcError):
    pass


@dataclass(frozen=True)
class DistributedBit:
    share_a: int
    share_b: int

    @property
    def value(self) -> int:
        return self.share_a ^ self.share_b


class TablePool:
    """Hands out tables in id order and rejects any double spend."""

    def __init__(self, tables: Sequence[OneTimeTable]):
        self.tables = sorted(tables, key=lambda t: t.id)
        ids = [t.id for t in self.tables]
        if len(ids) != len(set(ids)):
            raise MpcError("duplicate table ids in pool")
        self._next = 0
        self.spent: set[int] = set()

    def take(self) -> OneTimeTable:
        if self._next >= len(self.tables):
            raise TableExhaustedError("table budget exhausted")
        t = self.tables[self._next]
        self._next += 1
        self.spent.add(t.id)
        return t

    def mark_spent(self, table: OneTimeTable) -> None:
        if table.id in self.spent:
            raise TableReuseError(f"table {table.id} already spent")
        self.spent.add(table.id)

    @property
    def remaining(self) -> int:
        return len(self.tables) - self._next


@dataclass(frozen=True)
class NandOutcome:
    """Distributed AND result plus the two masked wire messages."""

    share_a: int
    share_b: int
    a_prime: int  # Alice announced a ^ x
    b_prime: int  # Bob announced b ^ y
    table_id: int

    @property
    def value(self) -> int:
        return self.share_a ^ self.share_b

    def bit(self) -> DistributedBit:
        return DistributedBit(self.share_a, self.share_b)


def nonlocal_and(a: int, b: int, table: OneTimeTable,
                 pool: Optional[TablePool] = None) -> NandOutcome:
    """Compute a AND b with XOR-shared output from one fresh table."""
    if pool is not None:
        pool.mark_spent(table)
    a_prime = a ^ table.x
    b_prime = b ^ table.y
    share_a = (table.x & b_prime) ^ table.e
    share_b = (a_prime & b) ^ table.f
    return NandOutcome(share_a, share_b, a_prime, b_prime, table.id)


@dataclass(frozen=True)
class LinearPoly:
    """z = c + sum_j a_j b_j (mod 2); a on Alice's side, c and b on Bob's."""

    a: tuple[int, ...]
    b: tuple[int, ...]
    c: int = 0

    def __post_init__(self):
        if len(self.a) != len(self.b) or len(self.a) < 1:
            raise MpcError("polynomial needs matching a/b vectors, n >= 1")

    @property
    def n(self) -> int:
        return len(self.a)

    def direct_value(self) -> int:
        v = self.c
        for aj, bj in zip(self.a, self.b):
            v ^= aj & bj
        return v


def eval_linear_poly(poly: LinearPoly, pool: TablePool,
                     messages: Optional[list] = None) -> DistributedBit:
    """One table per term; Bob folds the constant into his share."""
    if pool.remaining < poly.n:
        raise TableExhaustedError(
            f"polynomial needs {poly.n} tables, pool has {pool.remaining}")
    sa = 0
    sb = poly.c
    for aj, bj in zip(poly.a, poly.b):
        nand = nonlocal_and(aj, bj, pool.take())
        sa ^= nand.share_a
        sb ^= nand.share_b
        if messages is not None:
            messages.append((nand.table_id, nand.a_prime, nand.b_prime))
    return DistributedBit(sa, sb)


# ---------------------------------------------------------------- circuits

OWNERS = ("alice", "bob", "distributed", "const1")
RECIPIENTS = ("alice", "bob", "both")


@dataclass(frozen=True)
class CircuitGate:
    kind: str  # AND | XOR
    out: str
    in1: str
    in2: str


@dataclass(frozen=True)
class BooleanCircuit:
    """Gate list over owned wires; netlist order is the topological order."""

    wires: tuple[tuple[str, str], ...]       # (id, owner) declarations
    gates: tuple[CircuitGate, ...]
    outputs: tuple[tuple[str, str], ...]     # (id, recipient)

    def __post_init__(self):
        defined = set()
        for wid, owner in self.wires:
            if owner not in OWNERS:
                raise MpcError(f"unknown owner {owner!r} for wire {wid}")
            if wid in defined:
                raise MpcError(f"wire {wid} declared twice")
            defined.add(wid)
        for g in self.gates:
            if g.kind not in ("AND", "XOR"):
                raise MpcError(f"unknown gate kind {g.kind!r}")
            for w in (g.in1, g.in2):
                if w not in defined:
                    raise MpcError(f"gate input {w} used before definition")
            if g.out in defined:
                raise MpcError(f"wire {g.out} redefined")
            defined.add(g.out)
        for wid, rec in self.outputs:
            if wid not in defined:
                raise MpcError(f"output wire {wid} undefined")
            if rec not in RECIPIENTS:
                raise MpcError(f"unknown recipient {rec!r}")

    @classmethod
    def parse(cls, text: str) -> "BooleanCircuit":
        wires, gates, outputs = [], [], []
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            tok = line.split()
            kind = tok[0].lower()
            try:
                if kind == "wire":
                    wires.append((tok[1], tok[2].lower()))
                elif kind in ("and", "xor"):
                    gates.append(CircuitGate(kind.upper(), tok[1], tok[2], tok[3]))
                elif kind == "out":
                    outputs.append((tok[1], tok[2].lower()))
                else:
                    raise MpcError(f"line {lineno}: unknown directive {tok[0]!r}")
            except IndexError:
                raise MpcError(f"line {lineno}: malformed {kind!r} line") from None
        return cls(tuple(wires), tuple(gates), tuple(outputs))

    def to_text(self) -> str:
        lines = [f"wire {w} {o}" for w, o in self.wires]
        lines += [f"{g.kind} {g.out} {g.in1} {g.in2}" for g in self.gates]
        lines += [f"OUT {w} {r}" for w, r in self.outputs]
        return "\n".join(lines) + "\n"


# A wire tag is a pair (kind_a, kind_b), one entry per share.  A kind is
# either 'v' (private variable) or ('c', bit) (publicly known constant,
# e.g. from const1 and XORs of constants).  Tables are needed exactly for
# cross products of two private shares on opposite sides.

_C0 = ("c", 0)


def _input_tag(owner: str):
    if owner == "alice":
        return ("v", _C0)
    if owner == "bob":
        return (_C0, "v")
    if owner == "distributed":
        return ("v", "v")
    return (("c", 1), _C0)  # const1


def _xor_kind(ku, kv):
    if ku == "v" or kv == "v":
        return "v"
    return ("c", ku[1] ^ kv[1])


def _xor_tag(u, v):
    return (_xor_kind(u[0], v[0]), _xor_kind(u[1], v[1]))


def _term_route(ku, kv, u_side: str, v_side: str):
    """Route one product term: None (vanishes), 'a'/'b' (local), 'table'."""
    if ku == _C0 or kv == _C0:
        return None
    if ku == "v" and kv == "v":
        return "table" if u_side != v_side else u_side
    # A public constant is known to both parties; the private factor's owner
    # (or Alice, when both are public) computes the product locally.
    if ku == "v":
        return u_side
    if kv == "v":
        return v_side
    return "a"


_AND_TERMS = (("a", "a"), ("b", "b"), ("a", "b"), ("b", "a"))


def _and_routes(u, v):
    routes = []
    for us, vs in _AND_TERMS:
        ku = u[0 if us == "a" else 1]
        kv = v[0 if vs == "a" else 1]
        r = _term_route(ku, kv, us, vs)
        if r is not None:
            routes.append((us, vs, r))
    return tuple(routes)


def _and_tag(u, v):
    routes = _and_routes(u, v)
    if any(r == "table" for _, _, r in routes):
        return ("v", "v")
    kinds = {"a": _C0, "b": _C0}
    for us, vs, r in routes:
        ku = u[0 if us == "a" else 1]
        kv = v[0 if vs == "a" else 1]
        if ku == "v" or kv == "v":
            kinds[r] = "v"
        elif kinds[r] != "v":
            kinds[r] = ("c", kinds[r][1] ^ (ku[1] & kv[1]))
    return (kinds["a"], kinds["b"])


@dataclass(frozen=True)
class PlanStep:
    gate: CircuitGate
    routes: tuple  # (u_side, v_side, 'a'|'b'|'table') per surviving product

    @property
    def tables_needed(self) -> int:
        return sum(1 for _, _, r in self.routes if r == "table")


@dataclass(frozen=True)
class CompiledPlan:
    circuit: BooleanCircuit
    tags: dict
    steps: tuple[PlanStep, ...]
    table_budget: int


def compile_circuit(circuit: BooleanCircuit) -> CompiledPlan:
    """Static pass fixing each gate's decomposition and the table budget.

    Both parties can derive the same plan (and hence the same table
    allocation order) from the public circuit alone: XOR gates are free, an
    AND costs one table per cross product of two private opposite-side
    shares; products involving a public constant stay local.
    """
    tags = {wid: _input_tag(owner) for wid, owner in circuit.wires}
    steps = []
    budget = 0
    for g in circuit.gates:
        u, v = tags[g.in1], tags[g.in2]
        if g.kind == "XOR":
            tags[g.out] = _xor_tag(u, v)
            steps.append(PlanStep(g, ()))
        else:
            routes = _and_routes(u, v)
            tags[g.out] = _and_tag(u, v)
            step = PlanStep(g, routes)
            steps.append(step)
            budget += step.tables_needed
    return CompiledPlan(circuit, tags, tuple(steps), budget)


@dataclass(frozen=True)
class EvalResult:
    outputs: dict
    tables_used: int
    wire_messages: tuple  # every masked bit that crossed the channel


def eval_circuit(plan: CompiledPlan, alice_inputs: dict, bob_inputs: dict,
                 pool: TablePool) -> EvalResult:
    """Evaluate the compiled circuit on shares, consuming tables in plan order."""
    circuit = plan.circuit
    shares: dict[str, tuple[int, int]] = {}
    for wid, owner in circuit.wires:
        if owner == "alice":
            shares[wid] = (_need(alice_inputs, wid), 0)
        elif owner == "bob":
            shares[wid] = (0, _need(bob_inputs, wid))
        elif owner == "const1":
            shares[wid] = (1, 0)
        else:
            shares[wid] = (_need(alice_inputs, wid), _need(bob_inputs, wid))
    messages = []
    used = 0
    for step in plan.steps:
        g = step.gate
        (ua, ub), (va, vb) = shares[g.in1], shares[g.in2]
        if g.kind == "XOR":
            shares[g.out] = (ua ^ va, ub ^ vb)
            continue
        out_a = out_b = 0
        for us, vs, route in step.routes:
            pu = ua if us == "a" else ub
            pv = va if vs == "a" else vb
            if route == "table":
                alice_bit = pu if us == "a" else pv
                bob_bit = pv if us == "a" else pu
                nand = nonlocal_and(alice_bit, bob_bit, pool.take())
                out_a ^= nand.share_a
                out_b ^= nand.share_b
                messages.append((nand.table_id, nand.a_prime, nand.b_prime))
                used += 1
            elif route == "a":
                out_a ^= pu & pv
            else:
                out_b ^= pu & pv
        shares[g.out] = (out_a, out_b)
    outputs = {"alice": {}, "bob": {}}
    for wid, rec in circuit.outputs:
        sa, sb = shares[wid]
        value = sa ^ sb
        if rec in ("alice", "both"):
            outputs["alice"][wid] = value
            messages.append(("out", wid, "bob_share", sb))
        if rec in ("bob", "both"):
            outputs["bob"][wid] = value
            messages.append(("out", wid, "alice_share", sa))
    return EvalResult(outputs, used, tuple(messages))


def _need(inputs: dict, wid: str) -> int:
    if wid not in inputs:
        raise MpcError(f"missing input for wire {wid}")
    return int(inputs[wid]) & 1


def direct_eval(circuit: BooleanCircuit, alice_inputs: dict,
                bob_inputs: dict) -> dict:
    """Reference evaluator ignoring ownership (the correctness oracle)."""
    values = {}
    for wid, owner in circuit.wires:
        if owner == "alice":
            values[wid] = _need(alice_inputs, wid)
        elif owner == "bob":
            values[wid] = _need(bob_inputs, wid)
        elif owner == "const1":
            values[wid] = 1
        else:
            values[wid] = _need(alice_inputs, wid) ^ _need(bob_inputs, wid)
    for g in circuit.gates:
        u, v = values[g.in1], values[g.in2]
        values[g.out] = (u & v) if g.kind == "AND" else (u ^ v)
    return {wid: values[wid] for wid, _ in circuit.outputs}


def random_circuit(num_gates: int, rng: np.random.Generator,
                   n_alice: int = 2, n_bob: int = 2,
                   n_dist: int = 1) -> BooleanCircuit:
    """Random well-formed circuit for equivalence testing."""
    wires = [(f"a{i}", "alice") for i in range(n_alice)]
    wires += [(f"b{i}", "bob") for i in range(n_bob)]
    wires += [(f"d{i}", "distributed") for i in range(n_dist)]
    wires += [("one", "const1")]
    names = [w for w, _ in wires]
    gates = []
    for k in range(num_gates):
        kind = "AND" if rng.random() < 0.5 else "XOR"
        in1, in2 = rng.choice(names, size=2, replace=True)
        out = f"g{k}"
        gates.append(CircuitGate(kind, out, str(in1), str(in2)))
        names.append(out)
    recipient = ("alice", "bob", "both")[int(rng.integers(3))]
    outputs = [(names[-1], recipient)]
    return BooleanCircuit(tuple(wires), tuple(gates), tuple(outputs))


# ---------------------------------------------------------------- OT

@dataclass(frozen=True)
class OtOutcome:
    bob_output: int
    alice_saw: tuple    # messages visible to Alice (no b dependence)
    bob_saw: tuple      # messages visible to Bob


def ot_1of2(m0: int, m1: int, b: int, table: OneTimeTable,
            pool: Optional[TablePool] = None) -> OtOutcome:
    """1-out-of-2 OT from a single table: Bob learns m_b and nothing else."""
    nand = nonlocal_and(m0 ^ m1, b, table, pool)
    g = nand.share_a
    h = nand.share_b
    final = m0 ^ g
    return OtOutcome(bob_output=final ^ h,
                     alice_saw=(nand.b_prime,),
                     bob_saw=(nand.a_prime, final))


# ---------------------------------------------------------------- commitment

@dataclass(frozen=True)
class CommitmentState:
    m: int
    committed: int                 # Alice's bit (held privately)
    bob_inputs: tuple[int, ...]    # random nonzero string
    alice_shares: tuple[int, ...]
    bob_shares: tuple[int, ...]
    a_primes: tuple[int, ...]
    b_primes: tuple[int, ...]


def bit_commit(b: int, m: int, pool: TablePool,
               rng: np.random.Generator,
               bob_inputs: Optional[Sequence[int]] = None) -> CommitmentState:
    """Commit phase: m nonlocal ANDs of b against Bob's random nonzero string."""
    if bob_inputs is None:
        while True:
            u = tuple(int(v) for v in rng.integers(0, 2, size=m))
            if any(u):
                break
    else:
        u = tuple(int(v) & 1 for v in bob_inputs)
        if len(u) != m:
            raise MpcError("bob_inputs length mismatch")
        if not any(u):
            raise MpcError("Bob's input string must be nonzero")
    sa, sb, ap, bp = [], [], [], []
    for j in range(m):
        nand = nonlocal_and(b, u[j], pool.take())
        sa.append(nand.share_a)
        sb.append(nand.share_b)
        ap.append(nand.a_prime)
        bp.append(nand.b_prime)
    return CommitmentState(m, b, u, tuple(sa), tuple(sb), tuple(ap), tuple(bp))


def bit_reveal(state: CommitmentState,
               claimed: Optional[Sequence[int]] = None):
    """Reveal phase: Bob reconstructs the AND results and decides.

    ``claimed`` is the string Alice sends; default is her honest shares.
    Returns 0, 1, CHEAT_DETECTED, or AMBIGUOUS (only reachable if a state
    with an all-zero Bob string was constructed by hand).
    """
    if claimed is None:
        claimed = state.alice_shares
    if len(claimed) != state.m:
        raise MpcError("reveal string length mismatch")
    d = tuple((int(c) ^ s) & 1 for c, s in zip(claimed, state.bob_shares))
    matches_zero = not any(d)
    matches_u = d == state.bob_inputs
    if matches_zero and matches_u:
        return AMBIGUOUS
    if matches_zero:
        return 0
    if matches_u:
        return 1
    return CHEAT_DETECTED


# ---------------------------------------------------------------- PR box

@dataclass(frozen=True)
class NsBoxSample:
    a: int
    b: int
    out_a: int
    out_b: int
    mode: str
    # In one-sided mode Bob knows his pre-flip bit and can reconstruct the
    # E=1 correlation; surfaced rather than prevented.
    bob_can_recover_pr_box: bool


def ns_box_sample(a: int, b: int, e_param: float, mode: str,
                  table: OneTimeTable, rng: np.random.Generator,
                  pool: Optional[TablePool] = None) -> NsBoxSample:
    """One sample of the noisy PR-box family P(A xor B = ab) = (1+E)/2."""
    if not 0.0 <= e_param <= 1.0:
        raise MpcError("E must lie in [0, 1]")
    if mode not in ("one-sided", "symmetric"):
        raise MpcError(f"unknown mode {mode!r}")
    nand = nonlocal_and(a, b, table, pool)
    out_a, out_b = nand.share_a, nand.share_b
    if mode == "one-sided":
        if rng.random() < 0.5 * (1.0 - e_param):
            out_b ^= 1
    else:
        p = 0.5 * (1.0 - np.sqrt(e_param))
        if rng.random() < p:
            out_a ^= 1
        if rng.random() < p:
            out_b ^= 1
    return NsBoxSample(a, b, out_a, out_b, mode,
                       bob_can_recover_pr_box=(mode == "one-sided"))
