"""Interactive homomorphic evaluation of Clifford+T circuits on masked qubits.

Bob holds Alice's data only under Pauli masks X^a Z^b whose exponents are
GF(2) affine forms over variables private to Alice (her teleportation and
gadget measurement outcomes); Bob's own measurement outcomes fold into the
forms' constant terms the moment they happen.  Clifford gates update the
forms; each T gate needs a P-dagger correction conditioned on the X-form's
value, obtained by evaluating the form as a shared linear polynomial over
one-time tables and routing the qubit through a teleportation gadget that
applies P-dagger exactly when the shares' XOR is 1.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import quantum as qk
from .mpc import LinearPoly, TablePool, eval_linear_poly
from .quantum import Gate, PureState


class QheError(ValueError):
    pass


@dataclass(frozen=True)
class AffineForm:
    """constant XOR (sum of variables in support) over GF(2)."""

    constant: int = 0
    support: frozenset = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "constant", int(self.constant) & 1)
        object.__setattr__(self, "support", frozenset(self.support))

    @classmethod
    def const(cls, bit: int) -> "AffineForm":
        return cls(bit, frozenset())

    @classmethod
    def var(cls, vid: int) -> "AffineForm":
        return cls(0, frozenset((vid,)))

    def xor(self, other: "AffineForm") -> "AffineForm":
        # Symmetric difference: paired occurrences cancel over GF(2).
        return AffineForm(self.constant ^ other.constant,
                          self.support ^ other.support)

    def xor_const(self, bit: int) -> "AffineForm":
        return AffineForm(self.constant ^ (bit & 1), self.support)

    def evaluate(self, values: dict) -> int:
        v = self.constant
        for vid in self.support:
            v ^= values[vid] & 1
        return v


ZERO_FORM = AffineForm()


@dataclass
class MaskLedger:
    """Per-qubit X/Z mask forms plus the variable ownership registry.

    Only Alice-owned variables exist as ids; Bob-known bits are folded into
    constants at the moment of measurement, so the registry stays all-Alice
    by construction.
    """

    masks: list  # [(x_form, z_form)] per qubit
    owners: dict = field(default_factory=dict)
    next_var: int = 0

    @classmethod
    def fresh(cls, num_qubits: int) -> "MaskLedger":
        return cls(masks=[(ZERO_FORM, ZERO_FORM) for _ in range(num_qubits)])

    def new_alice_var(self) -> int:
        vid = self.next_var
        self.owners[vid] = "alice"
        self.next_var += 1
        return vid

    def alice_vars(self) -> list[int]:
        return sorted(self.owners)

    def check_qubit(self, qubit: int) -> None:
        if not 0 <= qubit < len(self.masks):
            raise QheError(f"qubit {qubit} out of range")


def key_update(ledger: MaskLedger, gate: "CTGate") -> MaskLedger:
    """Clifford coefficient update; global phases are dropped.

    H swaps the forms, P adds the X-form into the Z-form, CNOT mixes
    control/target forms; T must go through the gadget path instead.
    """
    if gate.kind == "T":
        raise QheError("T gates are handled by the gadget step, not key_update")
    if gate.kind == "H":
        q = gate.targets[0]
        ledger.check_qubit(q)
        x, z = ledger.masks[q]
        ledger.masks[q] = (z, x)
    elif gate.kind == "P":
        q = gate.targets[0]
        ledger.check_qubit(q)
        x, z = ledger.masks[q]
        ledger.masks[q] = (x, z.xor(x))
    elif gate.kind == "CNOT":
        c, t = gate.targets
        ledger.check_qubit(c)
        ledger.check_qubit(t)
        xc, zc = ledger.masks[c]
        xt, zt = ledger.masks[t]
        ledger.masks[c] = (xc, zc.xor(zt))
        ledger.masks[t] = (xt.xor(xc), zt)
    else:
        raise QheError(f"unsupported gate {gate.kind!r}")
    return ledger


# ---------------------------------------------------------------- circuits

CT_KINDS = ("H", "P", "T", "CNOT")


@dataclass(frozen=True)
class CTGate:
    kind: str
    targets: tuple[int, ...]

    def __post_init__(self):
        if self.kind not in CT_KINDS:
            raise QheError(f"unknown gate {self.kind!r}")
        want = 2 if self.kind == "CNOT" else 1
        if len(self.targets) != want or len(set(self.targets)) != want:
            raise QheError(f"{self.kind} takes {want} distinct target(s)")


@dataclass(frozen=True)
class CliffordTCircuit:
    num_qubits: int
    gates: tuple[CTGate, ...]

    def __post_init__(self):
        for g in self.gates:
            if any(t >= self.num_qubits or t < 0 for t in g.targets):
                raise QheError(f"gate {g} outside {self.num_qubits} qubits")

    @property
    def t_count(self) -> int:
        return sum(1 for g in self.gates if g.kind == "T")

    @classmethod
    def parse(cls, text: str, num_qubits: Optional[int] = None) -> "CliffordTCircuit":
        gates = []
        hi = -1
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            tok = line.split()
            try:
                targets = tuple(int(t) for t in tok[1:])
                gates.append(CTGate(tok[0].upper(), targets))
            except (ValueError, QheError) as exc:
                raise QheError(f"line {lineno}: {exc}") from None
            hi = max(hi, *targets)
        n = num_qubits if num_qubits is not None else hi + 1
        if n < 1:
            raise QheError("empty circuit needs an explicit qubit count")
        return cls(n, tuple(gates))

    def to_text(self) -> str:
        return "\n".join(
            f"{g.kind} {' '.join(map(str, g.targets))}" for g in self.gates
        ) + ("\n" if self.gates else "")


def simulate_direct(circuit: CliffordTCircuit, state: PureState) -> PureState:
    """Reference statevector evaluation (the oracle for the scheme)."""
    for g in circuit.gates:
        state = qk.apply_gate(state, Gate(g.kind, g.targets))
    return state


def random_ct_circuit(num_qubits: int, num_gates: int,
                      rng: np.random.Generator,
                      max_t: Optional[int] = None) -> CliffordTCircuit:
    gates = []
    t_used = 0
    while len(gates) < num_gates:
        kind = CT_KINDS[rng.integers(4)]
        if kind == "T" and max_t is not None and t_used >= max_t:
            continue
        if kind == "CNOT":
            if num_qubits < 2:
                continue
            targets = tuple(int(v) for v in rng.choice(num_qubits, 2, replace=False))
        else:
            targets = (int(rng.integers(num_qubits)),)
        if kind == "T":
            t_used += 1
        gates.append(CTGate(kind, targets))
    return CliffordTCircuit(num_qubits, tuple(gates))


def tables_needed(circuit: CliffordTCircuit) -> int:
    """Exact table count: one per variable per polynomial, variables growing
    by four per T gate, plus 2n final-mask polynomials."""
    n, r = circuit.num_qubits, circuit.t_count
    total = sum(2 * n + 4 * i for i in range(r))
    total += 2 * n * (2 * n + 4 * r)
    return total


# ---------------------------------------------------------------- gadget

@dataclass
class GadgetResources:
    """Four routing EPR pairs plus the output pair; single use."""

    consumed: bool = False

    def consume(self) -> None:
        if self.consumed:
            raise QheError("gadget resources already consumed")
        self.consumed = True


@dataclass(frozen=True)
class GadgetRecord:
    """Outcome bits of one gadget application.

    Alice's bits are slot-ordered (first Bell measurement, then second); the
    data path runs through the first slot when Bob's share p is 0, through
    the second when p is 1.  Bob's bits are (first hop, output hop).
    """

    alice_slot1: tuple[int, int]
    alice_slot2: tuple[int, int]
    bob_first: tuple[int, int]
    bob_second: tuple[int, int]
    p: int
    q: int

    @property
    def data_slot(self) -> tuple[int, int]:
        return self.alice_slot1 if self.p == 0 else self.alice_slot2

    def net_pauli(self) -> tuple[int, int]:
        """(x_exp, z_exp) of the byproduct on the output qubit, for a
        mask-free input; the P-dagger itself is applied iff p ^ q = 1."""
        j1, k1 = self.bob_first
        j3, k3 = self.bob_second
        j2, k2 = self.data_slot
        g = self.p ^ self.q
        return j1 ^ j2 ^ j3, k1 ^ k2 ^ k3 ^ (g & j1)


def garden_hose(state: PureState, qubit: int, p: int, q: int,
                resources: GadgetResources,
                rng: np.random.Generator) -> tuple[PureState, GadgetRecord]:
    """Route one qubit through the P-dagger-iff-(p XOR q) teleport gadget.

    The qubit hops Bob -> Alice -> Bob through fresh EPR pairs, with Alice
    inserting P-dagger on the data wire exactly when the shares differ; the
    transformed qubit ends up back at the same register index.  Alice's two
    Bell measurements happen regardless of q; the off-path one lands on
    fresh EPR halves, so its outcome bits are uniform coins.
    """
    resources.consume()
    state, (j1, k1) = qk.teleport_qubit(state, qubit, rng)
    if (p ^ q) & 1:
        state = qk.apply_gate(state, Gate("PDAG", (qubit,)))
    state, (j2, k2) = qk.teleport_qubit(state, qubit, rng)
    state, (j3, k3) = qk.teleport_qubit(state, qubit, rng)
    scrap = (int(rng.integers(2)), int(rng.integers(2)))
    data = (j2, k2)
    slot1, slot2 = (data, scrap) if p == 0 else (scrap, data)
    return state, GadgetRecord(slot1, slot2, (j1, k1), (j3, k3), p, q)


# ---------------------------------------------------------------- scheme

@dataclass(frozen=True)
class Scheme1Result:
    output: PureState
    tables_consumed: int
    variable_count: int
    t_count: int
    bob_received: tuple  # (table_id, masked bit) pairs, the full Bob view


class Scheme1Session:
    """One interactive evaluation; strictly sequential rounds."""

    def __init__(self, circuit: CliffordTCircuit, alice_input: PureState,
                 pool: TablePool, rng: np.random.Generator):
        if alice_input.num_qubits != circuit.num_qubits:
            raise QheError("input size does not match circuit")
        self.circuit = circuit
        self.pool = pool
        self.rng = rng
        self.ledger = MaskLedger.fresh(circuit.num_qubits)
        self.alice_values: dict[int, int] = {}
        self.bob_received: list = []
        self.gadget_records: list[GadgetRecord] = []
        # Alice teleports her data to Bob, keeping every correction bit as a
        # private variable; Bob's register is Pauli-masked from the start.
        state = alice_input
        for qubit in range(circuit.num_qubits):
            state, (xb, zb) = qk.teleport_qubit(state, qubit, self.rng)
            vx = self.ledger.new_alice_var()
            vz = self.ledger.new_alice_var()
            self.alice_values[vx] = xb
            self.alice_values[vz] = zb
            self.ledger.masks[qubit] = (AffineForm.var(vx), AffineForm.var(vz))
        self.state = state

    def _eval_form(self, form: AffineForm):
        """Evaluate an affine form as a shared polynomial over every
        registered variable (zero coefficients included, so the messages
        never reveal which variables matter)."""
        ids = self.ledger.alice_vars()
        poly = LinearPoly(
            a=tuple(self.alice_values[v] for v in ids),
            b=tuple(1 if v in form.support else 0 for v in ids),
            c=form.constant)
        messages: list = []
        out = eval_linear_poly(poly, self.pool, messages)
        self.bob_received.extend((tid, a_prime) for tid, a_prime, _ in messages)
        return out

    def apply_gate(self, gate: CTGate) -> None:
        self.state = qk.apply_gate(self.state, Gate(gate.kind, gate.targets))
        if gate.kind == "T":
            self.t_gate_step(gate.targets[0])
        else:
            key_update(self.ledger, gate)

    def t_gate_step(self, qubit: int) -> None:
        """Correct the P byproduct left by a T gate on an X-masked qubit.

        Commuting X^a Z^b through T gives X^a Z^(a+b) P^a up to phase; the
        gadget's P-dagger then cancels P^a and, passing back through the
        X-masks, restores the Z-exponent to b plus a only when the first
        hop's X-byproduct is set.  Hence the rewrite below: x gains the hop
        constants and the data-path variable, z gains its hop constants, the
        other data-path variable, and x conditionally on Bob's first X bit.
        """
        x_form, z_form = self.ledger.masks[qubit]
        shared = self._eval_form(x_form)
        self.state, rec = garden_hose(self.state, qubit, shared.share_a,
                                      shared.share_b, GadgetResources(),
                                      self.rng)
        self.gadget_records.append(rec)
        ids = [self.ledger.new_alice_var() for _ in range(4)]
        for vid, bit in zip(ids, rec.alice_slot1 + rec.alice_slot2):
            self.alice_values[vid] = bit
        vj, vk = (ids[0], ids[1]) if rec.p == 0 else (ids[2], ids[3])
        j1, k1 = rec.bob_first
        j3, k3 = rec.bob_second
        new_x = x_form.xor_const(j1 ^ j3).xor(AffineForm.var(vj))
        new_z = z_form.xor_const(k1 ^ k3).xor(AffineForm.var(vk))
        if j1:
            new_z = new_z.xor(x_form)
        self.ledger.masks[qubit] = (new_x, new_z)

    def tracked_unmasked_state(self) -> PureState:
        """Apply the tracked masks (with variable values substituted) to the
        physical state; equals the true intermediate state up to phase."""
        state = self.state
        for qubit, (x_form, z_form) in enumerate(self.ledger.masks):
            if x_form.evaluate(self.alice_values):
                state = qk.apply_gate(state, Gate("X", (qubit,)))
            if z_form.evaluate(self.alice_values):
                state = qk.apply_gate(state, Gate("Z", (qubit,)))
        return state

    def finish(self) -> Scheme1Result:
        """Final polynomial round plus Bob's mask-blinded teleportation."""
        n = self.circuit.num_qubits
        shares = []
        for qubit in range(n):
            x_form, z_form = self.ledger.masks[qubit]
            shares.append((self._eval_form(x_form), self._eval_form(z_form)))
        state = self.state
        for qubit in range(n):
            state, (jx, jz) = qk.teleport_qubit(state, qubit, self.rng)
            sx, sz = shares[qubit]
            # Bob announces his teleport bits XORed with his shares; Alice
            # adds her shares to recover the full correction exponents.
            if (jx ^ sx.share_b) ^ sx.share_a:
                state = qk.apply_gate(state, Gate("X", (qubit,)))
            if (jz ^ sz.share_b) ^ sz.share_a:
                state = qk.apply_gate(state, Gate("Z", (qubit,)))
        return Scheme1Result(
            output=state,
            tables_consumed=len(self.pool.spent),
            variable_count=self.ledger.next_var,
            t_count=self.circuit.t_count,
            bob_received=tuple(self.bob_received))


def run_scheme1(circuit: CliffordTCircuit, alice_input: PureState,
                pool: TablePool, rng: np.random.Generator) -> Scheme1Result:
    """Evaluate the circuit on Alice's input without unmasking it for Bob."""
    session = Scheme1Session(circuit, alice_input, pool, rng)
    for gate in circuit.gates:
        session.apply_gate(gate)
    return session.finish()
