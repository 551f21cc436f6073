"""State machines for the quantum one-time-table generation protocols.

Three generators are provided:

* ``run_nland``   two-message protocol: Alice sends two encoded qubits, Bob
  applies a CNOT keyed to his input plus random Pauli masks and returns them.
* ``run_nland3``  one-message protocol: Bob sends a four-qubit stabilizer
  state plus one classical bit; Alice measures.
* ``run_nland2``  entanglement-based variant: remote state preparation over
  EPR pairs followed by teleportation with withheld correction bits.

Each run takes two :class:`AdversaryStrategy` objects, a :class:`NoiseModel`
and an explicit RNG, and yields an :class:`OneTimeTable` (or ``None`` on a
declared failure) plus a transcript.  Honest, noiseless runs always satisfy
``e XOR f == x AND y``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import quantum as qk
from .quantum import Gate, PureState
from .seeds import substream

PAULI_KINDS = (None, "X", "Y", "Z")  # uniform channel noise draws from these


class ProtocolError(ValueError):
    pass


@dataclass(frozen=True)
class OneTimeTable:
    """Four-bit correlation split across the parties: e XOR f = x AND y."""

    x: int
    y: int
    e: int
    f: int
    id: int

    @property
    def is_correct(self) -> bool:
        return (self.e ^ self.f) == (self.x & self.y)

    def alice_view(self) -> "AliceView":
        return AliceView(self.id, self.x, self.e)

    def bob_view(self) -> "BobView":
        return BobView(self.id, self.y, self.f)


@dataclass(frozen=True)
class AliceView:
    id: int
    x: int
    e: int


@dataclass(frozen=True)
class BobView:
    id: int
    y: int
    f: int


def join_views(alice: AliceView, bob: BobView) -> OneTimeTable:
    if alice.id != bob.id:
        raise ProtocolError("view ids do not match")
    return OneTimeTable(alice.x, bob.y, alice.e, bob.f, alice.id)


def ideal_tables(count: int, rng: np.random.Generator,
                 start_id: int = 0) -> list[OneTimeTable]:
    """Trusted-initializer reference tables (classical sampling)."""
    out = []
    for i in range(count):
        x, y, r = (int(b) for b in rng.integers(0, 2, size=3))
        out.append(OneTimeTable(x, y, (x & y) ^ r, r, start_id + i))
    return out


@dataclass(frozen=True)
class NoiseModel:
    """Per-transmitted-qubit depolarizing noise plus declared-loss rate."""

    eps_noise: float = 0.0
    eps_fail: float = 0.0

    def __post_init__(self):
        for name in ("eps_noise", "eps_fail"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ProtocolError(f"{name} must lie in [0, 1]")


NOISELESS = NoiseModel()


def apply_channel_noise(state: PureState, noise: NoiseModel,
                        rng: np.random.Generator,
                        qubits=None) -> PureState:
    """Depolarize each listed qubit with probability eps_noise.

    A hit replaces the qubit by a uniformly random Pauli (identity included)
    applied to it, which is the standard single-qubit twirl.
    """
    if qubits is None:
        qubits = range(state.num_qubits)
    for q in qubits:
        if noise.eps_noise > 0 and rng.random() < noise.eps_noise:
            kind = PAULI_KINDS[rng.integers(4)]
            if kind is not None:
                state = qk.apply_gate(state, Gate(kind, (q,)))
    return state


# ---------------------------------------------------------------- strategies

HONEST_KINDS = ("honest", "honest_but_curious")


@dataclass
class AdversaryStrategy:
    """Bounded menu of behaviours for one party.

    ``honest_but_curious`` follows the protocol exactly and only records
    state snapshots it legitimately holds; it never draws extra randomness,
    so a curious run is bit-identical to an honest one.
    """

    role: str  # 'alice' | 'bob'
    kind: str = "honest"
    bases: Optional[dict] = None            # fixed_measurement
    state: Optional[PureState] = None       # entangled_input / custom_sigma
    system: tuple[int, int] = (0, 1)
    w_claim: int = 0                        # nland3 cheating Bob
    y_claim: int = 0
    f_claim: int = 0
    predicate: Optional[Callable] = None    # declare_failure
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if self.role not in ("alice", "bob"):
            raise ProtocolError("role must be 'alice' or 'bob'")
        kinds = ("honest", "honest_but_curious", "fixed_measurement",
                 "entangled_input", "custom_sigma", "declare_failure")
        if self.kind not in kinds:
            raise ProtocolError(f"unknown strategy kind {self.kind!r}")

    @property
    def is_honest_behaviour(self) -> bool:
        return self.kind in HONEST_KINDS


def honest(role: str) -> AdversaryStrategy:
    return AdversaryStrategy(role)


def honest_but_curious(role: str) -> AdversaryStrategy:
    return AdversaryStrategy(role, kind="honest_but_curious")


def fixed_measurement(role: str, bases: dict) -> AdversaryStrategy:
    return AdversaryStrategy(role, kind="fixed_measurement", bases=dict(bases))


def entangled_input(state: PureState, system=(0, 1),
                    role: str = "alice", w_claim: int = 0, y_claim: int = 0,
                    f_claim: int = 0) -> AdversaryStrategy:
    if state.num_qubits - (2 if role == "alice" else 4) > 2:
        raise ProtocolError("at most 2 ancilla qubits are supported")
    return AdversaryStrategy(role, kind="entangled_input", state=state,
                             system=tuple(system), w_claim=w_claim,
                             y_claim=y_claim, f_claim=f_claim)


def custom_sigma(state: PureState, system=(0, 1)) -> AdversaryStrategy:
    if state.num_qubits != 4:
        raise ProtocolError("custom_sigma expects a purified 4-qubit state")
    return AdversaryStrategy("alice", kind="custom_sigma", state=state,
                             system=tuple(system))


def declare_failure(role: str, predicate: Callable) -> AdversaryStrategy:
    return AdversaryStrategy(role, kind="declare_failure", predicate=predicate)


# ---------------------------------------------------------------- transcript

@dataclass
class NlandTranscript:
    protocol: str
    aborted: bool = False
    abort_reason: Optional[str] = None
    s: Optional[int] = None
    t: Optional[int] = None
    x: Optional[int] = None
    y: Optional[int] = None
    h1: Optional[int] = None
    h2: Optional[int] = None
    p: Optional[int] = None
    h: Optional[int] = None
    w: Optional[int] = None
    i_bits: Optional[tuple] = None
    alice_outcomes: Optional[tuple] = None
    bob_bell_bits: Optional[tuple] = None
    bob_guess_x: Optional[int] = None
    alice_guess_y: Optional[int] = None
    sent_states: tuple = ()
    curious_notes: tuple = ()

    def snapshot(self, tag: str, state: PureState) -> None:
        self.sent_states += ((tag, tuple(map(complex, state.amplitudes))),)


def bob_branch_gates(y: int, h1: int, h2: int, p: int,
                     system=(0, 1)) -> list[Gate]:
    """Honest Bob's unitary in the two-message protocol, one branch of
    his private bits (y, h1, h2, p)."""
    q0, q1 = system
    gates = []
    if y == 0:
        gates.append(Gate("CNOT", (q0, q1)))
    if h1:
        gates.append(Gate("Y", (q0,)))
    if h2:
        gates.append(Gate("Y", (q1,)))
    if p:
        gates += [Gate("Z", (q0,)), Gate("Z", (q1,))]
    return gates


def apply_bob_branch(state: PureState, y: int, h1: int, h2: int, p: int,
                     system=(0, 1)) -> PureState:
    for g in bob_branch_gates(y, h1, h2, p, system):
        state = qk.apply_gate(state, g)
    return state


def _returned_density(state: PureState, system, y: int) -> np.ndarray:
    """Average over Bob's masks of the state Alice holds after the run."""
    d = 2 ** state.num_qubits
    acc = np.zeros((d, d), dtype=complex)
    for h1 in (0, 1):
        for h2 in (0, 1):
            for p in (0, 1):
                out = apply_bob_branch(state, y, h1, h2, p, system)
                acc += np.outer(out.amplitudes, out.amplitudes.conj())
    return acc / 8.0


def _y_guess_measurement(strategy: AdversaryStrategy):
    """Helstrom basis distinguishing the y=0 and y=1 returned ensembles."""
    if "y_guess" not in strategy._cache:
        rho0 = _returned_density(strategy.state, strategy.system, 0)
        rho1 = _returned_density(strategy.state, strategy.system, 1)
        strategy._cache["y_guess"] = qk.helstrom_projectors(rho0, rho1)
    return strategy._cache["y_guess"]


def _prepare_honest_nland(x: int, s: int, t: int) -> PureState:
    if s == 0:
        return PureState.from_bits([x, t])
    state = PureState.from_bits([t, x])
    state = qk.apply_gate(state, Gate("H", (0,)))
    return qk.apply_gate(state, Gate("H", (1,)))


def run_nland(alice: AdversaryStrategy, bob: AdversaryStrategy,
              noise: NoiseModel, rng: np.random.Generator,
              table_id: int = 0,
              record_states: bool = False):
    """Protocol with two stages of communication (Alice sends, Bob returns).

    Returns (OneTimeTable | None, NlandTranscript).
    """
    tr = NlandTranscript(protocol="nland")
    if noise.eps_fail > 0 and rng.random() < noise.eps_fail:
        tr.aborted, tr.abort_reason = True, "channel loss"
        return None, tr

    # Alice prepares and sends two qubits.
    if alice.kind in ("entangled_input", "custom_sigma"):
        state = alice.state
        system = alice.system
    elif alice.kind in HONEST_KINDS + ("declare_failure",):
        x = int(rng.integers(2))
        s = int(rng.integers(2))
        t = int(rng.integers(2))
        tr.x, tr.s, tr.t = x, s, t
        state = _prepare_honest_nland(x, s, t)
        system = (0, 1)
    else:
        raise ProtocolError(f"alice strategy {alice.kind!r} unsupported here")
    state = apply_channel_noise(state, noise, rng, system)
    if record_states:
        tr.snapshot("alice_to_bob", state)
    if alice.kind == "honest_but_curious":
        tr.curious_notes += (("alice_kept_copy_of_prep",),)

    # Bob's turn.
    if bob.kind == "fixed_measurement":
        outcomes = {}
        for q in sorted(bob.bases):
            bit, state = qk.measure_qubit(state, system[q], bob.bases[q], rng)
            outcomes[q] = bit
        vals = [outcomes[q] for q in sorted(outcomes)]
        if len(vals) == 2 and vals[0] != vals[1]:
            tr.bob_guess_x = int(rng.integers(2))
        else:
            tr.bob_guess_x = vals[0]
    elif not bob.is_honest_behaviour:
        raise ProtocolError(f"bob strategy {bob.kind!r} unsupported here")
    y = int(rng.integers(2))
    h1 = int(rng.integers(2))
    h2 = int(rng.integers(2))
    p = int(rng.integers(2))
    tr.y, tr.h1, tr.h2, tr.p, tr.h = y, h1, h2, p, h1 ^ h2
    state = apply_bob_branch(state, y, h1, h2, p, system)
    if bob.kind == "honest_but_curious":
        tr.curious_notes += (("bob_recorded_mask_bits", h1, h2, p),)
    state = apply_channel_noise(state, noise, rng, system)
    if record_states:
        tr.snapshot("bob_to_alice", state)
    f = h1 ^ h2

    # Alice measures.
    if alice.kind in HONEST_KINDS + ("declare_failure",):
        basis = "Z" if tr.s == 0 else "X"
        o1, state = qk.measure_qubit(state, system[0], basis, rng)
        o2, state = qk.measure_qubit(state, system[1], basis, rng)
        tr.alice_outcomes = (o1, o2)
        e = o1 ^ o2 ^ tr.t
        if alice.kind == "declare_failure" and alice.predicate((tr.s, tr.alice_outcomes)):
            tr.aborted, tr.abort_reason = True, "alice declared failure"
            return None, tr
        x = tr.x
    else:
        basis_mat, guesses = _y_guess_measurement(alice)
        k, _ = qk.measure_in_basis(state, basis_mat, rng)
        tr.alice_guess_y = int(guesses[k])
        x = int(rng.integers(2))
        e = int(rng.integers(2))
        tr.x = x
    return OneTimeTable(x, y, e, f, table_id), tr


def _prepare_nland3(i_bits, y: int) -> PureState:
    state = PureState.from_bits(list(i_bits))
    state = qk.apply_gate(state, Gate("H", (0,)))
    state = qk.apply_gate(state, Gate("H", (1,)))
    state = qk.apply_gate(state, Gate("CNOT", (0, 2)))
    state = qk.apply_gate(state, Gate("CNOT", (1, 3)))
    if y == 0:
        state = qk.apply_gate(state, Gate("CNOT", (0, 1)))
    return state


def run_nland3(alice: AdversaryStrategy, bob: AdversaryStrategy,
               noise: NoiseModel, rng: np.random.Generator,
               table_id: int = 0,
               record_states: bool = False):
    """Protocol with one stage of communication (Bob sends four qubits + w)."""
    tr = NlandTranscript(protocol="nland3")
    if noise.eps_fail > 0 and rng.random() < noise.eps_fail:
        tr.aborted, tr.abort_reason = True, "channel loss"
        return None, tr

    if bob.is_honest_behaviour:
        i_bits = tuple(int(b) for b in rng.integers(0, 2, size=4))
        y = int(rng.integers(2))
        w = i_bits[0] ^ i_bits[1] ^ i_bits[2] ^ i_bits[3]
        f = i_bits[2] ^ i_bits[3]
        state = _prepare_nland3(i_bits, y)
        tr.i_bits = i_bits
    elif bob.kind == "entangled_input":
        if bob.state.num_qubits != 4:
            raise ProtocolError("cheating Bob must send four qubits")
        state, w, y, f = bob.state, bob.w_claim, bob.y_claim, bob.f_claim
    else:
        raise ProtocolError(f"bob strategy {bob.kind!r} unsupported here")
    tr.y, tr.w = y, w
    state = apply_channel_noise(state, noise, rng)
    if record_states:
        tr.snapshot("bob_to_alice", state)

    if not alice.is_honest_behaviour:
        raise ProtocolError(f"alice strategy {alice.kind!r} unsupported here")
    s = int(rng.integers(2))
    basis = "Z" if s == 0 else "X"
    outcomes = []
    for q in range(4):
        bit, state = qk.measure_qubit(state, q, basis, rng)
        outcomes.append(bit)
    tr.s, tr.alice_outcomes = s, tuple(outcomes)
    x = outcomes[0] if s == 0 else outcomes[1]
    g = 0
    for q in range(4):
        if q != (0 if s == 0 else 1):
            g ^= outcomes[q]
    e = g ^ (s & w)
    tr.x = x
    return OneTimeTable(x, y, e, f, table_id), tr


def run_nland2(alice: AdversaryStrategy, bob: AdversaryStrategy,
               noise: NoiseModel, rng: np.random.Generator,
               table_id: int = 0,
               record_states: bool = False):
    """Entanglement-based protocol: four EPR pairs, teleportation back.

    The entanglement source is declared honest.  Bob reveals only the XOR
    ``w`` of his four teleportation correction bits; his output is the XOR
    of the two X-type correction bits.
    """
    tr = NlandTranscript(protocol="nland2")
    if noise.eps_fail > 0 and rng.random() < noise.eps_fail:
        tr.aborted, tr.abort_reason = True, "channel loss"
        return None, tr
    if not bob.is_honest_behaviour:
        raise ProtocolError(f"bob strategy {bob.kind!r} unsupported here")
    if alice.kind not in HONEST_KINDS + ("declare_failure",):
        raise ProtocolError(f"alice strategy {alice.kind!r} unsupported here")

    s = int(rng.integers(2))
    y = int(rng.integers(2))
    basis = "Z" if s == 0 else "X"
    tr.s, tr.y = s, y

    # Pairs 1-2: qubits [A1, B1, A2, B2]; Alice's halves are transmitted.
    state = qk.tensor(qk.bell_pair(), qk.bell_pair())
    state = apply_channel_noise(state, noise, rng, (0, 2))
    o1, state = qk.measure_and_remove(state, 0, basis, rng)
    o2, state = qk.measure_and_remove(state, 1, basis, rng)  # old index 2

    # Bob now holds two remotely prepared qubits [B1, B2].
    if y == 0:
        state = qk.apply_gate(state, Gate("CNOT", (0, 1)))

    # Teleport each of Bob's qubits to Alice through a fresh tested pair,
    # with her half of the pair subject to transmission noise.
    bell_bits = []
    later = []
    for _hop in range(2):
        # Bob's next unteleported qubit is always at index 0.
        state = qk.tensor(state, qk.bell_pair())
        n = state.num_qubits
        state = apply_channel_noise(state, noise, rng, (n - 1,))
        (xb, zb), state = qk.bell_measure(state, 0, n - 2, rng)
        bell_bits += [xb, zb]
        # Teleported qubit landed at the end of the register.
        o, state = _measure_possibly_last(state, state.num_qubits - 1, basis, rng)
        later.append(o)
    o3, o4 = later
    x1, z1, x2, z2 = bell_bits
    w = x1 ^ z1 ^ x2 ^ z2
    f = x1 ^ x2
    tr.bob_bell_bits = (x1, z1, x2, z2)
    tr.w = w
    tr.alice_outcomes = (o1, o2, o3, o4)

    x = o1 if s == 0 else o2
    g = (o2 if s == 0 else o1) ^ o3 ^ o4
    e = g ^ (s & w)
    tr.x = x
    if alice.kind == "declare_failure" and alice.predicate((s, tr.alice_outcomes)):
        tr.aborted, tr.abort_reason = True, "alice declared failure"
        return None, tr
    return OneTimeTable(x, y, e, f, table_id), tr


def _measure_possibly_last(state, qubit, basis, rng):
    """measure_and_remove, falling back to collapse-only for the last qubit."""
    if state.num_qubits == 1:
        bit, post = qk.measure_qubit(state, qubit, basis, rng)
        return bit, post
    return qk.measure_and_remove(state, qubit, basis, rng)


PROTOCOLS = {
    "nland": run_nland,
    "nland3": run_nland3,
    "nland2": run_nland2,
}


def generate_batch(protocol: str, count: int, alice: AdversaryStrategy,
                   bob: AdversaryStrategy, noise: NoiseModel, seed: int,
                   record_states: bool = False):
    """Run ``count`` independent instances; failed runs are dropped.

    Table ids number the successful instances 0..m-1, matching the parties'
    agreement on which instances were implemented.  Instance ``i`` draws from
    the substream (seed, 'gen', i), so batches are reproducible and order
    independent.
    """
    if protocol not in PROTOCOLS:
        raise ProtocolError(f"unknown protocol {protocol!r}")
    run = PROTOCOLS[protocol]
    tables, transcripts = [], []
    next_id = 0
    for i in range(count):
        rng = substream(seed, "gen", i)
        table, tr = run(alice, bob, noise, rng, table_id=next_id,
                        record_states=record_states)
        transcripts.append(tr)
        if table is not None:
            tables.append(table)
            next_id += 1
    return tables, transcripts


@dataclass(frozen=True)
class Nland3Distinguisher:
    """Optimal y-guess from the one-message protocol's (state, w) view.

    For each value of the disclosed bit w, holds the Helstrom basis between
    the y=0 and y=1 mixtures of Bob's honest preparations with that parity.
    ``trace_distance`` is the w-averaged distinguishability (1/2 for the
    honest ensembles, giving a 3/4 guessing rate).
    """

    bases: tuple
    guesses: tuple
    trace_distance: float

    def guess(self, state: PureState, w: int,
              rng: np.random.Generator) -> int:
        k, _ = qk.measure_in_basis(state, self.bases[w], rng)
        return int(self.guesses[w][k])


def optimal_nland3_distinguisher() -> Nland3Distinguisher:
    rhos = {}
    for y in (0, 1):
        for w in (0, 1):
            acc = np.zeros((16, 16), dtype=complex)
            count = 0
            for bits in range(16):
                i_bits = tuple((bits >> k) & 1 for k in range(4))
                if i_bits[0] ^ i_bits[1] ^ i_bits[2] ^ i_bits[3] != w:
                    continue
                psi = _prepare_nland3(i_bits, y).amplitudes
                acc += np.outer(psi, psi.conj())
                count += 1
            rhos[(y, w)] = acc / count
    bases, guesses, td = [], [], 0.0
    for w in (0, 1):
        basis, guess = qk.helstrom_projectors(rhos[(0, w)], rhos[(1, w)])
        bases.append(basis)
        guesses.append(guess)
        evals = np.linalg.eigvalsh(rhos[(0, w)] - rhos[(1, w)])
        td += 0.5 * 0.5 * np.sum(np.abs(evals))
    return Nland3Distinguisher(tuple(bases), tuple(guesses), float(td))


# ---------------------------------------------------------------- detector

@dataclass(frozen=True)
class DetectorReport:
    """Chi-square statistic of Bob's Bell-outcome pattern frequencies."""

    chi2: float
    dof: int
    n: int

    def flags(self, threshold: float) -> bool:
        return self.chi2 > threshold


def bell_outcome_statistic(transcripts) -> DetectorReport:
    """Deviation of Bob's teleportation outcomes from uniform over 16 cells.

    A cheating Alice who declares failures keyed to her own outcomes skews
    the surviving runs' statistics; an honest batch stays near chi2(15).
    """
    counts = np.zeros(16, dtype=float)
    for tr in transcripts:
        if tr.aborted or tr.bob_bell_bits is None:
            continue
        x1, z1, x2, z2 = tr.bob_bell_bits
        counts[(x1 << 3) | (z1 << 2) | (x2 << 1) | z2] += 1
    n = int(counts.sum())
    if n == 0:
        return DetectorReport(0.0, 15, 0)
    expected = n / 16.0
    chi2 = float(np.sum((counts - expected) ** 2 / expected))
    return DetectorReport(chi2, 15, n)


def detector_threshold(alpha: float = 1e-3) -> float:
    """Chi-square tail threshold; configurable because the reference level
    for 'expected statistics' is a deployment choice."""
    from scipy.stats import chi2 as chi2_dist
    return float(chi2_dist.ppf(1.0 - alpha, 15))
