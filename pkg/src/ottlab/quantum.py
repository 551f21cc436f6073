"""Exact statevector mechanics for systems of up to six qubits.

Qubit ordering is big-endian throughout: qubit 0 is the leftmost tensor
factor, i.e. the most significant bit of a basis index.  After reshaping an
amplitude vector to shape ``(2,) * num_qubits``, axis ``q`` addresses
qubit ``q`` directly.

Everything here is a pure function over immutable values.  Randomness enters
only through an explicit ``numpy.random.Generator`` argument, so independent
runs can be evaluated concurrently.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

MAX_QUBITS = 6
_NORM_TOL = 1e-10
_EIG_CUTOFF = 1e-12  # eigenvalues below this are dropped in entropy sums

_SQ2 = 1.0 / np.sqrt(2.0)

GATE_MATRICES = {
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
    "H": np.array([[_SQ2, _SQ2], [_SQ2, -_SQ2]], dtype=complex),
    "P": np.array([[1, 0], [0, 1j]], dtype=complex),
    "PDAG": np.array([[1, 0], [0, -1j]], dtype=complex),
    "T": np.array([[1, 0], [0, np.exp(1j * np.pi / 4)]], dtype=complex),
    "TDAG": np.array([[1, 0], [0, np.exp(-1j * np.pi / 4)]], dtype=complex),
}

CNOT_MATRIX = np.array(
    [[1, 0, 0, 0],
     [0, 1, 0, 0],
     [0, 0, 0, 1],
     [0, 0, 1, 0]], dtype=complex)

GATE_KINDS = tuple(GATE_MATRICES) + ("CNOT",)


class QuantumError(ValueError):
    """Raised on contract violations (bad indices, non-states, reuse)."""


@dataclass(frozen=True)
class Gate:
    """A named gate acting on explicit qubit indices."""

    kind: str
    targets: tuple[int, ...]

    def __post_init__(self):
        if self.kind not in GATE_KINDS:
            raise QuantumError(f"unknown gate kind {self.kind!r}")
        object.__setattr__(self, "targets", tuple(self.targets))
        want = 2 if self.kind == "CNOT" else 1
        if len(self.targets) != want:
            raise QuantumError(f"{self.kind} takes {want} target(s)")
        if len(set(self.targets)) != len(self.targets):
            raise QuantumError("duplicate targets")

    def unitary(self) -> np.ndarray:
        return CNOT_MATRIX if self.kind == "CNOT" else GATE_MATRICES[self.kind]


@dataclass(frozen=True)
class PureState:
    """Normalized complex amplitude vector over ``num_qubits`` qubits."""

    num_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        if not 1 <= self.num_qubits <= MAX_QUBITS:
            raise QuantumError(f"num_qubits must be 1..{MAX_QUBITS}")
        amps = np.asarray(self.amplitudes, dtype=complex).reshape(-1).copy()
        if amps.shape != (2 ** self.num_qubits,):
            raise QuantumError("amplitude vector has wrong length")
        nrm = np.linalg.norm(amps)
        if abs(nrm - 1.0) > 1e-8:
            raise QuantumError(f"state not normalized (norm {nrm})")
        amps /= nrm
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def from_bits(cls, bits: Sequence[int]) -> "PureState":
        n = len(bits)
        amps = np.zeros(2 ** n, dtype=complex)
        idx = 0
        for b in bits:
            idx = (idx << 1) | (int(b) & 1)
        amps[idx] = 1.0
        return cls(n, amps)

    @classmethod
    def zero(cls, num_qubits: int) -> "PureState":
        return cls.from_bits([0] * num_qubits)

    def check_qubit(self, qubit: int) -> None:
        if not 0 <= qubit < self.num_qubits:
            raise QuantumError(f"qubit index {qubit} out of range")

    def tensor(self) -> np.ndarray:
        return self.amplitudes.reshape((2,) * self.num_qubits)


def tensor(a: PureState, b: PureState) -> PureState:
    return PureState(a.num_qubits + b.num_qubits,
                     np.kron(a.amplitudes, b.amplitudes))


def bell_pair() -> PureState:
    """EPR pair (|00> + |11>)/sqrt(2)."""
    return PureState(2, np.array([_SQ2, 0, 0, _SQ2], dtype=complex))


def plus_state(label: int) -> PureState:
    """X-basis encoding: label 0 -> |+>, label 1 -> |->."""
    return apply_gate(PureState.from_bits([label]), Gate("H", (0,)))


def apply_matrix(state: PureState, matrix: np.ndarray,
                 qubits: Sequence[int]) -> PureState:
    """Apply a unitary on the listed qubits (matrix dim 2^len(qubits))."""
    qubits = tuple(qubits)
    for q in qubits:
        state.check_qubit(q)
    if len(set(qubits)) != len(qubits):
        raise QuantumError("duplicate targets")
    k = len(qubits)
    u = np.asarray(matrix, dtype=complex).reshape((2,) * (2 * k))
    psi = state.tensor()
    psi = np.tensordot(u, psi, axes=(tuple(range(k, 2 * k)), qubits))
    psi = np.moveaxis(psi, range(k), qubits)
    return PureState(state.num_qubits, psi.reshape(-1))


def apply_gate(state: PureState, gate: Gate) -> PureState:
    return apply_matrix(state, gate.unitary(), gate.targets)


def measure_qubit(state: PureState, qubit: int, basis: str,
                  rng: np.random.Generator) -> tuple[int, PureState]:
    """Born-rule measurement of one qubit in the Z or X basis.

    X-basis outcomes follow the |+> -> 0, |-> -> 1 convention.  Returns the
    outcome bit and the collapsed, renormalized state.
    """
    state.check_qubit(qubit)
    if basis not in ("Z", "X"):
        raise QuantumError(f"basis must be 'Z' or 'X', got {basis!r}")
    if basis == "X":
        state = apply_gate(state, Gate("H", (qubit,)))
    psi = state.tensor()
    axes = tuple(i for i in range(state.num_qubits) if i != qubit)
    probs = np.sum(np.abs(psi) ** 2, axis=axes)
    outcome = 1 if rng.random() < probs[1] else 0
    sel = [slice(None)] * state.num_qubits
    sel[qubit] = 1 - outcome
    psi = psi.copy()
    psi[tuple(sel)] = 0.0
    psi = psi / np.sqrt(probs[outcome])
    out = PureState(state.num_qubits, psi.reshape(-1))
    if basis == "X":
        out = apply_gate(out, Gate("H", (qubit,)))
    return outcome, out


def measure_and_remove(state: PureState, qubit: int, basis: str,
                       rng: np.random.Generator) -> tuple[int, PureState]:
    """Measure a qubit and drop it from the register."""
    if state.num_qubits < 2:
        raise QuantumError("cannot remove the last qubit")
    if basis == "X":
        state = apply_gate(state, Gate("H", (qubit,)))
    psi = state.tensor()
    axes = tuple(i for i in range(state.num_qubits) if i != qubit)
    probs = np.sum(np.abs(psi) ** 2, axis=axes)
    outcome = 1 if rng.random() < probs[1] else 0
    psi = np.take(psi, outcome, axis=qubit) / np.sqrt(probs[outcome])
    return outcome, PureState(state.num_qubits - 1, psi.reshape(-1))


def measure_in_basis(state: PureState, basis: np.ndarray,
                     rng: np.random.Generator) -> tuple[int, PureState]:
    """Projective measurement in an orthonormal basis (columns of ``basis``)."""
    d = 2 ** state.num_qubits
    basis = np.asarray(basis, dtype=complex)
    if basis.shape != (d, d):
        raise QuantumError("basis has wrong dimension")
    amps = basis.conj().T @ state.amplitudes
    probs = np.abs(amps) ** 2
    probs = probs / probs.sum()
    outcome = int(rng.choice(d, p=probs))
    return outcome, PureState(state.num_qubits, basis[:, outcome])


@dataclass(frozen=True)
class DensityMatrix:
    """Hermitian, unit-trace, positive-semidefinite matrix on 2^k dims."""

    mat: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.mat, dtype=complex).copy()
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise QuantumError("density matrix must be square")
        d = m.shape[0]
        if d & (d - 1) or d < 2:
            raise QuantumError("dimension must be a power of 2")
        if np.max(np.abs(m - m.conj().T)) > _NORM_TOL:
            raise QuantumError("density matrix not Hermitian")
        if abs(np.trace(m).real - 1.0) > _NORM_TOL:
            raise QuantumError("density matrix trace != 1")
        if np.linalg.eigvalsh(m).min() < -1e-9:
            raise QuantumError("density matrix has negative eigenvalues")
        m.setflags(write=False)
        object.__setattr__(self, "mat", m)

    @property
    def dim(self) -> int:
        return self.mat.shape[0]

    @property
    def num_qubits(self) -> int:
        return self.dim.bit_length() - 1

    @classmethod
    def from_pure(cls, state: PureState) -> "DensityMatrix":
        v = state.amplitudes
        return cls(np.outer(v, v.conj()))


@dataclass(frozen=True)
class Ensemble:
    """Weighted list of density matrices sharing one dimension."""

    members: tuple[tuple[float, DensityMatrix], ...]

    def __post_init__(self):
        members = tuple((float(p), dm) for p, dm in self.members)
        if not members:
            raise QuantumError("ensemble is empty")
        if abs(sum(p for p, _ in members) - 1.0) > _NORM_TOL:
            raise QuantumError("ensemble probabilities do not sum to 1")
        if any(p < -_NORM_TOL for p, _ in members):
            raise QuantumError("negative ensemble probability")
        dims = {dm.dim for _, dm in members}
        if len(dims) != 1:
            raise QuantumError("ensemble members have mixed dimensions")
        object.__setattr__(self, "members", members)

    @property
    def dim(self) -> int:
        return self.members[0][1].dim

    def average(self) -> DensityMatrix:
        acc = sum(p * dm.mat for p, dm in self.members)
        return DensityMatrix(acc)


def _trace_out_axis(mat: np.ndarray, n: int, qubit: int) -> np.ndarray:
    t = mat.reshape((2,) * (2 * n))
    t = np.trace(t, axis1=qubit, axis2=n + qubit)
    return t.reshape(2 ** (n - 1), 2 ** (n - 1))


def partial_trace(dm: DensityMatrix, keep: Iterable[int]) -> DensityMatrix:
    """Reduced state on the kept qubits (order preserved)."""
    keep = sorted(set(keep))
    n = dm.num_qubits
    if not keep:
        raise QuantumError("keep set must be nonempty")
    if any(q < 0 or q >= n for q in keep):
        raise QuantumError("keep index out of range")
    mat = dm.mat
    for q in sorted(set(range(n)) - set(keep), reverse=True):
        mat = _trace_out_axis(mat, n, q)
        n -= 1
    return DensityMatrix(mat)


def reduced_state(state: PureState, keep: Iterable[int]) -> DensityMatrix:
    """Partial trace of a pure state without forming the full matrix."""
    keep = sorted(set(keep))
    drop = [q for q in range(state.num_qubits) if q not in keep]
    if not keep:
        raise QuantumError("keep set must be nonempty")
    psi = state.tensor()
    rho = np.tensordot(psi, psi.conj(), axes=(drop, drop))
    d = 2 ** len(keep)
    return DensityMatrix(rho.reshape(d, d))


def entropy_bits(mat: np.ndarray) -> float:
    """Von Neumann entropy in bits of a raw Hermitian matrix."""
    evals = np.linalg.eigvalsh(mat)
    evals = evals[evals > _EIG_CUTOFF]
    if evals.size == 0:
        return 0.0
    return float(-np.sum(evals * np.log2(evals)))


def von_neumann_entropy(dm: DensityMatrix) -> float:
    return entropy_bits(dm.mat)


def trace_distance(a: DensityMatrix, b: DensityMatrix) -> float:
    if a.dim != b.dim:
        raise QuantumError("dimension mismatch")
    evals = np.linalg.eigvalsh(a.mat - b.mat)
    return float(0.5 * np.sum(np.abs(evals)))


def holevo_quantity(e: Ensemble) -> float:
    """S(sum p_i rho_i) - sum p_i S(rho_i), in bits; clamped at 0."""
    avg = sum(p * dm.mat for p, dm in e.members)
    chi = entropy_bits(avg) - sum(p * entropy_bits(dm.mat) for p, dm in e.members)
    return max(chi, 0.0)


def fidelity(a: PureState, b: PureState) -> float:
    """|<a|b>|^2; insensitive to global phase."""
    if a.num_qubits != b.num_qubits:
        raise QuantumError("dimension mismatch")
    return float(np.abs(np.vdot(a.amplitudes, b.amplitudes)) ** 2)


def helstrom_projectors(rho0: np.ndarray, rho1: np.ndarray) -> np.ndarray:
    """Orthonormal basis whose first-block columns span supp+(rho0 - rho1).

    Measuring in this basis and guessing 0 on nonnegative-eigenvalue outcomes
    implements the optimal two-state discrimination, succeeding with
    probability (1 + D(rho0, rho1)) / 2 for equal priors.  Returns
    (basis, guesses) where guesses[k] is the hypothesis for outcome k.
    """
    evals, vecs = np.linalg.eigh(rho1 - rho0)
    guesses = (evals > 0).astype(int)
    return vecs, guesses


def bell_measure(state: PureState, qa: int, qb: int,
                 rng: np.random.Generator) -> tuple[tuple[int, int], PureState]:
    """Bell-basis measurement of (qa, qb); both qubits are removed.

    Returns ((x_bit, z_bit), remaining state).  When (qa, qb) held one half
    of a teleportation, the receiver qubit is left holding X^x Z^z |psi>.
    """
    state = apply_gate(state, Gate("CNOT", (qa, qb)))
    state = apply_gate(state, Gate("H", (qa,)))
    z_bit, state = measure_and_remove(state, qa, "Z", rng)
    x_bit, state = measure_and_remove(state, qb - 1 if qb > qa else qb, "Z", rng)
    return (x_bit, z_bit), state


def teleport_qubit(state: PureState, qubit: int,
                   rng: np.random.Generator) -> tuple[PureState, tuple[int, int]]:
    """Teleport one qubit through a fresh EPR pair.

    The receiver qubit is spliced back into position ``qubit`` carrying the
    uncorrected Pauli X^x Z^z.  Returns (state, (x_bit, z_bit)).
    """
    n = state.num_qubits
    joint = tensor(state, bell_pair())
    (x_bit, z_bit), out = bell_measure(joint, qubit, n, rng)
    psi = np.moveaxis(out.tensor(), out.num_qubits - 1, qubit)
    return PureState(out.num_qubits, psi.reshape(-1)), (x_bit, z_bit)


@dataclass(frozen=True)
class TeleportResult:
    receiver_state: PureState
    corrections: tuple[tuple[int, int], ...]  # (x_bit, z_bit) per qubit
    revealed: tuple[int, ...]


def teleport_withheld(sender_state: PureState, rng: np.random.Generator,
                      reveal: str = "none",
                      num_pairs: int | None = None) -> TeleportResult:
    """Teleport a whole register, disclosing only what ``reveal`` selects.

    reveal 'all' discloses every correction bit, 'none' discloses nothing,
    and 'xor' discloses the single XOR of all correction bits.  One EPR pair
    is consumed per qubit; ``num_pairs`` below that is an error.
    """
    n = sender_state.num_qubits
    if num_pairs is not None and num_pairs < n:
        raise QuantumError(f"need {n} EPR pairs, have {num_pairs}")
    if reveal not in ("all", "none", "xor"):
        raise QuantumError(f"unknown reveal policy {reveal!r}")
    state = sender_state
    corrections = []
    for q in range(n):
        state, bits = teleport_qubit(state, q, rng)
        corrections.append(bits)
    flat = [b for pair in corrections for b in pair]
    if reveal == "all":
        revealed = tuple(flat)
    elif reveal == "xor":
        revealed = (int(np.bitwise_xor.reduce(flat)),)
    else:
        revealed = ()
    return TeleportResult(state, tuple(corrections), revealed)


def apply_corrections(state: PureState,
                      corrections: Sequence[tuple[int, int]]) -> PureState:
    """Undo per-qubit X^x Z^z teleportation byproducts."""
    for q, (x_bit, z_bit) in enumerate(corrections):
        if z_bit:
            state = apply_gate(state, Gate("Z", (q,)))
        if x_bit:
            state = apply_gate(state, Gate("X", (q,)))
    return state


def pauli_matrix(x_bit: int, z_bit: int) -> np.ndarray:
    """X^x Z^z as a 2x2 matrix."""
    m = np.eye(2, dtype=complex)
    if z_bit:
        m = GATE_MATRICES["Z"] @ m
    if x_bit:
        m = GATE_MATRICES["X"] @ m
    return m


def haar_state(num_qubits: int, rng: np.random.Generator) -> PureState:
    """Haar-random pure state (normalized complex Gaussian vector)."""
    d = 2 ** num_qubits
    v = rng.normal(size=d) + 1j * rng.normal(size=d)
    return PureState(num_qubits, v / np.linalg.norm(v))


def haar_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary via QR of a complex Gaussian matrix."""
    z = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))
