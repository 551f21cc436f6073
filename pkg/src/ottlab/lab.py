"""Numerical security engine: ensembles, Holevo tradeoff scans, projective
measurement maximization, and the information-sum envelope.

The central object is a purified view of the state Alice hands to Bob in the
two-message protocol: two system qubits plus up to two ancilla qubits she
keeps.  Honest Bob's processing splits into 16 branches (his input bit, two
mask bits, one phase bit); grouping the branches by a conditioning variable
gives the two-member ensembles whose Holevo quantities bound what Alice can
learn.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from . import quantum as qk
from .protocols import _prepare_honest_nland, bob_branch_gates
from .quantum import (DensityMatrix, Ensemble, PureState, QuantumError,
                      entropy_bits, haar_state, haar_unitary)
from .seeds import substream


class LabError(ValueError):
    pass


@dataclass(frozen=True)
class SigmaA:
    """Purification of Bob's received two-qubit state.

    ``state`` holds the system qubits (always indices 0 and 1) plus 0 or 2
    ancilla qubits retained by the sender.
    """

    state: PureState
    system: tuple[int, int] = (0, 1)

    def __post_init__(self):
        if self.system != (0, 1):
            raise LabError("system qubits must be (0, 1)")
        if self.state.num_qubits not in (2, 3, 4):
            raise LabError("SigmaA supports at most two ancilla qubits")

    @property
    def ancilla(self) -> int:
        return self.state.num_qubits - 2

    def received_density(self) -> DensityMatrix:
        return qk.reduced_state(self.state, self.system)


BRANCH_LABELS = [
    {"y": y, "h1": h1, "h2": h2, "p": p, "r": h1 ^ h2, "yr": y ^ h1 ^ h2}
    for y in (0, 1) for h1 in (0, 1) for h2 in (0, 1) for p in (0, 1)
]


@lru_cache(maxsize=None)
def _branch_stack(num_qubits: int) -> np.ndarray:
    """(16, d, d) embedded unitaries for honest Bob's branches."""
    d = 2 ** num_qubits
    stack = np.empty((16, d, d), dtype=complex)
    eye_anc = np.eye(2 ** (num_qubits - 2))
    for idx, lab in enumerate(BRANCH_LABELS):
        u = np.eye(4, dtype=complex)
        for g in bob_branch_gates(lab["y"], lab["h1"], lab["h2"], lab["p"]):
            full = g.unitary()
            if g.kind != "CNOT":
                full = np.kron(full, np.eye(2)) if g.targets[0] == 0 \
                    else np.kron(np.eye(2), full)
            u = full @ u
        stack[idx] = np.kron(u, eye_anc)
    return stack


def _mask(var: str) -> np.ndarray:
    return np.array([lab[var] for lab in BRANCH_LABELS], dtype=bool)


def branch_states(s: SigmaA) -> np.ndarray:
    """(16, d) matrix of Alice's final joint states, one per branch."""
    return _branch_stack(s.state.num_qubits) @ s.state.amplitudes


def _group_density(branches: np.ndarray, mask: np.ndarray) -> np.ndarray:
    g = branches[mask]
    return (g.T @ g.conj()) / g.shape[0]


def alice_view_ensembles(s: SigmaA):
    """Two-member ensembles for conditioning on y, r, and y^r."""
    br = branch_states(s)
    out = []
    for var in ("y", "r", "yr"):
        m = _mask(var)
        members = (
            (0.5, DensityMatrix(_group_density(br, ~m))),
            (0.5, DensityMatrix(_group_density(br, m))),
        )
        out.append(Ensemble(members))
    return tuple(out)


@dataclass(frozen=True)
class TradeoffPoint:
    seed: int
    chi_y: float
    chi_r: float
    chi_yr: float

    def __post_init__(self):
        object.__setattr__(self, "seed", int(self.seed))
        for name in ("chi_y", "chi_r", "chi_yr"):
            v = float(getattr(self, name))
            if not -1e-9 <= v <= 2.0 + 1e-9:
                raise LabError(f"chi value {v} outside [0, 2]")
            object.__setattr__(self, name, v)

    @property
    def sum_value(self) -> float:
        return self.chi_y + max(self.chi_r, self.chi_yr)


def chi_point(s: SigmaA, seed: int = -1) -> TradeoffPoint:
    chis = chi_values(branch_states(s))
    return TradeoffPoint(seed, *chis)


def chi_values(branches: np.ndarray) -> tuple[float, float, float]:
    rho_avg = (branches.T @ branches.conj()) / 16.0
    s_avg = entropy_bits(rho_avg)
    out = []
    for var in ("y", "r", "yr"):
        m = _mask(var)
        s0 = entropy_bits(_group_density(branches, ~m))
        s1 = entropy_bits(_group_density(branches, m))
        out.append(max(s_avg - 0.5 * (s0 + s1), 0.0))
    return tuple(out)


@dataclass(frozen=True)
class ScanSummary:
    samples: int
    ancilla: int
    max_sum: float
    argmax_seed: int


def tradeoff_scan(samples: int, ancilla: int, master_seed: int,
                  block: int = 256):
    """Haar-random purifications, one tradeoff point each.

    Sample i draws from the substream (master_seed, 'scan', i), so the scan
    is reproducible point-by-point regardless of blocking or parallelism.
    Returns (points, summary).
    """
    if samples < 1:
        raise LabError("samples must be >= 1")
    if ancilla not in (0, 2):
        raise LabError("ancilla must be 0 or 2")
    nq = 2 + ancilla
    d = 2 ** nq
    stack = _branch_stack(nq)
    masks = {var: _mask(var) for var in ("y", "r", "yr")}
    points = []
    for lo in range(0, samples, block):
        hi = min(lo + block, samples)
        psis = np.empty((hi - lo, d), dtype=complex)
        for i in range(lo, hi):
            rng = substream(master_seed, "scan", i)
            psis[i - lo] = haar_state(nq, rng).amplitudes
        branches = np.einsum("bij,sj->sbi", stack, psis)
        mats = np.empty((hi - lo, 7, d, d), dtype=complex)
        mats[:, 0] = np.einsum("sbi,sbj->sij", branches, branches.conj()) / 16
        for gi, var in enumerate(("y", "r", "yr")):
            m = masks[var]
            for flip, which in ((~m, 1 + 2 * gi), (m, 2 + 2 * gi)):
                sel = branches[:, flip]
                mats[:, which] = np.einsum("sbi,sbj->sij", sel, sel.conj()) / 8
        evals = np.linalg.eigvalsh(mats.reshape(-1, d, d)).reshape(hi - lo, 7, d)
        safe = np.where(evals > 1e-12, evals, 1.0)
        ent = -np.sum(evals * np.log2(safe) * (evals > 1e-12), axis=2)
        for j in range(hi - lo):
            chis = [max(ent[j, 0] - 0.5 * (ent[j, 1 + 2 * g] + ent[j, 2 + 2 * g]), 0.0)
                    for g in range(3)]
            points.append(TradeoffPoint(lo + j, *chis))
    best = max(points, key=lambda p: p.sum_value)
    return points, ScanSummary(samples, ancilla, best.sum_value, best.seed)


def near_endpoint_sigma(delta: float, rng: np.random.Generator,
                        ancilla: int = 2) -> SigmaA:
    """States near the tradeoff endpoint: mostly |0...0>, a dash of Haar.

    The computational basis point has chi_r = 1 and chi_y = 0 exactly, so
    small delta probes the envelope near eps = 0.
    """
    nq = 2 + ancilla
    base = np.zeros(2 ** nq, dtype=complex)
    base[0] = 1.0
    noise = haar_state(nq, rng).amplitudes
    noise = noise - (base.conj() @ noise) * base
    nrm = np.linalg.norm(noise)
    if nrm < 1e-12:
        return SigmaA(PureState(nq, base))
    psi = np.sqrt(1 - delta) * base + np.sqrt(delta) * (noise / nrm)
    return SigmaA(PureState(nq, psi / np.linalg.norm(psi)))


# ---------------------------------------------------------------- envelope

@dataclass(frozen=True)
class EnvelopeBin:
    eps: float
    count: int
    f_value: Optional[float]  # None when the bin is empty


def f_envelope(points: Sequence[TradeoffPoint],
               eps_grid: Sequence[float]) -> list[EnvelopeBin]:
    """Empirical excess of the information sum over 1 near the endpoint.

    For each eps, the bin holds points with max(chi_r, chi_yr) >= 1 - eps;
    the reported value is max(sum - 1) over the bin, absent if empty.
    """
    bins = []
    for eps in eps_grid:
        vals = [p.sum_value - 1.0 for p in points
                if max(p.chi_r, p.chi_yr) >= 1.0 - eps]
        bins.append(EnvelopeBin(float(eps), len(vals),
                                max(vals) if vals else None))
    return bins


# ---------------------------------------------------------------- measured info

def mutual_information_bits(joint: np.ndarray) -> float:
    """I(V;K) of a joint probability table (rows V, columns K)."""
    joint = np.asarray(joint, dtype=float)
    total = joint.sum()
    if total <= 0:
        raise LabError("empty joint distribution")
    joint = joint / total
    pv = joint.sum(axis=1, keepdims=True)
    pk = joint.sum(axis=0, keepdims=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(joint > 0, joint / (pv @ pk), 1.0)
        terms = np.where(joint > 0, joint * np.log2(ratio), 0.0)
    return float(terms.sum())


def ensemble_measured_info(members, basis: np.ndarray) -> float:
    """Classical mutual information of a projective measurement on an ensemble."""
    joint = np.array([
        p * np.real(np.einsum("ki,ij,jk->k", basis.conj().T, dm.mat, basis))
        for p, dm in members
    ])
    joint = np.clip(joint, 0.0, None)
    return mutual_information_bits(joint)


def _givens(d: int, i: int, j: int, theta: float, phi: float) -> np.ndarray:
    g = np.eye(d, dtype=complex)
    c, s = np.cos(theta), np.sin(theta)
    g[i, i] = c
    g[j, j] = c
    g[i, j] = -np.exp(1j * phi) * s
    g[j, i] = np.exp(-1j * phi) * s
    return g


@dataclass(frozen=True)
class MeasurementSpec:
    """Orthonormal measurement basis, columns of a unitary."""

    basis: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.basis, dtype=complex)
        if np.max(np.abs(b.conj().T @ b - np.eye(b.shape[0]))) > 1e-10:
            raise QuantumError("measurement basis not unitary")
        object.__setattr__(self, "basis", b)


def max_projective_info(members, restarts: int = 6,
                        rng: Optional[np.random.Generator] = None,
                        sweeps: int = 2) -> tuple[MeasurementSpec, float]:
    """Lower-bound the accessible information by optimizing a projective basis.

    Random unitary restarts followed by coordinate descent over Givens
    rotations (two phase choices per plane, scalar line search).  The result
    is a lower bound; the Holevo quantity upper-bounds it.
    """
    rng = rng or np.random.default_rng(0)
    d = members[0][1].dim

    def score(u):
        return ensemble_measured_info(members, u)

    best_u, best_i = np.eye(d, dtype=complex), score(np.eye(d, dtype=complex))
    for _ in range(restarts):
        u = haar_unitary(d, rng)
        val = score(u)
        for _ in range(sweeps):
            for i in range(d):
                for j in range(i + 1, d):
                    for phi in (0.0, np.pi / 2):
                        res = minimize_scalar(
                            lambda th: -score(u @ _givens(d, i, j, th, phi)),
                            bounds=(-np.pi / 2, np.pi / 2), method="bounded",
                            options={"xatol": 1e-4})
                        if -res.fun > val:
                            val = -res.fun
                            u = u @ _givens(d, i, j, float(res.x), phi)
        if val > best_i:
            best_u, best_i = u, val
    return MeasurementSpec(best_u), best_i


def measured_info_max(s: SigmaA, target: str, restarts: int = 6,
                      rng: Optional[np.random.Generator] = None,
                      sweeps: int = 2) -> tuple[MeasurementSpec, float]:
    """Best found projective-measurement information about y, r, or y^r."""
    ens = dict(zip(("y", "r", "yr"), alice_view_ensembles(s)))
    if target not in ens:
        raise LabError(f"target must be one of y, r, yr; got {target!r}")
    return max_projective_info(ens[target].members, restarts, rng, sweeps)


# ---------------------------------------------------------------- inequality suites

def prop1_infos(s: SigmaA, basis: np.ndarray) -> dict:
    """I^M for y, r, y^r under one shared measurement on Alice's final state."""
    br = branch_states(s)
    probs = np.abs(br @ basis.conj()) ** 2 / 16.0  # (branch, outcome)
    out = {}
    for var in ("y", "r", "yr"):
        m = _mask(var)
        joint = np.stack([probs[~m].sum(axis=0), probs[m].sum(axis=0)])
        out[var] = mutual_information_bits(joint)
    return out


def honest_preparations():
    """The 8 equally likely states Alice sends when honest, with labels."""
    preps = []
    for x in (0, 1):
        for t in (0, 1):
            for s_bit in (0, 1):
                preps.append(((x, t, s_bit), _prepare_honest_nland(x, s_bit, t)))
    return preps


_H2 = np.kron(qk.GATE_MATRICES["H"], qk.GATE_MATRICES["H"])


def prop2_infos(basis: np.ndarray) -> dict:
    """Role-swapped informations I^M for x, r', x^r' under Bob's measurement.

    Bob measures the two received qubits projectively and returns the
    post-measurement state; Alice completes the protocol, and r' denotes her
    output bit.  The joint distribution is computed exactly.
    """
    joint_x = np.zeros((2, 4))
    joint_rp = np.zeros((2, 4))
    joint_xrp = np.zeros((2, 4))
    for (x, t, s_bit), prep in honest_preparations():
        amp = basis.conj().T @ prep.amplitudes
        q_k = np.abs(amp) ** 2  # Bob's outcome distribution
        for k in range(4):
            if q_k[k] < 1e-15:
                continue
            post = basis[:, k]
            if s_bit == 1:
                post = _H2 @ post
            o_probs = np.abs(post) ** 2  # over (o1, o2) big-endian
            for o1 in (0, 1):
                for o2 in (0, 1):
                    pr = q_k[k] * o_probs[(o1 << 1) | o2] / 8.0
                    e = o1 ^ o2 ^ t
                    joint_x[x, k] += pr
                    joint_rp[e, k] += pr
                    joint_xrp[x ^ e, k] += pr
    return {
        "x": mutual_information_bits(joint_x),
        "rp": mutual_information_bits(joint_rp),
        "xrp": mutual_information_bits(joint_xrp),
    }


def bob_view_of_x():
    """Bob's received-state ensemble conditioned on Alice's input bit."""
    rhos = []
    for x in (0, 1):
        acc = np.zeros((4, 4), dtype=complex)
        for t in (0, 1):
            for s_bit in (0, 1):
                v = _prepare_honest_nland(x, s_bit, t).amplitudes
                acc += np.outer(v, v.conj()) / 4.0
        rhos.append(DensityMatrix(acc))
    return tuple(rhos)


def z_tensor_x_basis() -> np.ndarray:
    """The Z (x) X product basis, Bob's optimal fixed measurement."""
    x_basis = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
    return np.kron(np.eye(2, dtype=complex), x_basis)


# ---------------------------------------------------------------- combination

def combined_table_leakage(k: int) -> float:
    """Accessible information about a k-fold combined Alice bit: 2^-k.

    Per instance Bob's optimal measurement learns the bit perfectly with
    probability 1/2 and nothing otherwise (an erasure channel); the XOR of k
    independent bits is known exactly when all k are, so the information is
    2^-k.  The Holevo bound coincides because the conditional states commute.
    """
    if k < 1:
        raise LabError("k must be >= 1")
    return 2.0 ** (-k)


def combined_leakage_chi(k: int) -> float:
    """Cross-check by explicit tensor-ensemble construction (k <= 3)."""
    if not 1 <= k <= 3:
        raise LabError("explicit construction supported for k <= 3")
    rho = {x: dm.mat for x, dm in zip((0, 1), bob_view_of_x())}
    d = 4 ** k
    groups = {0: np.zeros((d, d), dtype=complex),
              1: np.zeros((d, d), dtype=complex)}
    for bits in range(2 ** k):
        m = np.ones((1, 1), dtype=complex)
        parity = 0
        for pos in range(k):
            b = (bits >> pos) & 1
            parity ^= b
            m = np.kron(m, rho[b])
        groups[parity] += m / 2 ** (k - 1)
    avg = 0.5 * (groups[0] + groups[1])
    return entropy_bits(avg) - 0.5 * (entropy_bits(groups[0])
                                      + entropy_bits(groups[1]))
