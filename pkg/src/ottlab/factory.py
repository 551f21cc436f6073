"""Checking, combining and error-reducing pipelines over table batches.

Aborts are modeled outcomes, not exceptions: a checking party who sees more
failures than its preset threshold returns an aborted
:class:`BatchOutcome` with no survivors.  Every reveal is logged so tests
can audit that surviving tables stay private.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .protocols import OneTimeTable
from .seeds import substream


class FactoryError(ValueError):
    pass


@dataclass(frozen=True)
class CheckConfig:
    """Batch size, check counts, abort threshold and the sampling seed."""

    m: int
    k: Optional[int] = None        # one-sided (Bob) check count
    k_a: Optional[int] = None      # two-sided: Alice's count
    k_b: Optional[int] = None      # two-sided: Bob's count
    threshold: int = 0
    seed: int = 0

    def __post_init__(self):
        for name in ("k", "k_a", "k_b"):
            v = getattr(self, name)
            if v is not None and not 0 <= v <= self.m:
                raise FactoryError(f"{name}={v} exceeds batch size {self.m}")


def default_threshold(eps_noise: float, k: int) -> int:
    """Abort threshold leaving headroom for honest physical errors.

    Noise and cheating are indistinguishable to the checker, so the default
    allows twice the expected noise-induced failures; zero when noiseless.
    """
    return int(np.ceil(2.0 * eps_noise * k)) if eps_noise > 0 else 0


def wilson_interval(successes: int, n: int, z: float = 1.96):
    """Wilson score interval for a binomial rate."""
    if n == 0:
        return (0.0, 1.0)
    phat = successes / n
    denom = 1 + z ** 2 / n
    center = (phat + z ** 2 / (2 * n)) / denom
    half = z * np.sqrt(phat * (1 - phat) / n + z ** 2 / (4 * n ** 2)) / denom
    return (max(0.0, center - half), min(1.0, center + half))


@dataclass(frozen=True)
class BatchOutcome:
    passed: tuple[OneTimeTable, ...]
    aborted: bool
    failures: int
    checked: int
    cheat_rate: float
    cheat_rate_interval: tuple[float, float]
    initiator: Optional[str] = None
    revealed_to_bob: tuple = ()    # (id, x, e) triples Alice disclosed
    revealed_to_alice: tuple = ()  # (id, y, f) triples Bob disclosed

    def __post_init__(self):
        if self.aborted and self.passed:
            raise FactoryError("aborted outcome cannot carry survivors")


def _table_fails(t: OneTimeTable) -> bool:
    return (t.x & t.y) != (t.e ^ t.f)


def check_onesided(batch: Sequence[OneTimeTable],
                   cfg: CheckConfig) -> BatchOutcome:
    """Bob samples k tables, Alice reveals her bits, Bob counts failures."""
    if cfg.k is None:
        raise FactoryError("one-sided check needs cfg.k")
    if len(batch) != cfg.m:
        raise FactoryError("batch size does not match cfg.m")
    rng = substream(cfg.seed, "check-bob")
    chosen = set(int(i) for i in rng.choice(cfg.m, size=cfg.k, replace=False))
    revealed = tuple((batch[i].id, batch[i].x, batch[i].e) for i in sorted(chosen))
    failures = sum(_table_fails(batch[i]) for i in chosen)
    aborted = failures > cfg.threshold
    survivors = () if aborted else tuple(
        t for i, t in enumerate(batch) if i not in chosen)
    return BatchOutcome(
        passed=survivors, aborted=aborted, failures=failures, checked=cfg.k,
        cheat_rate=failures / cfg.k if cfg.k else 0.0,
        cheat_rate_interval=wilson_interval(failures, cfg.k),
        initiator="bob" if aborted else None,
        revealed_to_bob=revealed)


def check_twosided(batch: Sequence[OneTimeTable],
                   cfg: CheckConfig) -> BatchOutcome:
    """Both parties sample check sets independently; the sets may overlap."""
    if cfg.k_a is None or cfg.k_b is None:
        raise FactoryError("two-sided check needs cfg.k_a and cfg.k_b")
    if len(batch) != cfg.m:
        raise FactoryError("batch size does not match cfg.m")
    bob_rng = substream(cfg.seed, "check-bob")
    alice_rng = substream(cfg.seed, "check-alice")
    bob_set = set(int(i) for i in bob_rng.choice(cfg.m, size=cfg.k_b, replace=False))
    alice_set = set(int(i) for i in alice_rng.choice(cfg.m, size=cfg.k_a, replace=False))
    to_bob = tuple((batch[i].id, batch[i].x, batch[i].e) for i in sorted(bob_set))
    to_alice = tuple((batch[i].id, batch[i].y, batch[i].f) for i in sorted(alice_set))
    bob_failures = sum(_table_fails(batch[i]) for i in bob_set)
    alice_failures = sum(_table_fails(batch[i]) for i in alice_set)
    initiator = None
    if bob_failures > cfg.threshold and alice_failures > cfg.threshold:
        initiator = "both"
    elif bob_failures > cfg.threshold:
        initiator = "bob"
    elif alice_failures > cfg.threshold:
        initiator = "alice"
    aborted = initiator is not None
    union = bob_set | alice_set
    survivors = () if aborted else tuple(
        t for i, t in enumerate(batch) if i not in union)
    checked = cfg.k_a + cfg.k_b
    failures = bob_failures + alice_failures
    return BatchOutcome(
        passed=survivors, aborted=aborted, failures=failures, checked=checked,
        cheat_rate=failures / checked if checked else 0.0,
        cheat_rate_interval=wilson_interval(failures, checked),
        initiator=initiator,
        revealed_to_bob=to_bob, revealed_to_alice=to_alice)


# ---------------------------------------------------------------- combining

@dataclass(frozen=True)
class CombineSpec:
    """Disjoint groups of table ids; group members share Bob's input bit."""

    groups: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        flat = [i for g in self.groups for i in g]
        if len(flat) != len(set(flat)):
            raise FactoryError("groups must be disjoint")
        if any(len(g) == 0 for g in self.groups):
            raise FactoryError("empty group")


def combine_tables(batch: Sequence[OneTimeTable],
                   spec: CombineSpec) -> list[OneTimeTable]:
    """XOR-combine each group into one table (Bob's bit must agree)."""
    by_id = {t.id: t for t in batch}
    out = []
    for new_id, group in enumerate(spec.groups):
        members = [by_id[i] for i in group]
        b0 = members[0].y
        if any(t.y != b0 for t in members):
            raise FactoryError(f"group {group} mixes Bob input bits")
        x = e = f = 0
        for t in members:
            x ^= t.x
            e ^= t.e
            f ^= t.f
        out.append(OneTimeTable(x, b0, e, f, new_id))
    return out


def groups_by_bob_bit(batch: Sequence[OneTimeTable], k: int) -> CombineSpec:
    """Greedy grouping of same-y tables into groups of size k."""
    buckets = {0: [], 1: []}
    for t in batch:
        buckets[t.y].append(t.id)
    groups = []
    for ids in buckets.values():
        for i in range(0, len(ids) - k + 1, k):
            groups.append(tuple(ids[i:i + k]))
    return CombineSpec(tuple(groups))


# ---------------------------------------------------------------- error reduction

@dataclass(frozen=True)
class ErrorReduceSpec:
    target_id: int
    aux_ids: tuple[int, ...]

    def __post_init__(self):
        if self.target_id in self.aux_ids:
            raise FactoryError("auxiliary ids must exclude the target")
        if len(set(self.aux_ids)) != len(self.aux_ids):
            raise FactoryError("duplicate auxiliary ids")


@dataclass(frozen=True)
class ErrorReduceOutcome:
    target_id: int
    accepted: bool
    checks_used: int       # auxiliaries with matching Bob bit
    q: int
    messages: tuple        # (aux_id, a0^aj, e0^ej) sent by Alice


def error_reduce(batch: Sequence[OneTimeTable], spec: ErrorReduceSpec,
                 alice_messages=None) -> ErrorReduceOutcome:
    """Check one target against q auxiliaries; reject on any mismatch.

    Auxiliaries whose Bob bit differs from the target's contribute nothing
    and are skipped.  ``alice_messages`` overrides the honest
    (a0^aj, e0^ej) pairs, modeling a cheating Alice.
    """
    by_id = {t.id: t for t in batch}
    target = by_id[spec.target_id]
    msgs = []
    accepted = True
    checks = 0
    for j, aux_id in enumerate(spec.aux_ids):
        aux = by_id[aux_id]
        if alice_messages is None:
            da, de = target.x ^ aux.x, target.e ^ aux.e
        else:
            da, de = alice_messages[j]
        msgs.append((aux_id, da, de))
        if aux.y != target.y:
            continue
        checks += 1
        if (da & target.y) != (de ^ target.f ^ aux.f):
            accepted = False
    return ErrorReduceOutcome(spec.target_id, accepted, checks,
                              len(spec.aux_ids), tuple(msgs))


def corrupt_tables(tables: Sequence[OneTimeTable], rate: float,
                   rng: np.random.Generator) -> list[OneTimeTable]:
    """Flip Alice's output bit on a random fraction of tables."""
    out = []
    for t in tables:
        if rng.random() < rate:
            out.append(OneTimeTable(t.x, t.y, t.e ^ 1, t.f, t.id))
        else:
            out.append(t)
    return out


@dataclass(frozen=True)
class ReductionTrialStats:
    q: int
    targets: int
    accepted: int
    accepted_wrong: int
    injected_rate: float

    @property
    def residual_rate(self) -> float:
        return self.accepted_wrong / self.accepted if self.accepted else 0.0

    @property
    def acceptance_rate(self) -> float:
        return self.accepted / self.targets


def reduction_trial(error_rate: float, q: int, targets: int, seed: int,
                    attack: Optional[str] = None) -> ReductionTrialStats:
    """Monte Carlo trial of the reduction step over ideal-then-corrupted tables.

    ``attack='guess'`` models Alice fabricating her messages from guesses of
    Bob's bits instead of her real values; detection shows up as rejection.
    """
    from .protocols import ideal_tables
    rng = substream(seed, "error-reduce")
    pool = corrupt_tables(ideal_tables(targets * (q + 1), rng), error_rate, rng)
    accepted = accepted_wrong = 0
    for i in range(targets):
        chunk = pool[i * (q + 1):(i + 1) * (q + 1)]
        target, aux = chunk[0], chunk[1:]
        spec = ErrorReduceSpec(target.id, tuple(t.id for t in aux))
        if attack == "guess":
            b_guess = int(rng.integers(2))
            msgs = []
            for t in aux:
                df_guess = int(rng.integers(2))
                msgs.append(((target.x ^ t.x),
                             ((target.x ^ t.x) & b_guess) ^ df_guess))
            outcome = error_reduce(chunk, spec, alice_messages=msgs)
        else:
            outcome = error_reduce(chunk, spec)
        if outcome.accepted:
            accepted += 1
            accepted_wrong += not target.is_correct
    return ReductionTrialStats(q, targets, accepted, accepted_wrong, error_rate)
