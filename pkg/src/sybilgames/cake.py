"""Truthful cake cutting over piecewise-constant valuations on [0, 1], hardened
against fake identities by burning the cake with the right probability.

The mechanism: build a partition every declared measure values at exactly 1/n,
shuffle it uniformly, then keep the allocation with probability n / 2^(n-1) and
burn everything otherwise.  Each identity's expected value is 1 / 2^(n-1)
whatever it declares, and reporting k identities against y others is worth
k / 2^(y+k-1), which never beats a single report.

Randomness contract: one PCG64 generator per run, seeded explicitly; the
permutation is Fisher-Yates on that stream and the coin consumes exactly one
uniform draw after it.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import DomainError, MalformedSliceError, StatisticalPowerError

MERGE_EPS = 1e-15

COIN_KEPT = "kept"
COIN_BURNED = "burned"


@dataclass(frozen=True)
class PiecewiseMeasure:
    """Nonnegative piecewise-constant probability density on [0, 1]."""

    breakpoints: tuple[float, ...]
    densities: tuple[float, ...]

    def __init__(self, breakpoints: Iterable[float], densities: Iterable[float]):
        bps = tuple(float(b) for b in breakpoints)
        dens = tuple(float(d) for d in densities)
        if len(bps) < 2 or len(dens) != len(bps) - 1:
            raise DomainError("need m+1 breakpoints and m densities")
        if abs(bps[0]) > MERGE_EPS or abs(bps[-1] - 1.0) > MERGE_EPS:
            raise DomainError("breakpoints must start at 0 and end at 1")
        if any(b2 <= b1 for b1, b2 in zip(bps, bps[1:])):
            raise DomainError("breakpoints must be strictly increasing")
        if any(d < 0.0 for d in dens):
            raise DomainError("densities must be nonnegative")
        mass = sum(d * (b2 - b1) for d, b1, b2 in zip(dens, bps, bps[1:]))
        if abs(mass - 1.0) > 1e-12:
            raise DomainError(f"total mass must be 1, got {mass}")
        object.__setattr__(self, "breakpoints", bps)
        object.__setattr__(self, "densities", dens)

    @staticmethod
    def uniform() -> "PiecewiseMeasure":
        return PiecewiseMeasure((0.0, 1.0), (1.0,))

    @staticmethod
    def from_flat(numbers: Sequence[float]) -> "PiecewiseMeasure":
        """Parse the flat file form b0 d0 b1 d1 ... bm (breakpoints and densities alternating)."""
        if len(numbers) < 3 or len(numbers) % 2 == 0:
            raise DomainError("flat measure needs an odd count: b0 d0 b1 ... bm")
        return PiecewiseMeasure(numbers[0::2], numbers[1::2])

    def interval_value(self, lo: float, hi: float) -> float:
        if hi <= lo:
            return 0.0
        total = 0.0
        for d, b1, b2 in zip(self.densities, self.breakpoints, self.breakpoints[1:]):
            overlap = min(hi, b2) - max(lo, b1)
            if overlap > 0.0:
                total += d * overlap
        return total


@dataclass(frozen=True)
class Slice:
    """Disjoint sorted subintervals of [0, 1]; the empty slice is allowed."""

    intervals: tuple[tuple[float, float], ...]

    def __init__(self, intervals: Iterable[tuple[float, float]]):
        cleaned = []
        for lo, hi in intervals:
            lo, hi = float(lo), float(hi)
            if lo < -MERGE_EPS or hi > 1.0 + MERGE_EPS:
                raise MalformedSliceError(f"interval [{lo}, {hi}] leaves the cake")
            if hi - lo > MERGE_EPS:
                cleaned.append((max(lo, 0.0), min(hi, 1.0)))
        cleaned.sort()
        merged: list[tuple[float, float]] = []
        for lo, hi in cleaned:
            if merged and lo < merged[-1][1] - MERGE_EPS:
                raise MalformedSliceError("slice intervals overlap")
            if merged and lo - merged[-1][1] <= MERGE_EPS:
                merged[-1] = (merged[-1][0], hi)
            else:
                merged.append((lo, hi))
        object.__setattr__(self, "intervals", tuple(merged))

    @property
    def empty(self) -> bool:
        return not self.intervals

    @property
    def length(self) -> float:
        return sum(hi - lo for lo, hi in self.intervals)


EMPTY_SLICE = Slice(())


@dataclass(frozen=True)
class Allocation:
    """One slice per reported identity; a burned coin empties every slice."""

    slices: tuple[Slice, ...]
    coin: str

    def __post_init__(self):
        if self.coin not in (COIN_KEPT, COIN_BURNED):
            raise DomainError(f"unknown coin outcome {self.coin!r}")
        if self.coin == COIN_BURNED and any(not s.empty for s in self.slices):
            raise DomainError("a burned allocation must hand out empty slices")


def measure_value(mu: PiecewiseMeasure, s: Slice) -> float:
    """Exact value of a slice under a piecewise-constant measure."""
    return sum(mu.interval_value(lo, hi) for lo, hi in s.intervals)


def exact_partition(declared: Sequence[PiecewiseMeasure], n: Optional[int] = None) -> list[Slice]:
    """Partition of [0, 1] every declared measure values at exactly 1/n.

    The cake is refined by the union of all breakpoints, so densities are
    constant on each refined segment; splitting every segment into n equal parts
    and collecting the j-th parts makes each slice worth exactly 1/n to everyone.
    """
    if n is None:
        n = len(declared)
    if n < 1 or n != len(declared):
        raise DomainError("need one declared measure per identity, n >= 1")
    cuts: list[float] = []
    for mu in declared:
        cuts.extend(mu.breakpoints)
    cuts.sort()
    refined = [0.0]
    for b in cuts:
        if b - refined[-1] > MERGE_EPS:
            refined.append(b)
    if 1.0 - refined[-1] > MERGE_EPS:
        refined.append(1.0)
    else:
        refined[-1] = 1.0
    parts: list[list[tuple[float, float]]] = [[] for _ in range(n)]
    for a, b in zip(refined, refined[1:]):
        width = b - a
        for j in range(n):
            lo = a + width * j / n
            hi = a + width * (j + 1) / n if j < n - 1 else b
            parts[j].append((lo, hi))
    return [Slice(p) for p in parts]


def coin_probability(n: int) -> float:
    """Probability the allocation is kept rather than burned: n / 2^(n-1)."""
    if n < 1:
        raise DomainError("need n >= 1")
    return n / 2.0 ** (n - 1)


def _draw_assignment(n: int, rng: np.random.Generator) -> tuple[list[int], bool]:
    """Fisher-Yates permutation on the seeded stream, then one coin draw."""
    perm = list(range(n))
    for i in range(n - 1, 0, -1):
        j = int(rng.integers(0, i + 1))
        perm[i], perm[j] = perm[j], perm[i]
    kept = rng.random() < coin_probability(n)
    return perm, kept


def run_mechanism(declared: Sequence[PiecewiseMeasure], seed: int) -> Allocation:
    """One mechanism run: exact partition, uniform shuffle, biased keep/burn coin."""
    n = len(declared)
    partition = exact_partition(declared, n)
    rng = np.random.Generator(np.random.PCG64(seed))
    perm, kept = _draw_assignment(n, rng)
    if kept:
        return Allocation(tuple(partition[perm[i]] for i in range(n)), COIN_KEPT)
    return Allocation(tuple(EMPTY_SLICE for _ in range(n)), COIN_BURNED)


def expected_truthful_value(n: int) -> float:
    """Expected slice value of a truthful identity among n reports: 1 / 2^(n-1)."""
    if n < 1:
        raise DomainError("need n >= 1")
    return 1.0 / 2.0 ** (n - 1)


def sybil_deviation_value(k: int, y: int) -> float:
    """Expected total value of reporting k identities against y honest ones: k / 2^(y+k-1)."""
    if k < 1 or y < 0:
        raise DomainError("need k >= 1 and y >= 0")
    return k / 2.0 ** (y + k - 1)


@dataclass(frozen=True)
class Transcript:
    """Batch of mechanism runs; run r used seed base_seed + r."""

    declared: tuple[PiecewiseMeasure, ...]
    partition: tuple[Slice, ...]
    assignments: np.ndarray  # (runs, n) slice index handed to each identity
    coins: np.ndarray  # (runs,) True where the allocation was kept
    base_seed: int

    @property
    def n(self) -> int:
        return len(self.declared)

    @property
    def runs(self) -> int:
        return int(self.assignments.shape[0])


def run_monte_carlo(declared: Sequence[PiecewiseMeasure], runs: int, seed: int) -> Transcript:
    """Replay the mechanism ``runs`` times with per-run seeds seed, seed+1, ..."""
    if runs < 1:
        raise DomainError("need at least one run")
    n = len(declared)
    partition = tuple(exact_partition(declared, n))
    assignments = np.empty((runs, n), dtype=np.int64)
    coins = np.empty(runs, dtype=bool)
    for r in range(runs):
        rng = np.random.Generator(np.random.PCG64(seed + r))
        perm, kept = _draw_assignment(n, rng)
        assignments[r] = perm
        coins[r] = kept
    return Transcript(tuple(declared), partition, assignments, coins, seed)


@dataclass(frozen=True)
class FairnessReport:
    envy_free_in_expectation: bool
    alpha_proportional: float
    non_wasteful: bool
    own_value_means: tuple[float, ...]


def check_fairness(
    transcript: Transcript,
    true_measures: Sequence[PiecewiseMeasure],
    min_runs: int = 10_000,
    z: float = 3.0,
) -> FairnessReport:
    """Estimate the fairness guarantees from a Monte Carlo transcript.

    ``alpha_proportional`` is the largest alpha every player's empirical mean own
    value still clears after a z-sigma allowance; envy-freeness compares each
    pair's own-vs-other value difference against its paired standard error;
    ``non_wasteful`` requires every run to hand out slices covering the cake.
    """
    if transcript.runs < min_runs:
        raise StatisticalPowerError(
            f"need at least {min_runs} runs for fairness estimates, got {transcript.runs}"
        )
    n = transcript.n
    if len(true_measures) != n:
        raise DomainError("need one true measure per identity")
    values = np.array(
        [[measure_value(true_measures[i], transcript.partition[j]) for j in range(n)] for i in range(n)]
    )
    coins = transcript.coins.astype(float)
    runs = transcript.runs
    own = np.empty((runs, n))
    for i in range(n):
        own[:, i] = coins * values[i, transcript.assignments[:, i]]
    own_means = own.mean(axis=0)
    own_se = own.std(axis=0, ddof=1) / np.sqrt(runs)
    alpha = float(np.min(own_means + z * own_se))
    envy_free = True
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            diff = own[:, i] - coins * values[i, transcript.assignments[:, j]]
            se = diff.std(ddof=1) / np.sqrt(runs)
            if diff.mean() < -z * se - 1e-12:
                envy_free = False
    covered = abs(sum(s.length for s in transcript.partition) - 1.0) <= 1e-9
    non_wasteful = bool(transcript.coins.all()) and covered
    return FairnessReport(envy_free, alpha, non_wasteful, tuple(float(m) for m in own_means))
