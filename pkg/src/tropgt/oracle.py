"""Exhaustive ground truth for tiny instances.

Enumerates every level vector (optionally restricted to a fixed per-level
profile), giving exact satisfying-vector sets, the exact success probability
of the best possible decoder for a fixed design, exact per-decoder error
rates, and the per-instance diagnostic counts (M, L, H, G) that the DD
analysis is built on.  Everything here is brute force on purpose: it is the
independent reference the fast decoders are checked against.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterator

import numpy as np

from .bounds import exact_multinomial
from .core import (INFINITY, Profile, TestDesign, compute_mu, run_tests,
                   validate_levels)
from .errors import BudgetError, InputError

DEFAULT_BUDGET = 10_000_000
_CHUNK = 4096


def outcomes_for_many(design: TestDesign, truths: np.ndarray) -> np.ndarray:
    """Row-wise run_tests for an (M, N) stack of truth vectors -> (M, T)."""
    truths = np.asarray(truths, dtype=np.int64)
    out = np.full((truths.shape[0], design.T), INFINITY, dtype=np.int64)
    for t in range(design.T):
        cols = np.flatnonzero(design.matrix[t])
        if cols.size:
            out[:, t] = truths[:, cols].min(axis=1)
    return out


def _all_vectors(N: int, d: int) -> Iterator[np.ndarray]:
    """All of {1..d, INFINITY}^N in lexicographic order, as (chunk, N) blocks."""
    levels = np.concatenate([np.arange(1, d + 1, dtype=np.int64), [INFINITY]])
    total = (d + 1) ** N
    dims = (d + 1,) * N
    for start in range(0, total, _CHUNK):
        idx = np.arange(start, min(start + _CHUNK, total))
        digits = np.stack(np.unravel_index(idx, dims), axis=1)
        yield levels[digits]


def _placements(profile: Profile) -> Iterator[np.ndarray]:
    """All vectors with exactly profile.counts items per level, as (chunk, N) blocks.

    Levels claim position combinations in lexicographic order, lowest level
    first, so the enumeration order is deterministic.
    """
    present = [(r + 1, c) for r, c in enumerate(profile.counts) if c > 0]
    current = np.full(profile.n, INFINITY, dtype=np.int64)
    chunk: list[np.ndarray] = []

    def assign(positions: tuple[int, ...], idx: int) -> Iterator[np.ndarray]:
        if idx == len(present):
            chunk.append(current.copy())
            if len(chunk) >= _CHUNK:
                yield np.array(chunk)
                chunk.clear()
            return
        level, count = present[idx]
        for combo in itertools.combinations(positions, count):
            current[list(combo)] = level
            taken = set(combo)
            yield from assign(tuple(p for p in positions if p not in taken), idx + 1)
            current[list(combo)] = INFINITY

    yield from assign(tuple(range(profile.n)), 0)
    if chunk:
        yield np.array(chunk)
        chunk.clear()


@dataclass(frozen=True)
class SatisfyingSet:
    """All enumerated vectors whose predicted outcomes equal the observed ones."""

    vectors: np.ndarray  # (M, N) int64
    restricted_to_profile: bool

    def __len__(self) -> int:
        return self.vectors.shape[0]

    def contains(self, vector: np.ndarray) -> bool:
        v = np.asarray(vector, dtype=np.int64)
        return bool((self.vectors == v[np.newaxis, :]).all(axis=1).any())


def _candidate_blocks(design: TestDesign, d: int, profile: Profile | None,
                      budget: int) -> Iterator[np.ndarray]:
    if profile is not None:
        if profile.n != design.N:
            raise InputError(f"profile is for {profile.n} items, design has {design.N}")
        total = exact_multinomial(profile)
        if total > budget:
            raise BudgetError(f"profile enumeration needs {total} candidates, budget {budget}")
        return _placements(profile)
    total = (d + 1) ** design.N
    if total > budget:
        raise BudgetError(f"full enumeration needs {total} candidates, budget {budget}")
    return _all_vectors(design.N, d)


def enumerate_satisfying(design: TestDesign, outcomes: np.ndarray, d: int,
                         profile: Profile | None = None,
                         budget: int = DEFAULT_BUDGET) -> SatisfyingSet:
    """Every U' (in {1..d, INFINITY}^N, or the profile's slice of it) explaining all tests."""
    outcomes = np.asarray(outcomes, dtype=np.int64)
    if outcomes.shape != (design.T,):
        raise InputError(f"outcomes have shape {outcomes.shape}, expected ({design.T},)")
    matches = []
    for block in _candidate_blocks(design, d, profile, budget):
        hit = (outcomes_for_many(design, block) == outcomes[np.newaxis, :]).all(axis=1)
        if hit.any():
            matches.append(block[hit])
    vectors = (np.concatenate(matches, axis=0) if matches
               else np.empty((0, design.N), dtype=np.int64))
    return SatisfyingSet(vectors=vectors, restricted_to_profile=profile is not None)


def optimal_success_probability(design: TestDesign, profile: Profile,
                                budget: int = DEFAULT_BUDGET) -> Fraction:
    """Success probability of the best decoder under a uniform profile prior.

    Truth vectors sharing an outcome vector are indistinguishable, so the best
    any decoder can do is one success per nonempty outcome class: the value is
    (number of distinct outcome vectors) / (number of truth vectors).
    """
    seen: set[bytes] = set()
    total = 0
    for block in _candidate_blocks(design, profile.d, profile, budget):
        total += block.shape[0]
        for row in outcomes_for_many(design, block):
            seen.add(row.tobytes())
    if total == 0:
        raise InputError("profile admits no truth vectors")
    return Fraction(len(seen), total)


def exact_decoder_error(design: TestDesign, profile: Profile,
                        decoder: Callable[[TestDesign, np.ndarray], object],
                        budget: int = DEFAULT_BUDGET) -> Fraction:
    """Exact error rate of `decoder` over every truth vector with this profile."""
    errors = 0
    total = 0
    for block in _candidate_blocks(design, profile.d, profile, budget):
        for truth in block:
            result = decoder(design, run_tests(design, truth))
            estimate = getattr(result, "estimate", result)
            errors += int(not np.array_equal(estimate, truth))
        total += block.shape[0]
    if total == 0:
        raise InputError("profile admits no truth vectors")
    return Fraction(errors, total)


@dataclass(frozen=True)
class DiagnosticCounts:
    """Per-instance counts behind the DD analysis.

    For each finite level r (1..d) and its s-th defective item (items listed
    in `items_by_level[r]`, ascending index):

    * m_single[r][s]: tests containing that item and no other defective of
      level <= r (such a test necessarily has outcome r);
    * m_plus[r]: tests of outcome r containing two or more level-r items;
    * m_level[r]: all tests of outcome r, = sum(m_single[r]) + m_plus[r];
    * l_single[r][s]: the m_single tests that additionally contain no
      non-defective item with mu = r — exactly the tests that let DD pin the
      item, so DD succeeds iff every l_single entry is >= 1;
    * h[r]: tested non-defectives with mu = r (h[0]: untested non-defectives,
      h[INFINITY]: those proven non-defective);
    * g[r] = h[0] + ... + h[r]: non-defectives that could intrude at level r.
    """

    d: int
    items_by_level: dict[int, tuple[int, ...]]
    m_infinity: int
    m_level: dict[int, int]
    m_single: dict[int, tuple[int, ...]]
    m_plus: dict[int, int]
    l_single: dict[int, tuple[int, ...]]
    h: dict[int, int]
    g: dict[int, int]

    def min_l(self) -> float:
        values = [v for counts in self.l_single.values() for v in counts]
        return min(values) if values else math.inf

    def dd_succeeds(self) -> bool:
        return self.min_l() >= 1


def count_diagnostics(design: TestDesign, truth: np.ndarray, d: int) -> DiagnosticCounts:
    truth = np.asarray(truth, dtype=np.int64)
    if truth.shape != (design.N,):
        raise InputError(f"truth has shape {truth.shape}, expected ({design.N},)")
    validate_levels(truth, d)
    outcomes = run_tests(design, truth)
    mu = compute_mu(design, outcomes)
    matrix = design.matrix
    defective = truth != INFINITY
    tested = matrix.any(axis=0)

    items_by_level: dict[int, tuple[int, ...]] = {}
    m_level: dict[int, int] = {}
    m_single: dict[int, tuple[int, ...]] = {}
    m_plus: dict[int, int] = {}
    l_single: dict[int, tuple[int, ...]] = {}
    h: dict[int, int] = {}

    nondef = ~defective
    for r in range(1, d + 1):
        items = tuple(int(i) for i in np.flatnonzero(truth == r))
        items_by_level[r] = items
        outcome_r = outcomes == r
        m_level[r] = int(outcome_r.sum())
        h[r] = int((tested & nondef & (mu == r)).sum())
        if not items:
            m_single[r] = ()
            l_single[r] = ()
            m_plus[r] = m_level[r]
            continue
        count_le_r = matrix[:, defective & (truth <= r)].sum(axis=1)
        at_r = matrix[:, truth == r].sum(axis=1)
        m_plus[r] = int((outcome_r & (at_r >= 2)).sum())
        intruder_free = ~matrix[:, nondef & (mu == r)].any(axis=1)
        singles, lones = [], []
        for item in items:
            alone = matrix[:, item] & (count_le_r == 1)
            singles.append(int(alone.sum()))
            lones.append(int((alone & intruder_free).sum()))
        m_single[r] = tuple(singles)
        l_single[r] = tuple(lones)

    h[0] = int((~tested & nondef).sum())
    h[INFINITY] = int((tested & nondef & (mu == INFINITY)).sum())
    g: dict[int, int] = {}
    running = h[0]
    g[0] = running
    for r in range(1, d + 1):
        running += h[r]
        g[r] = running

    return DiagnosticCounts(
        d=d, items_by_level=items_by_level,
        m_infinity=int((outcomes == INFINITY).sum()),
        m_level=m_level, m_single=m_single, m_plus=m_plus,
        l_single=l_single, h=h, g=g)
