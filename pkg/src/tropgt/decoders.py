"""The three tropical decoders: COMP, DD and SCOMP.

All three estimate the level vector from (design, outcomes) alone.

* COMP outputs mu itself — the least vector that explains every test.  It
  never overestimates a level, but intruding items make it underestimate.
* DD keeps only deductions that are certain: items seen in a negative test are
  cleared, and a test of outcome r whose only mu_i = r member is some item i
  pins U_i = r.  Everything else is declared non-defective, so DD never
  underestimates (no false positives) but may miss defectives.
* SCOMP starts from DD and greedily pins additional mu_i = r items, always
  choosing the item that explains the most still-unexplained tests of that
  outcome, until every test is explained.

With d = 1 all three coincide with their classical binary counterparts.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import INFINITY, TestDesign, _check_outcomes, compute_mu, run_tests
from .errors import InconsistentInputError, InputError

TIE_BREAKS = ("min", "max")


@dataclass(frozen=True)
class DecodeResult:
    """Estimated level vector plus a replayable log of the items pinned.

    Trace entries are (test, level, item) triples in the order the decoder
    fixed them.  For DD and SCOMP, replaying them onto an all-INFINITY vector
    reproduces `estimate`; COMP pins nothing and leaves the trace empty.
    """

    estimate: np.ndarray
    trace: tuple = ()


def binarize(levels: np.ndarray) -> np.ndarray:
    """Collapse every finite level to 1 (the classical d = 1 reduction)."""
    levels = np.asarray(levels, dtype=np.int64)
    return np.where(levels == INFINITY, INFINITY, 1)


def decode_comp(design: TestDesign, outcomes: np.ndarray) -> DecodeResult:
    """Estimate each item at mu_i, the highest outcome it appears in."""
    return DecodeResult(estimate=compute_mu(design, outcomes))


def _dd_pins(design: TestDesign, outcomes: np.ndarray, mu: np.ndarray):
    """Tests of finite outcome r containing exactly one mu = r item pin that item."""
    candidate = design.matrix & (mu[np.newaxis, :] == outcomes[:, np.newaxis])
    rows = np.flatnonzero((outcomes != INFINITY) & (candidate.sum(axis=1) == 1))
    items = candidate[rows].argmax(axis=1)
    return rows, items, outcomes[rows]


def _dd_estimate(design: TestDesign, outcomes: np.ndarray, mu: np.ndarray):
    rows, items, levels = _dd_pins(design, outcomes, mu)
    order = np.argsort(items, kind="stable")
    it, lv = items[order], levels[order]
    dup = it[1:] == it[:-1]
    if dup.any() and (lv[1:][dup] != lv[:-1][dup]).any():
        raise InconsistentInputError(
            "an item is the sole candidate at two distinct outcome levels; "
            "outcomes were not produced by this design")
    estimate = np.full(design.N, INFINITY, dtype=np.int64)
    estimate[items] = levels
    trace = tuple((int(t), int(r), int(i)) for t, r, i in zip(rows, levels, items))
    return estimate, trace


def decode_dd(design: TestDesign, outcomes: np.ndarray) -> DecodeResult:
    """Definite-defectives decoding; output entries are the true level or INFINITY."""
    outcomes = _check_outcomes(design, outcomes)
    estimate, trace = _dd_estimate(design, outcomes, compute_mu(design, outcomes))
    return DecodeResult(estimate=estimate, trace=trace)


def decode_scomp(design: TestDesign, outcomes: np.ndarray, tie: str = "min",
                 count_all_level_tests: bool = False) -> DecodeResult:
    """Greedy completion of the DD estimate until every test is explained.

    Repeatedly takes the unexplained test with the smallest index, reads its
    outcome r, and among the mu = r items appearing in unexplained outcome-r
    tests pins the one with the most such appearances.  `tie` picks the
    smallest ("min") or largest ("max") item index among equal counts.  With
    `count_all_level_tests` appearances are counted over all outcome-r tests
    instead of just the unexplained ones (candidates must still explain at
    least one test, so the loop always terminates).
    """
    if tie not in TIE_BREAKS:
        raise InputError(f"tie must be one of {TIE_BREAKS}")
    outcomes = _check_outcomes(design, outcomes)
    mu = compute_mu(design, outcomes)
    dd_estimate, dd_trace = _dd_estimate(design, outcomes, mu)
    estimate, trace = _scomp_finish(design, outcomes, mu, dd_estimate, dd_trace,
                                    tie, count_all_level_tests)
    return DecodeResult(estimate=estimate, trace=trace)


def _scomp_finish(design: TestDesign, outcomes: np.ndarray, mu: np.ndarray,
                  dd_estimate: np.ndarray, dd_trace: tuple,
                  tie: str, count_all_level_tests: bool):
    estimate = dd_estimate.copy()
    predicted = run_tests(design, estimate)
    unexplained = predicted != outcomes
    steps = list(dd_trace)
    while unexplained.any():
        t_star = int(np.flatnonzero(unexplained)[0])
        r = int(outcomes[t_star])
        if r == INFINITY:
            raise InconsistentInputError(
                f"negative test {t_star} is unexplained; estimate went below INFINITY")
        level_tests = outcomes == r
        open_occurrences = (
            design.matrix[level_tests & unexplained]
            & (mu == r)[np.newaxis, :]).sum(axis=0)
        if not open_occurrences.any():
            raise InconsistentInputError(
                f"test {t_star} has outcome {r} but no remaining mu = {r} candidate; "
                "outcomes were not produced by this design")
        if count_all_level_tests:
            scores = (design.matrix[level_tests] & (mu == r)[np.newaxis, :]).sum(axis=0)
            scores = np.where(open_occurrences > 0, scores, -1)
        else:
            scores = np.where(open_occurrences > 0, open_occurrences, -1)
        ties = np.flatnonzero(scores == scores.max())
        item = int(ties[0] if tie == "min" else ties[-1])
        estimate[item] = r
        steps.append((t_star, r, item))
        # only estimate[item] changed (downward), so predictions update by a min
        predicted = np.minimum(predicted, np.where(design.matrix[:, item], r, INFINITY))
        unexplained = predicted != outcomes
    return estimate, tuple(steps)


DECODERS = {"comp": decode_comp, "dd": decode_dd, "scomp": decode_scomp}


def decode_family(design: TestDesign, outcomes: np.ndarray,
                  algorithms: Sequence[str] = ("comp", "dd", "scomp"),
                  tie: str = "min") -> dict[str, np.ndarray]:
    """Estimates for several decoders on one instance, sharing mu and the DD pass.

    Returns bare estimate arrays keyed by algorithm name; the Monte Carlo
    harness calls this once per trial instead of the individual decoders.
    """
    unknown = set(algorithms) - set(DECODERS)
    if unknown:
        raise InputError(f"unknown algorithms: {sorted(unknown)}")
    outcomes = _check_outcomes(design, outcomes)
    mu = compute_mu(design, outcomes)
    estimates: dict[str, np.ndarray] = {}
    if "comp" in algorithms:
        estimates["comp"] = mu
    if "dd" in algorithms or "scomp" in algorithms:
        dd_estimate, dd_trace = _dd_estimate(design, outcomes, mu)
        if "dd" in algorithms:
            estimates["dd"] = dd_estimate
        if "scomp" in algorithms:
            estimates["scomp"], _ = _scomp_finish(
                design, outcomes, mu, dd_estimate, dd_trace, tie, False)
    return estimates
