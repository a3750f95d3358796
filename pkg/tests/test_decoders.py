"""Decoder behaviour: worked-example goldens, guarantees, classical reduction."""

import numpy as np
import pytest

from tropgt import (INFINITY, InconsistentInputError, InputError, TestDesign,
                    decode_comp, decode_dd, decode_family, decode_scomp,
                    is_satisfying, run_tests)
from conftest import (WORKED_DD, WORKED_MU, WORKED_SCOMP_MAX, WORKED_SCOMP_MIN,
                      levels)

INF = INFINITY


# --- worked example ---------------------------------------------------------------

def test_comp_golden(worked_design, worked_outcomes):
    assert decode_comp(worked_design, worked_outcomes).estimate.tolist() == WORKED_MU


def test_dd_golden(worked_design, worked_outcomes):
    result = decode_dd(worked_design, worked_outcomes)
    assert result.estimate.tolist() == WORKED_DD
    assert result.trace == ((3, 29, 5),)  # test 4 pins item 6 (0-based 3, 5)


def test_scomp_goldens(worked_design, worked_outcomes):
    low = decode_scomp(worked_design, worked_outcomes, tie="min")
    high = decode_scomp(worked_design, worked_outcomes, tie="max")
    assert low.estimate.tolist() == WORKED_SCOMP_MIN
    assert high.estimate.tolist() == WORKED_SCOMP_MAX
    for result in (low, high):
        assert is_satisfying(worked_design, worked_outcomes, result.estimate)


def test_decode_family_matches_individual_decoders(worked_design, worked_outcomes):
    family = decode_family(worked_design, worked_outcomes)
    assert family["comp"].tolist() == WORKED_MU
    assert family["dd"].tolist() == WORKED_DD
    assert family["scomp"].tolist() == WORKED_SCOMP_MIN


# --- COMP basics -------------------------------------------------------------------

def test_comp_all_negative_marks_tested_infinity_untested_one():
    design = TestDesign.from_rows([[1, 1, 0]])
    estimate = decode_comp(design, levels(0)).estimate
    assert estimate.tolist() == [INF, INF, 1]


def test_comp_single_test_spreads_outcome():
    design = TestDesign.from_rows([[1, 1, 1]])
    assert decode_comp(design, levels(4)).estimate.tolist() == [4, 4, 4]


def test_comp_rejects_dimension_mismatch(worked_design):
    with pytest.raises(InputError):
        decode_comp(worked_design, levels(1, 2))


# --- DD basics ----------------------------------------------------------------------

def test_dd_exact_when_each_defective_isolated():
    # every defective alone in its own test, plus one negative clearing the rest
    design = TestDesign.from_rows([[1, 0, 0], [0, 1, 0], [0, 0, 1]])
    truth = levels(2, 0, 1)
    result = decode_dd(design, run_tests(design, truth))
    assert np.array_equal(result.estimate, truth)


def test_dd_fails_on_shared_single_test():
    design = TestDesign.from_rows([[1, 1]])
    truth = levels(1, 1)
    result = decode_dd(design, run_tests(design, truth))
    assert result.estimate.tolist() == [INF, INF]


def test_dd_trace_replays_to_estimate(worked_design, worked_outcomes):
    result = decode_dd(worked_design, worked_outcomes)
    replay = np.full(worked_design.N, INF, dtype=np.int64)
    for _test, level, item in result.trace:
        replay[item] = level
    assert np.array_equal(replay, result.estimate)


# --- SCOMP behaviour -------------------------------------------------------------------

def test_scomp_returns_dd_estimate_when_already_satisfying():
    design = TestDesign.from_rows([[1, 0, 0], [0, 1, 0], [0, 0, 1]])
    truth = levels(2, 0, 1)
    outcomes = run_tests(design, truth)
    dd = decode_dd(design, outcomes)
    scomp = decode_scomp(design, outcomes)
    assert np.array_equal(dd.estimate, scomp.estimate)


def test_scomp_single_candidate_closes_single_test():
    # one positive test, both items only in it: DD stalls, SCOMP pins one item
    design = TestDesign.from_rows([[1, 1]])
    outcomes = levels(3)
    result = decode_scomp(design, outcomes)
    assert result.estimate.tolist() == [3, INF]  # smallest index wins the tie
    assert is_satisfying(design, outcomes, result.estimate)


def test_scomp_most_occurrences_wins():
    # item 2 appears in two unexplained outcome-1 tests, items 0/1 in one each
    design = TestDesign.from_rows([[1, 0, 1], [0, 1, 1]])
    truth = levels(0, 0, 1)
    outcomes = run_tests(design, truth)
    result = decode_scomp(design, outcomes)
    assert result.estimate.tolist() == [INF, INF, 1]


def test_scomp_trace_replays_to_estimate(worked_design, worked_outcomes):
    result = decode_scomp(worked_design, worked_outcomes, tie="max")
    replay = np.full(worked_design.N, INF, dtype=np.int64)
    for _test, level, item in result.trace:
        replay[item] = level
    assert np.array_equal(replay, result.estimate)


def test_scomp_count_all_level_tests_variant(worked_design, worked_outcomes):
    alt = decode_scomp(worked_design, worked_outcomes, count_all_level_tests=True)
    assert is_satisfying(worked_design, worked_outcomes, alt.estimate)


def test_scomp_rejects_unknown_tie(worked_design, worked_outcomes):
    with pytest.raises(InputError):
        decode_scomp(worked_design, worked_outcomes, tie="median")


def test_scomp_rejects_impossible_outcomes():
    # a positive outcome on a test whose only member saw a lower outcome too:
    # mu of the item is 1, so no mu = 2 candidate exists for the second test
    design = TestDesign.from_rows([[1], [1]])
    with pytest.raises(InconsistentInputError):
        decode_scomp(design, levels(1, 2))


def test_scomp_rejects_positive_outcome_on_empty_test():
    design = TestDesign.from_rows([[0]])
    with pytest.raises(InconsistentInputError):
        decode_scomp(design, levels(5))


# --- guarantees on random instances -----------------------------------------------------

def _random_model_instance(rng):
    N = int(rng.integers(2, 9))
    T = int(rng.integers(1, 7))
    d = int(rng.integers(1, 4))
    design = TestDesign(rng.random((T, N)) < 0.4)
    raw = rng.integers(1, d + 2, size=N).astype(np.int64)
    truth = np.where(raw == d + 1, INF, raw)
    return design, truth


@pytest.mark.parametrize("seed", range(8))
def test_random_instance_guarantees(seed):
    rng = np.random.default_rng(seed)
    for _ in range(100):
        design, truth = _random_model_instance(rng)
        outcomes = run_tests(design, truth)
        comp = decode_comp(design, outcomes).estimate
        dd = decode_dd(design, outcomes).estimate
        scomp = decode_scomp(design, outcomes).estimate
        # COMP explains everything and never overestimates
        assert is_satisfying(design, outcomes, comp)
        assert (comp <= truth).all()
        # DD entries are the truth or INFINITY (no false positives)
        assert np.logical_or(dd == truth, dd == INF).all()
        # DD success propagates to SCOMP; SCOMP always satisfies
        if np.array_equal(dd, truth):
            assert np.array_equal(scomp, truth)
        assert is_satisfying(design, outcomes, scomp)


# --- classical d=1 equivalence ------------------------------------------------------------
#
# Independent reference implementations of the classical binary algorithms,
# written with sets and loops; the tropical decoders must match them exactly
# on d = 1 instances.

def _classical_comp_ref(design, positive):
    in_negative = set()
    for t in range(design.T):
        if not positive[t]:
            in_negative.update(np.flatnonzero(design.matrix[t]))
    return [i not in in_negative for i in range(design.N)]


def _classical_dd_ref(design, positive):
    declared = _classical_comp_ref(design, positive)  # possibly-defective mask
    definite = set()
    for t in range(design.T):
        if positive[t]:
            pd_items = [i for i in np.flatnonzero(design.matrix[t]) if declared[i]]
            if len(pd_items) == 1:
                definite.add(pd_items[0])
    return [i in definite for i in range(design.N)]


def _classical_scomp_ref(design, positive):
    estimate = set(i for i, flag in enumerate(_classical_dd_ref(design, positive))
                   if flag)
    pd_mask = _classical_comp_ref(design, positive)

    def unexplained():
        out = []
        for t in range(design.T):
            members = set(np.flatnonzero(design.matrix[t]))
            if positive[t] and not (members & estimate):
                out.append(t)
            elif not positive[t] and (members & estimate):
                out.append(t)
        return out

    open_tests = unexplained()
    while open_tests:
        counts = {}
        for t in open_tests:
            for i in np.flatnonzero(design.matrix[t]):
                if pd_mask[i]:
                    counts[i] = counts.get(i, 0) + 1
        best = max(counts.values())
        estimate.add(min(i for i, c in counts.items() if c == best))
        open_tests = unexplained()
    return [i in estimate for i in range(design.N)]


def test_tropical_decoders_match_classical_references():
    rng = np.random.default_rng(2024)
    for _ in range(1000):
        N = int(rng.integers(2, 10))
        T = int(rng.integers(1, 7))
        design = TestDesign(rng.random((T, N)) < 0.4)
        truth = np.where(rng.random(N) < 0.35, 1, INF).astype(np.int64)
        outcomes = run_tests(design, truth)
        positive = outcomes != INF
        family = decode_family(design, outcomes)
        assert (family["comp"] != INF).tolist() == _classical_comp_ref(design, positive)
        assert (family["dd"] != INF).tolist() == _classical_dd_ref(design, positive)
        assert (family["scomp"] != INF).tolist() == _classical_scomp_ref(design, positive)
