"""Core model of tropical group testing.

A population of N items carries defectivity levels from {1, ..., d, INFINITY},
lower finite value = stronger defect, INFINITY = not defective.  A test pools a
subset of items and reports the *minimum* level present, so the classical OR of
binary group testing becomes a min.  This module holds the shared vocabulary:
level vectors, test designs, outcome computation, the mu deduction (the highest
outcome seen by each item, a certified lower bound on its level), and
satisfying-vector checks.

Level vectors are plain int64 numpy arrays.  Finite levels are their integer
values; non-defective is the sentinel ``INFINITY``, which compares above every
finite level so numpy min/max work unchanged.  In JSON files INFINITY is
encoded as 0.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import InputError

# Sentinel for "not defective". Fits in int64 with headroom so min/max and
# comparisons stay exact; never do arithmetic on level values.
INFINITY: int = 1 << 62


def validate_levels(levels: np.ndarray, d: int) -> None:
    """Check every finite entry lies in [1, d]."""
    finite = levels[levels != INFINITY]
    if finite.size and ((finite < 1) | (finite > d)).any():
        raise InputError(f"finite levels must lie in [1, {d}]")


@dataclass(frozen=True, eq=False)
class TestDesign:
    """A T x N binary inclusion matrix; matrix[t, i] means item i is in test t."""

    __test__ = False  # "Test" prefix is domain vocabulary, not a pytest class

    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix)
        if m.ndim != 2:
            raise InputError(f"design matrix must be 2-D, got shape {m.shape}")
        if m.dtype != np.bool_:
            if not np.isin(m, (0, 1)).all():
                raise InputError("design matrix entries must be 0 or 1")
            m = m.astype(bool)
        m = np.ascontiguousarray(m)
        m.flags.writeable = False
        object.__setattr__(self, "matrix", m)

    @property
    def T(self) -> int:
        return self.matrix.shape[0]

    @property
    def N(self) -> int:
        return self.matrix.shape[1]

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]]) -> "TestDesign":
        return cls(np.asarray(rows))

    def column_weights(self) -> np.ndarray:
        return self.matrix.sum(axis=0)

    def row_weights(self) -> np.ndarray:
        return self.matrix.sum(axis=1)


@dataclass(frozen=True)
class Profile:
    """Per-level defective counts (K_1, ..., K_d) for a population of n items."""

    n: int
    counts: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "counts", tuple(int(c) for c in self.counts))
        if self.d < 1:
            raise InputError("profile needs at least one level")
        if any(c < 0 for c in self.counts):
            raise InputError("profile counts must be nonnegative")
        if self.k > self.n:
            raise InputError(f"profile places {self.k} defectives among {self.n} items")

    @property
    def d(self) -> int:
        return len(self.counts)

    @property
    def k(self) -> int:
        """Total number of defective items."""
        return sum(self.counts)

    @property
    def k_infinity(self) -> int:
        return self.n - self.k


def _check_truth(design: TestDesign, levels: np.ndarray, what: str = "truth") -> np.ndarray:
    levels = np.asarray(levels, dtype=np.int64)
    if levels.shape != (design.N,):
        raise InputError(f"{what} has shape {levels.shape}, expected ({design.N},)")
    return levels


def _check_outcomes(design: TestDesign, outcomes: np.ndarray) -> np.ndarray:
    outcomes = np.asarray(outcomes, dtype=np.int64)
    if outcomes.shape != (design.T,):
        raise InputError(f"outcomes have shape {outcomes.shape}, expected ({design.T},)")
    return outcomes


def run_tests(design: TestDesign, truth: np.ndarray) -> np.ndarray:
    """Outcome of every test: the minimum level among included items.

    A test containing no items reports INFINITY (nothing defective present).
    """
    truth = _check_truth(design, truth)
    masked = np.where(design.matrix, truth[np.newaxis, :], INFINITY)
    return masked.min(axis=1, initial=INFINITY)


def predicted_outcomes(design: TestDesign, estimate: np.ndarray) -> np.ndarray:
    """Outcomes the tests would produce if `estimate` were the truth."""
    return run_tests(design, _check_truth(design, estimate, "estimate"))


def compute_mu(design: TestDesign, outcomes: np.ndarray) -> np.ndarray:
    """mu_i = highest outcome of any test containing item i; 1 if untested.

    Every item satisfies U_i >= mu_i, so mu is a certified lower bound on the
    defectivity vector; mu_i = INFINITY proves item i non-defective.
    """
    outcomes = _check_outcomes(design, outcomes)
    # 0 is below every level, so it is a safe identity for the masked max;
    # untested columns come out 0 and get the mu = 1 convention.
    mu = np.where(design.matrix, outcomes[:, np.newaxis], 0).max(axis=0, initial=0)
    return np.where(mu == 0, 1, mu)


def unexplained_tests(design: TestDesign, outcomes: np.ndarray,
                      estimate: np.ndarray) -> np.ndarray:
    """Indices of tests whose predicted outcome under `estimate` differs from `outcomes`."""
    outcomes = _check_outcomes(design, outcomes)
    return np.flatnonzero(predicted_outcomes(design, estimate) != outcomes)


def is_satisfying(design: TestDesign, outcomes: np.ndarray, estimate: np.ndarray) -> bool:
    """True iff `estimate` explains all T tests."""
    outcomes = _check_outcomes(design, outcomes)
    return bool(np.array_equal(predicted_outcomes(design, estimate), outcomes))


def count_profile(truth: np.ndarray, d: int) -> Profile:
    """Exact per-level counts (K_1, ..., K_d) of a truth vector."""
    truth = np.asarray(truth, dtype=np.int64)
    validate_levels(truth, d)
    finite = truth[truth != INFINITY]
    counts = np.bincount(finite, minlength=d + 1)[1:d + 1] if finite.size else np.zeros(d, int)
    return Profile(n=int(truth.size), counts=tuple(int(c) for c in counts))


# --- instance files ---------------------------------------------------------
#
# JSON schema used by every CLI subcommand:
#   { "d": int, "N": int, "T": int, "matrix": [[0/1, ...], ...],
#     "outcomes": [int, ...]?, "truth": [int, ...]? }
# where 0 encodes INFINITY inside "outcomes"/"truth" and finite levels are
# their integer values.

_INSTANCE_KEYS = {"d", "N", "T", "matrix", "outcomes", "truth"}


@dataclass(frozen=True)
class Instance:
    """A test design plus (optionally) observed outcomes and the true levels."""

    design: TestDesign
    d: int
    outcomes: np.ndarray | None = None
    truth: np.ndarray | None = None

    @property
    def profile(self) -> Profile:
        if self.truth is None:
            raise InputError("instance has no truth vector")
        return count_profile(self.truth, self.d)


def encode_levels(levels: np.ndarray) -> list[int]:
    """Level vector -> JSON list, INFINITY -> 0."""
    return [0 if v == INFINITY else int(v) for v in np.asarray(levels)]


def decode_levels(values: Sequence[int], d: int, what: str) -> np.ndarray:
    arr = np.asarray(values, dtype=np.int64)
    if arr.ndim != 1:
        raise InputError(f"'{what}' must be a flat list")
    if arr.size and ((arr < 0) | ((arr > d) & (arr != 0))).any():
        raise InputError(f"'{what}' entries must be 0 (INFINITY) or in [1, {d}]")
    out = arr.copy()
    out[out == 0] = INFINITY
    return out


def instance_to_json(instance: Instance) -> dict:
    doc = {
        "d": instance.d,
        "N": instance.design.N,
        "T": instance.design.T,
        "matrix": instance.design.matrix.astype(int).tolist(),
    }
    if instance.outcomes is not None:
        doc["outcomes"] = encode_levels(instance.outcomes)
    if instance.truth is not None:
        doc["truth"] = encode_levels(instance.truth)
    return doc


def instance_from_json(doc: dict) -> Instance:
    if not isinstance(doc, dict):
        raise InputError("instance document must be a JSON object")
    unknown = set(doc) - _INSTANCE_KEYS
    if unknown:
        raise InputError(f"unknown instance fields: {sorted(unknown)}")
    for key in ("d", "N", "T", "matrix"):
        if key not in doc:
            raise InputError(f"instance is missing required field '{key}'")
    d = doc["d"]
    if not isinstance(d, int) or d < 1:
        raise InputError("'d' must be a positive integer")
    matrix = np.asarray(doc["matrix"])
    if matrix.size == 0 and doc["T"] == 0:
        matrix = np.zeros((0, doc["N"]), dtype=bool)
    if matrix.ndim != 2 or matrix.shape != (doc["T"], doc["N"]):
        raise InputError(f"'matrix' must be {doc['T']}x{doc['N']}")
    design = TestDesign(matrix)
    outcomes = truth = None
    if "outcomes" in doc:
        outcomes = decode_levels(doc["outcomes"], d, "outcomes")
        if outcomes.shape != (design.T,):
            raise InputError("'outcomes' length must equal T")
    if "truth" in doc:
        truth = decode_levels(doc["truth"], d, "truth")
        if truth.shape != (design.N,):
            raise InputError("'truth' length must equal N")
    return Instance(design=design, d=d, outcomes=outcomes, truth=truth)
