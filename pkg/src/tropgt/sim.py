"""Seeded Monte Carlo harness.

Draws (matrix, truth) pairs, decodes, and tallies exact-recovery error rates
with Wilson confidence intervals.  Every trial derives its own RNG substreams
from (master seed, axis point, trial index), so results are bit-identical
however the trials are chunked across worker processes, and any single trial
can be replayed in isolation.

A fresh matrix is drawn for every trial; pass ``fixed_design`` to evaluate one
matrix against truth randomness only (for oracle cross-checks).  Classical
algorithm variants decode the binarized (d = 1) outcomes of the same instance
and are judged on recovering the defective set.
"""

from __future__ import annotations

import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .core import INFINITY, Profile, TestDesign, run_tests
from .decoders import TIE_BREAKS, binarize, decode_family
from .designs import DesignSpec, design_from_spec, resolve_spec, substream
from .errors import InputError

TROPICAL_ALGORITHMS = ("comp", "dd", "scomp")
CLASSICAL_ALGORITHMS = ("classical-comp", "classical-dd", "classical-scomp")
ALL_ALGORITHMS = TROPICAL_ALGORITHMS + CLASSICAL_ALGORITHMS

_Z95 = 1.959963984540054


@dataclass(frozen=True)
class Prior:
    """Distribution of the truth vector.

    fixed-profile: disjoint uniformly random level sets of the exact sizes in
    `profile`.  random-levels: a uniform K-subset of defectives, each assigned
    an independent uniform level from {1, ..., d}.
    """

    kind: str
    profile: Profile | None = None
    K: int | None = None
    d: int | None = None

    def __post_init__(self):
        if self.kind == "fixed-profile":
            if self.profile is None:
                raise InputError("fixed-profile prior needs a profile")
        elif self.kind == "random-levels":
            if self.K is None or self.d is None or self.K < 0 or self.d < 1:
                raise InputError("random-levels prior needs K >= 0 and d >= 1")
        else:
            raise InputError(f"unknown prior kind '{self.kind}'")

    @classmethod
    def fixed_profile(cls, profile: Profile) -> "Prior":
        return cls(kind="fixed-profile", profile=profile)

    @classmethod
    def random_levels(cls, K: int, d: int) -> "Prior":
        return cls(kind="random-levels", K=K, d=d)

    @property
    def defectives(self) -> int:
        return self.profile.k if self.kind == "fixed-profile" else self.K


def sample_truth(prior: Prior, N: int, seed, trial_index: int = 0) -> np.ndarray:
    """One truth draw, deterministic in (seed, trial_index)."""
    if prior.kind == "fixed-profile" and prior.profile.n != N:
        raise InputError(f"prior profile is for {prior.profile.n} items, asked for {N}")
    if prior.defectives > N:
        raise InputError(f"cannot place {prior.defectives} defectives among {N} items")
    rng = seed if isinstance(seed, np.random.Generator) else substream(int(seed), trial_index)
    truth = np.full(N, INFINITY, dtype=np.int64)
    chosen = rng.permutation(N)[:prior.defectives]
    if prior.kind == "fixed-profile":
        start = 0
        for level, count in enumerate(prior.profile.counts, start=1):
            truth[chosen[start:start + count]] = level
            start += count
    else:
        truth[chosen] = rng.integers(1, prior.d + 1, size=prior.defectives)
    return truth


def wilson_interval(successes: int, trials: int, z: float = _Z95):
    """(center, halfwidth) of the Wilson score interval; valid near 0 and 1."""
    if trials < 1:
        raise InputError("need at least one trial")
    phat = successes / trials
    denom = 1.0 + z * z / trials
    center = (phat + z * z / (2 * trials)) / denom
    half = z * math.sqrt(phat * (1.0 - phat) / trials + z * z / (4 * trials * trials)) / denom
    return center, half


@dataclass(frozen=True)
class SimResult:
    """Tallies for one (point, algorithm): exact-recovery and set-recovery errors."""

    trials: int
    errors_u: int
    errors_k: int
    seconds: float

    @property
    def successes_u(self) -> int:
        return self.trials - self.errors_u

    @property
    def successes_k(self) -> int:
        return self.trials - self.errors_k

    @property
    def success_rate(self) -> float:
        return self.successes_u / self.trials

    @property
    def error_rate(self) -> float:
        return self.errors_u / self.trials

    @property
    def ci_halfwidth(self) -> float:
        return wilson_interval(self.successes_u, self.trials)[1]

    def ci(self) -> tuple[float, float]:
        center, half = wilson_interval(self.successes_u, self.trials)
        return max(0.0, center - half), min(1.0, center + half)


def _trial_outcome(design: TestDesign, truth: np.ndarray, algorithms, tie: str):
    """(success_u, success_k) per algorithm for one decoded instance."""
    outcomes = run_tests(design, truth)
    tropical = [a for a in algorithms if not a.startswith("classical-")]
    classical = [a.removeprefix("classical-") for a in algorithms
                 if a.startswith("classical-")]
    out = {}
    if tropical:
        defective = truth != INFINITY
        for name, est in decode_family(design, outcomes, tropical, tie).items():
            ok_k = bool(((est != INFINITY) == defective).all())
            out[name] = (bool(np.array_equal(est, truth)), ok_k)
    if classical:
        btruth = binarize(truth)
        bdef = btruth != INFINITY
        for name, est in decode_family(design, binarize(outcomes), classical, tie).items():
            ok_k = bool(((est != INFINITY) == bdef).all())
            out["classical-" + name] = (bool(np.array_equal(est, btruth)), ok_k)
    return out


def _run_chunk(args):
    (spec, prior, algorithms, tie, seed, point, design_index, start, stop,
     fixed_design) = args
    success_u = {a: np.zeros(stop - start, dtype=bool) for a in algorithms}
    success_k = {a: np.zeros(stop - start, dtype=bool) for a in algorithms}
    for trial in range(start, stop):
        if fixed_design is not None:
            design = fixed_design
        else:
            design = design_from_spec(
                spec, prior.defectives, substream(seed, point, trial, 2 + design_index))
        truth = sample_truth(prior, spec.N, substream(seed, point, trial, 1))
        for name, (ok_u, ok_k) in _trial_outcome(design, truth, algorithms, tie).items():
            success_u[name][trial - start] = ok_u
            success_k[name][trial - start] = ok_k
    return start, success_u, success_k


@dataclass(frozen=True)
class PointTally:
    """Per-trial success flags for every algorithm at one sweep point."""

    success_u: dict[str, np.ndarray]
    success_k: dict[str, np.ndarray]
    seconds: float

    def result(self, algorithm: str) -> SimResult:
        u = self.success_u[algorithm]
        k = self.success_k[algorithm]
        return SimResult(trials=u.size, errors_u=int((~u).sum()),
                         errors_k=int((~k).sum()), seconds=self.seconds)


def run_point(spec: DesignSpec, prior: Prior, algorithms, trials: int, seed: int,
              point: int = 0, design_index: int = 0, tie: str = "min",
              workers: int | None = None,
              fixed_design: TestDesign | None = None) -> PointTally:
    """Decode `trials` fresh instances; deterministic in (seed, point) for any worker count."""
    algorithms = tuple(algorithms)
    unknown = set(algorithms) - set(ALL_ALGORITHMS)
    if unknown:
        raise InputError(f"unknown algorithms: {sorted(unknown)}")
    if trials < 1:
        raise InputError("trials must be >= 1")
    if tie not in TIE_BREAKS:
        raise InputError(f"tie must be one of {TIE_BREAKS}")
    if fixed_design is None:
        resolve_spec(spec, prior.defectives)  # fail fast on unresolvable specs
    elif fixed_design.N != spec.N:
        raise InputError("fixed design size disagrees with the design spec")
    if workers is None:
        workers = min(os.cpu_count() or 1, 8)
    started = time.perf_counter()
    if workers <= 1 or trials < 64:
        chunks = [_run_chunk((spec, prior, algorithms, tie, seed, point,
                              design_index, 0, trials, fixed_design))]
    else:
        step = max(64, math.ceil(trials / (4 * workers)))
        jobs = [(spec, prior, algorithms, tie, seed, point, design_index,
                 lo, min(lo + step, trials), fixed_design)
                for lo in range(0, trials, step)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunks = sorted(pool.map(_run_chunk, jobs), key=lambda c: c[0])
    success_u = {a: np.concatenate([c[1][a] for c in chunks]) for a in algorithms}
    success_k = {a: np.concatenate([c[2][a] for c in chunks]) for a in algorithms}
    return PointTally(success_u=success_u, success_k=success_k,
                      seconds=time.perf_counter() - started)


def estimate_error(spec: DesignSpec, prior: Prior, algorithm: str, trials: int,
                   seed: int, tie: str = "min", workers: int | None = None,
                   fixed_design: TestDesign | None = None) -> SimResult:
    """Error estimate for a single algorithm; see run_point for the RNG contract."""
    tally = run_point(spec, prior, (algorithm,), trials, seed, tie=tie,
                      workers=workers, fixed_design=fixed_design)
    return tally.result(algorithm)


# --- sweep configuration ------------------------------------------------------

_AXES = ("T", "p", "K1", "d")

_TOP_KEYS = {"schema", "name", "N", "trials", "seed", "prior", "design", "designs",
             "algorithms", "tie", "axis", "T"}


def _fail(msg: str):
    raise InputError(f"sweep config: {msg}")


def _check_keys(doc: dict, allowed: set[str], where: str):
    unknown = set(doc) - allowed
    if unknown:
        _fail(f"unknown fields {sorted(unknown)} in {where}")


def _parse_prior(doc: dict, N: int) -> Prior:
    if not isinstance(doc, dict) or "kind" not in doc:
        _fail("prior must be an object with a 'kind'")
    if doc["kind"] == "fixed-profile":
        _check_keys(doc, {"kind", "profile"}, "prior")
        if "profile" not in doc:
            _fail("fixed-profile prior needs 'profile'")
        return Prior.fixed_profile(Profile(n=N, counts=tuple(doc["profile"])))
    if doc["kind"] == "random-levels":
        _check_keys(doc, {"kind", "K", "d"}, "prior")
        if "K" not in doc or "d" not in doc:
            _fail("random-levels prior needs 'K' and 'd'")
        return Prior.random_levels(K=doc["K"], d=doc["d"])
    _fail(f"unknown prior kind '{doc['kind']}'")


def _parse_design(doc: dict) -> dict:
    if not isinstance(doc, dict) or "kind" not in doc:
        _fail("design must be an object with a 'kind'")
    _check_keys(doc, {"kind", "p", "nu", "L", "label"}, "design")
    return doc


def validate_sweep_config(doc: dict) -> dict:
    """Check the sweep document; returns it unchanged.  Unknown fields are errors."""
    if not isinstance(doc, dict):
        _fail("document must be a JSON object")
    _check_keys(doc, _TOP_KEYS, "top level")
    if doc.get("schema") != 1:
        _fail("missing or unsupported 'schema' (expected 1)")
    for key in ("N", "trials", "seed", "algorithms", "axis"):
        if key not in doc:
            _fail(f"missing required field '{key}'")
    if not isinstance(doc["N"], int) or doc["N"] < 1:
        _fail("'N' must be a positive integer")
    if not isinstance(doc["trials"], int) or doc["trials"] < 1:
        _fail("'trials' must be a positive integer")
    unknown = set(doc["algorithms"]) - set(ALL_ALGORITHMS)
    if unknown:
        _fail(f"unknown algorithms {sorted(unknown)}")
    if doc.get("tie", "min") not in TIE_BREAKS:
        _fail(f"'tie' must be one of {TIE_BREAKS}")
    if ("design" in doc) == ("designs" in doc):
        _fail("give exactly one of 'design' or 'designs'")
    designs = doc.get("designs", [doc.get("design")])
    if not designs:
        _fail("'designs' must not be empty")
    for item in designs:
        _parse_design(item)
    axis = doc["axis"]
    if not isinstance(axis, dict) or axis.get("name") not in _AXES:
        _fail(f"axis name must be one of {_AXES}")
    _check_keys(axis, {"name", "values", "K"}, "axis")
    values = axis.get("values")
    if not isinstance(values, list) or not values:
        _fail("axis needs a nonempty 'values' list")
    name = axis["name"]
    if name == "T":
        if "T" in doc:
            _fail("'T' is swept by the axis; do not give it at top level")
        if "prior" not in doc:
            _fail("a T sweep needs a 'prior'")
        _parse_prior(doc["prior"], doc["N"])
    else:
        if "T" not in doc:
            _fail(f"a {name} sweep needs a top-level 'T'")
        if name == "p":
            if "prior" not in doc:
                _fail("a p sweep needs a 'prior'")
            _parse_prior(doc["prior"], doc["N"])
            if len(designs) != 1 or designs[0]["kind"] != "bernoulli":
                _fail("a p sweep takes a single bernoulli design")
            if "p" in designs[0] or "nu" in designs[0]:
                _fail("a p sweep's design must not fix p or nu")
        elif name == "K1":
            if "prior" in doc:
                _fail("a K1 sweep builds its own (K1, K-K1) priors; drop 'prior'")
            if "K" not in axis:
                _fail("a K1 sweep needs the total 'K' on the axis")
            if any(not isinstance(v, int) or not 0 < v < axis["K"] for v in values):
                _fail("K1 values must be integers strictly between 0 and K")
        elif name == "d":
            prior = doc.get("prior")
            if (not isinstance(prior, dict) or prior.get("kind") != "random-levels"
                    or "d" in prior):
                _fail("a d sweep needs a random-levels prior without 'd'")
            _check_keys(prior, {"kind", "K"}, "prior")
    return doc


def _point_setup(doc: dict, axis_value) -> tuple[Prior, int, list[dict]]:
    """Resolve (prior, T, design docs) at one axis point."""
    name = doc["axis"]["name"]
    designs = [dict(item) for item in doc.get("designs", [doc.get("design")])]
    if name == "T":
        return _parse_prior(doc["prior"], doc["N"]), int(axis_value), designs
    T = doc["T"]
    if name == "p":
        designs[0]["p"] = float(axis_value)
        return _parse_prior(doc["prior"], doc["N"]), T, designs
    if name == "K1":
        total = doc["axis"]["K"]
        profile = Profile(n=doc["N"], counts=(int(axis_value), total - int(axis_value)))
        return Prior.fixed_profile(profile), T, designs
    prior = Prior.random_levels(K=doc["prior"]["K"], d=int(axis_value))
    return prior, T, designs


def sweep(doc: dict, workers: int | None = None, seed: int | None = None) -> list[dict]:
    """Run a sweep config; one output row per (axis value, design, algorithm).

    Row keys match the CSV emitted by the CLI: axis_name, axis_value,
    algorithm, design_kind, trials, successes_U, successes_K, rate, ci_lo,
    ci_hi, seconds.
    """
    validate_sweep_config(doc)
    master = doc["seed"] if seed is None else seed
    algorithms = tuple(doc["algorithms"])
    tie = doc.get("tie", "min")
    rows = []
    for point, axis_value in enumerate(doc["axis"]["values"]):
        prior, T, designs = _point_setup(doc, axis_value)
        for design_index, ddoc in enumerate(designs):
            spec = DesignSpec(kind=ddoc["kind"], T=T, N=doc["N"], p=ddoc.get("p"),
                              nu=ddoc.get("nu"), L=ddoc.get("L"))
            label = ddoc.get("label", ddoc["kind"])
            tally = run_point(spec, prior, algorithms, doc["trials"], master,
                              point=point, design_index=design_index, tie=tie,
                              workers=workers)
            for algorithm in algorithms:
                res = tally.result(algorithm)
                lo, hi = res.ci()
                rows.append({
                    "axis_name": doc["axis"]["name"], "axis_value": axis_value,
                    "algorithm": algorithm, "design_kind": label,
                    "trials": res.trials, "successes_U": res.successes_u,
                    "successes_K": res.successes_k,
                    "rate": res.success_rate, "ci_lo": lo, "ci_hi": hi,
                    "seconds": res.seconds,
                })
    return rows
