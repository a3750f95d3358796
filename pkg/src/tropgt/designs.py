"""Random test designs: i.i.d. Bernoulli and near-constant column weight.

Both generators are pure functions of (shape parameters, seed): the same seed
reproduces the same matrix bit for bit.  Parameters may be given directly
(p, or the column weight L) or derived from the density knob nu via p = nu/K
and L = floor(nu*T/K), K being the number of defective items the design is
sized for.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import Profile, TestDesign
from .errors import InputError

DESIGN_KINDS = ("bernoulli", "near-constant-column")


@dataclass(frozen=True)
class DesignSpec:
    """Parameters of a random design family, before resolving nu against K."""

    kind: str
    T: int
    N: int
    p: float | None = None
    nu: float | None = None
    L: int | None = None

    def __post_init__(self):
        if self.kind not in DESIGN_KINDS:
            raise InputError(f"unknown design kind '{self.kind}'")
        if self.T < 0 or self.N < 1:
            raise InputError("design needs T >= 0 and N >= 1")
        if self.kind == "bernoulli":
            if (self.p is None) == (self.nu is None):
                raise InputError("bernoulli design needs exactly one of p, nu")
            if self.L is not None:
                raise InputError("bernoulli design takes no column weight L")
        else:
            if (self.L is None) == (self.nu is None):
                raise InputError("near-constant design needs exactly one of L, nu")
            if self.p is not None:
                raise InputError("near-constant design takes no probability p")
        if self.nu is not None and self.nu <= 0:
            raise InputError("nu must be positive")


def substream(seed: int, *key: int) -> np.random.Generator:
    """Independent generator for (master seed, integer labels)."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=key)))


def _as_generator(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    if isinstance(seed, np.random.SeedSequence):
        return np.random.Generator(np.random.PCG64(seed))
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed))))


def bernoulli_design(T: int, N: int, p: float, seed) -> TestDesign:
    """Each entry is 1 independently with probability p (0 < p < 1)."""
    if not 0.0 < p < 1.0:
        raise InputError(f"bernoulli p must lie strictly in (0, 1), got {p}")
    if T < 0 or N < 1:
        raise InputError("bernoulli design needs T >= 0 and N >= 1")
    rng = _as_generator(seed)
    return TestDesign(rng.random((T, N)) < p)


def near_constant_column_design(T: int, N: int, L: int, seed) -> TestDesign:
    """Each column independently picks L tests uniformly *with replacement*.

    Duplicate picks collapse, so columns have weight <= L ("near-constant").
    """
    if not 1 <= L <= T:
        raise InputError(f"column weight L must satisfy 1 <= L <= T, got L={L}, T={T}")
    if N < 1:
        raise InputError("near-constant design needs N >= 1")
    rng = _as_generator(seed)
    draws = rng.integers(0, T, size=(N, L))
    matrix = np.zeros((T, N), dtype=bool)
    matrix[draws.ravel(), np.repeat(np.arange(N), L)] = True
    return TestDesign(matrix)


def resolve_spec(spec: DesignSpec, k: int | Profile) -> DesignSpec:
    """Fill in p or L from nu, given the defective count the design targets."""
    if isinstance(k, Profile):
        k = k.k
    if spec.nu is None:
        return spec
    if k <= 0:
        raise InputError("resolving nu needs a positive defective count K")
    if spec.kind == "bernoulli":
        if not spec.nu < k:
            raise InputError(f"need nu < K for p = nu/K in (0, 1); nu={spec.nu}, K={k}")
        return DesignSpec(spec.kind, spec.T, spec.N, p=spec.nu / k)
    L = math.floor(spec.nu * spec.T / k)
    if L < 1:
        raise InputError(f"derived column weight floor(nu*T/K) = {L} is below 1")
    return DesignSpec(spec.kind, spec.T, spec.N, L=L)


def design_from_spec(spec: DesignSpec, k: int | Profile, seed) -> TestDesign:
    """Dispatch to the generator named by `spec`, resolving nu against K first."""
    spec = resolve_spec(spec, k)
    if spec.kind == "bernoulli":
        return bernoulli_design(spec.T, spec.N, spec.p, seed)
    return near_constant_column_design(spec.T, spec.N, spec.L, seed)
