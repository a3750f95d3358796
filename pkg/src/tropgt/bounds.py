"""Closed-form bounds and threshold quantities for tropical group testing.

Counting (information-theoretic) ceilings on any decoder's success
probability, the COMP union bound and its test-count threshold, the
multinomial cell probabilities of the per-test outcome classification, DD
achievability thresholds, the coverage function phi_K driving the DD converse,
and the partial order on defectivity profiles induced by the COMP bound.

Binomial/multinomial coefficients are evaluated in log space via lgamma;
probabilities are returned raw where the text of a bound can exceed 1, with
clamped companions where a probability is promised.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .core import Profile
from .errors import InputError

# --- coefficient helpers -----------------------------------------------------


def log_binom(n: int, k: int) -> float:
    if not 0 <= k <= n:
        raise InputError(f"need 0 <= K <= N, got K={k}, N={n}")
    return math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)


def log_multinom(profile: Profile) -> float:
    """log of N! / (K_1! ... K_d! (N-K)!)."""
    out = math.lgamma(profile.n + 1) - math.lgamma(profile.k_infinity + 1)
    for c in profile.counts:
        out -= math.lgamma(c + 1)
    return out


def exact_multinomial(profile: Profile) -> int:
    """The multinomial coefficient counting level vectors with this profile."""
    result, remaining = 1, profile.n
    for c in profile.counts:
        result *= math.comb(remaining, c)
        remaining -= c
    return result


# --- counting bounds ---------------------------------------------------------


def classical_counting_bound(N: int, K: int, T: int) -> float:
    """Success ceiling 2^T / C(N, K) for binary group testing, clamped to 1."""
    if T < 0:
        raise InputError("T must be nonnegative")
    log_value = T * math.log(2.0) - log_binom(N, K)
    return 1.0 if log_value >= 0 else math.exp(log_value)


def classical_counting_bound_exact(N: int, K: int, T: int) -> Fraction:
    if T < 0:
        raise InputError("T must be nonnegative")
    return min(Fraction(1), Fraction(2 ** T, math.comb(N, K)))


def tropical_counting_bound(profile: Profile, T: int) -> float:
    """Success ceiling (d+1)^T over the multinomial count of consistent vectors."""
    if T < 0:
        raise InputError("T must be nonnegative")
    log_value = T * math.log(profile.d + 1) - log_multinom(profile)
    return 1.0 if log_value >= 0 else math.exp(log_value)


def tropical_counting_bound_exact(profile: Profile, T: int) -> Fraction:
    if T < 0:
        raise InputError("T must be nonnegative")
    return min(Fraction(1), Fraction((profile.d + 1) ** T, exact_multinomial(profile)))


def tropical_magic_number(profile: Profile) -> float:
    """Test count at which the tropical counting bound reaches 1."""
    return log_multinom(profile) / math.log(profile.d + 1)


# --- COMP bound and threshold ------------------------------------------------


def _misclassify_factor(p: float, lower: int, T: int) -> float:
    """(1 - p(1-p)^lower)^T: chance an item is never the unique low item in a test."""
    alone = p * math.exp(lower * math.log1p(-p))
    return math.exp(T * math.log1p(-alone)) if alone < 1.0 else 0.0


def _check_p(p: float, allow_zero: bool = False) -> None:
    lo_ok = p >= 0.0 if allow_zero else p > 0.0
    if not (lo_ok and p < 1.0):
        raise InputError(f"p must lie in {'[0, 1)' if allow_zero else '(0, 1)'}, got {p}")


def comp_error_bound(profile: Profile, p: float, T: int) -> float:
    """Union bound on COMP error: sum over levels of K_r (1 - p(1-p)^{K_<r})^T.

    The r = INFINITY term uses K_inf = N - K items above all K defectives.
    Returned raw; the bound is only meaningful once it drops below 1.
    """
    _check_p(p, allow_zero=True)
    if T < 0:
        raise InputError("T must be nonnegative")
    total, below = 0.0, 0
    for c in profile.counts:
        if c:
            total += c * _misclassify_factor(p, below, T)
        below += c
    return total + profile.k_infinity * _misclassify_factor(p, profile.k, T)


@dataclass(frozen=True)
class CompSummands:
    """Per-level contributions to the COMP union bound, raw and clamped at 1.

    `levels` lists the finite levels 1..d followed by 0 standing for INFINITY,
    matching the 0-encodes-INFINITY file convention.
    """

    levels: tuple[int, ...]
    raw: tuple[float, ...]
    clamped: tuple[float, ...]

    def infinity_share(self) -> float:
        """Raw share of the r = INFINITY term; always >= 1 - K/N."""
        total = sum(self.raw)
        return self.raw[-1] / total if total > 0 else 1.0


def comp_bound_summands(profile: Profile, p: float, T: int) -> CompSummands:
    _check_p(p, allow_zero=True)
    if T < 0:
        raise InputError("T must be nonnegative")
    raw, below = [], 0
    for c in profile.counts:
        raw.append(c * _misclassify_factor(p, below, T))
        below += c
    raw.append(profile.k_infinity * _misclassify_factor(p, profile.k, T))
    levels = tuple(range(1, profile.d + 1)) + (0,)
    return CompSummands(levels=levels, raw=tuple(raw),
                        clamped=tuple(min(1.0, v) for v in raw))


def comp_test_threshold(N: int, K: int, nu: float, delta: float) -> float:
    """(1 + delta) (e^nu / nu) K ln N tests push the COMP bound to ~N^-delta."""
    if not 0 < nu < K:
        raise InputError(f"need 0 < nu < K, got nu={nu}, K={K}")
    if delta < 0:
        raise InputError("delta must be nonnegative")
    if N < 1:
        raise InputError("N must be positive")
    return (1.0 + delta) * (math.exp(nu) / nu) * K * math.log(N)


# --- outcome-class probabilities (multinomial cells) ---------------------------


@dataclass(frozen=True)
class QVector:
    """Cell probabilities of the per-test outcome classification.

    For a Bernoulli(p) design and profile K, a single test lands in exactly one
    of: negative (q_infinity), "outcome r pinned on the s-th level-r item alone"
    (probability q_single[r-1] each, identical over s), or "outcome r with
    several level-r items" (q_plus[r-1]).  q_level[r-1] is the total
    probability of outcome r, so q_infinity + sum(q_level) = 1 and
    q_plus = q_level - K_r * q_single.
    """

    q_infinity: float
    q_single: tuple[float, ...]
    q_level: tuple[float, ...]
    q_plus: tuple[float, ...]


def q_probabilities(profile: Profile, p: float) -> QVector:
    _check_p(p)
    miss = 1.0 - p
    q_single, q_level, q_plus = [], [], []
    prefix = 1.0  # probability that no item of any lower level is in the test
    for c in profile.counts:
        single = prefix * miss ** max(c - 1, 0) * p
        level = prefix * -math.expm1(c * math.log1p(-p))
        q_single.append(single)
        q_level.append(level)
        q_plus.append(max(0.0, level - c * single))
        prefix *= miss ** c
    return QVector(q_infinity=prefix, q_single=tuple(q_single),
                   q_level=tuple(q_level), q_plus=tuple(q_plus))


# --- DD achievability thresholds ----------------------------------------------


@dataclass(frozen=True)
class DDThresholds:
    """Coverage probabilities psi_r and the DD test-count thresholds.

    t_infinity tests clear most non-defectives; t_levels[r-1] tests find
    the level-r defectives.  DD succeeds w.h.p. above the maximum.
    """

    nu: float
    psi: tuple[float, ...]
    t_infinity: float
    t_levels: tuple[float, ...]

    def t_max(self, include_infinity: bool = True) -> float:
        finite = max(self.t_levels) if self.t_levels else 0.0
        return max(finite, self.t_infinity) if include_infinity else finite


def dd_thresholds(profile: Profile, nu: float) -> DDThresholds:
    K = profile.k
    if K < 1:
        raise InputError("DD thresholds need at least one defective item")
    if not 0 < nu < K:
        raise InputError(f"need 0 < nu < K, got nu={nu}, K={K}")
    psi, cum = [], 0
    for c in profile.counts:
        cum += c
        psi.append((1.0 - nu / K) ** cum)
    t_infinity = K * math.log(profile.n / K) / (nu * psi[-1])
    t_levels = tuple(
        (K * math.log(c) / (nu * psi_r)) if c > 1 else 0.0
        for c, psi_r in zip(profile.counts, psi))
    return DDThresholds(nu=nu, psi=tuple(psi), t_infinity=t_infinity, t_levels=t_levels)


# --- the coverage function phi_K ------------------------------------------------


def _check_phi_args(K: int, q: float, T: int) -> None:
    if K < 0 or K != int(K):
        raise InputError("K must be a nonnegative integer")
    if not 0.0 <= q <= 1.0:
        raise InputError(f"q must lie in [0, 1], got {q}")
    if K * q > 1.0 + 1e-12:
        raise InputError(f"need K*q <= 1 for a valid cell vector, got {K * q}")
    if T < 0 or T != int(T):
        raise InputError("T must be a nonnegative integer")


def phi_curve(K: int, q: float, T_max: int) -> np.ndarray:
    """phi_K(q, t) for t = 0..T_max via the cells-hit dynamic programme.

    phi_K(q, T) is the probability that T i.i.d. draws, each landing in one of
    K cells with probability q per cell (and nowhere with probability 1 - Kq),
    leave no cell empty.  Tracking only the number of cells already hit gives
    an O(K T) recursion with nonnegative terms, unlike the alternating
    inclusion-exclusion sum which cancels catastrophically for large K.
    """
    _check_phi_args(K, q, T_max)
    if K == 0:
        return np.ones(T_max + 1)
    hit = np.arange(K + 1)
    stay = np.clip(1.0 - (K - hit) * q, 0.0, 1.0)
    enter = (K - hit + 1) * q  # transition from hit-1 cells to hit
    dp = np.zeros(K + 1)
    dp[0] = 1.0
    out = np.zeros(T_max + 1)
    for t in range(1, T_max + 1):
        gained = dp[:-1] * enter[1:]
        dp *= stay
        dp[1:] += gained
        out[t] = dp[K]
    return out


def phi(K: int, q: float, T: int) -> float:
    """Coverage probability phi_K(q, T); see phi_curve."""
    return float(phi_curve(K, q, T)[T])


def phi_alternating(K: int, q: float, T: int) -> float:
    """Inclusion-exclusion form sum_j (-1)^j C(K,j) (1-jq)^T; small-K cross-check only."""
    _check_phi_args(K, q, T)
    return math.fsum((-1) ** j * math.comb(K, j) * (1.0 - j * q) ** T
                     for j in range(K + 1))


def phi_upper_bound(K: int, q: float, T: int) -> float:
    """exp(-K(1-q)^{T+1} / (1 + Kq(1-q)^T)), an upper bound on phi_K(q, T)."""
    _check_phi_args(K, q, T)
    decay = (1.0 - q) ** T
    return math.exp(-K * decay * (1.0 - q) / (1.0 + K * q * decay))


# --- DD converse ----------------------------------------------------------------


def dd_converse_by_level(profile: Profile, p: float, T: int) -> tuple[float, ...]:
    """Per finite level r: 1 - phi_{K_r}(q_{r,1}, T), a lower bound on DD error.

    The level-r defectives are found only if each of the K_r "alone at level r"
    test cells is hit at least once, which happens with probability at most
    phi_{K_r}(q_{r,1}, T); levels with no items contribute 0.
    """
    q = q_probabilities(profile, p)
    return tuple(
        1.0 - phi(c, qs, T) if c >= 1 else 0.0
        for c, qs in zip(profile.counts, q.q_single))


def dd_converse_lower_bound(profile: Profile, p: float, T: int) -> float:
    """Exact non-asymptotic lower bound on DD error: max over levels."""
    terms = dd_converse_by_level(profile, p, T)
    return max(terms) if terms else 0.0


# --- defectivity-sequence partial order ------------------------------------------


def level_sequence(profile: Profile) -> tuple[int, ...]:
    """For each defective (sorted by level) the number with strictly lower level."""
    seq, below = [], 0
    for c in profile.counts:
        seq.extend([below] * c)
        below += c
    return tuple(seq)


def profile_precedes(first: Profile, second: Profile) -> bool:
    """Partial order: every defective sees at most as many lower-level items."""
    if first.k != second.k:
        raise InputError(
            f"profiles must place the same number of defectives, got {first.k} != {second.k}")
    return all(a <= b for a, b in zip(level_sequence(first), level_sequence(second)))


def comp_bound_defective_part(profile: Profile, p: float, T: int) -> float:
    """Defective-item part of the COMP bound, sum over items of f(L_k).

    Monotone under profile_precedes: a preceding profile has a lower value.
    """
    _check_p(p, allow_zero=True)
    return math.fsum(_misclassify_factor(p, below, T) for below in level_sequence(profile))
