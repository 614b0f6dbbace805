"""Method-of-types utilities.

Relative-deviation typical sets, conditional typical sets defined through the
joint type, exact typical-set probabilities by enumerating admissible types in
log-space, and the explicit two-exponential uniform conditional-typicality
bound.

The membership condition is per-symbol relative deviation,
|T(x) - Q(x)| <= eps * Q(x) for every x, so zero-probability symbols must not
appear at all.  Conditional typicality of x^n given w^n means the pair's joint
type satisfies the same condition against Q_W * Q_{X|W}; for a fixed w^n this
constrains each per-w subsequence independently, which is what makes exact
evaluation a product of small multinomial window sums.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln, logsumexp

from .errors import ConfigError, DomainError, ResourceBudgetError
from .probability import FinitePmf, SequenceType

MAX_N = 200
MAX_ALPHABET = 8
#: cap on enumerated candidate count tuples in one window sum
MAX_TYPES = 2_000_000
#: slack for float edge effects when converting window bounds to integers
_EDGE_TOL = 1e-9


@dataclass(frozen=True)
class TypicalSpec:
    """The relative-deviation typical set of ``ref`` at block length ``n``."""

    ref: FinitePmf
    n: int
    eps: float

    def __post_init__(self):
        if self.n < 1:
            raise ConfigError("block length must be >= 1")
        if not self.eps > 0:
            raise ConfigError("eps must be > 0")

    def count_windows(self) -> tuple[np.ndarray, np.ndarray]:
        """Admissible per-symbol count ranges [lo, hi] (inclusive)."""
        q = self.ref.mass
        lo = np.ceil(self.n * q * (1.0 - self.eps) - _EDGE_TOL).astype(int)
        hi = np.floor(self.n * q * (1.0 + self.eps) + _EDGE_TOL).astype(int)
        lo = np.maximum(lo, 0)
        hi = np.minimum(hi, self.n)
        hi = np.where(q == 0, 0, hi)
        return lo, hi


def is_typical(x_seq, spec: TypicalSpec) -> bool:
    """Membership test against the per-symbol relative-deviation condition."""
    t = SequenceType.of_sequence(x_seq, spec.ref.alphabet_size)
    if t.n != spec.n:
        raise ConfigError(f"sequence length {t.n} != spec block length {spec.n}")
    lo, hi = spec.count_windows()
    return bool(np.all((t.counts >= lo) & (t.counts <= hi)))


def _window_log_prob(q: np.ndarray, n: int, lo: np.ndarray, hi: np.ndarray) -> float:
    """log of the probability that an i.i.d.(q) length-n draw has per-symbol
    counts inside [lo, hi] with total n, by direct type enumeration."""
    k_sym = len(q)
    lo = np.maximum(lo, 0)
    hi = np.minimum(hi, n)
    hi = np.where(q == 0, np.minimum(hi, 0), hi)
    if np.any(hi < lo):
        return -np.inf
    widths = hi - lo + 1
    if int(np.prod(widths.astype(float))) > MAX_TYPES:
        raise ResourceBudgetError(
            f"type enumeration would visit up to {np.prod(widths.astype(float)):.3g} "
            f"count tuples (cap {MAX_TYPES})")
    with np.errstate(divide="ignore"):
        log_q = np.log(q)
    lo_tail = np.concatenate([np.cumsum(lo[::-1])[::-1], [0]])
    hi_tail = np.concatenate([np.cumsum(hi[::-1])[::-1], [0]])
    log_terms = []
    counts = np.zeros(k_sym, dtype=int)

    def recurse(sym: int, rem: int, acc: float):
        if sym == k_sym:
            if rem == 0:
                log_terms.append(acc)
            return
        lo_k = max(lo[sym], rem - hi_tail[sym + 1])
        hi_k = min(hi[sym], rem - lo_tail[sym + 1])
        for k in range(lo_k, hi_k + 1):
            counts[sym] = k
            contrib = 0.0 if k == 0 else k * log_q[sym] - gammaln(k + 1)
            recurse(sym + 1, rem - k, acc + contrib)

    recurse(0, n, float(gammaln(n + 1)))
    if not log_terms:
        return -np.inf
    return float(logsumexp(np.asarray(log_terms)))


def _check_budget(n: int, alphabet: int):
    if n > MAX_N:
        raise ResourceBudgetError(f"block length {n} exceeds cap {MAX_N}")
    if alphabet > MAX_ALPHABET:
        raise ResourceBudgetError(f"alphabet size {alphabet} exceeds cap {MAX_ALPHABET}")


def typical_prob_exact(spec: TypicalSpec) -> float:
    """Q^n of the typical set, as an exact sum of multinomial masses."""
    _check_budget(spec.n, spec.ref.alphabet_size)
    lo, hi = spec.count_windows()
    log_p = _window_log_prob(spec.ref.mass, spec.n, lo, hi)
    return float(min(np.exp(log_p), 1.0))


def _validated_cond(q_cond) -> np.ndarray:
    arr = np.asarray(q_cond, dtype=float)
    if arr.ndim != 2:
        raise ConfigError("conditional pmf must be 2-D (rows = conditioning symbol)")
    if np.any(arr < 0) or np.any(np.abs(arr.sum(axis=1) - 1.0) > 1e-9):
        raise ConfigError("conditional rows must be pmfs")
    return arr


def cond_count_windows(q_w: FinitePmf, q_cond, n: int, eps: float):
    """Per-(w, x) admissible count ranges for the joint-type condition
    |T(w,x) - Q_W(w)Q_{X|W}(x|w)| <= eps * Q_W(w)Q_{X|W}(x|w)."""
    cond = _validated_cond(q_cond)
    joint = q_w.mass[:, None] * cond
    lo = np.ceil(n * joint * (1.0 - eps) - _EDGE_TOL).astype(int)
    hi = np.floor(n * joint * (1.0 + eps) + _EDGE_TOL).astype(int)
    lo = np.maximum(lo, 0)
    hi = np.where(joint == 0, 0, np.minimum(hi, n))
    return lo, hi


def is_cond_typical(x_seq, w_seq, q_w: FinitePmf, q_cond, eps: float) -> bool:
    """Conditional typicality of x^n given w^n (joint-type condition)."""
    cond = _validated_cond(q_cond)
    x_seq = np.asarray(x_seq, dtype=int)
    w_seq = np.asarray(w_seq, dtype=int)
    if x_seq.shape != w_seq.shape or x_seq.ndim != 1:
        raise ConfigError("x_seq and w_seq must be 1-D of equal length")
    n = x_seq.size
    nw, nx = cond.shape
    counts = np.zeros((nw, nx), dtype=int)
    np.add.at(counts, (w_seq, x_seq), 1)
    lo, hi = cond_count_windows(q_w, cond, n, eps)
    return bool(np.all((counts >= lo) & (counts <= hi)))


def cond_typical_defect_exact(q_w: FinitePmf, q_cond, w_seq, eps: float,
                              eps_prime: float | None = None) -> float:
    """Exact probability that X^n ~ prod Q_{X|W}(.|w_i) is NOT conditionally
    eps-typical given w^n.

    The joint-type condition constrains the counts within each per-w
    subsequence independently, so the success probability is a product of
    per-w multinomial window sums.  When ``eps_prime`` is given, ``w_seq`` is
    required to be eps_prime-typical for Q_W (the regime in which the uniform
    bound applies); non-typical conditioning sequences are rejected.
    """
    cond = _validated_cond(q_cond)
    w_seq = np.asarray(w_seq, dtype=int)
    n = w_seq.size
    nw, nx = cond.shape
    _check_budget(n, max(nw, nx))
    if np.any(w_seq < 0) or np.any(w_seq >= nw):
        raise ConfigError("w_seq symbol out of range")
    w_counts = np.bincount(w_seq, minlength=nw)
    if np.any((w_counts > 0) & (q_w.mass == 0)):
        raise DomainError("w_seq uses a symbol outside supp(Q_W)")
    if eps_prime is not None:
        if not 0.0 < eps_prime < eps:
            raise ConfigError("need 0 < eps_prime < eps")
        if not is_typical(w_seq, TypicalSpec(q_w, n, eps_prime)):
            raise DomainError("w_seq is not eps_prime-typical for Q_W")
    lo, hi = cond_count_windows(q_w, cond, n, eps)
    log_success = 0.0
    for w in range(nw):
        if w_counts[w] == 0:
            # empty subsequence: fails only if some window excludes count 0
            if np.any(lo[w] > 0):
                return 1.0
            continue
        log_success += _window_log_prob(cond[w], int(w_counts[w]), lo[w], hi[w])
        if log_success == -np.inf:
            return 1.0
    return float(min(max(1.0 - np.exp(log_success), 0.0), 1.0))


def contyplem_bound(eps: float, eps_prime: float, n: int, q_min: float,
                    alphabet_x: int, alphabet_w: int) -> float:
    """The explicit uniform conditional-typicality bound
    |X||W| (exp(-(1/3)((eps-eps')/(1+eps'))^2 n q_min)
          + exp(-(1/2)((eps-eps')/(1-eps'))^2 n q_min)),
    valid for every eps'-typical conditioning sequence, with q_min the least
    positive conditional probability."""
    if not 0.0 < eps_prime < eps <= 1.0:
        raise ConfigError("need 0 < eps_prime < eps <= 1")
    if not 0.0 < q_min <= 1.0:
        raise ConfigError("q_min must lie in (0, 1]")
    if n < 0:
        raise ConfigError("n must be nonnegative")
    gap = eps - eps_prime
    t1 = np.exp(-(1.0 / 3.0) * (gap / (1.0 + eps_prime)) ** 2 * n * q_min)
    t2 = np.exp(-(1.0 / 2.0) * (gap / (1.0 - eps_prime)) ** 2 * n * q_min)
    return float(alphabet_x * alphabet_w * (t1 + t2))
