"""Constants and bound formulas for 2-merge / alpha-merge, plus numeric lemma checks.

All logarithms are base 2.  Real-valued results are doubles; alpha is kept
as an exact rational wherever a comparison decides an integer (``k_zero``).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np

from .errors import AlphaOutOfRange
from .policy import PHI, parse_alpha

# Inequalities behind the 2-merge / alpha-merge upper bounds, named by the
# case of the amortized argument they serve: "case-a" a merge of two runs of
# comparable size, "case-b" the wrap-up merges, "case-c-two" / "case-c-alpha"
# a long top run Z (alpha = 2 / alpha < 2), "case-d" the extra alpha < 2 case.
LEMMAS = ("case-a", "case-b", "case-c-two", "case-c-alpha", "case-d")
REL_TOL = 1e-9


def _as_real(alpha) -> float:
    if isinstance(alpha, float):
        return alpha
    return float(parse_alpha(alpha))


def c_alpha(alpha) -> float:
    """(a+1) / ((a+1) log(a+1) - a log a)."""
    a = _as_real(alpha)
    if not a > 1:
        raise AlphaOutOfRange(f"c_alpha needs alpha > 1, got {alpha}")
    return (a + 1) / ((a + 1) * math.log2(a + 1) - a * math.log2(a))


def c_alpha_mp(alpha, dps: int = 40):
    """High-precision evaluation of ``c_alpha`` from the exact rational alpha."""
    import mpmath

    a = parse_alpha(alpha)
    with mpmath.workdps(dps):
        x = mpmath.mpf(a.numerator) / a.denominator
        return (x + 1) / ((x + 1) * mpmath.log(x + 1, 2) - x * mpmath.log(x, 2))


def _above_phi(a: Fraction) -> bool:
    # a > phi  <=>  a^2 - a - 1 > 0 for a > 0
    return a * a - a - 1 > 0


def k_zero(alpha) -> int:
    """Least l >= 1 with (a^2 - a - 1)/(a - 1) >= a^(-l), for phi < a < 2."""
    a = parse_alpha(alpha)
    if not (_above_phi(a) and a < 2):
        raise AlphaOutOfRange(f"k0 is defined for phi < alpha < 2, got {a}")
    lhs = (a * a - a - 1) / (a - 1)
    ell = 1
    power = a
    while lhs * power < 1:
        ell += 1
        power *= a
    return ell


def d_two() -> float:
    c2 = c_alpha(2.0)
    return 6 - c2 * (3 * math.log2(3) - 1)


def d_alpha(alpha) -> float:
    """Additive constant of the upper bound n (d + c log m)."""
    a = parse_alpha(alpha)
    if a == 2:
        return d_two()
    k0 = k_zero(a)
    af = float(a)
    return 2 ** (k0 + 1) * max(k0 + 1, 3) * (2 * af - 1) / (af - 1) + 1


@dataclass(frozen=True)
class BoundSet:
    alpha: Fraction
    c: float
    k0: Optional[int]
    d: Optional[float]
    valid_range: str  # "alpha-two", "alpha-open" or "c-only"


def bound_set(alpha) -> BoundSet:
    a = parse_alpha(alpha)
    c = c_alpha(a)
    if a == 2:
        return BoundSet(a, c, None, d_two(), "alpha-two")
    if _above_phi(a) and a < 2:
        return BoundSet(a, c, k_zero(a), d_alpha(a), "alpha-open")
    return BoundSet(a, c, None, None, "c-only")


def upper_bound(n: int, m: int, alpha) -> float:
    """n (d + c log m): the worst-case merge cost of 2-merge / alpha-merge."""
    if n < 1 or m < 1:
        raise ValueError("n and m must be >= 1")
    bs = bound_set(alpha)
    if bs.d is None:
        raise AlphaOutOfRange(f"no upper bound is proved for alpha = {bs.alpha}")
    return n * (bs.d + bs.c * math.log2(m))


def normalized_cost(total: int, n: int, m: int) -> float:
    """total / (n log2 m); 0 for a single run, where the ratio is undefined."""
    if m <= 1:
        return 0.0
    return total / (n * math.log2(m))


def lemma_b_margin(alpha) -> float:
    """c_a (a log a - (a-1) log(a-1)) - 1; non-negative where the case-b inequality holds."""
    a = _as_real(alpha)
    lm1 = 0.0 if a == 2 else (a - 1) * math.log2(a - 1)
    return c_alpha(a) * (a * math.log2(a) - lm1) - 1


# -- randomized inequality checks --------------------------------------------------

@dataclass
class LemmaResult:
    lemma: str
    alpha: Fraction
    samples: int
    violations: int
    counterexample: Optional[dict] = None

    @property
    def ok(self) -> bool:
        return self.violations == 0


def _loguniform(rng, lo, hi, size):
    x = np.exp(rng.uniform(math.log(lo), math.log(hi + 1), size))
    return np.clip(np.floor(x).astype(np.int64), lo, hi)


def _ceil_div(a, b):
    return -(-a // b)


def _lemma_applies(lemma: str, a: Fraction) -> bool:
    if lemma == "case-a":
        return a > 1
    if lemma == "case-b":
        # the proof's numeric step needs alpha > 1.29
        return a > Fraction(129, 100)
    if lemma == "case-c-two":
        return a == 2
    return _above_phi(a) and a < 2


def _sample(lemma, a: Fraction, rng, size, hi=10**6):
    """Random positive-integer tuples satisfying the lemma's hypotheses."""
    p, q = a.numerator, a.denominator
    s = {"a": _loguniform(rng, 1, hi, size), "b": _loguniform(rng, 1, hi, size)}
    B = _loguniform(rng, 1, hi, size)
    if lemma == "case-a":
        lo = _ceil_div(B * q, p)           # A >= B / alpha
        top = B * p // q                   # A <= alpha B
        s["A"] = lo + (rng.random(size) * (top - lo + 1)).astype(np.int64)
        s["B"] = B
    elif lemma == "case-b":
        lo = np.maximum(_ceil_div(B * (p - q), q), 1)   # (alpha-1) B <= A
        s["A"] = lo + _loguniform(rng, 1, hi, size) - 1
        s["B"] = B
    elif lemma == "case-c-two":
        s["a"] = _loguniform(rng, 2, hi, size)
        s["A"] = 1 + (rng.random(size) * 2 * B).astype(np.int64)     # A <= 2B
        s["B"] = B
    elif lemma == "case-c-alpha":
        top = B * p // (p - q)                                       # A <= a/(a-1) B
        s["A"] = 1 + (rng.random(size) * top).astype(np.int64)
        s["B"] = B
    elif lemma == "case-d":
        k0 = k_zero(a)
        k = rng.integers(1, k0 + 2, size=size)
        C = _loguniform(rng, 1, hi, size)
        # A + B + C <= 2^k (2a-1)/(a-1) C, i.e. A + B <= budget
        budget = (2**k * (2 * p - q) * C) // (p - q) - C
        total = 2 + (rng.random(size) * (budget - 1)).astype(np.int64)
        A = 1 + (rng.random(size) * (total - 1)).astype(np.int64)
        s.update(A=A, B=total - A, C=C, k=k)
    return s


def _sides(lemma, alpha, s):
    c = c_alpha(alpha)
    lg = np.log2
    A = s["A"].astype(float)
    B = s["B"].astype(float)
    a = s["a"].astype(float)
    b = s["b"].astype(float)
    if lemma == "case-a":
        lhs = A * c * lg(a) + B * c * lg(b) + A + B
        rhs = (A + B) * c * lg(a + b)
    elif lemma == "case-b":
        lhs = A * c * lg(a) + B * (1 + c * lg(b)) + A + B
        rhs = (A + B) * (1 + c * lg(a + b))
    elif lemma == "case-c-two":
        d = d_two()
        lhs = A * (d + c * lg(a - 1)) + A + B
        rhs = (A + B) * (d - 1 + c * lg(a + b))
    elif lemma == "case-c-alpha":
        d = d_alpha(alpha)
        lhs = A * (d + c * lg(a)) + A + B
        rhs = (A + B) * (d - 1 + c * lg(a + b))
    else:
        d = d_alpha(alpha)
        C = s["C"].astype(float)
        k = s["k"].astype(float)
        lhs = A * (d + c * lg(a)) + B * (d + c * lg(b)) + k * C + 2 * B + A
        rhs = A * (d - 1 + c * lg(a)) + (B + C) * (d - 1 + c * lg(b + 1))
    return lhs, rhs


def lemma_holds(lemma, alpha, **values) -> bool:
    """Evaluate one lemma on a single explicit tuple (at ``REL_TOL``)."""
    s = {key: np.asarray([v], dtype=np.int64) for key, v in values.items()}
    for key in ("a", "b", "A", "B"):
        s.setdefault(key, np.ones(1, dtype=np.int64))
    lhs, rhs = _sides(lemma, parse_alpha(alpha), s)
    scale = max(abs(lhs[0]), abs(rhs[0]), 1.0)
    return bool(lhs[0] - rhs[0] <= REL_TOL * scale)


def check_lemma_inequalities(alpha, sample_count: int = 100_000, seed: int = 0,
                             lemmas=LEMMAS) -> list:
    """Sample tuples meeting each lemma's hypotheses and test the inequality.

    Lemmas whose range excludes ``alpha`` are skipped.  Each result carries
    the first counterexample found, if any.
    """
    a = parse_alpha(alpha)
    results = []
    for i, lemma in enumerate(lemmas):
        if lemma not in LEMMAS:
            raise ValueError(f"unknown lemma {lemma!r}")
        if not _lemma_applies(lemma, a):
            continue
        rng = np.random.Generator(np.random.PCG64([seed, i]))
        s = _sample(lemma, a, rng, sample_count)
        lhs, rhs = _sides(lemma, a, s)
        scale = np.maximum(np.maximum(np.abs(lhs), np.abs(rhs)), 1.0)
        bad = np.nonzero(lhs - rhs > REL_TOL * scale)[0]
        example = None
        if bad.size:
            j = int(bad[0])
            example = {key: int(v[j]) for key, v in s.items()}
            example.update(lhs=float(lhs[j]), rhs=float(rhs[j]))
        results.append(LemmaResult(lemma, a, sample_count, int(bad.size), example))
    return results
