"""Worst-case run-length sequences for the merge policies and their cost oracles.

Size caps keep every length, sum and cost inside 64 bits:

* ``r_astack(m, alpha)`` needs ``m * s <= 62`` (``s`` the least integer with
  ``2**s >= alpha``).  The lengths then fit, but the merge cost of the
  largest instances does not; simulating them raises ``CostOverflow``.
* ``r_shivers(m)`` needs ``m <= 62``, with the same caveat on cost.
* ``r_tim`` and ``r_amerge`` have ``m`` proportional to ``n``; ``n`` is capped
  at ``2**40`` so the sequence itself stays materialisable.
"""
from __future__ import annotations

from fractions import Fraction
from functools import lru_cache

from .engine import RunLengths
from .errors import CostOverflow
from .policy import check_alpha, make_policy, parse_alpha

MAX_RECURSIVE_N = 2**40


def _check_n(n):
    if not isinstance(n, int) or n < 1:
        raise ValueError(f"n must be a positive integer, got {n!r}")
    if n > MAX_RECURSIVE_N:
        raise CostOverflow(f"n={n} exceeds the generator cap 2**40")


# -- Timsort ------------------------------------------------------------------

# bounded: sweeping n upward only revisits recent halves
@lru_cache(maxsize=2048)
def _r_tim(n):
    if n <= 3:
        return (n,)
    half = n // 2
    return _r_tim(half) + _r_tim(half - 1) + ((1,) if n % 2 == 0 else (2,))


def r_tim(n: int) -> RunLengths:
    """Run lengths on which Timsort pays about 1.5 n log n."""
    _check_n(n)
    return RunLengths(_r_tim(n))


def timsort_cost_recurrence(n: int) -> int:
    """Exact Timsort cost on ``r_tim(n)`` from the halving recurrence."""
    _check_n(n)
    memo = {}

    def c(k):
        if k <= 3:
            return 0
        if k not in memo:
            half = k // 2
            memo[k] = c(half) + c(half - 1) + (3 * k + k % 2) // 2
        return memo[k]

    return c(n)


# -- alpha-stack and Shivers --------------------------------------------------------

def _least_power_exponent(alpha: Fraction) -> int:
    s = 0
    while 2**s < alpha:
        s += 1
    return s


def r_astack(m: int, alpha) -> RunLengths:
    """``2^((m-1)s)-1, ..., 2^(2s)-1, 2^s-1, 2^(ms)`` for the alpha-stack sort."""
    alpha = check_alpha("alpha-stack", alpha)
    if m < 1:
        raise ValueError("m must be >= 1")
    s = _least_power_exponent(alpha)
    if m * s > 62:
        raise CostOverflow(f"m*s = {m * s} > 62: lengths would overflow 64 bits")
    lengths = [2 ** (i * s) - 1 for i in range(m - 1, 0, -1)] + [2 ** (m * s)]
    return RunLengths(lengths)


def r_shivers(m: int) -> RunLengths:
    """``2^(m-1)-1, ..., 7, 3, 1, 2^m`` for the Shivers sort."""
    if m < 1:
        raise ValueError("m must be >= 1")
    if m > 62:
        raise CostOverflow(f"m={m} > 62: lengths would overflow 64 bits")
    return RunLengths([2**i - 1 for i in range(m - 1, 0, -1)] + [2**m])


# -- alpha-merge -------------------------------------------------------------------

def amerge_threshold(alpha) -> int:
    """Below this size the alpha-merge adversary is a single run: 3 * ceil(alpha + 1)."""
    a = parse_alpha(alpha) + 1
    return 3 * -(-a.numerator // a.denominator)


def amerge_split(n: int, alpha):
    """Return ``(n1, n2, n3)`` with n = n1 + n2 + n3 for ``n >= N0``.

    ``n3 = floor(n/(alpha+1)) + 1``, ``n* = n - n3``,
    ``n2 = floor(n*/(alpha+1)) + 1``, ``n1 = n* - n2``; floors are exact.
    """
    a = parse_alpha(alpha)
    p, q = a.numerator, a.denominator
    n3 = n * q // (p + q) + 1
    rest = n - n3
    n2 = rest * q // (p + q) + 1
    return rest - n2, n2, n3


def r_amerge(n: int, alpha) -> RunLengths:
    """Recursive adversary for alpha-merge (and alpha-stack) sorts."""
    _check_n(n)
    a = parse_alpha(alpha)
    if a <= 1:
        check_alpha("alpha-stack", a)
    n0 = amerge_threshold(a)

    @lru_cache(maxsize=None)
    def build(k):
        if k < n0:
            return (k,)
        n1, n2, n3 = amerge_split(k, a)
        return build(n1) + build(n2) + build(n3)

    seq = build(n)
    assert sum(seq) == n
    if n >= n0:
        assert seq[-1] >= 3, "final run of the alpha-merge adversary must be >= 3"
    return RunLengths(seq)


def amerge_cost_recurrence(n: int, alpha) -> int:
    """Cost alpha-merge pays on ``r_amerge(n)``: c(n1)+c(n2)+c(n3)+2n1+2n2+n3."""
    _check_n(n)
    a = parse_alpha(alpha)
    n0 = amerge_threshold(a)
    memo = {}

    def c(k):
        if k < n0:
            return 0
        if k not in memo:
            n1, n2, n3 = amerge_split(k, a)
            memo[k] = c(n1) + c(n2) + c(n3) + 2 * n1 + 2 * n2 + n3
        return memo[k]

    return c(n)


# -- registry used by the CLI ------------------------------------------------------

ADVERSARIES = {
    # name -> (builder taking (size, alpha), size parameter, matched policy)
    "rtim": (lambda size, alpha: r_tim(size), "n", "timsort"),
    "rastack": (lambda size, alpha: r_astack(size, alpha), "m", "alpha-stack"),
    "rshivers": (lambda size, alpha: r_shivers(size), "m", "shivers"),
    "ramerge": (lambda size, alpha: r_amerge(size, alpha), "n", "alpha-merge"),
}


def build_adversary(kind: str, size: int, alpha=None) -> RunLengths:
    kind = kind.lower().replace("_", "").replace("-", "")
    if kind not in ADVERSARIES:
        raise ValueError(f"unknown adversary {kind!r}; choose from {', '.join(ADVERSARIES)}")
    builder, _, _ = ADVERSARIES[kind]
    return builder(size, alpha)


def matched_policy(kind: str, alpha=None):
    """The policy an adversary is built against.

    ``ramerge`` with alpha = 2 maps to 2-merge, which is what the construction
    targets at that parameter.
    """
    kind = kind.lower().replace("_", "").replace("-", "")
    name = ADVERSARIES[kind][2]
    if name == "alpha-merge":
        a = parse_alpha(alpha)
        if a == 2:
            return make_policy("two-merge")
        return make_policy(name, a, force=True)
    if name == "alpha-stack":
        return make_policy(name, alpha)
    return make_policy(name)


def expected_lower_bound(kind: str, runs: RunLengths, alpha=None):
    """Lower-bound statement the matched policy must exceed on ``runs``.

    Returns ``(description, predicate)`` where ``predicate(total_cost)`` tells
    whether the simulated cost meets the construction's promise.
    """
    kind = kind.lower().replace("_", "").replace("-", "")
    n, m = runs.n, runs.m
    if kind == "rtim":
        exact = timsort_cost_recurrence(n)
        return f"cost == recurrence value {exact}", lambda total: total == exact
    if kind in ("rastack", "rshivers"):
        # total > n (m - 1) / 2, compared in integers
        return (f"cost > n(m-1)/2 = {n * (m - 1) / 2:g}",
                lambda total: 2 * total > n * (m - 1))
    exact = amerge_cost_recurrence(n, alpha)
    return f"cost == recurrence value {exact}", lambda total: total == exact

