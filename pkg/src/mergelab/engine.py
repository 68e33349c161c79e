"""Run-stack engine: executes a merge policy over a sequence of run lengths.

The engine is the generic framework shared by every policy: push the next
original run, let the policy's inner loop merge among the top three entries
until it is quiescent, repeat, and finally collapse the stack by merging Y and
Z.  Cost is the sum of ``|A| + |B|`` over all merges.

Two implementations share these semantics.  ``_reference_loop`` is plain
Python, supports instrumentation, extension policies and merge callbacks (the
element sorter drives it).  ``_kernel`` is a numba-compiled loop for the
built-in policies, used whenever no per-step observation is requested and the
numbers are small enough for int64 arithmetic.  The test suite checks that
both produce identical event logs.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Optional

import numpy as np
from numba import njit

from .errors import CostOverflow, InstrumentationViolation
from .policy import (Action, ExtensionContext, Policy, StackView,
                     make_policy)

MAX_U64 = 2**64 - 1
# the kernel multiplies lengths by alpha's numerator/denominator in int64
_KERNEL_LIMIT = 2**62

INSTRUMENTS = ("shivers-weights", "alpha-counter")


class RunLengths:
    """Immutable sequence of positive run lengths with ``m`` and ``n``."""

    __slots__ = ("_lengths", "_n", "_array")

    def __init__(self, lengths: Iterable[int]):
        self._array = None
        if isinstance(lengths, RunLengths):
            self._lengths, self._n, self._array = lengths._lengths, lengths._n, lengths._array
            return
        if isinstance(lengths, np.ndarray):
            if lengths.dtype == np.int64 and lengths.ndim == 1 and lengths.size:
                if lengths.min() < 1:
                    i = int(np.argmin(lengths))
                    raise ValueError(f"run {i} has length {lengths[i]}; lengths must be >= 1")
                if int(lengths.max()) * lengths.size < 2**63:
                    self._lengths = tuple(lengths.tolist())
                    self._n = int(lengths.sum())
                    self._array = lengths
                    return
            lengths = lengths.tolist()
        lengths = tuple(int(v) for v in lengths)
        if not lengths:
            raise ValueError("run-length sequence must not be empty")
        for i, v in enumerate(lengths):
            if v < 1:
                raise ValueError(f"run {i} has length {v}; lengths must be >= 1")
        n = sum(lengths)
        if n > MAX_U64:
            raise CostOverflow(f"total length {n} does not fit in 64 bits")
        self._lengths = lengths
        self._n = n

    @property
    def m(self) -> int:
        return len(self._lengths)

    @property
    def n(self) -> int:
        return self._n

    @property
    def lengths(self) -> tuple:
        return self._lengths

    def as_array(self) -> np.ndarray:
        """int64 copy of the lengths (cached); only valid when n < 2**63."""
        if self._array is None:
            self._array = np.fromiter(self._lengths, dtype=np.int64, count=self.m)
        return self._array

    def __len__(self):
        return len(self._lengths)

    def __iter__(self):
        return iter(self._lengths)

    def __getitem__(self, i):
        return self._lengths[i]

    def __eq__(self, other):
        if isinstance(other, RunLengths):
            return self._lengths == other._lengths
        if isinstance(other, (tuple, list)):
            return self._lengths == tuple(other)
        return NotImplemented

    def __hash__(self):
        return hash(self._lengths)

    def __repr__(self):
        body = ", ".join(map(str, self._lengths[:8]))
        if self.m > 8:
            body += ", ..."
        return f"RunLengths(<{body}>, m={self.m}, n={self.n})"


@dataclass
class CostReport:
    """Outcome of one simulation.

    ``events`` has one row per merge: ``(step, action, len_a, len_b)`` where
    ``step`` is the number of original runs pushed so far and ``action`` is
    ``Action.MERGE_YZ`` or ``Action.MERGE_XY``.  It is ``None`` when event
    recording was switched off.
    """

    total_cost: int
    max_stack_height: int
    policy: Policy
    n: int
    m: int
    events: Optional[np.ndarray] = None
    checks: dict = field(default_factory=dict)

    @property
    def merge_count(self) -> int:
        return self.m - 1

    def normalized(self) -> float:
        from .analysis import normalized_cost
        return normalized_cost(self.total_cost, self.n, self.m)

    def event_tuples(self):
        if self.events is None:
            return []
        return [tuple(int(v) for v in row) for row in self.events]


class RunStack:
    """The stack Q_1..Q_l: length, accumulated merge cost, original-run count."""

    __slots__ = ("lengths", "weights", "counts")

    def __init__(self):
        self.lengths = []
        self.weights = []
        self.counts = []

    def __len__(self):
        return len(self.lengths)

    def push(self, length):
        self.lengths.append(length)
        self.weights.append(0)
        self.counts.append(1)

    def merge(self, i):
        """Replace entries ``i`` and ``i + 1`` by their merge; return the cost."""
        L, W, C = self.lengths, self.weights, self.counts
        a, b = L[i], L[i + 1]
        cost = a + b
        L[i] = cost
        W[i] = W[i] + W[i + 1] + cost
        C[i] = C[i] + C[i + 1]
        del L[i + 1], W[i + 1], C[i + 1]
        return a, b


# -- instrumentation ---------------------------------------------------------------

def _floor_log2(v: int) -> int:
    return v.bit_length() - 1


class _ShiversWeights:
    """Weight bounds maintained by Shivers sort during its main loop.

    (a) every entry has ``w_i <= k_i |Q_i|`` and (b) the top entry has
    ``w_Z <= k_Y |Z|``, where ``k = floor(log2 |Q|)``.
    """

    name = "shivers-weights"

    def __init__(self, policy):
        if policy.kind != "shivers":
            raise ValueError("shivers-weights instrumentation needs the shivers policy")
        self.count = 0

    def after_push(self, stack, step):
        self._check(stack, step)

    def after_merge(self, stack, step, action, a, b):
        self._check(stack, step)

    def _check(self, stack, step):
        self.count += 1
        L, W = stack.lengths, stack.weights
        for i, (q, w) in enumerate(zip(L, W)):
            if w > _floor_log2(q) * q:
                raise InstrumentationViolation(
                    self.name, step,
                    f"(a) entry {i + 1}: weight {w} > floor(log2 {q}) * {q}")
        if len(L) > 1:
            z, wz, y = L[-1], W[-1], L[-2]
            if wz > _floor_log2(y) * z:
                raise InstrumentationViolation(
                    self.name, step,
                    f"(b) top entry: weight {wz} > floor(log2 {y}) * {z}")


class _AlphaCounter:
    """Credit counter for 2-merge / alpha-merge.

    Pushing run Q_l adds ``(2+alpha) * l * |Q_l|``; every merge withdraws its
    cost.  The counter must stay at or above ``sum_i (2+alpha) * i * |Q_i|``.

    A merge of Y and Z that was triggered only by ``|X| < alpha |Y|`` (with
    ``|X| >= |Z|``) may leave the counter short until the merge it forces
    next; the check is deferred across that one merge.
    """

    name = "alpha-counter"

    def __init__(self, policy):
        if policy.kind == "two-merge":
            self.alpha = Fraction(2)
        elif policy.kind == "alpha-merge":
            self.alpha = policy.alpha
        else:
            raise ValueError("alpha-counter instrumentation needs two-merge or alpha-merge")
        self.policy = policy
        self.credit = Fraction(0)
        self.count = 0
        self.deferred = 0
        self._pending_check = False

    def _required(self, stack):
        return (2 + self.alpha) * sum(i * q for i, q in enumerate(stack.lengths, 1))

    def before_merge(self, view, action):
        # classify the merge about to happen while X, Y, Z are still visible
        a = self.alpha
        transient = (action == Action.MERGE_YZ and view.x is not None
                     and not view.y < a * view.z and view.x < a * view.y)
        if self.policy.kind == "two-merge":
            transient = False
        self._transient = transient

    def after_push(self, stack, step):
        self.credit += (2 + self.alpha) * len(stack) * stack.lengths[-1]
        self._check(stack, step)

    def after_merge(self, stack, step, action, a, b):
        self.credit -= a + b
        if self._transient:
            self._transient = False
            self._pending_check = True
            self.deferred += 1
            return
        self._check(stack, step)

    def _check(self, stack, step):
        self._pending_check = False
        self.count += 1
        need = self._required(stack)
        if self.credit < need:
            raise InstrumentationViolation(
                self.name, step,
                f"counter {float(self.credit):.6g} < required {float(need):.6g} "
                f"with stack {stack.lengths}")

    def at_quiescence(self, stack, step):
        if self._pending_check:
            self._check(stack, step)


_INSTRUMENT_CLASSES = {
    "shivers-weights": _ShiversWeights,
    "alpha-counter": _AlphaCounter,
}


# -- reference engine ------------------------------------------------------------

def _reference_loop(runs: RunLengths, policy: Policy, record_events: bool,
                    instruments, on_merge: Optional[Callable]):
    stack = RunStack()
    n, m = runs.n, runs.m
    total = 0
    max_h = 0
    events = [] if record_events else None
    consumed = 0

    def do_merge(action, step, view):
        nonlocal total
        i = len(stack) - 2 if action == Action.MERGE_YZ else len(stack) - 3
        if view is not None:
            for ins in instruments:
                if hasattr(ins, "before_merge"):
                    ins.before_merge(view, action)
        if on_merge is not None:
            start = consumed - sum(stack.lengths[i:])
            on_merge(start, stack.lengths[i], stack.lengths[i + 1])
        a, b = stack.merge(i)
        total += a + b
        if total > MAX_U64:
            raise CostOverflow(f"merge cost exceeds 64 bits at step {step}")
        if events is not None:
            events.append((step, int(action), a, b))
        return a, b

    for step, r in enumerate(runs, 1):
        stack.push(r)
        consumed += r
        max_h = max(max_h, len(stack))
        pending = step < m
        for ins in instruments:
            ins.after_push(stack, step)
        ctx = ExtensionContext(n, consumed) if policy.is_extension else None
        while True:
            view = StackView.from_lengths(stack.lengths, pending)
            action = policy.trigger(view, ctx)
            if action is None:
                break
            if action == Action.MERGE_XY and len(stack) < 3:
                raise RuntimeError(f"{policy} asked to merge X and Y on a stack of {len(stack)}")
            if action == Action.PUSH:
                break
            a, b = do_merge(action, step, view)
            for ins in instruments:
                ins.after_merge(stack, step, action, a, b)
        for ins in instruments:
            if hasattr(ins, "at_quiescence"):
                ins.at_quiescence(stack, step)

    # wrap-up: instrumentation covers the main loop only
    while len(stack) > 1:
        do_merge(Action.MERGE_YZ, m, None)

    ev = None
    if events is not None:
        dtype = np.int64 if n < 2**63 else object
        ev = np.array(events, dtype=dtype).reshape(len(events), 4)
    return total, max_h, ev


# -- compiled engine ---------------------------------------------------------------

@njit(cache=True, nogil=True)
def _highbit(v):
    k = 0
    while v > 1:
        v >>= 1
        k += 1
    return np.int64(1) << k


@njit(cache=True, nogil=True)
def _kernel(runs, code, p, q, record, events):
    m = runs.shape[0]
    stack = np.empty(m, dtype=np.int64)
    h = 0
    total = np.int64(0)
    max_h = 0
    ne = 0
    for step in range(1, m + 1):
        stack[h] = runs[step - 1]
        h += 1
        if h > max_h:
            max_h = h
        while True:
            act = 0
            z = stack[h - 1]
            if h >= 2:
                y = stack[h - 2]
                if code == 0:  # timsort
                    if h >= 3 and stack[h - 3] < z:
                        act = 2
                    elif h >= 3 and stack[h - 3] <= y + z:
                        act = 1
                    elif h >= 4 and stack[h - 4] <= stack[h - 3] + y:
                        act = 1
                    elif y <= z:
                        act = 1
                elif code == 1:  # alpha-stack
                    if q * y <= p * z:
                        act = 1
                elif code == 2:  # shivers
                    if _highbit(y) <= z:
                        act = 1
                elif code == 3:  # augmented shivers
                    if _highbit(y) <= z:
                        if h < 3 or z <= stack[h - 3]:
                            act = 1
                        else:
                            act = 2
                elif code == 4:  # 2-merge
                    if y < 2 * z:
                        if h >= 3 and stack[h - 3] < z:
                            act = 2
                        else:
                            act = 1
                elif code == 5:  # alpha-merge
                    if q * y < p * z or (h >= 3 and q * stack[h - 3] < p * y):
                        if h >= 3 and stack[h - 3] < z:
                            act = 2
                        else:
                            act = 1
            if act == 0:
                break
            i = h - 2 if act == 1 else h - 3
            a = stack[i]
            b = stack[i + 1]
            stack[i] = a + b
            if act == 2:
                stack[i + 1] = stack[i + 2]
            h -= 1
            total += a + b
            if record:
                events[ne, 0] = step
                events[ne, 1] = act
                events[ne, 2] = a
                events[ne, 3] = b
            ne += 1
    while h > 1:
        a = stack[h - 2]
        b = stack[h - 1]
        stack[h - 2] = a + b
        h -= 1
        total += a + b
        if record:
            events[ne, 0] = m
            events[ne, 1] = 1
            events[ne, 2] = a
            events[ne, 3] = b
        ne += 1
    return total, max_h


def _kernel_fits(runs: RunLengths, policy: Policy) -> bool:
    n, m = runs.n, runs.m
    scale = 2
    if policy.alpha is not None:
        scale = max(scale, policy.alpha.numerator, policy.alpha.denominator)
    # total cost is at most n * (m - 1)
    return n * scale < _KERNEL_LIMIT and n * max(m - 1, 1) < _KERNEL_LIMIT


def simulate(runs, policy, alpha=None, *, instrument=(), record_events=True,
             force=False, engine="auto", on_merge=None) -> CostReport:
    """Run ``policy`` over ``runs`` and return the exact merge-cost report.

    ``instrument`` is a collection of checks from ``INSTRUMENTS``; any enabled
    check raises ``InstrumentationViolation`` the moment its invariant fails.
    ``on_merge(start, len_a, len_b)`` is called before each merge with the
    array offset of the left run; the element sorter uses it.
    """
    runs = runs if isinstance(runs, RunLengths) else RunLengths(runs)
    policy = make_policy(policy, alpha, force=force)
    instrument = tuple(instrument or ())
    for name in instrument:
        if name not in _INSTRUMENT_CLASSES:
            raise ValueError(f"unknown instrumentation {name!r}; choose from {INSTRUMENTS}")

    use_kernel = (engine != "reference" and not instrument and on_merge is None
                  and not policy.is_extension and _kernel_fits(runs, policy))
    if engine == "kernel" and not use_kernel:
        raise ValueError("the compiled engine cannot run this configuration")

    checks = {}
    if use_kernel:
        arr = runs.as_array()
        p = q = 1
        if policy.alpha is not None:
            p, q = policy.alpha.numerator, policy.alpha.denominator
        ev = np.zeros((runs.m - 1 if record_events else 0, 4), dtype=np.int64)
        total, max_h = _kernel(arr, policy.code, p, q, record_events, ev)
        total, max_h = int(total), int(max_h)
        events = ev if record_events else None
    else:
        instruments = [_INSTRUMENT_CLASSES[name](policy) for name in instrument]
        total, max_h, events = _reference_loop(runs, policy, record_events,
                                               instruments, on_merge)
        for ins in instruments:
            checks[ins.name] = ins.count
    return CostReport(total, max_h, policy, runs.n, runs.m, events, checks)


# -- bounds on stack height ----------------------------------------------------------

def floor_log(n: int, base) -> int:
    """Largest k with base**k <= n, computed exactly for rational ``base`` > 1."""
    base = Fraction(base)
    if base <= 1 or n < 1:
        raise ValueError("floor_log needs base > 1 and n >= 1")
    p, q = base.numerator, base.denominator
    k = 0
    pk, qk = p, q
    while pk <= n * qk:
        k += 1
        pk *= p
        qk *= q
    return k


def stack_height_limit(policy: Policy, n: int):
    """Return ``(limit, strict)`` for the stack-height bound of ``policy``.

    2-merge: height <= 1 + floor(log2 n).  Shivers: height <= 2 + floor(log2 n).
    alpha-merge: height < 1 + log_alpha n.  With alpha a non-integer rational,
    alpha**k is never an integer, so this equals height <= 1 + floor(log_alpha n).
    The form ``height < 1 + floor(log_alpha n)`` is false for small inputs:
    ``<1, 1>`` reaches height 2 with n = 2.
    """
    policy = make_policy(policy)
    if policy.kind == "two-merge":
        return 1 + floor_log(n, 2), False
    if policy.kind == "alpha-merge":
        k = floor_log(n, policy.alpha)
        # only an integer alpha (2, forced) can hit n exactly
        return 1 + k, policy.alpha ** k == n
    if policy.kind == "shivers":
        return 2 + floor_log(n, 2), False
    raise ValueError(f"no stack-height bound is known for {policy}")


def max_stack_height_check(report: CostReport, policy=None) -> bool:
    limit, strict = stack_height_limit(policy or report.policy, report.n)
    h = report.max_stack_height
    if report.m == 1:
        return h == 1
    return h < limit if strict else h <= limit


def von_neumann_cost(n: int) -> int:
    """Cost of non-adaptive bottom-up merge sort over ``n`` unit runs.

    Each pass merges adjacent pairs left to right; a leftover block is carried
    to the next pass unchanged.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if n > MAX_U64:
        raise CostOverflow("n does not fit in 64 bits")
    blocks = [1] * n
    total = 0
    while len(blocks) > 1:
        nxt = []
        for i in range(0, len(blocks) - 1, 2):
            s = blocks[i] + blocks[i + 1]
            total += s
            nxt.append(s)
        if len(blocks) % 2:
            nxt.append(blocks[-1])
        blocks = nxt
    if total > MAX_U64:
        raise CostOverflow("von Neumann cost exceeds 64 bits")
    return total
