"""Run decomposition, the stable two-run merge, and the element-level sorter."""
from __future__ import annotations

from typing import Callable, List, NamedTuple, Optional, Sequence

import numpy as np
from numba import njit

from .engine import CostReport, RunLengths, simulate
from .policy import make_policy


class Run(NamedTuple):
    start: int
    length: int


def _decompose_keys(keys: list, perm: list) -> List[Run]:
    """Split ``keys`` (permuted by ``perm``) into maximal runs, in place.

    A run is either non-decreasing or strictly decreasing; decreasing runs are
    reversed in ``perm``.  Strictness keeps equal keys in input order.
    """
    n = len(perm)
    runs = []
    i = 0
    while i < n:
        j = i + 1
        if j < n and keys[perm[j]] < keys[perm[j - 1]]:
            while j < n and keys[perm[j]] < keys[perm[j - 1]]:
                j += 1
            perm[i:j] = perm[i:j][::-1]
        else:
            while j < n and not keys[perm[j]] < keys[perm[j - 1]]:
                j += 1
        runs.append(Run(i, j - i))
        i = j
    return runs


def decompose(elements: list, key: Optional[Callable] = None) -> List[Run]:
    """Partition ``elements`` into maximal runs, reversing descending ones in place.

    >>> xs = [1, 2, 2, 1, 5]
    >>> [r.length for r in decompose(xs)]
    [3, 2]
    """
    if not elements:
        return []
    keys = list(elements) if key is None else [key(e) for e in elements]
    perm = list(range(len(elements)))
    runs = _decompose_keys(keys, perm)
    elements[:] = [elements[i] for i in perm]
    return runs


def _merge_at(keys, perm, tmp, start, la, lb):
    """Stable in-place merge of perm[start:start+la] and the next ``lb`` slots.

    The scratch buffer holds the shorter run.
    """
    mid = start + la
    end = mid + lb
    if la <= lb:
        tmp[:la] = perm[start:mid]
        i, j, k = 0, mid, start
        while i < la and j < end:
            pj = perm[j]
            pi = tmp[i]
            if keys[pj] < keys[pi]:
                perm[k] = pj
                j += 1
            else:
                perm[k] = pi
                i += 1
            k += 1
        if i < la:
            perm[k:end] = tmp[i:la]
    else:
        tmp[:lb] = perm[mid:end]
        i, j, k = mid - 1, lb - 1, end - 1
        while i >= start and j >= 0:
            pi = perm[i]
            pj = tmp[j]
            if keys[pj] < keys[pi]:
                perm[k] = pi
                i -= 1
            else:
                perm[k] = pj
                j -= 1
            k -= 1
        if j >= 0:
            perm[start:k + 1] = tmp[:j + 1]
    return la + lb


def stable_merge(a: Sequence, b: Sequence, key: Optional[Callable] = None):
    """Merge two non-decreasing sequences; on ties ``a``'s element comes first.

    Returns ``(merged, cost)`` with ``cost == len(a) + len(b)``.
    """
    items = list(a) + list(b)
    keys = items if key is None else [key(e) for e in items]
    perm = list(range(len(items)))
    tmp = [0] * min(len(a), len(b))
    cost = _merge_at(keys, perm, tmp, 0, len(a), len(b))
    return [items[i] for i in perm], cost


def sort(elements: Sequence, policy="two-merge", alpha=None, key=None,
         force: bool = False, record_events: bool = True):
    """Stable natural merge sort of ``elements`` under ``policy``.

    Returns ``(sorted_list, report)``.  ``key`` works as for ``sorted``; use
    ``functools.cmp_to_key`` for a comparison function.  The report's event
    log is the one ``simulate`` produces on the decomposed run lengths.
    """
    policy = make_policy(policy, alpha, force=force)
    items = list(elements)
    if not items:
        return [], CostReport(0, 0, policy, 0, 0, None)
    keys = items if key is None else [key(e) for e in items]
    int_keys = _as_int64(keys)
    if int_keys is not None and not policy.is_extension:
        perm_arr = np.arange(len(items), dtype=np.int64)
        starts, lens = _decompose_int(int_keys, perm_arr)
        report = simulate(RunLengths(lens), policy, record_events=True)
        _replay_int(report.events, starts, lens, int_keys, perm_arr)
        if not record_events:
            report.events = None
        return [items[i] for i in perm_arr.tolist()], report

    perm = list(range(len(items)))
    runs = _decompose_keys(keys, perm)
    tmp = [0] * (len(items) // 2 + 1)
    lengths = RunLengths(r.length for r in runs)

    if policy.is_extension:
        def on_merge(start, la, lb):
            _merge_at(keys, perm, tmp, start, la, lb)

        report = simulate(lengths, policy, record_events=record_events,
                          on_merge=on_merge)
    else:
        # plan the merges on run lengths alone, then carry them out
        report = simulate(lengths, policy, record_events=True)
        _replay(report.events.tolist(), runs, keys, perm, tmp)
        if not record_events:
            report.events = None
    return [items[i] for i in perm], report


def _replay(events, runs, keys, perm, tmp):
    starts, lens = [], []
    pushed = 0
    for step, action, la, lb in events:
        while pushed < step:
            starts.append(runs[pushed].start)
            lens.append(runs[pushed].length)
            pushed += 1
        i = len(lens) - 2 if action == 1 else len(lens) - 3
        if lens[i] != la or lens[i + 1] != lb:
            raise RuntimeError(f"event log does not match the run stack at step {step}")
        _merge_at(keys, perm, tmp, starts[i], la, lb)
        lens[i] = la + lb
        del lens[i + 1], starts[i + 1]


# -- compiled path for plain integer keys -------------------------------------------

def _as_int64(keys):
    """``keys`` as an int64 array when every key is a Python int that fits."""
    if not all(type(k) is int for k in keys):
        return None
    try:
        return np.array(keys, dtype=np.int64)
    except OverflowError:
        return None


@njit(cache=True)
def _decompose_int(keys, perm):
    n = keys.shape[0]
    starts = np.empty(n, dtype=np.int64)
    lens = np.empty(n, dtype=np.int64)
    r = 0
    i = 0
    while i < n:
        j = i + 1
        if j < n and keys[perm[j]] < keys[perm[j - 1]]:
            while j < n and keys[perm[j]] < keys[perm[j - 1]]:
                j += 1
            lo, hi = i, j - 1
            while lo < hi:
                perm[lo], perm[hi] = perm[hi], perm[lo]
                lo += 1
                hi -= 1
        else:
            while j < n and not keys[perm[j]] < keys[perm[j - 1]]:
                j += 1
        starts[r] = i
        lens[r] = j - i
        r += 1
        i = j
    return starts[:r], lens[:r]


@njit(cache=True)
def _merge_int(keys, perm, tmp, start, la, lb):
    mid = start + la
    end = mid + lb
    if la <= lb:
        tmp[:la] = perm[start:mid]
        i, j, k = 0, mid, start
        while i < la and j < end:
            if keys[perm[j]] < keys[tmp[i]]:
                perm[k] = perm[j]
                j += 1
            else:
                perm[k] = tmp[i]
                i += 1
            k += 1
        while i < la:
            perm[k] = tmp[i]
            i += 1
            k += 1
    else:
        tmp[:lb] = perm[mid:end]
        i, j, k = mid - 1, lb - 1, end - 1
        while i >= start and j >= 0:
            if keys[tmp[j]] < keys[perm[i]]:
                perm[k] = perm[i]
                i -= 1
            else:
                perm[k] = tmp[j]
                j -= 1
            k -= 1
        while j >= 0:
            perm[k] = tmp[j]
            j -= 1
            k -= 1


@njit(cache=True)
def _replay_int(events, run_starts, run_lens, keys, perm):
    m = run_starts.shape[0]
    starts = np.empty(m, dtype=np.int64)
    lens = np.empty(m, dtype=np.int64)
    tmp = np.empty(keys.shape[0] // 2 + 1, dtype=np.int64)
    h = 0
    pushed = 0
    for e in range(events.shape[0]):
        step, action, la, lb = events[e, 0], events[e, 1], events[e, 2], events[e, 3]
        while pushed < step:
            starts[h] = run_starts[pushed]
            lens[h] = run_lens[pushed]
            h += 1
            pushed += 1
        i = h - 2 if action == 1 else h - 3
        if lens[i] != la or lens[i + 1] != lb:
            raise RuntimeError("event log does not match the run stack")
        _merge_int(keys, perm, tmp, starts[i], la, lb)
        lens[i] = la + lb
        for t in range(i + 1, h - 1):
            starts[t] = starts[t + 1]
            lens[t] = lens[t + 1]
        h -= 1
