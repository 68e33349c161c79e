"""Acceptance criteria, one check per criterion.

Each ``criterion_N`` returns ``(ok, detail)``.  Under pytest every check is a
test that also prints a ``PASS``/``FAIL`` line; running this file directly
prints the thirteen lines and exits non-zero if any criterion fails.
"""
import math
import subprocess
import sys
import time
from functools import lru_cache
from pathlib import Path

import numpy as np
import pytest

from mergelab import RunLengths, make_policy, simulate
from mergelab.adversary import (amerge_cost_recurrence, r_amerge, r_astack, r_shivers, r_tim,
                                timsort_cost_recurrence)
from mergelab.analysis import c_alpha, check_lemma_inequalities, d_alpha, upper_bound
from mergelab.engine import floor_log, max_stack_height_check
from mergelab.experiment import ExperimentSpec, run_experiment
from mergelab.generators import MIXTURE_DEFAULT, UNIFORM_1_100, draw_lengths
from mergelab.runs import sort

POLICIES = ["timsort", "alpha-stack:2", "alpha-stack:1.62", "shivers", "augmented-shivers",
            "two-merge", "alpha-merge:1.7", "alpha-merge:1.62"]


def _random_inputs(count, max_m, dist, seed):
    rng = np.random.default_rng(seed)
    return [RunLengths(draw_lengths(dist, int(rng.integers(1, max_m + 1)), [seed, i]))
            for i in range(count)]


@lru_cache(maxsize=None)
def bound_corpus():
    """Random uniform and mixture inputs (m up to 8000) plus every adversary family."""
    corpus = _random_inputs(150, 8000, UNIFORM_1_100, 101)
    corpus += _random_inputs(150, 8000, MIXTURE_DEFAULT, 102)
    corpus += [RunLengths(draw_lengths(d, 8000, [103, i]))
               for i, d in enumerate([UNIFORM_1_100, MIXTURE_DEFAULT] * 5)]
    corpus += [r_tim(n) for n in range(4, 20000, 97)]
    corpus += [r_astack(m, a) for m in range(1, 21) for a in (2, 3, "1.62")]
    corpus += [r_shivers(m) for m in range(1, 21)]
    corpus += [r_amerge(n, a) for n in range(1, 40000, 331) for a in (2, "1.7", "1.62")]
    return tuple(corpus)


# -- criteria -------------------------------------------------------------------

def criterion_1():
    """Stable sort of 1000 random arrays (size <= 10^4, heavy duplicates) per policy."""
    rng = np.random.default_rng(1)
    bad = 0
    for trial in range(1000):
        size = int(rng.integers(0, 10**4 + 1))
        distinct = int(rng.integers(1, 64))
        values = rng.integers(0, distinct, size=size).tolist()
        # (key, original index) tagging: sort the indices by key
        expected = sorted(range(size), key=values.__getitem__)
        idx = list(range(size))
        for name in POLICIES:
            out, _ = sort(idx, name, key=values.__getitem__, record_events=False)
            bad += out != expected
    return bad == 0, f"{bad} mismatches over 1000 arrays x {len(POLICIES)} policies"


def criterion_2():
    """simulate(r_tim(n), Timsort) equals the recurrence for every n in [4, 2^14]."""
    bad = [n for n in range(4, 2**14 + 1)
           if simulate(r_tim(n), "timsort", record_events=False).total_cost
           != timsort_cost_recurrence(n)]
    return not bad, f"{len(bad)} mismatches for n in [4, 16384]" + (f", first {bad[0]}" if bad else "")


def criterion_3():
    """c(n)/(n log2 n) non-decreasing over 2^10..2^20 (even exponents) and >= 1.3 at 2^20."""
    ratios = [timsort_cost_recurrence(2**k) / (2**k * k) for k in range(10, 21, 2)]
    ok = all(b >= a for a, b in zip(ratios, ratios[1:])) and ratios[-1] >= 1.3
    return ok, "ratios " + ", ".join(f"{r:.4f}" for r in ratios)


def criterion_4():
    """alpha-stack cost on r_astack(m, alpha) exceeds n(m-1)/2, m in [2,20], alpha in {2,3}."""
    bad = []
    for alpha in (2, 3):
        for m in range(2, 21):
            runs = r_astack(m, alpha)
            total = simulate(runs, "alpha-stack", alpha, record_events=False).total_cost
            if not 2 * total > runs.n * (m - 1):
                bad.append((alpha, m))
    return not bad, f"{len(bad)} failures over 38 instances"


def criterion_5():
    """Shivers cost <= n log2 n + 8n on 500 uniform inputs (m <= 4000) and r_shivers(m <= 20)."""
    inputs = _random_inputs(500, 4000, UNIFORM_1_100, 5) + [r_shivers(m) for m in range(1, 21)]
    worst = 0.0
    bad = 0
    for runs in inputs:
        total = simulate(runs, "shivers", record_events=False).total_cost
        limit = runs.n * math.log2(runs.n) + 8 * runs.n
        bad += total > limit
        worst = max(worst, total / limit)
    return bad == 0, f"{bad} violations; max cost/bound {worst:.4f}"


def criterion_6():
    """2-merge cost <= n (1.91105 + 1.08898 log2 m) on the corpus."""
    bad = 0
    worst = 0.0
    corpus = bound_corpus()
    for runs in corpus:
        total = simulate(runs, "two-merge", record_events=False).total_cost
        limit = runs.n * (1.91105 + 1.08898 * math.log2(runs.m))
        bad += total > limit
        worst = max(worst, total / limit)
    return bad == 0, f"{bad} violations on {len(corpus)} inputs; max cost/bound {worst:.4f}"


def criterion_7():
    """1.7-merge cost <= n (d + c log2 m) and height < 1 + floor(log_1.7 n) on the corpus."""
    d, c = d_alpha("1.7"), c_alpha("1.7")
    cost_bad = height_bad = real_bad = 0
    example = None
    corpus = bound_corpus()
    for runs in corpus:
        rep = simulate(runs, "alpha-merge:1.7", record_events=False)
        cost_bad += rep.total_cost > upper_bound(runs.n, runs.m, "1.7")
        h = rep.max_stack_height
        if runs.m > 1 and not h < 1 + floor_log(runs.n, "1.7"):
            height_bad += 1
            example = example or (runs.lengths, h)
        real_bad += not max_stack_height_check(rep)
    detail = (f"d={d:.4f} c={c:.6f}; {cost_bad} cost violations, {height_bad} violations of "
              f"height < 1 + floor(log_1.7 n) on {len(corpus)} inputs")
    if example:
        detail += (f" (e.g. {example[0]} reaches height {example[1]}); "
                   f"{real_bad} violations of height < 1 + log_1.7 n")
    return cost_bad == 0 and height_bad == 0, detail


def criterion_8():
    """r_amerge cost/(n log2 n) non-decreasing over 2^14..2^20, >= c_alpha - 0.05 at 2^20."""
    ok = True
    parts = []
    for alpha, policy in (("1.7", "alpha-merge:1.7"), (2, "two-merge")):
        ratios = []
        for k in (14, 16, 18, 20):
            n = 2**k
            total = simulate(r_amerge(n, alpha), policy, record_events=False).total_cost
            assert total == amerge_cost_recurrence(n, alpha)
            ratios.append(total / (n * k))
        need = c_alpha(alpha) - 0.05
        this_ok = all(b >= a for a, b in zip(ratios, ratios[1:])) and ratios[-1] >= need
        ok &= this_ok
        parts.append(f"alpha={alpha}: " + ", ".join(f"{r:.4f}" for r in ratios)
                     + f" (need >= {need:.4f})")
    return ok, "; ".join(parts)


def criterion_9():
    """Shivers weight bounds and the 2-merge / 1.7-merge counter hold at every step."""
    inputs = _random_inputs(100, 2000, UNIFORM_1_100, 9) + _random_inputs(100, 2000, MIXTURE_DEFAULT, 10)
    states = {"shivers-weights": 0, "alpha-counter": 0}
    from mergelab.errors import InstrumentationViolation
    try:
        for runs in inputs + [r_shivers(m) for m in range(1, 17)]:
            rep = simulate(runs, "shivers", instrument=["shivers-weights"], record_events=False)
            states["shivers-weights"] += rep.checks["shivers-weights"]
        for runs in inputs:
            for policy in ("two-merge", "alpha-merge:1.7"):
                rep = simulate(runs, policy, instrument=["alpha-counter"], record_events=False)
                states["alpha-counter"] += rep.checks["alpha-counter"]
    except InstrumentationViolation as exc:
        return False, f"violation: {exc}"
    return True, f"0 violations; {states['shivers-weights']} weight and {states['alpha-counter']} counter checks"


def criterion_10():
    """10^5 precondition-satisfying tuples per lemma at alpha in {1.62, 1.7, 2}."""
    bad = []
    checked = 0
    for alpha in ("1.62", "1.7", "2"):
        for r in check_lemma_inequalities(alpha, sample_count=100_000, seed=10):
            checked += 1
            if not r.ok:
                bad.append(f"{r.lemma}@{alpha}: {r.violations}")
    return not bad, f"{checked} lemma/alpha pairs, violations: {bad or 'none'}"


def criterion_11():
    """2-merge and its |X| < 2|Y| augmented variant produce identical event logs."""
    aug = make_policy("alpha-merge", 2, force=True)
    inputs = _random_inputs(500, 3000, UNIFORM_1_100, 11) + _random_inputs(500, 3000, MIXTURE_DEFAULT, 12)
    inputs += [r_tim(n) for n in range(4, 5000, 13)]
    inputs += [r_astack(m, a) for m in range(1, 21) for a in (2, 3)]
    inputs += [r_shivers(m) for m in range(1, 21)]
    inputs += [r_amerge(n, a) for n in range(1, 20000, 97) for a in (2, "1.7")]
    diffs = sum(not np.array_equal(simulate(r, "two-merge").events, simulate(r, aug).events)
                for r in inputs)
    return diffs == 0, f"{diffs} differing logs over {len(inputs)} inputs"


def criterion_12():
    """Uniform means in [1.0, 1.1]; mixture at m=8000: 2-stack, Shivers >= 1.08 x 2-merge."""
    uniform = ExperimentSpec(
        policies=["timsort", "shivers", "alpha-stack:1.62", "alpha-stack:2", "two-merge",
                  "alpha-merge:1.62"],
        distribution=UNIFORM_1_100, m_grid=range(1000, 8001, 1000), trials=100)
    rows = run_experiment(uniform)
    lo = min(r.mean for r in rows)
    hi = max(r.mean for r in rows)
    mixture = ExperimentSpec(policies=["alpha-stack:2", "shivers", "two-merge"],
                             distribution=MIXTURE_DEFAULT, m_grid=[8000], trials=100)
    two_stack, shivers, two_merge = (r.mean for r in run_experiment(mixture))
    outside = [f"{r.policy.label}@{r.m}={r.mean:.4f}" for r in rows if not 1.0 <= r.mean <= 1.1]
    ok = not outside and two_stack >= 1.08 * two_merge and shivers >= 1.08 * two_merge
    return ok, (f"uniform means in [{lo:.4f}, {hi:.4f}], outside [1, 1.1]: {outside or 'none'}; "
                f"mixture 2-stack/2-merge {two_stack / two_merge:.4f}, "
                f"shivers/2-merge {shivers / two_merge:.4f}")


def criterion_13(tmp_dir=None):
    """The experiment command writes byte-identical CSV across runs and thread counts."""
    import tempfile
    tmp = Path(tmp_dir or tempfile.mkdtemp())
    base = [sys.executable, "-m", "mergelab", "experiment", "--m-grid", "1000,4000",
            "--trials", "10", "--seed", "42", "--dist", "mixture"]
    outs = []
    for i, jobs in enumerate((1, 1, 4)):
        path = tmp / f"run{i}.csv"
        subprocess.run(base + ["--jobs", str(jobs), "--out", str(path)], check=True)
        outs.append(path.read_bytes())
    ok = outs[0] == outs[1] == outs[2]
    return ok, f"{len(outs[0])} bytes, identical: {ok}"


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6,
            criterion_7, criterion_8, criterion_9, criterion_10, criterion_11, criterion_12,
            criterion_13]


def _report(number, fn):
    start = time.perf_counter()
    ok, detail = fn()
    elapsed = time.perf_counter() - start
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number:2d}: {detail} ({elapsed:.1f}s)"
    return ok, line


@pytest.mark.parametrize("number", range(1, 14))
def test_criterion(number, capsys):
    ok, line = _report(number, CRITERIA[number - 1])
    with capsys.disabled():
        print("\n" + line)
    assert ok, line


if __name__ == "__main__":
    results = [_report(i, fn) for i, fn in enumerate(CRITERIA, 1)]
    for ok, line in results:
        print(line)
    sys.exit(0 if all(ok for ok, _ in results) else 1)
