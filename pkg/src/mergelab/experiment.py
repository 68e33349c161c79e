"""Normalized merge cost versus number of runs, averaged over seeded trials."""
from __future__ import annotations

import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Sequence

import numpy as np

from . import __version__
from .analysis import normalized_cost
from .engine import RunLengths, simulate
from .generators import PRNG_ID, UNIFORM_1_100, draw_lengths, trial_seeds
from .policy import Policy, format_alpha, make_policy

CSV_HEADER = "m,policy,alpha,trials,mean_normalized_cost,stddev,seed"

DEFAULT_M_GRID = tuple(range(1000, 8001, 500))
DEFAULT_POLICIES = (
    "timsort", "alpha-stack:2", "alpha-stack:1.62", "shivers",
    "augmented-shivers", "two-merge", "alpha-merge:1.7", "alpha-merge:1.62",
)


@dataclass
class ExperimentSpec:
    policies: Sequence[Policy] = field(
        default_factory=lambda: [make_policy(p) for p in DEFAULT_POLICIES])
    distribution: object = UNIFORM_1_100
    m_grid: Sequence[int] = DEFAULT_M_GRID
    trials: int = 100
    master_seed: int = 0

    def __post_init__(self):
        self.policies = [make_policy(p) for p in self.policies]
        self.m_grid = [int(m) for m in self.m_grid]
        if not self.policies:
            raise ValueError("experiment needs at least one policy")
        if not self.m_grid or min(self.m_grid) < 1:
            raise ValueError("m grid must be non-empty with every m >= 1")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")


@dataclass
class Row:
    m: int
    policy: Policy
    trials: int
    mean: float
    stddev: float
    seed: int

    def csv(self) -> str:
        alpha = "" if self.policy.alpha is None else format_alpha(self.policy.alpha)
        return (f"{self.m},{self.policy.kind},{alpha},{self.trials},"
                f"{_fmt(self.mean)},{_fmt(self.stddev)},{self.seed}")


def _fmt(x: float) -> str:
    return repr(float(x))


def _trial(spec: ExperimentSpec, m: int, seed: int) -> List[float]:
    # every policy sees the same input within a trial
    rng_seed = [seed, m]
    lengths = draw_lengths(spec.distribution, m, rng_seed)
    runs = RunLengths(lengths)
    return [normalized_cost(simulate(runs, p, record_events=False).total_cost,
                            runs.n, runs.m)
            for p in spec.policies]


def run_experiment(spec: ExperimentSpec, jobs: int = 1) -> List[Row]:
    """Run every (m, trial) cell; rows come out in m_grid x policies order.

    Trials are independent, so ``jobs`` threads change only the wall time:
    results are gathered by index and reduced in trial order.
    """
    seeds = trial_seeds(spec.master_seed, spec.trials)
    tasks = [(m, s) for m in spec.m_grid for s in seeds]
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(lambda t: _trial(spec, *t), tasks))
    else:
        results = [_trial(spec, m, s) for m, s in tasks]

    rows = []
    for gi, m in enumerate(spec.m_grid):
        block = np.array(results[gi * spec.trials:(gi + 1) * spec.trials], dtype=float)
        for pi, policy in enumerate(spec.policies):
            col = block[:, pi]
            mean = math.fsum(col.tolist()) / len(col)
            std = float(np.std(col, ddof=1)) if len(col) > 1 else 0.0
            rows.append(Row(m, policy, spec.trials, mean, std, spec.master_seed))
    return rows


def render_csv(spec: ExperimentSpec, rows: List[Row]) -> str:
    out = io.StringIO()
    out.write(f"# mergelab {__version__}\n")
    out.write(f"# prng: {PRNG_ID}\n")
    out.write(f"# distribution: {spec.distribution}\n")
    out.write(f"# normalized cost: total merge cost / (n * log2 m), "
              f"mean over {spec.trials} trials\n")
    out.write(CSV_HEADER + "\n")
    for row in rows:
        out.write(row.csv() + "\n")
    return out.getvalue()


def read_csv(text: str) -> List[dict]:
    """Parse experiment CSV output back into dictionaries (comments skipped)."""
    lines = [ln for ln in text.splitlines() if ln and not ln.startswith("#")]
    header = lines[0].split(",")
    rows = []
    for ln in lines[1:]:
        rec = dict(zip(header, ln.split(",")))
        rec["m"] = int(rec["m"])
        rec["trials"] = int(rec["trials"])
        rec["mean_normalized_cost"] = float(rec["mean_normalized_cost"])
        rec["stddev"] = float(rec["stddev"])
        rows.append(rec)
    return rows
