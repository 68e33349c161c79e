"""Seeded random run-length distributions for the experiments.

Streams come from numpy's PCG64 bit generator seeded through ``SeedSequence``;
both are stable across platforms and numpy releases, which is all the
experiments need for reproducibility.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .engine import RunLengths

PRNG_ID = "numpy.PCG64/SeedSequence"


@dataclass(frozen=True)
class Uniform:
    lo: int
    hi: int

    def __post_init__(self):
        if not 1 <= self.lo <= self.hi:
            raise ValueError(f"need 1 <= lo <= hi, got [{self.lo}, {self.hi}]")

    def draw(self, rng, size):
        return rng.integers(self.lo, self.hi, size=size, endpoint=True, dtype=np.int64)

    def __str__(self):
        return f"uniform:{self.lo}:{self.hi}"


@dataclass(frozen=True)
class Mixture:
    """Pick ``first`` with probability ``weight``, otherwise ``second``."""

    weight: float
    first: Uniform
    second: Uniform

    def __post_init__(self):
        if not 0.0 <= self.weight <= 1.0:
            raise ValueError("mixture weight must lie in [0, 1]")

    def draw(self, rng, size):
        pick_first = rng.random(size) < self.weight
        a = self.first.draw(rng, size)
        b = self.second.draw(rng, size)
        return np.where(pick_first, a, b)

    def __str__(self):
        return (f"mixture:{self.weight:g}:{self.first.lo}:{self.first.hi}"
                f":{self.second.lo}:{self.second.hi}")


# the two distributions of the published experiments
UNIFORM_1_100 = Uniform(1, 100)
MIXTURE_DEFAULT = Mixture(0.95, Uniform(1, 100), Uniform(10_000, 100_000))


@dataclass(frozen=True)
class DistributionSpec:
    kind: object
    seed: int = 0

    def generate(self, m: int) -> RunLengths:
        return generate(self, m)


def parse_distribution(text: str):
    """Parse ``uniform:LO:HI``, ``mixture`` or ``mixture:W:LO1:HI1:LO2:HI2``."""
    parts = text.strip().lower().split(":")
    try:
        if parts[0] == "uniform":
            if len(parts) == 1:
                return UNIFORM_1_100
            lo, hi = (int(v) for v in parts[1:3])
            if len(parts) != 3:
                raise ValueError
            return Uniform(lo, hi)
        if parts[0] == "mixture":
            if len(parts) == 1:
                return MIXTURE_DEFAULT
            if len(parts) != 6:
                raise ValueError
            w = float(parts[1])
            lo1, hi1, lo2, hi2 = (int(v) for v in parts[2:])
            return Mixture(w, Uniform(lo1, hi1), Uniform(lo2, hi2))
    except ValueError as exc:
        raise ValueError(f"bad distribution {text!r}: {exc}") from None
    raise ValueError(f"bad distribution {text!r}; use uniform:LO:HI or mixture[:W:LO1:HI1:LO2:HI2]")


def generate(spec: DistributionSpec, m: int, seed: Optional[int] = None) -> RunLengths:
    """Draw ``m`` independent run lengths from ``spec.kind``."""
    if m < 1:
        raise ValueError("m must be >= 1")
    rng = np.random.Generator(np.random.PCG64(spec.seed if seed is None else seed))
    return RunLengths(spec.kind.draw(rng, m))


def draw_lengths(kind, m: int, seed: int) -> np.ndarray:
    """Like ``generate`` but returns the raw int64 array (no validation pass)."""
    rng = np.random.Generator(np.random.PCG64(seed))
    return kind.draw(rng, m)


def trial_seeds(master_seed: int, trial_count: int) -> list:
    """Independent 64-bit seeds for ``trial_count`` trials."""
    if trial_count < 1:
        raise ValueError("trial_count must be >= 1")
    children = np.random.SeedSequence(master_seed).spawn(trial_count)
    return [int(c.generate_state(1, dtype=np.uint64)[0]) for c in children]
