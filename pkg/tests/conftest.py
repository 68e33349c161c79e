import numpy as np
import pytest

from mergelab.generators import MIXTURE_DEFAULT, UNIFORM_1_100, draw_lengths
from mergelab.engine import RunLengths

ALL_POLICIES = ["timsort", "alpha-stack:2", "alpha-stack:1.62", "alpha-stack:3",
                "shivers", "augmented-shivers", "two-merge", "alpha-merge:1.7",
                "alpha-merge:1.62"]


def random_inputs(count, max_m, seed, mixture_every=2):
    """Seeded uniform/mixture run-length inputs with m in [1, max_m]."""
    rng = np.random.default_rng(seed)
    out = []
    for i in range(count):
        m = int(rng.integers(1, max_m + 1))
        kind = MIXTURE_DEFAULT if i % mixture_every == 0 else UNIFORM_1_100
        out.append(RunLengths(draw_lengths(kind, m, [seed, i])))
    return out


@pytest.fixture(scope="session")
def small_inputs():
    return random_inputs(150, 300, seed=11)
