import math
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from quasireal.hilbert import observable, random_hermitian, random_state  # noqa: E402
from quasireal.measurement import random_measurement, random_probe  # noqa: E402

SQRT2 = math.sqrt(2.0)


class Instance:
    """Seeded random (psi, model with readouts, A, B, probe)."""

    def __init__(self, dim, n_outcomes, seed):
        rng = np.random.default_rng(seed)
        s = rng.integers(2**63, size=6)
        self.dim = dim
        self.psi = random_state(dim, s[0])
        model = random_measurement(dim, n_outcomes, s[1])
        self.model = model.with_readouts(np.random.default_rng(s[2]).standard_normal(n_outcomes))
        self.A = observable(random_hermitian(dim, s[3]))
        self.B = observable(random_hermitian(dim, s[4]))
        self.probe = random_probe(dim, s[5])

    @property
    def kraus(self):
        return list(self.model.kraus)

    @property
    def readouts(self):
        return list(self.model.readouts)


def make_instances(n, seed=0, dims=range(2, 7), counts=range(1, 6)):
    dims, counts = list(dims), list(counts)
    return [Instance(dims[i % len(dims)], counts[(i // len(dims)) % len(counts)], seed * 100_000 + i)
            for i in range(n)]


@pytest.fixture(scope="session")
def instances():
    return make_instances(50, seed=7)
