import numpy as np
import pytest

from randsolomon.codec import derive_params
from randsolomon.crypto import SimCrypto
from randsolomon.protocol import Process


class World:
    """N processes with keys, wired by hand (no simulator)."""

    def __init__(self, n, f, z=None, b=None, relax=False, seed=0, retrace=True):
        self.params = derive_params(n, f, z, b, relax)
        self.crypto = SimCrypto(self.params.block_bytes)
        rng = np.random.default_rng(seed)
        self.keys = [self.crypto.keygen(p, rng) for p in range(n)]
        self.public = [k.public for k in self.keys]
        self.procs = [
            Process(p, self.params, self.crypto, self.keys[p], self.public, retrace=retrace) for p in range(n)
        ]

    def entropy(self, seed):
        rng = np.random.default_rng(seed)
        return rng.bytes


@pytest.fixture
def world4():
    return World(4, 1)


@pytest.fixture
def tiny4():
    return World(4, 1, z=8, b=1, relax=True)


# acceptance criteria register a verdict line here; printed after the run
ACCEPTANCE: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[k])
