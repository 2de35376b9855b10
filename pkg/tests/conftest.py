import sys
from pathlib import Path

import numpy as np
import pytest

from spectralkahler import bergman as bg
from spectralkahler.curves import HyperellipticCurve, TowerCurve
from spectralkahler.family import FamilyChart
from spectralkahler.homology import build_symplectic_frame
from spectralkahler.periods import period_data
from spectralkahler.recursion import RecursionEngine

sys.path.insert(0, str(Path(__file__).parent))

QUARTIC_ROOTS = [-1, 0, 0, 0, 1]           # x^4 - 1, square period lattice
LEGENDRE = [4, 0, -5, 0, 1]               # (x^2 - 1)(x^2 - 4)
SEXTIC = [-1, 0, 0, 0, 0, 0, 1]           # x^6 - 1
GENERIC_G2 = [-1 + 0.3j, 0.4, 0.2j, 0, 0, 0, 1]
CONIC = [-1, 0, 1]


class Curve:
    """Lazily built pipeline objects for one curve."""

    def __init__(self, model):
        self.model = model
        self._c = {}

    def _get(self, k, fn):
        if k not in self._c:
            self._c[k] = fn()
        return self._c[k]

    @property
    def frame(self):
        return self._get("frame", lambda: build_symplectic_frame(self.model))

    @property
    def pd(self):
        return self._get("pd", lambda: period_data(self.model, self.frame))

    @property
    def kernel(self):
        return self._get("kernel", lambda: bg.make_kernel(self.model, self.pd))

    @property
    def jets(self):
        return self._get("jets", lambda: bg.bergman_jets(self.model, self.pd, self.kernel))

    @property
    def engine(self):
        return self._get("engine", lambda: RecursionEngine(self.jets, self.kernel, self.model, self.pd))

    @property
    def chart(self):
        return self._get("chart", lambda: FamilyChart(self.model, self.frame, self.pd))


def sample_points(model, n, seed=0, margin=0.25):
    """Seeded random points kept away from branch points."""
    rng = np.random.default_rng(seed)
    bp = np.asarray(model.branch_points)
    c = complex(np.mean(bp))
    R = max(float(np.max(np.abs(bp - c))), 1.0)
    out = []
    while len(out) < n:
        x = c + R * complex(rng.uniform(-1.2, 1.2), rng.uniform(-1.2, 1.2))
        if np.min(np.abs(bp - x)) < margin * R or any(abs(x - p[0]) < margin * R for p in out):
            continue
        sheet = int(rng.integers(model.nsheets))
        out.append((x, model.fiber_candidates(x)[sheet]))
    return out


@pytest.fixture(scope="session")
def quartic_roots():
    return Curve(HyperellipticCurve(QUARTIC_ROOTS))


@pytest.fixture(scope="session")
def legendre():
    return Curve(HyperellipticCurve(LEGENDRE))


@pytest.fixture(scope="session")
def sextic():
    return Curve(HyperellipticCurve(SEXTIC))


@pytest.fixture(scope="session")
def generic_g2():
    return Curve(HyperellipticCurve(GENERIC_G2))


@pytest.fixture(scope="session")
def conic():
    return Curve(HyperellipticCurve(CONIC))


@pytest.fixture(scope="session")
def tower():
    return Curve(TowerCurve([-1, 0, 0, 0, 0, 0, 1], [0.3, 0.2], [0.5 + 0.2j, 0.1, 1]))
