import sys
from pathlib import Path

import numpy as np
import pytest

import marketclear as mc
from marketclear import specio

REPO_ROOT = Path(__file__).resolve().parent.parent
SPEC_DIR = REPO_ROOT / "specs"

PYTHON = sys.executable


def random_instance(seed, max_n=12, max_nests=4, v_bound=5.0):
    """Random (nest structure, utility vector) pair, deterministic per seed."""
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, max_n + 1))
    ns = specio.random_nest_structure(n, rng, max_nests=max_nests)
    v = rng.uniform(-v_bound, v_bound, n)
    return ns, v


def fd_gradient(f, x, step=1e-5):
    """Central finite differences of a batch-capable scalar function."""
    x = np.asarray(x, dtype=float)
    shifts = np.zeros((2 * x.size,) + x.shape)
    for i in range(x.size):
        shifts[2 * i, i] = step
        shifts[2 * i + 1, i] = -step
    vals = f(x + shifts)
    return (vals[0::2] - vals[1::2]) / (2.0 * step)


@pytest.fixture(scope="session")
def single_good_market():
    """n=1 market with closed-form equilibrium p* = c + 2*gamma*(count - y_nat) = 3."""
    return mc.Market(
        n=1,
        consumers=(mc.ConsumerType(count=2.0, a=[0.0], nests=mc.NestStructure.single(1)),),
        suppliers=(mc.Supplier(y_nat=[0.0], gamma=0.5, lo=[0.0], hi=[10.0], c=[1.0]),),
    )


@pytest.fixture(scope="session")
def six_good_market():
    return specio.market_from_document(specio.generate_market(6, 2, 2, seed=7))
