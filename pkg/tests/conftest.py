import functools
import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

from sasakilift.catalog import lookup
from sasakilift.lift import build_lift


@functools.lru_cache(maxsize=None)
def _entry(name, n=None, lam=None):
    params = {}
    if n is not None:
        params["n"] = n
    if lam is not None:
        params["lam"] = lam
    return lookup(name, **params)


@functools.lru_cache(maxsize=None)
def _lift(name, n=None, lam=None):
    return build_lift(_entry(name, n, lam).ks)


@pytest.fixture
def entry():
    return _entry


@pytest.fixture
def lifted():
    return _lift


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


ALL_BASES = [("flat", 1, None), ("flat", 2, None), ("fubini-study", 1, None), ("fubini-study", 2, None),
             ("complex-hyperbolic", 1, None), ("complex-hyperbolic", 2, None), ("gaussian", 1, 1.0),
             ("gaussian", 2, -1.0), ("cigar", None, None)]
