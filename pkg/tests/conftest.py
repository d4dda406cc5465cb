import sys
from pathlib import Path

import numpy as np
import pytest

from lamdiff.primitives import builtin_registry

sys.setrecursionlimit(10000)

ROOT = Path(__file__).resolve().parent.parent


@pytest.fixture
def rng():
    return np.random.default_rng(42)


@pytest.fixture(scope="session")
def registry():
    return builtin_registry()


@pytest.fixture
def programs_dir():
    return ROOT / "programs"


@pytest.fixture
def golden_dir():
    return Path(__file__).resolve().parent / "golden"
