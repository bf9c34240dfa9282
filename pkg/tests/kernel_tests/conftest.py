"""Shared fixtures for the kernel test suites."""
from pathlib import Path

import numpy as np
import pytest

from kernels.settings import reset_settings
from kernels.toolkit.matroid import MatroidContext

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


@pytest.fixture(autouse=True)
def _fresh_settings(monkeypatch):
    for name in ("SEED", "PRIME", "EPSILON", "OUTPUT"):
        monkeypatch.delenv(f"KERNELS_{name}", raising=False)
    reset_settings()
    yield
    reset_settings()


@pytest.fixture
def ctx() -> MatroidContext:
    return MatroidContext.from_seed(7)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(2024)


@pytest.fixture
def fixtures_dir() -> Path:
    return FIXTURES
