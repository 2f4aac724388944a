from __future__ import annotations

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from qthermal.hilbert import DensityMatrix

settings.register_profile(
    "qthermal",
    deadline=None,
    derandomize=True,
    max_examples=40,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("qthermal")


def random_density(dim: int, rng: np.random.Generator, rank: int | None = None) -> DensityMatrix:
    """Random full-rank (or rank-``rank``) density matrix."""
    k = rank or dim
    G = rng.standard_normal((dim, k)) + 1j * rng.standard_normal((dim, k))
    m = G @ G.conj().T
    return DensityMatrix(m / np.trace(m).real)


def random_diagonal_density(dim: int, rng: np.random.Generator) -> DensityMatrix:
    p = rng.uniform(0.1, 1.0, dim)
    return DensityMatrix(np.diag(p / p.sum()).astype(complex))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


#: acceptance results, criterion number -> (passed, detail); filled by test_acceptance
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        passed, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if passed else 'FAIL'}  {detail}")
