import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from noisysimplex.geometry import Simplex, is_degenerate

settings.register_profile(
    "default", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


def random_simplex(rng: np.random.Generator, K: int, scale: float = 1.0) -> Simplex:
    while True:
        s = Simplex(rng.normal(scale=scale, size=(K + 1, K)))
        if not is_degenerate(s):
            return s


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES = []


def record(number: int, ok: bool, detail: str) -> None:
    ACCEPTANCE_LINES.append((number, f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}"))


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
