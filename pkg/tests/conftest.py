import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from carpetlab.spectral import BasisSpec, CoefficientLaw, build_state

settings.register_profile(
    "default", max_examples=25, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


@pytest.fixture
def box():
    return BasisSpec.box()


@pytest.fixture
def smooth(box):
    return build_state(box, CoefficientLaw.power_law(3.0, 32))


@pytest.fixture
def two_mode(box):
    return build_state(box, CoefficientLaw.explicit([1.0, 1.0]))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


# -- acceptance reporting -------------------------------------------------------------

_ACCEPTANCE = {}


class AcceptanceLog:
    """Collects one PASS/FAIL line per acceptance criterion."""

    def __init__(self, number: int, title: str):
        self.number = number
        self.title = title
        self.checks = []

    def check(self, name: str, ok: bool, detail: str = "") -> bool:
        self.checks.append((name, bool(ok), detail))
        return bool(ok)

    @property
    def passed(self) -> bool:
        return bool(self.checks) and all(ok for _, ok, _ in self.checks)

    def line(self) -> str:
        parts = "; ".join(f"{n}{'' if ok else ' [FAILED]'}: {d}" if d else n for n, ok, d in self.checks)
        return f"{'PASS' if self.passed else 'FAIL'}  criterion {self.number:>2} {self.title} -- {parts}"

    def finish(self):
        print(self.line())
        failed = [f"{n}: {d}" for n, ok, d in self.checks if not ok]
        assert not failed, "; ".join(failed)


@pytest.fixture
def criterion():
    def make(number: int, title: str) -> AcceptanceLog:
        log = AcceptanceLog(number, title)
        _ACCEPTANCE[number] = log
        return log

    return make


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        terminalreporter.write_line(_ACCEPTANCE[number].line())
