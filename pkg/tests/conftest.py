import numpy as np
import pytest

_ACCEPTANCE: list[tuple[int, bool, str]] = []


@pytest.fixture
def acceptance():
    """Record one acceptance criterion outcome and fail the test if it did not pass."""

    def record(number: int, passed: bool, detail: str) -> None:
        _ACCEPTANCE.append((number, bool(passed), detail))
        print(f"criterion {number}: {'PASS' if passed else 'FAIL'} ({detail})")
        assert passed, f"criterion {number} failed: {detail}"

    return record


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number, passed, detail in sorted(_ACCEPTANCE):
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}")
