"""Collects one summary line per acceptance criterion and prints them at the end of the run."""

import pytest

_RESULTS: dict[int, tuple[bool, str]] = {}


class CriterionRecorder:
    def __call__(self, number: int, passed: bool, detail: str) -> None:
        _RESULTS[number] = (bool(passed), detail)


@pytest.fixture
def criterion() -> CriterionRecorder:
    return CriterionRecorder()


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_RESULTS):
        passed, detail = _RESULTS[number]
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}")
