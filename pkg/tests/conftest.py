from collections import defaultdict

import pytest

_verdicts: dict[int, list[tuple[bool, str]]] = defaultdict(list)


@pytest.fixture
def verdict(capsys):
    """Record and print one pass/fail line for an acceptance criterion, then assert it."""

    def record(criterion: int, ok: bool, detail: str) -> None:
        ok = bool(ok)
        _verdicts[criterion].append((ok, detail))
        with capsys.disabled():
            print(f"\n[acceptance {criterion:2d}] {'PASS' if ok else 'FAIL'}  {detail}")
        assert ok, detail

    return record


def pytest_terminal_summary(terminalreporter):
    if not _verdicts:
        return
    terminalreporter.section("acceptance criteria")
    for criterion in sorted(_verdicts):
        parts = _verdicts[criterion]
        status = "PASS" if all(ok for ok, _ in parts) else "FAIL"
        terminalreporter.write_line(f"criterion {criterion:2d}: {status}  " + " | ".join(d for _, d in parts))
