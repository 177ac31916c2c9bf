import pytest

ACCEPTANCE_LINES = []


@pytest.fixture
def criterion():
    """record(n, ok, detail, elapsed, budget) prints and stores one acceptance line."""

    def record(n, ok, detail, elapsed, budget):
        timing = f"{elapsed:.1f}s (budget {budget:g}s)"
        line = f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}  [{timing}]"
        ACCEPTANCE_LINES.append((n, line))
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
