import pytest

from lucaspower import prover
from lucaspower.sequences import LUCAS


@pytest.fixture(scope="session")
def canonical_cert():
    return prover.prove(LUCAS, 3, 200)


@pytest.fixture(scope="session")
def canonical_doc(canonical_cert):
    return canonical_cert.to_json(timestamp="2000-01-01T00:00:00+00:00")


ACCEPTANCE_LINES = {}


@pytest.fixture
def report():
    """Record one summary line per acceptance criterion."""
    def record(number, title, clauses):
        ok = all(passed for passed, _ in clauses)
        detail = "; ".join(f"{'ok' if passed else 'FAILED'}: {text}" for passed, text in clauses)
        ACCEPTANCE_LINES[number] = f"{'PASS' if ok else 'FAIL'}  criterion {number} ({title}): {detail}"
        assert ok, ACCEPTANCE_LINES[number]
    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[number])
