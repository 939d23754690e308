import pytest

from malpha import GOLDEN, SQRT2_MINUS_1, SQRT3_MINUS_1_HALF

SURDS = {
    "golden": GOLDEN,
    "sqrt2-1": SQRT2_MINUS_1,
    "(sqrt3-1)/2": SQRT3_MINUS_1_HALF,
}


@pytest.fixture(params=sorted(SURDS), ids=sorted(SURDS))
def surd(request):
    return SURDS[request.param]


_ACCEPTANCE_KEY = pytest.StashKey[dict]()


def pytest_configure(config):
    config.stash[_ACCEPTANCE_KEY] = {}


@pytest.fixture
def criterion(request):
    """Record one PASS/FAIL line per acceptance criterion."""
    lines = request.config.stash[_ACCEPTANCE_KEY]

    def record(number: int, ok: bool, detail: str):
        line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
        lines[number] = line
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_ACCEPTANCE_KEY, {})
    if lines:
        terminalreporter.section("acceptance criteria")
        for n in sorted(lines):
            terminalreporter.write_line(lines[n])
