import pytest

from valz.chain import cyclic, padic

# criterion id -> (passed, detail); filled by the acceptance suite
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


@pytest.fixture
def two_adic():
    return padic(2)


@pytest.fixture
def three_adic():
    return padic(3)


STANDARD_CYCLES = ([2], [3], [2, 3], [2, 3, 5], [6])


def standard_chains():
    return [cyclic(*c) for c in STANDARD_CYCLES]


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for cid in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[cid]
        terminalreporter.write_line(f"criterion {cid:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
