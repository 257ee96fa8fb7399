import pytest


def pytest_terminal_summary(terminalreporter):
    from smoothpen.acceptance import RESULTS

    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(RESULTS):
        terminalreporter.write_line(RESULTS[k].line())
    passed = sum(r.passed for r in RESULTS.values())
    terminalreporter.write_line(f"{passed}/{len(RESULTS)} criteria passed")


@pytest.fixture
def sphere2():
    from smoothpen import get_benchmark

    return get_benchmark("sphere", n=2)
