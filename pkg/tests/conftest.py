import pytest

from hfforcing.harness import shipped_context


@pytest.fixture(scope="session")
def trivial():
    return shipped_context("trivial")


@pytest.fixture(scope="session")
def vposet():
    return shipped_context("vposet")


@pytest.fixture(scope="session")
def chain3():
    return shipped_context("chain3")


@pytest.fixture(scope="session", params=["trivial", "vposet", "chain3"])
def shipped(request):
    return shipped_context(request.param)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
