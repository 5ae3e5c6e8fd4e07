import random

import pytest

from pddlsim import blocksworld as bw
from pddlsim.pddl import parse_domain, parse_problem

_acceptance: dict[str, str] = {}


@pytest.fixture(scope="session")
def bw_domain_text():
    return bw.domain_text()


@pytest.fixture(scope="session")
def bw_domain():
    return parse_domain(bw.domain_text())


@pytest.fixture(scope="session")
def sussman_text():
    return bw.sussman_text()


@pytest.fixture(scope="session")
def sussman(bw_domain):
    return parse_problem(bw.sussman_text(), bw_domain)


@pytest.fixture
def rng():
    return random.Random(20240611)


def random_tasks(n, seed, sizes=(2, 3, 4)):
    """``n`` (domain, problem, problem_text) triples of random Blocksworld instances."""
    rng = random.Random(seed)
    domain = parse_domain(bw.domain_text())
    out = []
    for k in range(n):
        text = bw.random_problem(rng.choice(sizes), rng, f"rand-{k}")
        out.append((domain, parse_problem(text, domain), text))
    return out


def pytest_runtest_logreport(report):
    marker = getattr(report, "acceptance", None)
    if marker is None:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        _acceptance[marker] = "PASS" if report.outcome == "passed" else "FAIL"


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    mark = item.get_closest_marker("acceptance")
    if mark is not None:
        outcome.get_result().acceptance = mark.args[0]


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for name, result in _acceptance.items():
        terminalreporter.write_line(f"{result}  {name}")
