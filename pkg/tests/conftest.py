import pytest

from ncsq.suite import SuiteConfig, run_suite

CRITERIA = {
    1: "exact identities on 100 instances",
    2: "inequality suite on 100 instances",
    3: "scalar oracle equivalence at m=1",
    4: "exhaustive Rademacher p=2 identity",
    5: "geometry on 500 random triples",
    6: "decay slope for every weight in the bank",
    7: "weak (1,1) budget and J=4/J=5 stability",
    8: "almost-orthogonality engine",
    9: "rc-norm bracket",
    10: "byte-identical CSV on repeat runs",
}

_outcomes = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion exercised by the test")


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.failed):
        return
    for n in getattr(report, "criteria", ()):
        ok = report.passed
        _outcomes[n] = _outcomes.get(n, True) and ok


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    report.criteria = tuple(m.args[0] for m in item.iter_markers("criterion"))


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for n, label in CRITERIA.items():
        if n in _outcomes:
            verdict = "PASS" if _outcomes[n] else "FAIL"
        else:
            verdict = "NOT RUN"
        terminalreporter.write_line(f"criterion {n:2d} {verdict:7s} {label}")


@pytest.fixture(scope="session")
def desk_suite():
    """The default desk-scale run (d=1, J=4, m=3, R=64, 100 instances), shared by the acceptance tests."""
    config = SuiteConfig().validate()
    return config, run_suite(config)
