from fractions import Fraction

import pytest

from padic_mumford.config import load_fixture
from padic_mumford.hyperelliptic import curve_from_config
from padic_mumford.localfield import padic
from padic_mumford.moebius import MoebiusMap
from padic_mumford.pipeline import CurveModel
from padic_mumford.schottky import Disc, SchottkyGroup

P = 5


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion number n")
    config._criteria = {}


def pytest_runtest_logreport(report):
    item_marks = getattr(report, "criterion", None)
    if item_marks is None:
        return
    n, title = item_marks
    table = report.config_criteria
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        table[n] = (title, report.outcome)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is not None:
        report.criterion = tuple(mark.args)
        report.config_criteria = item.config._criteria


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    table = getattr(config, "_criteria", {})
    if not table:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(table):
        title, outcome = table[n]
        verdict = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"criterion {n}: {verdict}  {title}")


@pytest.fixture(scope="session")
def cfg_g2():
    return load_fixture("fixture-g2")


@pytest.fixture(scope="session")
def cfg_g3():
    return load_fixture("fixture-g3")


@pytest.fixture(scope="session")
def model_g2(cfg_g2):
    return CurveModel.from_config(cfg_g2)


@pytest.fixture(scope="session")
def model_g3(cfg_g3):
    return CurveModel.from_config(cfg_g3)


@pytest.fixture(scope="session")
def models(model_g2, model_g3):
    return {"g2": model_g2, "g3": model_g3}


@pytest.fixture(scope="session")
def curve_g2(cfg_g2):
    return curve_from_config(cfg_g2)


@pytest.fixture(scope="session")
def curve_g3(cfg_g3):
    return curve_from_config(cfg_g3)


@pytest.fixture(scope="session")
def rank_one():
    """z -> 25 z on Q_5: theta data have closed forms u(z) = x0/z and Q = 25."""
    gen = MoebiusMap.from_rationals([[25, 0], [0, 1]], P, 64)
    discs = [Disc(padic(0, P), 2, False), Disc(padic(0, P), 0, True)]
    return SchottkyGroup(P, [gen], discs, 64).validate()


@pytest.fixture(scope="session")
def genus_two_group():
    """A small rank-2 Schottky group built from two hyperbolic maps on Q_5."""
    from padic_mumford.schottky import build_whittaker

    return build_whittaker([(5, -5), (Fraction(1, 3), Fraction(7, 11))], P).schottky
