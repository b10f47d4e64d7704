import datetime as dt

import pytest

from fogcache.demand import Request
from fogcache.records import ContentCategory
from fogcache.topology import Topology

DAY = dt.date(2015, 10, 1)


def make_request(item, cell, category=ContentCategory.YOUTUBE, operator="op", user="u", bytes_=1, hour=0):
    return Request(user, DAY, hour, cell, operator, category, item, bytes_)


@pytest.fixture
def four_bs_topology():
    """bs1,bs2 in one ring, bs3,bs4 in another, one pod, one core."""
    return Topology.from_nested("op", [[[["c1", "c2"], ["c3", "c4"]]]])


@pytest.fixture
def worked_topology():
    """Five base stations under one core: pod0 = {ring0: c1,c2; ring1: c3}, pod1 = {ring2: c4; ring3: c5}."""
    return Topology.from_nested("op", [[[["c1", "c2"], ["c3"]], [["c4"], ["c5"]]]])


# shapes are the cache-worthy items of the worked example
WORKED_SETS = {
    "c1": {"circle"},
    "c2": {"square"},
    "c3": {"circle"},
    "c4": {"triangle"},
    "c5": {"square", "circle"},
}


# -- acceptance reporting ------------------------------------------------------------

_CRITERIA = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    number, title = mark.args
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        prev = _CRITERIA.get(number, (title, "PASS"))[1]
        status = "PASS" if report.outcome == "passed" and prev == "PASS" else "FAIL"
        _CRITERIA[number] = (title, status)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        title, status = _CRITERIA[number]
        terminalreporter.write_line(f"[{status}] criterion {number}: {title}")
