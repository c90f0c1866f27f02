import pytest
from gmpy2 import mpq

from carcass import build_grid, generate_firm_from_homeomorphism, skew_tent, tent

PHI_A = [(0, 0), ("1/2", "1/3"), (1, 1)]
PHI_B = [(0, 0), ("1/4", "1/2"), ("1/2", "3/5"), (1, 1)]
PHI_C = [(0, 0), ("1/8", "1/5"), ("3/4", "2/3"), (1, 1)]


def corpus_maps():
    return {
        "tent": tent(),
        "skew1/3": skew_tent(mpq(1, 3)),
        "skew7/10": skew_tent(mpq(7, 10)),
        "genA": generate_firm_from_homeomorphism(PHI_A),
        "genB": generate_firm_from_homeomorphism(PHI_B),
        "genC": generate_firm_from_homeomorphism(PHI_C),
    }


CORPUS = corpus_maps()


@pytest.fixture(scope="session")
def corpus():
    return CORPUS


@pytest.fixture(scope="session")
def grids():
    return {name: build_grid(g, 14) for name, g in CORPUS.items()}


# -- acceptance reporting --------------------------------------------------

_RESULTS = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion number")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if rep.when == "call" or (rep.when == "setup" and rep.outcome != "passed"):
        n, title = marker.args
        entry = _RESULTS.setdefault(n, {"title": title, "tests": []})
        entry["tests"].append((item.name, rep.outcome))


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_RESULTS):
        entry = _RESULTS[n]
        ok = all(outcome == "passed" for _, outcome in entry["tests"])
        line = f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {entry['title']}"
        terminalreporter.write_line(line)
        if not ok:
            for name, outcome in entry["tests"]:
                if outcome != "passed":
                    terminalreporter.write_line(f"    {outcome}: {name}")
