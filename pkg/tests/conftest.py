import numpy as np
import pytest

from nlch.grid import Domain
from nlch.kernel import gaussian_kernel
from nlch.potential import FloryHuggins, PotentialParams


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def dom1():
    return Domain((1.0,), (64,))


@pytest.fixture
def dom2():
    return Domain((1.0, 1.0), (16, 16))


@pytest.fixture
def fh():
    return FloryHuggins(PotentialParams())


@pytest.fixture
def gk1(dom1):
    return gaussian_kernel(dom1, 0.05)


# ---- one summary line per acceptance criterion ------------------------------

CRITERIA = {
    1: "strict bound and mass conservation",
    2: "energy dissipation and form equivalence",
    3: "empirical separation",
    4: "De Giorgi level-set diagnostics",
    5: "iteration lemma battery",
    6: "certificate soundness and all-ones value",
    7: "kernel bounds and FFT/direct agreement",
    8: "chemical potential bounds",
    9: "Hölder estimator calibration",
    10: "regularity scaling",
    11: "attractor probe",
    12: "assumption checker",
}
_outcomes: dict[int, list[tuple[str, str]]] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        _outcomes.setdefault(mark.args[0], []).append((item.name, rep.outcome))


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n in sorted(_outcomes):
        results = _outcomes[n]
        failed = [name for name, o in results if o == "failed"]
        skipped = all(o == "skipped" for _, o in results)
        status = "SKIP" if skipped else ("FAIL" if failed else "PASS")
        line = f"criterion {n:2d} {status}: {CRITERIA.get(n, '')} ({len(results)} checks)"
        if failed:
            line += " failed: " + ", ".join(failed)
        tr.write_line(line)
