"""Shared fixtures: the three reference lattices used across the suite.

The trinomial and four-state lattices use round factors (u = 1.2, d = 0.8)
with R = 2% and S0 = 100; the five-state lattice reproduces a calibrated
equity setting (R = 5%, S0 = 21.5381, strike 22) whose outer amplitudes are
2.3817 and 0.5712, with u and d recovered as their fourth roots so the full
amplitude ladder is geometric.

The acceptance gate in test_acceptance.py reports one PASS/FAIL line per
criterion at the end of the run (see pytest_terminal_summary below).
"""
import re

import numpy as np
import pytest

from pmfrisk import AmplitudeGrid, LatticeSpec, Pmf, ReturnMoments

# Daily log-return moments (mean, variance, skewness, excess kurtosis) of
# the calibration example, with 254 trading periods per year.
DAILY_MEAN = 0.0006
DAILY_VARIANCE = 0.0005
DAILY_SKEWNESS = 0.1019
DAILY_EXCESS_KURTOSIS = 4.4305
PERIODS_PER_YEAR = 254

# Published five-state tables the calibration must reproduce (descending).
AMP_TABLE = np.array([2.3817, 1.6667, 1.1664, 0.8162, 0.5712])
PROB_TABLE = np.array([0.0829, 0.1656, 0.5029, 0.1658, 0.0828])


@pytest.fixture
def trinomial_spec() -> LatticeSpec:
    return LatticeSpec(u=1.2, d=0.8, L=3, R=0.02, S0=100.0, N=10)


@pytest.fixture
def trinomial_amps(trinomial_spec) -> AmplitudeGrid:
    return AmplitudeGrid.from_spec(trinomial_spec)


@pytest.fixture
def trinomial_prior(trinomial_amps) -> Pmf:
    return trinomial_amps.pmf_from_desc(np.array([0.3, 0.4, 0.3]))


@pytest.fixture
def l4_spec() -> LatticeSpec:
    return LatticeSpec(u=1.2, d=0.8, L=4, R=0.02, S0=100.0, N=10)


@pytest.fixture
def l4_amps(l4_spec) -> AmplitudeGrid:
    return AmplitudeGrid.from_spec(l4_spec)


@pytest.fixture
def l4_prior(l4_amps) -> Pmf:
    # Ascending-grid probabilities (0.512, 0.768, 1.152, 1.728 get
    # 0.09, 0.40, 0.47, 0.04); descending convention: (0.04, 0.47, 0.40, 0.09).
    return Pmf(l4_amps.grid, np.array([0.09, 0.40, 0.47, 0.04]))


@pytest.fixture
def penta_spec() -> LatticeSpec:
    return LatticeSpec(u=AMP_TABLE[0] ** 0.25, d=AMP_TABLE[-1] ** 0.25,
                       L=5, R=0.05, S0=21.5381, N=4)


@pytest.fixture
def penta_amps(penta_spec) -> AmplitudeGrid:
    return AmplitudeGrid.from_spec(penta_spec)


@pytest.fixture
def penta_prior(penta_amps) -> Pmf:
    return penta_amps.pmf_from_desc(PROB_TABLE)


@pytest.fixture
def daily_moments() -> ReturnMoments:
    return ReturnMoments(mean=DAILY_MEAN, variance=DAILY_VARIANCE,
                         skewness=DAILY_SKEWNESS,
                         excess_kurtosis=DAILY_EXCESS_KURTOSIS,
                         periods_per_year=PERIODS_PER_YEAR)


# --- acceptance gate reporting -------------------------------------------

_CRITERION_RE = re.compile(r"test_acceptance\.py::test_criterion_(\d+)")
_criterion_results: dict[int, str] = {}


def pytest_runtest_logreport(report):
    m = _CRITERION_RE.search(report.nodeid)
    if m and report.when == "call":
        _criterion_results[int(m.group(1))] = (
            "PASS" if report.passed else "FAIL")


def pytest_terminal_summary(terminalreporter):
    if not _criterion_results:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for n in sorted(_criterion_results):
        terminalreporter.write_line(
            f"criterion {n}: {_criterion_results[n]}")
