"""Shared wave trains and coefficient sets (computed once per session)."""

import warnings

import numpy as np
import pytest

from spiralspec import blochspec, cli, config, kinetics
from spiralspec.oracles import manufactured_coefficients

BARKLEY_KAPPA = 0.6165
KARMA_KAPPA = 3.258032
KARMA_SEED = {"kappa": 0.5, "n": 512, "t_end": 3.0, "continuation_factor": 1.08}


@pytest.fixture(autouse=True)
def _quiet_conditioning():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        yield


def barkley_config(**kw):
    return config.parse({"model": {"name": "barkley"}, "kappa": BARKLEY_KAPPA, **kw})


def karma_config(**kw):
    return config.parse({"model": {"name": "karma"}, "kappa": KARMA_KAPPA,
                         "seed": dict(KARMA_SEED), **kw})


@pytest.fixture(scope="session")
def barkley_wt():
    return cli.base_wavetrain(barkley_config())


@pytest.fixture(scope="session")
def barkley_coeffs(barkley_wt):
    return kinetics.sample_coefficients(kinetics.get_model("barkley"), barkley_wt)


@pytest.fixture(scope="session")
def karma_wt():
    return cli.base_wavetrain(karma_config())


@pytest.fixture(scope="session")
def karma_coeffs(karma_wt):
    return kinetics.sample_coefficients(kinetics.get_model("karma"), karma_wt)


@pytest.fixture(scope="session")
def barkley_curve(barkley_coeffs):
    """Spiral-frame branch through 0, gamma in [0, 60]."""
    return blochspec.trace_branch(barkley_coeffs, 0.0, (0.0, 60.0), 0.25, method="local")


@pytest.fixture(scope="session")
def manufactured():
    return manufactured_coefficients(128)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


ACCEPTANCE = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[ACCEPTANCE] = []


@pytest.fixture
def acceptance(request):
    """Record one criterion's outcome: ``acceptance(n, ok, detail)``."""
    def record(number, ok, detail):
        line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
        request.config.stash[ACCEPTANCE].append((number, line))
        print(line)
        return ok
    return record


def pytest_terminal_summary(terminalreporter, config):
    lines = sorted(config.stash.get(ACCEPTANCE, []))
    if lines:
        terminalreporter.write_sep("=", "acceptance criteria")
        for _, line in lines:
            terminalreporter.write_line(line)
