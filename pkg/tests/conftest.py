import os
import sys
import warnings

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

from mtpgd import Material, assemble_stiffness, build_mesh, make_waveform, run, solve_incremental  # noqa: E402
from mtpgd.cases import DESK_DOGBONE, DESK_PLATE  # noqa: E402


@pytest.fixture(scope="session")
def steel():
    return Material.steel()


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240611)


def _setup(spec):
    system = assemble_stiffness(build_mesh(spec), Material.steel())
    return spec, system, make_waveform(spec)


@pytest.fixture(scope="session")
def desk_dogbone():
    return _setup(DESK_DOGBONE)


@pytest.fixture(scope="session")
def desk_plate():
    return _setup(DESK_PLATE)


def _pgd(setup, delta):
    _, system, wf = setup
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return run(system, wf, delta=delta)


@pytest.fixture(scope="session")
def dogbone_fe(desk_dogbone):
    _, system, wf = desk_dogbone
    return solve_incremental(system, wf, tol_eq=1e-8)


@pytest.fixture(scope="session")
def dogbone_pgd_tight(desk_dogbone):
    """Converged at delta = 1e-5."""
    return _pgd(desk_dogbone, 1e-5)


@pytest.fixture(scope="session")
def dogbone_pgd(desk_dogbone):
    return _pgd(desk_dogbone, 1e-4)


@pytest.fixture(scope="session")
def plate_pgd(desk_plate):
    return _pgd(desk_plate, 1e-4)


_VERDICTS = []


@pytest.fixture(scope="session")
def verdict():
    """Record one PASS/FAIL line per acceptance criterion."""
    def record(name, ok, detail):
        line = f"{'PASS' if ok else 'FAIL'} {name}: {detail}"
        _VERDICTS.append(line)
        print(line)
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if _VERDICTS:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in sorted(_VERDICTS, key=lambda s: s.split(":")[0].split()[-1]):
            terminalreporter.write_line(line)
