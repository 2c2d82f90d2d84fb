import functools

import numpy as np
import pytest

from atomchain.calibrate import optimize_tau
from atomchain.ensemble import NOISE_V0_GRID, NoiseSweepConfig, run_noise_sweep
from atomchain.potentials import PotentialSpec, power_bowl_spec
from atomchain.reference import TAU
from atomchain.spectral import SolverSettings, solve_spec

L = 100.0


@functools.lru_cache(maxsize=None)
def bowl_solution(N, tau):
    return solve_spec(power_bowl_spec(tau), N)


@functools.lru_cache(maxsize=None)
def flat_solution(N, n_basis=None):
    return solve_spec(PotentialSpec(L, ()), N, SolverSettings(n_basis=n_basis))


@functools.lru_cache(maxsize=None)
def calibration(N):
    return optimize_tau(N)


@functools.lru_cache(maxsize=None)
def noise_stats(N, V0_grid, M=200, seed=2016):
    return run_noise_sweep(NoiseSweepConfig(N, TAU[N], V0_grid, M=M, master_seed=seed))


NOISE_GRID = NOISE_V0_GRID


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES = []


def record(label, ok, detail=""):
    """Log one acceptance criterion outcome; printed again in the terminal summary."""
    line = f"[{'PASS' if ok else 'FAIL'}] {label}" + (f": {detail}" if detail else "")
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
