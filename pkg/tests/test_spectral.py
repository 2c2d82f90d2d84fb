import math

import numpy as np
import pytest
import scipy.linalg

from atomchain.potentials import Harmonic, PotentialSpec, PowerBowl, Tabulated, power_bowl_spec, uniform_grid
from atomchain.reference import TAU
from atomchain.spectral import (
    InsufficientGridError,
    SineBasis,
    SolverSettings,
    boundary_slopes,
    build_hamiltonian,
    default_grid,
    derivatives,
    eval_derivative,
    eval_wavefunction,
    solve,
    solve_spec,
    wavefunctions,
    write_spectrum_csv,
)

from conftest import bowl_solution, flat_solution

L = 100.0
FLAT = PotentialSpec(L, ())


def fd_energies(spec, N, h):
    """Second-order finite differences for -psi'' + V psi on a uniform grid."""
    n = int(round(spec.box_length / h)) - 1
    x = h * np.arange(1, n + 1)
    d = 2.0 / h**2 + spec(x)
    e = np.full(n - 1, -1.0 / h**2)
    return scipy.linalg.eigh_tridiagonal(d, e, select="i", select_range=(0, N - 1),
                                         eigvals_only=True)


def richardson_energies(spec, N, h=0.02):
    coarse, fine = fd_energies(spec, N, h), fd_energies(spec, N, h / 2)
    return (4 * fine - coarse) / 3


def test_free_box_hamiltonian_is_diagonal():
    basis = SineBasis(L, 40)
    H = build_hamiltonian(basis, FLAT, default_grid(L, 40))
    np.testing.assert_allclose(H, np.diag((basis.n * math.pi / L) ** 2), rtol=1e-14, atol=0)
    assert H[0, 0] == pytest.approx(9.8696e-4, rel=1e-4)


def test_constant_potential_shifts_identity():
    basis = SineBasis(L, 30)
    const = PotentialSpec(L, (Tabulated((0.0, L), (0.7, 0.7)),))
    H = build_hamiltonian(basis, const, default_grid(L, 30))
    np.testing.assert_allclose(H, np.diag((basis.n * math.pi / L) ** 2) + 0.7 * np.eye(30), atol=1e-13)


def test_hamiltonian_symmetric():
    basis = SineBasis(L, 50)
    H = build_hamiltonian(basis, power_bowl_spec(3.3), default_grid(L, 50))
    np.testing.assert_array_equal(H, H.T)


def test_coarse_grid_refused():
    basis = SineBasis(L, 100)
    with pytest.raises(InsufficientGridError, match="too coarse"):
        build_hamiltonian(basis, FLAT, uniform_grid(L, 400))
    build_hamiltonian(basis, FLAT, uniform_grid(L, 800))


def test_free_box_energies():
    sol = flat_solution(3)
    np.testing.assert_allclose(sol.energies, (np.arange(1, 4) * math.pi / L) ** 2, rtol=1e-13)


def test_wavefunction_walls_and_centre():
    sol = flat_solution(3)
    for i in (1, 2, 3):
        assert eval_wavefunction(sol, i, 0.0) == 0.0
        assert abs(eval_wavefunction(sol, i, L)) < 1e-15
    assert eval_wavefunction(sol, 1, L / 2) == pytest.approx(math.sqrt(2 / L), rel=1e-12)
    assert eval_derivative(sol, 1, L) == pytest.approx(-math.sqrt(2 / L) * math.pi / L, rel=1e-12)
    np.testing.assert_allclose(boundary_slopes(sol), derivatives(sol, [L])[:, 0], atol=1e-15)


def test_index_and_domain_errors():
    sol = flat_solution(3)
    with pytest.raises(IndexError):
        eval_wavefunction(sol, 0, 1.0)
    with pytest.raises(IndexError):
        eval_derivative(sol, 4, 1.0)
    with pytest.raises(ValueError):
        eval_wavefunction(sol, 1, L + 1)
    with pytest.raises(ValueError):
        solve(SineBasis(L, 5), FLAT, 6)


def test_sign_convention_slope_positive_at_left_wall():
    for spec in (FLAT, PotentialSpec(L, (Harmonic(1e-4),))):
        sol = solve_spec(spec, 5)
        assert np.all(derivatives(sol, [0.0])[:, 0] > 0)


def test_ground_state_parity_of_slopes():
    sol = solve_spec(PotentialSpec(L, (Harmonic(2e-4),)), 4)
    d0, dL = derivatives(sol, [0.0, L])[0]
    assert dL == pytest.approx(-d0, abs=1e-10)


def test_deep_bowl_states_vanish_at_wall():
    sol = bowl_solution(10, TAU[10])
    assert np.all(np.abs(boundary_slopes(sol)) < 1e-6)


def test_orthonormal_coefficients():
    sol = bowl_solution(10, TAU[10])
    gram = sol.coefficients @ sol.coefficients.T
    np.testing.assert_allclose(gram, np.eye(10), atol=1e-10)
    assert np.all(np.diff(sol.energies) > 0)


def test_parity_of_wavefunctions():
    sol = bowl_solution(10, TAU[10])
    x = np.linspace(0, L, 401)
    np.testing.assert_allclose(np.abs(wavefunctions(sol, x)), np.abs(wavefunctions(sol, L - x)), atol=1e-8)


def test_variational_monotonicity():
    spec = power_bowl_spec(3.5)
    grid = default_grid(L, 120)
    prev = None
    for nb in (20, 40, 80, 120):
        E = solve(SineBasis(L, nb), spec, 6, grid).energies
        if prev is not None:
            assert np.all(E <= prev + 1e-12)
        prev = E


@pytest.mark.parametrize("N,tau", [(4, TAU[4]), (10, TAU[10]), (20, TAU[20])])
def test_converged_at_production_settings(N, tau):
    spec = power_bowl_spec(tau)
    base = SolverSettings()
    E1 = solve_spec(spec, N, base).energies
    E2 = solve_spec(spec, N, base.doubled(N)).energies
    assert np.max(np.abs(E2 - E1)) < 1e-8


def test_highest_energies_n4_to_n10():
    top = [bowl_solution(N, TAU[N]).energies[-1] for N in range(4, 11)]
    assert top[0] == pytest.approx(0.55, abs=0.005)
    assert top[-1] == pytest.approx(1.21, abs=0.005)
    assert np.all(np.diff(top) > 0)


def test_energies_match_finite_difference_oracle():
    for N in (10, 20):
        spec = power_bowl_spec(TAU[N])
        np.testing.assert_allclose(bowl_solution(N, TAU[N]).energies, richardson_energies(spec, N), rtol=2e-6)


def test_n20_top_energy_from_oracle():
    E20 = bowl_solution(20, TAU[20]).energies[-1]
    assert E20 == pytest.approx(2.80, rel=0.01)


@pytest.mark.xfail(strict=True, reason="quoted 7.80 eps disagrees with converged solver and FD oracle (2.80 eps)")
def test_n20_top_energy_quoted_value():
    assert bowl_solution(20, TAU[20]).energies[-1] == pytest.approx(7.80, rel=0.01)


def test_spectrum_csv(tmp_path):
    sol = flat_solution(3)
    path = tmp_path / "s.csv"
    write_spectrum_csv(sol, path, n_samples=5, header=["hello"])
    lines = path.read_text().splitlines()
    assert lines[0] == "# hello"
    assert lines[1] == "n,E"
    assert float(lines[2].split(",")[1]) == pytest.approx((math.pi / L) ** 2)
    assert lines[-1].startswith("100.0,")
