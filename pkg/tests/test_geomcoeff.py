import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from atomchain.geomcoeff import (
    ConvergenceError,
    adjugate_coeffs,
    brute_force_alpha,
    charpoly_coeffs,
    compute_alpha,
    geometric_coefficients,
    minor,
    minor_lambda_coeffs,
    overlap_matrix,
    write_alpha_csv,
)
from atomchain.potentials import DomainError, Harmonic, PotentialSpec, PowerBowl, power_bowl_spec
from atomchain.reference import HALF_ALPHA, TAU, full_alpha
from atomchain.spectral import SolverSettings, eval_wavefunction, solve_spec

from conftest import bowl_solution, flat_solution

L = 100.0
square = st.integers(1, 6).flatmap(
    lambda n: st.lists(st.floats(-3, 3), min_size=n * n, max_size=n * n).map(
        lambda v: np.array(v).reshape(n, n)))


def poly(c, lam):
    return np.polynomial.polynomial.polyval(lam, c)


# -- overlap matrix -----------------------------------------------------------

def test_overlap_at_walls():
    sol = bowl_solution(6, TAU[6])
    np.testing.assert_array_equal(overlap_matrix(sol, 0.0).B, np.zeros((6, 6)))
    np.testing.assert_allclose(overlap_matrix(sol, L).B, np.eye(6), atol=1e-10)
    with pytest.raises(DomainError):
        overlap_matrix(sol, -0.5)


def test_overlap_against_adaptive_quadrature():
    sol = flat_solution(2)
    B = overlap_matrix(sol, L / 2).B
    assert B[0, 0] == pytest.approx(0.5, abs=1e-12)
    assert B[1, 1] == pytest.approx(0.5, abs=1e-12)
    b12 = quad(lambda y: eval_wavefunction(sol, 1, y) * eval_wavefunction(sol, 2, y), 0, L / 2)[0]
    assert B[0, 1] == pytest.approx(b12, abs=1e-12)
    assert B[0, 1] == B[1, 0]


def test_overlap_bowl_against_quadrature():
    sol = bowl_solution(4, TAU[4])
    x = 43.7
    B = overlap_matrix(sol, x).B
    for i in range(4):
        for j in range(4):
            ref = quad(lambda y: eval_wavefunction(sol, i + 1, y) * eval_wavefunction(sol, j + 1, y),
                       0, x, limit=200, epsabs=1e-13)[0]
            assert B[i, j] == pytest.approx(ref, abs=1e-10)


def test_overlap_monotone_and_bounded():
    sol = bowl_solution(8, TAU[8])
    xs = np.linspace(0, L, 41)
    Bs = [overlap_matrix(sol, x).B for x in xs]
    for B in Bs:
        ev = np.linalg.eigvalsh(B)
        assert ev.min() > -1e-10 and ev.max() < 1 + 1e-10
    for a, b in zip(Bs, Bs[1:]):
        assert np.linalg.eigvalsh(b - a).min() > -1e-10


# -- characteristic polynomials and minors -----------------------------------

def test_charpoly_examples():
    np.testing.assert_allclose(charpoly_coeffs(np.diag([1.0, 2.0])), [2.0, -3.0, 1.0])
    np.testing.assert_allclose(charpoly_coeffs([[0.0, 1.0], [1.0, 0.0]]), [-1.0, 0.0, 1.0], atol=1e-15)
    np.testing.assert_array_equal(charpoly_coeffs(np.zeros((0, 0))), [1.0])
    with pytest.raises(ValueError):
        charpoly_coeffs(np.ones((2, 3)))


def test_charpoly_random_against_det(rng):
    M = rng.normal(size=(4, 4))
    c = charpoly_coeffs(M)
    for lam in (0.3, 1.7):
        assert poly(c, lam) == pytest.approx(np.linalg.det(M - lam * np.eye(4)), rel=1e-10)


@settings(max_examples=80, deadline=None)
@given(square)
def test_charpoly_properties(M):
    n = len(M)
    c = charpoly_coeffs(M)
    assert len(c) == n + 1
    assert c[n] == (-1.0) ** n
    scale = max(1.0, np.abs(M).max()) ** n
    assert c[0] == pytest.approx(np.linalg.det(M), abs=1e-9 * scale)
    lams = np.arange(n + 1, dtype=float)
    vals = [np.linalg.det(M - lam * np.eye(n)) for lam in lams]
    np.testing.assert_allclose(poly(c, lams), vals, atol=1e-8 * scale * (n + 1) ** n)


def test_minor_examples():
    M = np.array([[1.0, 2, 3], [4, 5, 6], [7, 8, 10]])
    np.testing.assert_array_equal(minor(M, 1, 1), [[5, 6], [8, 10]])
    np.testing.assert_array_equal(minor(M, 1, 2), [[2, 3], [8, 10]])
    assert minor(np.eye(2), 1, 1).tolist() == [[1.0]]
    with pytest.raises(IndexError):
        minor(M, 0, 1)
    with pytest.raises(IndexError):
        minor(M, 1, 4)


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 6).flatmap(lambda n: st.tuples(
    st.just(n), st.integers(1, n), st.integers(1, n),
    st.lists(st.floats(-2, 2), min_size=n * n, max_size=n * n))))
def test_minor_lambda_coeffs_match_determinants(args):
    n, i, j, vals = args
    M = np.array(vals).reshape(n, n)
    c = minor_lambda_coeffs(M, i, j)
    for lam in (-0.7, 0.4, 1.3):
        direct = np.linalg.det(minor(M - lam * np.eye(n), i, j))
        assert poly(c, lam) == pytest.approx(direct, abs=1e-8 * max(1.0, abs(direct)) * 4 ** n)


def test_adjugate_coeffs_match_eigen_route(rng):
    A = rng.normal(size=(5, 5))
    B = A @ A.T / 10
    mu, Q = np.linalg.eigh(B)
    for lam in (0.1, 0.9):
        adj = Q @ np.diag([np.prod(np.delete(mu, n) - lam) for n in range(5)]) @ Q.T
        coeffs = adjugate_coeffs(B)
        got = sum(coeffs[m] * lam**m for m in range(5))
        np.testing.assert_allclose(got, adj, atol=1e-12)


# -- alpha --------------------------------------------------------------------

@pytest.mark.parametrize("N", [4, 10])
def test_stored_coefficients_reproduced(N):
    alpha = compute_alpha(bowl_solution(N, TAU[N])).alpha
    np.testing.assert_allclose(alpha, full_alpha(N), atol=1e-4)


def test_flat_box_n10():
    alpha = compute_alpha(flat_solution(10)).alpha
    assert np.all((alpha > 0.00377) & (alpha < 0.00382))


def test_mirror_symmetry():
    for spec in (power_bowl_spec(3.0), PotentialSpec(L, (Harmonic(3e-4),))):
        alpha = compute_alpha(solve_spec(spec, 7)).alpha
        np.testing.assert_allclose(alpha, alpha[::-1], rtol=1e-6)


def test_unimodal_positive_for_bowls():
    for tau in (2.5, 3.5, 4.5):
        alpha = compute_alpha(solve_spec(power_bowl_spec(tau), 9)).alpha
        assert np.all(alpha > 0)
        d = np.diff(alpha[:4])
        assert np.all(d > 0)


@pytest.mark.parametrize("s", [0.5, 2.0])
def test_scaling_covariance(s):
    N = 6
    base = PotentialSpec(L, (PowerBowl(100.0, 3.2), Harmonic(1e-4)))
    scaled = PotentialSpec(s * L, (PowerBowl(100.0 / s**2, 3.2), Harmonic(1e-4 / s**4)))
    a = compute_alpha(solve_spec(base, N)).alpha
    b = compute_alpha(solve_spec(scaled, N)).alpha
    np.testing.assert_allclose(b, a / s**3, rtol=1e-6)


def test_methods_agree():
    sol = bowl_solution(10, TAU[10])
    a = compute_alpha(sol, method="eigen").alpha
    b = compute_alpha(sol, method="faddeev-leverrier").alpha
    np.testing.assert_allclose(a, b, rtol=1e-9)
    with pytest.raises(ValueError):
        compute_alpha(sol, method="magic")


def test_convergence_protocol():
    spec = power_bowl_spec(TAU[6])
    res = geometric_coefficients(spec, 6)
    assert res.provenance["convergence"]["max_rel_change"] < 1e-6
    with pytest.raises(ConvergenceError) as err:
        geometric_coefficients(spec, 6, SolverSettings(n_basis=14), rtol=1e-14)
    assert err.value.changes > 1e-14


def test_single_particle_rejected():
    with pytest.raises(ValueError):
        compute_alpha(flat_solution(1))


def test_indexing_and_serialisation(tmp_path):
    res = compute_alpha(bowl_solution(4, TAU[4]))
    assert res[1] == res.alpha[0]
    with pytest.raises(IndexError):
        res[4]
    assert res.to_dict()["N"] == 4
    path = tmp_path / "a.csv"
    write_alpha_csv(res, path, header=["x"])
    lines = [l for l in path.read_text().splitlines() if not l.startswith("#")]
    assert lines[0] == "k,alpha" and len(lines) == 4


# -- brute-force oracle -------------------------------------------------------

def test_oracle_two_flat_particles():
    sol = flat_solution(2)
    assert brute_force_alpha(sol, 1) == pytest.approx(compute_alpha(sol)[1], rel=1e-5)


def test_oracle_three_particles_symmetric_bowl():
    sol = solve_spec(power_bowl_spec(3.0), 3)
    a1, a2 = brute_force_alpha(sol, 1), brute_force_alpha(sol, 2)
    assert a1 == pytest.approx(a2, rel=1e-4)
    np.testing.assert_allclose([a1, a2], compute_alpha(sol).alpha, rtol=1e-4)


@pytest.mark.slow
def test_oracle_four_particles():
    sol = bowl_solution(4, TAU[4])
    bf = [brute_force_alpha(sol, k) for k in (1, 2, 3)]
    np.testing.assert_allclose(bf, full_alpha(4), atol=1e-3)
    np.testing.assert_allclose(bf, compute_alpha(sol).alpha, rtol=1e-4)


def test_oracle_limits():
    with pytest.raises(ValueError):
        brute_force_alpha(flat_solution(5), 1)
    with pytest.raises(IndexError):
        brute_force_alpha(flat_solution(3), 3)
