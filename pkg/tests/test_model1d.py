import numpy as np
import pytest
from scipy.linalg import eigh_tridiagonal

from stabcs.errors import QuadratureUnderResolved
from stabcs.model1d import (CALIBRATED_X0, BasisSpec, PotentialParams, build_complex_hamiltonian,
                            build_real_hamiltonian, calibrate_x0, cosine_moments, eval_potential,
                            gram_matrix, isolated_eigenvalues, kinetic_diagonal, potential_matrix)
from stabcs.eig import eigvalsh, eigvals_complex


def test_potential_values():
    p = PotentialParams(v1=0.0)
    assert eval_potential(0.0, p) == pytest.approx(-7.1, abs=1e-15)
    q = PotentialParams()
    assert eval_potential(3.2, q) == eval_potential(-3.2, q)
    assert abs(eval_potential(50.0, q)) < 1e-20


def test_parameter_validation():
    with pytest.raises(ValueError):
        PotentialParams(sigma0=0.0)
    with pytest.raises(ValueError):
        PotentialParams(v0=-1.0)
    with pytest.raises(ValueError):
        BasisSpec(N=1)
    with pytest.raises(ValueError):
        BasisSpec(N=10, quadrature_points=20)
    with pytest.raises(ValueError):
        BasisSpec(parity="both")
    assert BasisSpec(N=10).quadrature_points == 40


@pytest.mark.parametrize("eta", [-1.0, 0.0, 0.37, 2.0])
def test_free_particle_box_levels(eta):
    b = BasisSpec(L0=50.0, N=40)
    h = build_real_hamiltonian(eta, PotentialParams.free(), b).matrix
    L = 50.0 * np.exp(eta)
    n = np.arange(1, 41)
    exact = n**2 * np.pi**2 / (8 * L**2)
    assert np.max(np.abs(eigvalsh(h) - exact)) < 1e-12


def test_free_particle_scaling_law():
    b = BasisSpec(L0=30.0, N=50, mu=1.7)
    e0 = eigvalsh(build_real_hamiltonian(0.0, PotentialParams.free(), b).matrix)
    for eta in (-0.8, 0.45):
        e = eigvalsh(build_real_hamiltonian(eta, PotentialParams.free(), b).matrix)
        assert np.max(np.abs(e - e0 * np.exp(-2 * eta))) < 1e-12


def test_hamiltonian_is_symmetric(system_params):
    h = build_real_hamiltonian(0.3, system_params, BasisSpec(N=120)).matrix
    assert np.array_equal(h, h.T)


def _fd_lowest(p, L, n_points):
    x, dx = np.linspace(-L, L, n_points, retstep=True)
    inner = x[1:-1]
    diag = 1.0 / dx**2 + eval_potential(inner, p)
    off = np.full(len(inner) - 1, -0.5 / dx**2)
    return eigh_tridiagonal(diag, off, select="i", select_range=(0, 0))[0][0]


def test_lowest_level_against_finite_differences(system_params):
    # 10^4-point Dirichlet grid; the O(dx^2) error is removed by one
    # Richardson step with a 2x coarser grid.
    fine = _fd_lowest(system_params, 50.0, 10001)
    coarse = _fd_lowest(system_params, 50.0, 5001)
    oracle = (4 * fine - coarse) / 3
    e = eigvalsh(build_real_hamiltonian(0.0, system_params, BasisSpec()).matrix)[0]
    assert abs(e - oracle) < 1e-6
    assert abs(e - fine) < 1e-4


def test_parity_blocks_partition_the_spectrum(system_params):
    b = BasisSpec(L0=30.0, N=80)
    full = eigvalsh(build_real_hamiltonian(0.1, system_params, b).matrix)
    parts = np.sort(np.concatenate([
        eigvalsh(build_real_hamiltonian(0.1, system_params, b.with_parity(par)).matrix)
        for par in ("even", "odd")]))
    assert np.max(np.abs(full - parts)) < 1e-11


def test_gram_matrix_is_identity():
    b = BasisSpec(L0=10.0, N=40)
    for eta in (0.0, 0.7):
        assert np.max(np.abs(gram_matrix(b, eta) - np.eye(40))) < 1e-12


def test_complex_hamiltonian_reduces_to_real(system_params):
    b = BasisSpec(N=80)
    hc = build_complex_hamiltonian(0.0, 0.0, system_params, b).matrix
    hr = build_real_hamiltonian(0.0, system_params, b).matrix
    assert np.max(np.abs(hc - hr)) < 1e-13
    with pytest.raises(ValueError):
        build_complex_hamiltonian(np.pi / 4, 0.0, system_params, b)


def test_free_complex_spectrum_lies_on_rotated_ray():
    theta = 0.3
    h = build_complex_hamiltonian(theta, 0.0, PotentialParams.free(), BasisSpec(N=30)).matrix
    e = eigvals_complex(h)
    assert np.allclose(np.angle(e), -2 * theta, atol=1e-12)
    assert len(isolated_eigenvalues(e, theta)) == 0


def test_kinetic_diagonal_complex_eta():
    b = BasisSpec(N=5)
    t = kinetic_diagonal(b, 0.2j)
    assert np.allclose(t, kinetic_diagonal(b) * np.exp(-0.4j))


def test_quadrature_failure_is_reported():
    # a very narrow barrier cannot be resolved with a single refinement
    p = PotentialParams(sigma1=1e-3, x0=10.0)
    with pytest.raises(QuadratureUnderResolved):
        cosine_moments(p, BasisSpec(N=10), 1.0, max_refinements=1)


def test_potential_matrix_symmetric_under_complex_scaling(system_params):
    v = potential_matrix(system_params, BasisSpec(N=60), np.exp(0.2j))
    assert np.max(np.abs(v - v.T)) == 0


def test_system_spectrum_has_isolated_resonance(system_params, direct_spectrum_0025):
    # at theta = 0.025 the resonance sits just above the rotated string
    near = direct_spectrum_0025[np.abs(direct_spectrum_0025 - 1.5388) < 2e-3]
    assert len(near) == 1
    assert -1e-3 < near[0].imag < 0


@pytest.mark.slow
def test_calibration_reproduces_constant():
    assert calibrate_x0() == pytest.approx(CALIBRATED_X0, abs=1e-8)
