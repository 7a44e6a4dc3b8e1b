"""Rotation-invariant central-force example with closed-form indices."""

import numpy as np
import pytest

import vkstab as vk
from vkstab.so3 import grad_L6, symmetry_tangent, w_so3_fd


@pytest.fixture(scope="module")
def orbit():
    return vk.circular_orbit(1.0, 1.0, 1.0)


def test_circular_orbit_is_critical_point(orbit):
    assert np.max(np.abs(grad_L6(orbit))) < 1e-14
    assert np.isclose(np.linalg.norm(orbit.angular_momentum), 1.0)


def test_orbit_requires_strong_coupling():
    with pytest.raises(ValueError):
        vk.circular_orbit(1.0, 1.0, 0.4)


def test_hessian_exact_spectrum(orbit):
    _, eigs, n_neg, dim_ker = vk.hessian6(orbit)
    assert np.allclose(eigs, [-4.0, -1.0, -1.0, 0.0, 2.0, 2.0], atol=1e-9)
    assert n_neg == 3
    assert dim_ker == 1


def test_kernel_is_residual_rotation(orbit):
    mat, eigs, _, _ = vk.hessian6(orbit)
    t = symmetry_tangent(orbit)
    assert np.max(np.abs(mat @ t)) < 1e-12


def test_reduced_energy_closed_form(orbit):
    w_val, d2w = vk.w_so3(orbit.xi, 1.0, 1.0)
    # W = (omega/4 alpha)(1 + |xi|/sqrt(omega))^2 with |xi| = 1 here
    assert np.isclose(w_val, 1.0)
    eigs = np.sort(np.linalg.eigvalsh(d2w))
    assert np.allclose(eigs, [0.5, 1.0, 1.0], atol=1e-12)
    fd = w_so3_fd(orbit.xi, 1.0, 1.0)
    assert np.max(np.abs(d2w - fd)) < 1e-6


def test_restricted_slope_separates_from_full_index(orbit):
    _, d2w = vk.w_so3(orbit.xi, 1.0, 1.0)
    xi_hat = orbit.xi / np.linalg.norm(orbit.xi)
    tilde = float(xi_hat @ d2w @ xi_hat)
    assert np.isclose(tilde, 0.5)
    # restricted positive index 1 < full positive index 3 = Morse index
    _, _, n_neg, _ = vk.hessian6(orbit)
    assert 1 < 3 == n_neg


def test_integrator_reproduces_the_relative_equilibrium(orbit):
    times, qs, ps, energies, f_drift = vk.integrate_so3(orbit, 1e-2, 100.0)
    assert f_drift < 1e-12
    assert np.max(np.abs(energies - energies[0])) < 1e-12
    dists = [vk.orbit_distance(orbit, q, p) for q, p in zip(qs, ps)]
    assert max(dists) < 1e-10


def test_integrator_matches_exact_oscillator_when_decoupled():
    # with alpha = 0 the flow is a plain isotropic oscillator
    state = vk.SO3State(
        q=np.array([1.0, 0.0, 0.0]),
        p=np.array([0.0, 1.0, 0.0]),
        alpha=0.0,
        omega_pot=4.0,
        xi=np.zeros(3),
    )
    t_end = 0.7
    times, qs, ps, _, _ = vk.integrate_so3(state, 1e-3, t_end, sample_stride=10**9)
    sw = 2.0
    q_exact = state.q * np.cos(sw * t_end) + state.p / sw * np.sin(sw * t_end)
    p_exact = state.p * np.cos(sw * t_end) - sw * state.q * np.sin(sw * t_end)
    assert np.max(np.abs(qs[-1] - q_exact)) < 1e-12
    assert np.max(np.abs(ps[-1] - p_exact)) < 1e-12


def test_perturbed_orbit_stays_close(orbit):
    rng = np.random.default_rng(0)
    eps = 1e-3
    dq = rng.standard_normal(3)
    dp = rng.standard_normal(3)
    scale = eps / np.sqrt(np.sum(dq**2) + np.sum(dp**2))
    _, qs, ps, _, _ = vk.integrate_so3(
        orbit, 1e-2, 100.0, q0=orbit.q + scale * dq, p0=orbit.p + scale * dp
    )
    dists = [vk.orbit_distance(orbit, q, p) for q, p in zip(qs, ps)]
    assert max(dists) <= 10 * eps


def test_orbit_distance_invariant_under_residual_rotation(orbit):
    mu_hat = orbit.angular_momentum / np.linalg.norm(orbit.angular_momentum)
    ang = 0.9

    def rot(v):
        c, s = np.cos(ang), np.sin(ang)
        return c * v + s * np.cross(mu_hat, v) + (1 - c) * np.dot(mu_hat, v) * mu_hat

    assert vk.orbit_distance(orbit, rot(orbit.q), rot(orbit.p)) < 1e-12
