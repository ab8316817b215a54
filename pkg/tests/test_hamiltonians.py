import numpy as np
import pytest

from madelung_lab.brackets import fd_variational_derivative
from madelung_lab.exceptions import VacuumError
from madelung_lab.grid import Grid
from madelung_lab.hamiltonians import (
    MODELS,
    cubic,
    get_model,
    gross_pitaevskii,
    hamiltonian_cf,
    hamiltonian_cf_derivatives,
    hamiltonian_nls,
    hamiltonian_nls_gradient,
    linear,
    nls_rhs,
    qhd_rhs,
    qhd_velocity_rhs,
    quantum_pressure,
)
from madelung_lab.madelung import madelung
from madelung_lab.states import FluidState, WaveFunction
from madelung_lab.verification import random_wavefunction


@pytest.mark.parametrize("name", sorted(MODELS))
def test_antiderivative(name):
    m = get_model(name)
    r = np.linspace(0.1, 3.0, 50)
    h = 1e-6
    assert np.allclose((m.U(r + h) - m.U(r - h)) / (2 * h), m.f(r), atol=1e-8)
    assert m.U(np.zeros(1))[0] == 0.0


def test_unknown_model():
    with pytest.raises(ValueError, match="unknown nonlinearity"):
        get_model("quintic")


def test_model_parameters():
    m = get_model("gross_pitaevskii", g=2.0, rho0=0.5)
    assert m.f(np.array([0.5]))[0] == 0.0 and m.params == {"g": 2.0, "rho0": 0.5}


def test_nls_rhs_examples(g1):
    (x,) = g1.coords
    plane = np.exp(1j * x)
    assert np.max(np.abs(nls_rhs(WaveFunction(g1, plane), linear()) + 0.5j * plane)) < 1e-12
    assert np.max(np.abs(nls_rhs(WaveFunction(g1, np.ones(g1.shape)), gross_pitaevskii()))) == 0.0
    c = 0.3 - 0.4j
    rhs = nls_rhs(WaveFunction(g1, np.full(g1.shape, c)), cubic())
    assert np.max(np.abs(rhs + 1j * abs(c) ** 2 * c)) < 1e-15


def test_hamiltonian_nls_values(g1):
    (x,) = g1.coords
    assert abs(hamiltonian_nls(WaveFunction(g1, np.ones(g1.shape)), gross_pitaevskii()) + np.pi) < 1e-13
    assert abs(hamiltonian_nls(WaveFunction(g1, np.exp(1j * x)), linear()) - np.pi) < 1e-13
    for factory in MODELS.values():
        assert hamiltonian_nls(WaveFunction(g1, np.zeros(g1.shape)), factory()) == 0.0


def test_quantum_pressure_constant(g1):
    assert np.max(np.abs(quantum_pressure(g1, np.ones(g1.shape)))) == 0.0


def test_quantum_pressure_closed_form(g1):
    (x,) = g1.coords
    expected = (np.sin(x) ** 2 / 4 - np.cos(x) / 2) / 2
    assert np.max(np.abs(quantum_pressure(g1, np.exp(np.cos(x))) - expected)) < 1e-12


def test_quantum_pressure_dense_oracle(g1):
    dense = Grid.uniform(8 * g1.n[0])
    (xd,) = dense.coords
    oracle = quantum_pressure(dense, 1 + 0.1 * np.cos(xd))[::8]
    (x,) = g1.coords
    assert np.max(np.abs(quantum_pressure(g1, 1 + 0.1 * np.cos(x)) - oracle)) <= 1e-10


def test_quantum_pressure_vacuum(g1):
    (x,) = g1.coords
    with pytest.raises(VacuumError):
        quantum_pressure(g1, 1 + np.cos(x))


def test_qhd_equilibrium(g1):
    s = FluidState(g1, np.zeros((1,) + g1.shape), np.ones(g1.shape))
    dmu, drho = qhd_rhs(s, gross_pitaevskii())
    assert np.max(np.abs(dmu)) == 0.0 and np.max(np.abs(drho)) == 0.0


def test_qhd_velocity_examples(g2):
    one = np.ones(g2.shape)
    dv, drho = qhd_velocity_rhs(g2, np.zeros((2,) + g2.shape), one, gross_pitaevskii())
    assert np.max(np.abs(dv)) == 0.0 and np.max(np.abs(drho)) == 0.0
    c = np.stack([0.3 * one, -0.7 * one])
    dv, drho = qhd_velocity_rhs(g2, c, one, linear())
    assert np.max(np.abs(dv)) < 1e-15 and np.max(np.abs(drho)) < 1e-15


@pytest.mark.parametrize("dim", [1, 2])
@pytest.mark.parametrize("name", sorted(MODELS))
def test_velocity_form_matches_momentum_form(dim, name, rng):
    g = Grid.uniform(64 if dim == 1 else 32, dim=dim)
    m = get_model(name)
    v = g.random_field(rng, components=dim, max_mode=4)
    rho = 1 + 0.3 * g.random_field(rng, max_mode=4)
    dv, drho_v = qhd_velocity_rhs(g, v, rho, m)
    dmu, drho = qhd_rhs(FluidState(g, rho * v, rho), m)
    # d(rho v)/dt by the product rule
    assert np.max(np.abs(dmu - (drho_v * v + rho * dv))) <= 1e-10 * np.max(np.abs(dmu))
    assert np.max(np.abs(drho - drho_v)) <= 1e-12


def test_hamiltonian_cf_equilibrium(g1):
    s = FluidState(g1, np.zeros((1,) + g1.shape), np.ones(g1.shape))
    assert abs(hamiltonian_cf(s, gross_pitaevskii()) + np.pi) < 1e-13


def test_hamiltonian_cf_dense_oracle(g1):
    (x,) = g1.coords
    s = FluidState(g1, np.zeros((1,) + g1.shape), 1 + 0.5 * np.cos(x))
    dense = Grid.uniform(2048)
    (xd,) = dense.coords
    oracle = dense.integrate((0.5 * np.sin(xd)) ** 2 / (8 * (1 + 0.5 * np.cos(xd))))
    assert abs(hamiltonian_cf(s, linear()) - oracle) < 1e-12 * abs(oracle)


@pytest.mark.parametrize("name", sorted(MODELS))
def test_hamiltonians_agree_on_image(name, g2, rng):
    m = get_model(name)
    w = random_wavefunction(g2, rng)
    h = hamiltonian_nls(w, m)
    assert abs(h - hamiltonian_cf(madelung(w), m)) <= 1e-10 * abs(h)


@pytest.mark.parametrize("name", sorted(MODELS))
def test_energy_gradient_matches_fd(name, rng):
    g = Grid.uniform(16)
    m = get_model(name)
    w = random_wavefunction(g, rng, max_mode=2)
    fd = fd_variational_derivative(lambda u: hamiltonian_nls(u, m), w, eps=1e-5)
    exact = hamiltonian_nls_gradient(w, m)
    assert np.max(np.abs(fd - exact)) <= 1e-6 * max(1.0, np.max(np.abs(exact)))


@pytest.mark.parametrize("name", sorted(MODELS))
def test_cf_derivatives_match_fd(name, rng):
    # sqrt(rho) must be resolved for the discrete and continuum derivatives to agree
    g = Grid.uniform(32)
    m = get_model(name)
    s = madelung(random_wavefunction(g, rng, max_mode=2))
    d_mu, d_rho = fd_variational_derivative(lambda u: hamiltonian_cf(u, m), s, eps=1e-5)
    a_mu, a_rho = hamiltonian_cf_derivatives(s, m)
    assert np.max(np.abs(d_mu - a_mu)) <= 1e-6
    assert np.max(np.abs(d_rho - a_rho)) <= 1e-6
