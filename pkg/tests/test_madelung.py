import numpy as np
import pytest

from madelung_lab.exceptions import VacuumError, WindingError
from madelung_lab.grid import Grid
from madelung_lab.hamiltonians import MODELS, cubic, get_model, gross_pitaevskii
from madelung_lab.madelung import (
    intertwine_check,
    madelung,
    pullback_gradient,
    pushforward,
    winding_numbers,
)
from madelung_lab.states import PolarDecomposition, WaveFunction, from_polar
from madelung_lab.verification import random_wavefunction


def test_constant_and_plane_wave(g1):
    (x,) = g1.coords
    s = madelung(WaveFunction(g1, np.ones(g1.shape)))
    assert np.all(s.mu == 0) and np.all(s.rho == 1)
    s = madelung(WaveFunction(g1, np.exp(1j * x)))
    assert np.max(np.abs(s.mu - 1)) < 1e-13 and np.max(np.abs(s.rho - 1)) < 1e-15


def test_polar_image(g1):
    (x,) = g1.coords
    rho = 1 + 0.5 * np.cos(x)
    s = madelung(from_polar(PolarDecomposition(g1, rho, np.sin(x))))
    assert np.max(np.abs(s.mu[0] - rho * np.cos(x))) <= 1e-10
    assert np.max(np.abs(s.rho - rho)) <= 1e-10


def test_vacuum_rejected(g1):
    (x,) = g1.coords
    with pytest.raises(VacuumError):
        madelung(WaveFunction(g1, np.cos(x).astype(complex)))


def test_scaling(g2, rng):
    w = random_wavefunction(g2, rng)
    s = madelung(w)
    s2 = madelung(WaveFunction(g2, 2.0 * np.exp(0.7j) * w.psi))
    assert np.allclose(s2.mu, 4 * s.mu, atol=1e-13) and np.allclose(s2.rho, 4 * s.rho)


def test_pushforward_examples(g1):
    one = WaveFunction(g1, np.ones(g1.shape))
    dmu, drho = pushforward(one, 1j * one.psi)
    assert np.max(np.abs(dmu)) == 0 and np.max(np.abs(drho)) == 0
    dmu, drho = pushforward(one, one.psi)
    assert np.max(np.abs(dmu)) == 0 and np.allclose(drho, 2.0)


def test_pushforward_is_linear_and_matches_difference_quotient(g2, rng):
    w = random_wavefunction(g2, rng)
    phi = g2.random_field(rng, complex_valued=True, max_mode=2)
    eps = 1e-5
    plus, minus = madelung(WaveFunction(g2, w.psi + eps * phi)), madelung(WaveFunction(g2, w.psi - eps * phi))
    dmu, drho = pushforward(w, phi)
    assert np.max(np.abs((plus.mu - minus.mu) / (2 * eps) - dmu)) < 1e-9
    assert np.max(np.abs((plus.rho - minus.rho) / (2 * eps) - drho)) < 1e-9
    dmu3, _ = pushforward(w, 3 * phi)
    assert np.allclose(dmu3, 3 * dmu, atol=1e-14)


@pytest.mark.parametrize("dim", [1, 2])
def test_pullback_is_adjoint(dim, rng):
    g = Grid.uniform(32 if dim == 1 else 16, dim=dim)
    w = random_wavefunction(g, rng)
    phi = g.random_field(rng, complex_valued=True)
    a = g.random_field(rng, components=dim)
    b = g.random_field(rng)
    dmu, drho = pushforward(w, phi)
    lhs = g.integrate(g.dot(a, dmu) + b * drho)
    rhs = g.inner(pullback_gradient(w, a, b), phi)
    assert abs(lhs - rhs) < 1e-12


def test_intertwine_equilibrium(g1):
    res = intertwine_check(WaveFunction(g1, np.ones(g1.shape)), gross_pitaevskii())
    assert max(res.values()) == 0.0


def test_intertwine_1d_example(g1):
    (x,) = g1.coords
    w = from_polar(PolarDecomposition(g1, 1 + 0.2 * np.cos(x), 0.1 * np.sin(x)))
    assert max(intertwine_check(w, gross_pitaevskii()).values()) <= 1e-9


def test_intertwine_2d_example(g2):
    x, y = g2.coords
    w = from_polar(PolarDecomposition(g2, 1 + 0.2 * np.cos(x) * np.cos(y), 0.1 * np.sin(x + y)))
    assert max(intertwine_check(w, cubic()).values()) <= 1e-8


@pytest.mark.parametrize("name", sorted(MODELS))
def test_intertwine_random(name, g1, rng):
    res = intertwine_check(random_wavefunction(g1, rng), get_model(name))
    assert res["mu_max"] <= 1e-8 and res["rho_max"] <= 1e-8


def test_winding_numbers(g1, g2):
    (x,) = g1.coords
    assert winding_numbers(WaveFunction(g1, np.ones(g1.shape))) == (0,)
    assert winding_numbers(WaveFunction(g1, np.exp(1j * x))) == (1,)
    assert winding_numbers(WaveFunction(g1, np.exp(1j * np.sin(x)))) == (0,)
    X, Y = g2.coords
    assert winding_numbers(WaveFunction(g2, np.exp(1j * (2 * X - Y)))) == (2, -1)


def test_winding_unresolved(g1):
    (x,) = g1.coords
    # a phase ramp that does not close up is not an integer circulation
    with pytest.raises(WindingError):
        winding_numbers(WaveFunction(g1, np.exp(0.5j * x)))
