"""Functionals with gradients, the two Poisson brackets and a finite-difference oracle.

Gradients on the wave-function space are taken with respect to the real inner
product ``<f, g> = Re int conj(f) g dx``; variational derivatives on the fluid
side are with respect to the plain ``L^2`` pairing.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .grid import check_finite
from .hamiltonians import (
    NonlinearityModel,
    hamiltonian_cf,
    hamiltonian_cf_derivatives,
    hamiltonian_nls,
    hamiltonian_nls_gradient,
)
from .madelung import madelung, pullback_gradient
from .states import FluidState, WaveFunction

FD_EPS = 1e-5


@dataclass(frozen=True)
class PsiFunctional:
    evaluate: Callable[[WaveFunction], float]
    gradient: Callable[[WaveFunction], np.ndarray]
    name: str = "F"

    def __call__(self, w: WaveFunction) -> float:
        return self.evaluate(w)

    def __add__(self, other: "PsiFunctional") -> "PsiFunctional":
        return PsiFunctional(
            lambda w: self.evaluate(w) + other.evaluate(w),
            lambda w: self.gradient(w) + other.gradient(w),
            f"({self.name} + {other.name})",
        )

    def scaled(self, c: float) -> "PsiFunctional":
        return PsiFunctional(lambda w: c * self.evaluate(w), lambda w: c * self.gradient(w), f"{c:g}*{self.name}")

    def __mul__(self, other: "PsiFunctional") -> "PsiFunctional":
        """Pointwise product of values; gradient by the product rule."""
        return PsiFunctional(
            lambda w: self.evaluate(w) * other.evaluate(w),
            lambda w: self.evaluate(w) * other.gradient(w) + other.evaluate(w) * self.gradient(w),
            f"({self.name} * {other.name})",
        )


@dataclass(frozen=True)
class FluidFunctional:
    evaluate: Callable[[FluidState], float]
    d_mu: Callable[[FluidState], np.ndarray]
    d_rho: Callable[[FluidState], np.ndarray]
    name: str = "F"

    def __call__(self, s: FluidState) -> float:
        return self.evaluate(s)

    def __add__(self, other: "FluidFunctional") -> "FluidFunctional":
        return FluidFunctional(
            lambda s: self.evaluate(s) + other.evaluate(s),
            lambda s: self.d_mu(s) + other.d_mu(s),
            lambda s: self.d_rho(s) + other.d_rho(s),
            f"({self.name} + {other.name})",
        )

    def scaled(self, c: float) -> "FluidFunctional":
        return FluidFunctional(
            lambda s: c * self.evaluate(s), lambda s: c * self.d_mu(s), lambda s: c * self.d_rho(s), f"{c:g}*{self.name}"
        )

    def pullback(self) -> PsiFunctional:
        """``F o madelung`` as a functional of the wave function."""

        def grad(w):
            s = madelung(w)
            return pullback_gradient(w, self.d_mu(s), self.d_rho(s))

        return PsiFunctional(lambda w: self.evaluate(madelung(w)), grad, f"{self.name} o m")


# -- brackets --------------------------------------------------------------


def pb_psi(F: PsiFunctional, G: PsiFunctional, w: WaveFunction) -> float:
    """``{F, G}(psi) = <grad F, -(i/2) grad G>``."""
    gF, gG = F.gradient(w), G.gradient(w)
    check_finite(gF, gG)
    return w.grid.inner(gF, -0.5j * gG)


def pb_fluid(F: FluidFunctional, G: FluidFunctional, s: FluidState) -> float:
    """Lie-Poisson (compressible fluid) bracket on ``(mu, rho)``."""
    grid = s.grid
    Fm, Fr, Gm, Gr = F.d_mu(s), F.d_rho(s), G.d_mu(s), G.d_rho(s)
    check_finite(Fm, Fr, Gm, Gr)
    vector_part = grid.dot(s.mu, grid.advect(Gm, Fm) - grid.advect(Fm, Gm))
    scalar_part = s.rho * (grid.advect(Gm, Fr) - grid.advect(Fm, Gr))
    return float(grid.integrate(vector_part + scalar_part))


def hamiltonian_vector_field_psi(F: PsiFunctional, w: WaveFunction) -> np.ndarray:
    return -0.5j * F.gradient(w)


def hamiltonian_vector_field_fluid(H: FluidFunctional, s: FluidState) -> tuple[np.ndarray, np.ndarray]:
    """Vector field ``X_H`` with ``dG(X_H) = {G, H}`` for every ``G``.

    Obtained by integrating the bracket by parts in ``dG``:
    ``X^rho = -div(rho Hm)``,
    ``X^mu_j = -sum_i d_i(mu_j Hm_i) - sum_i mu_i d_j Hm_i - rho d_j Hr``.
    """
    grid, mu, rho = s.grid, s.mu, s.rho
    Hm, Hr = H.d_mu(s), H.d_rho(s)
    x_rho = -grid.divergence(rho * Hm)
    J = grid.jacobian(Hm)  # J[i, j] = d_j Hm_i
    x_mu = np.stack(
        [
            -grid.divergence(mu[j] * Hm) - np.sum(mu * J[:, j], axis=0) - rho * grid.derivative(Hr, j)
            for j in range(grid.dim)
        ]
    )
    return x_mu, x_rho


# -- named functionals -----------------------------------------------------


def mass_functional() -> PsiFunctional:
    return PsiFunctional(lambda w: w.mass, lambda w: 2.0 * w.psi, "mass")


def nls_energy(model: NonlinearityModel) -> PsiFunctional:
    return PsiFunctional(
        lambda w: hamiltonian_nls(w, model), lambda w: hamiltonian_nls_gradient(w, model), "H_NLS"
    )


def fluid_energy(model: NonlinearityModel) -> FluidFunctional:
    return FluidFunctional(
        lambda s: hamiltonian_cf(s, model),
        lambda s: hamiltonian_cf_derivatives(s, model)[0],
        lambda s: hamiltonian_cf_derivatives(s, model)[1],
        "H_CF",
    )


def fluid_mass() -> FluidFunctional:
    return FluidFunctional(lambda s: s.mass, lambda s: np.zeros_like(s.mu), lambda s: np.ones_like(s.rho), "mass")


def quadratic_fluid_functional(grid, coeffs: dict, name: str = "P") -> FluidFunctional:
    """``int a rho + b rho^2/2 + c.mu + d rho (e.mu) + q |mu|^2/2 dx``.

    ``coeffs`` maps ``a, b, d, q`` to scalar fields and ``c, e`` to vector
    fields; missing entries are zero.
    """
    zs, zv = np.zeros(grid.shape), np.zeros((grid.dim,) + grid.shape)
    a, b, d, q = (np.asarray(coeffs.get(k, zs)) for k in "abdq")
    c, e = (np.asarray(coeffs.get(k, zv)) for k in "ce")

    def evaluate(s):
        mu, rho = s.mu, s.rho
        dens = a * rho + 0.5 * b * rho**2 + grid.dot(c, mu) + d * rho * grid.dot(e, mu) + 0.5 * q * grid.dot(mu, mu)
        return float(grid.integrate(dens))

    return FluidFunctional(
        evaluate,
        lambda s: c + d * s.rho * e + q * s.mu,
        lambda s: a + b * s.rho + d * grid.dot(e, s.mu),
        name,
    )


# -- finite-difference oracle ----------------------------------------------


def _perturb(state, direction, eps):
    if isinstance(state, WaveFunction):
        return WaveFunction(state.grid, state.psi + eps * direction)
    dmu, drho = direction
    return FluidState(state.grid, state.mu + eps * dmu, state.rho + eps * drho)


def directional_derivative(evaluate, state, direction, eps: float = FD_EPS) -> float:
    """Central difference ``(F(x + eps d) - F(x - eps d)) / (2 eps)``; error ``O(eps^2)``."""
    return (evaluate(_perturb(state, direction, eps)) - evaluate(_perturb(state, direction, -eps))) / (2.0 * eps)


def fd_variational_derivative(
    evaluate: Callable,
    state,
    directions: Sequence | None = None,
    eps: float = FD_EPS,
):
    """Finite-difference gradient of an evaluate-only functional.

    With ``directions=None`` the full nodal gradient is assembled by
    perturbing one node at a time (real and imaginary parts separately for
    wave functions): a complex field for a :class:`WaveFunction`, a
    ``(d_mu, d_rho)`` pair for a :class:`FluidState`. Otherwise the
    directional derivatives along the given directions are returned as an
    array. Accuracy is ``O(eps^2)``.
    """
    if directions is not None:
        return np.array([directional_derivative(evaluate, state, d, eps) for d in directions])

    grid = state.grid
    dV = grid.cell_volume
    if isinstance(state, WaveFunction):
        out = np.zeros(grid.shape, dtype=complex)
        for j in np.ndindex(grid.shape):
            e = np.zeros(grid.shape, dtype=complex)
            e[j] = 1.0
            re = directional_derivative(evaluate, state, e, eps)
            im = directional_derivative(evaluate, state, 1j * e, eps)
            out[j] = (re + 1j * im) / dV
        return out

    d_mu = np.zeros((grid.dim,) + grid.shape)
    d_rho = np.zeros(grid.shape)
    zs, zv = np.zeros(grid.shape), np.zeros((grid.dim,) + grid.shape)
    for j in np.ndindex(grid.shape):
        e = zs.copy()
        e[j] = 1.0
        d_rho[j] = directional_derivative(evaluate, state, (zv, e), eps) / dV
        for a in range(grid.dim):
            ev = zv.copy()
            ev[(a,) + j] = 1.0
            d_mu[(a,) + j] = directional_derivative(evaluate, state, (ev, zs), eps) / dV
    return d_mu, d_rho
