"""Nonlinearities, the two Hamiltonians and the NLS / QHD right-hand sides."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .grid import Grid, check_finite
from .states import RHO_MIN, FluidState, WaveFunction, require_non_vacuum


@dataclass(frozen=True)
class NonlinearityModel:
    """Local nonlinearity ``f`` with antiderivative ``U`` (``U' = f``, ``U(0)`` pinned per model)."""

    name: str
    f: Callable[[np.ndarray], np.ndarray]
    U: Callable[[np.ndarray], np.ndarray]
    params: dict = field(default_factory=dict)


def linear() -> NonlinearityModel:
    return NonlinearityModel("linear", lambda r: np.zeros_like(r), lambda r: np.zeros_like(r))


def cubic(g: float = 1.0) -> NonlinearityModel:
    """Defocusing cubic NLS: ``f(r) = g r``, ``U(r) = g r^2 / 2``."""
    return NonlinearityModel("cubic", lambda r: g * r, lambda r: 0.5 * g * r**2, {"g": g})


def gross_pitaevskii(g: float = 1.0, rho0: float = 1.0) -> NonlinearityModel:
    """``f(r) = g (r - rho0)``, ``U(r) = g (r^2 / 2 - rho0 r)``; the default is ``f(r) = r - 1``."""
    return NonlinearityModel(
        "gross_pitaevskii",
        lambda r: g * (r - rho0),
        lambda r: g * (0.5 * r**2 - rho0 * r),
        {"g": g, "rho0": rho0},
    )


MODELS = {"linear": linear, "cubic": cubic, "gross_pitaevskii": gross_pitaevskii}


def get_model(name: str, **params) -> NonlinearityModel:
    try:
        factory = MODELS[name]
    except KeyError:
        raise ValueError(f"unknown nonlinearity {name!r}; choose from {sorted(MODELS)}") from None
    return factory(**params)


# -- wave-function side ----------------------------------------------------


def nls_rhs(w: WaveFunction, model: NonlinearityModel) -> np.ndarray:
    psi = w.psi
    out = 0.5j * (w.grid.laplacian(psi) - 2.0 * model.f(np.abs(psi) ** 2) * psi)
    check_finite(out)
    return out


def hamiltonian_nls(w: WaveFunction, model: NonlinearityModel) -> float:
    grid = w.grid
    grad = grid.gradient(w.psi)
    density = 0.5 * np.sum(np.abs(grad) ** 2, axis=0) + model.U(np.abs(w.psi) ** 2)
    return float(grid.integrate(density))


def hamiltonian_nls_gradient(w: WaveFunction, model: NonlinearityModel) -> np.ndarray:
    """Gradient of ``H_NLS`` for ``Re int conj(f) g dx``: ``-lap psi + 2 f(|psi|^2) psi``."""
    psi = w.psi
    return -w.grid.laplacian(psi) + 2.0 * model.f(np.abs(psi) ** 2) * psi


# -- fluid side ------------------------------------------------------------


def quantum_pressure(grid: Grid, rho: np.ndarray, rho_min: float = RHO_MIN) -> np.ndarray:
    """``lap(sqrt rho) / (2 sqrt rho)`` with a spectral Laplacian."""
    require_non_vacuum(rho, rho_min)
    s = np.sqrt(rho)
    return grid.laplacian(s) / (2.0 * s)


def _enthalpy(grid: Grid, rho: np.ndarray, model: NonlinearityModel) -> np.ndarray:
    return model.f(rho) - quantum_pressure(grid, rho)


def qhd_rhs(s: FluidState, model: NonlinearityModel) -> tuple[np.ndarray, np.ndarray]:
    """Momentum-form QHD: returns ``(d mu/dt, d rho/dt)``."""
    grid, mu, rho = s.grid, s.mu, s.rho
    require_non_vacuum(rho)
    drho = -grid.divergence(mu)
    # (div(mu x mu / rho))_j = sum_i d_i (mu_i mu_j / rho)
    flux = np.stack([grid.divergence(mu * mu[j] / rho) for j in range(grid.dim)])
    dmu = -flux - rho * grid.gradient(_enthalpy(grid, rho, model))
    check_finite(dmu, drho)
    return dmu, drho


def qhd_velocity_rhs(grid: Grid, v: np.ndarray, rho: np.ndarray, model: NonlinearityModel):
    """Velocity-form QHD: returns ``(d v/dt, d rho/dt)``."""
    require_non_vacuum(rho)
    drho = -grid.divergence(rho * v)
    dv = -grid.advect(v, v) - grid.gradient(_enthalpy(grid, rho, model))
    check_finite(dv, drho)
    return dv, drho


def hamiltonian_cf(s: FluidState, model: NonlinearityModel) -> float:
    grid, mu, rho = s.grid, s.mu, s.rho
    require_non_vacuum(rho)
    grad_rho = grid.gradient(rho)
    density = (
        0.5 * np.sum(mu**2, axis=0) / rho
        + 0.125 * np.sum(grad_rho**2, axis=0) / rho
        + model.U(rho)
    )
    return float(grid.integrate(density))


def hamiltonian_cf_derivatives(s: FluidState, model: NonlinearityModel) -> tuple[np.ndarray, np.ndarray]:
    """Variational derivatives of ``H_CF``: ``mu / rho`` and ``-|v|^2/2 + f(rho) - P(rho)``."""
    v = s.velocity
    return v, -0.5 * np.sum(v**2, axis=0) + _enthalpy(s.grid, s.rho, model)
