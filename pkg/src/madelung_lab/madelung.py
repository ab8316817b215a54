"""The map psi -> (mu, rho) = (Im conj(psi) grad psi, |psi|^2), its differential and adjoint."""
from __future__ import annotations

import numpy as np

from .exceptions import WindingError
from .grid import check_finite
from .hamiltonians import NonlinearityModel, nls_rhs, qhd_rhs
from .states import RHO_MIN, FluidState, WaveFunction, require_non_vacuum

WINDING_TOL = 1e-6


def momentum_density(w: WaveFunction) -> np.ndarray:
    return np.imag(np.conj(w.psi) * w.grid.gradient(w.psi))


def madelung(w: WaveFunction, rho_min: float = RHO_MIN) -> FluidState:
    """Fluid variables of a wave function.

    Raises :class:`~madelung_lab.exceptions.VacuumError` if ``|psi|^2`` drops
    below ``rho_min`` somewhere, since the fluid state needs a positive density.
    """
    rho = np.abs(w.psi) ** 2
    require_non_vacuum(rho, rho_min)
    return FluidState(w.grid, momentum_density(w), rho)


def pushforward(w: WaveFunction, phi: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Differential at ``psi`` applied to ``phi``: ``(Im(conj(psi) grad phi + conj(phi) grad psi), 2 Re(conj(psi) phi))``."""
    grid, psi = w.grid, w.psi
    phi = np.asarray(phi)
    check_finite(phi)
    dmu = np.imag(np.conj(psi) * grid.gradient(phi) + np.conj(phi) * grid.gradient(psi))
    drho = 2.0 * np.real(np.conj(psi) * phi)
    return dmu, drho


def pullback_gradient(w: WaveFunction, d_mu: np.ndarray, d_rho: np.ndarray) -> np.ndarray:
    """Adjoint of :func:`pushforward`: the gradient of ``F o madelung`` from ``dF/dmu``, ``dF/drho``.

    Returns ``2 d_rho psi - i d_mu . grad psi - i div(d_mu psi)``.
    """
    grid, psi = w.grid, w.psi
    return (
        2.0 * d_rho * psi
        - 1j * grid.dot(d_mu, grid.gradient(psi))
        - 1j * grid.divergence(d_mu * psi)
    )


def intertwine_check(w: WaveFunction, model: NonlinearityModel) -> dict:
    """Relative residuals between the pushed-forward NLS field and the QHD field at the image state."""
    require_non_vacuum(w.density)
    pushed = pushforward(w, nls_rhs(w, model))
    target = qhd_rhs(madelung(w), model)
    out = {}
    for name, a, b in zip(("mu", "rho"), pushed, target):
        diff = a - b
        for norm, op in (("max", lambda x: np.max(np.abs(x))), ("l2", lambda x: np.sqrt(np.sum(x**2)))):
            den = op(b)
            out[f"{name}_{norm}"] = float(op(diff) / den) if den > 1e-300 else float(op(diff))
    return out


def winding_numbers(w: WaveFunction, rho_min: float = RHO_MIN) -> tuple[int, ...]:
    """Phase circulation around each fundamental torus cycle, in units of 2 pi."""
    grid = w.grid
    rho = w.density
    require_non_vacuum(rho, rho_min)
    vel = momentum_density(w) / rho
    out = []
    for a in range(grid.dim):
        # circulation along every line parallel to axis ``a``
        circ = vel[a].sum(axis=a) * grid.spacing[a] / (2.0 * np.pi)
        rounded = np.rint(circ)
        if np.max(np.abs(circ - rounded)) > WINDING_TOL:
            raise WindingError(
                f"circulation along axis {a} is not an integer (off by "
                f"{np.max(np.abs(circ - rounded)):.2e}); grid too coarse"
            )
        if np.ptp(rounded) != 0:
            raise WindingError(f"inconsistent winding along axis {a}")
        out.append(int(rounded.flat[0]))
    return tuple(out)
