"""Actions of diffeomorphisms and phase shifts on wave functions, and the momentum map.

Group composition follows ``(g1, a1)(g2, a2) = (g1 o g2, a2 + a1 o g2)``, which
makes :func:`group_act` a left action when the phase field is transported
together with the wave function::

    (g, a) . psi = sqrt(det D(g^-1)) * exp(-i a o g^-1) * psi o g^-1
"""
from __future__ import annotations

import numpy as np

from .brackets import FluidFunctional, PsiFunctional, pb_psi
from .exceptions import InversionError
from .grid import Grid, check_finite
from .madelung import momentum_density
from .states import AlgebraElement, FluidState, GroupElement, WaveFunction, jacobian_determinant

INVERSION_TOL = 1e-12
INVERSION_MAXITER = 500


# -- group -------------------------------------------------------------------


def _wrap(grid: Grid, x: np.ndarray) -> np.ndarray:
    """Reduce a displacement-like difference to ``[-L/2, L/2)`` per axis."""
    L = np.array(grid.lengths).reshape((-1,) + (1,) * (x.ndim - 1))
    return (x + 0.5 * L) % L - 0.5 * L


def apply_map(e: GroupElement, points: np.ndarray) -> np.ndarray:
    """``g(x) = x + f(x)`` at arbitrary points of shape ``(dim, M)`` (not reduced mod L)."""
    return points + e.grid.interpolate(e.displacement, points)


def invert_map(e: GroupElement, targets: np.ndarray | None = None, tol: float = INVERSION_TOL) -> np.ndarray:
    """Solve ``x + f(x) = y`` for each target ``y`` (default: the grid nodes).

    Fixed-point iteration ``x <- y - f(x)`` (a contraction when ``|Df| < 1``),
    falling back to Newton's method if it stalls.
    """
    grid = e.grid
    y = grid.coords.reshape(grid.dim, -1) if targets is None else np.asarray(targets, dtype=float)
    x = y.copy()
    for _ in range(INVERSION_MAXITER):
        x_new = y - grid.interpolate(e.displacement, x)
        step = np.max(np.abs(_wrap(grid, x_new - x)))
        x = x_new
        if step < tol:
            return x
    Df = grid.jacobian(e.displacement).reshape(grid.dim, grid.dim, -1)
    for _ in range(50):
        resid = _wrap(grid, x + grid.interpolate(e.displacement, x) - y)
        if np.max(np.abs(resid)) < tol:
            return x
        J = grid.interpolate(Df.reshape((grid.dim * grid.dim,) + grid.shape), x).reshape(grid.dim, grid.dim, -1)
        J = J + np.eye(grid.dim)[:, :, None]
        x = x - np.linalg.solve(J.transpose(2, 0, 1), resid.T[:, :, None])[:, :, 0].T
    raise InversionError("diffeomorphism inversion did not converge")


def group_act(e: GroupElement, w: WaveFunction) -> WaveFunction:
    """Push ``psi`` forward as a half-density under ``g`` and apply the phase ``exp(-i a)``."""
    grid = e.grid
    det = jacobian_determinant(grid, e.displacement)
    if np.any(det <= 0):
        raise InversionError("map is not an orientation-preserving diffeomorphism")
    x = invert_map(e)
    psi_back = grid.interpolate(w.psi, x)
    a_back = grid.interpolate(e.phase, x)
    det_back = grid.interpolate(det, x)
    out = np.sqrt(1.0 / np.abs(det_back)) * np.exp(-1j * a_back) * psi_back
    return WaveFunction(grid, out.reshape(grid.shape))


def compose(e1: GroupElement, e2: GroupElement) -> GroupElement:
    """Semidirect product ``(g1 o g2, a2 + a1 o g2)``."""
    grid = e1.grid
    nodes = grid.coords.reshape(grid.dim, -1)
    g2 = apply_map(e2, nodes)
    f = e2.displacement + grid.interpolate(e1.displacement, g2).reshape(e2.displacement.shape)
    a = e2.phase + grid.interpolate(e1.phase, g2).reshape(grid.shape)
    return GroupElement(grid, f, a)


def flow(xi: AlgebraElement, t: float, steps: int = 16) -> GroupElement:
    """Group element ``(phi_t, t alpha)`` where ``phi_t`` is the time-``t`` flow of ``v``.

    Particle paths are integrated with RK4 on the Fourier-interpolated velocity.
    The curve is tangent to ``xi`` at ``t = 0``, which is all the derivative
    oracles need.
    """
    grid = xi.grid
    x0 = grid.coords.reshape(grid.dim, -1)
    x = x0.copy()
    h = t / steps

    def vel(p):
        return grid.interpolate(xi.v, p)

    for _ in range(steps):
        k1 = vel(x)
        k2 = vel(x + 0.5 * h * k1)
        k3 = vel(x + 0.5 * h * k2)
        k4 = vel(x + h * k3)
        x = x + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
    return GroupElement(grid, (x - x0).reshape((grid.dim,) + grid.shape), t * xi.alpha)


# -- algebra -----------------------------------------------------------------


def algebra_act(xi: AlgebraElement, w: WaveFunction) -> np.ndarray:
    """Infinitesimal action ``-(1/2) psi div v - i alpha psi - grad psi . v``."""
    grid, psi = w.grid, w.psi
    out = -0.5 * psi * grid.divergence(xi.v) - 1j * xi.alpha * psi - grid.dot(grid.gradient(psi), xi.v)
    check_finite(out)
    return out


def lie_bracket(xi: AlgebraElement, eta: AlgebraElement, orientation: str = "standard") -> AlgebraElement:
    """``[(u, alpha), (v, beta)] = ([u, v], v . grad alpha - u . grad beta)``.

    The vector part is ``[u, v] = (v . grad) u - (u . grad) v``. Passing
    ``orientation="flipped"`` uses the opposite sign for the vector part only;
    it exists to confirm the equivariance check can tell the two apart.
    """
    grid = xi.grid
    u, alpha, v, beta = xi.v, xi.alpha, eta.v, eta.alpha
    vec = grid.advect(v, u) - grid.advect(u, v)
    if orientation == "flipped":
        vec = -vec
    elif orientation != "standard":
        raise ValueError(f"unknown orientation {orientation!r}")
    return AlgebraElement(grid, vec, grid.dot(v, grid.gradient(alpha)) - grid.dot(u, grid.gradient(beta)))


def pairing(s, xi: AlgebraElement) -> float:
    """``<<(v, alpha), (mu, rho)>> = int rho alpha + mu . v dx`` for a state or a ``(mu, rho)`` tangent."""
    mu, rho = (s.mu, s.rho) if isinstance(s, FluidState) else s
    grid = xi.grid
    return float(grid.integrate(rho * xi.alpha + grid.dot(mu, xi.v)))


def moment(xi: AlgebraElement, w: WaveFunction) -> float:
    """``M(xi)(psi) = Re int conj(psi) psi alpha - i conj(psi) grad psi . v dx``."""
    grid, psi = w.grid, w.psi
    dens = np.conj(psi) * psi * xi.alpha - 1j * grid.dot(np.conj(psi) * grid.gradient(psi), xi.v)
    return float(np.real(grid.integrate(dens)))


def moment_gradient(xi: AlgebraElement, w: WaveFunction) -> np.ndarray:
    """``2 psi alpha - 2 i grad psi . v - i psi div v``."""
    grid, psi = w.grid, w.psi
    return 2.0 * psi * xi.alpha - 2j * grid.dot(grid.gradient(psi), xi.v) - 1j * psi * grid.divergence(xi.v)


def moment_functional(xi: AlgebraElement) -> PsiFunctional:
    return PsiFunctional(lambda w: moment(xi, w), lambda w: moment_gradient(xi, w), "M(xi)")


def linear_fluid_functional(xi: AlgebraElement) -> FluidFunctional:
    """``F_xi(mu, rho) = <<(mu, rho), xi>>``; its variational derivatives are ``(v, alpha)``."""
    return FluidFunctional(lambda s: pairing(s, xi), lambda s: xi.v, lambda s: xi.alpha, "F_xi")


def equivariance_residual(
    xi: AlgebraElement, eta: AlgebraElement, w: WaveFunction, orientation: str = "standard"
) -> float:
    """``|M([xi, eta]) - {M(xi), M(eta)}| / max(1, |M([xi, eta])|)``."""
    lhs = moment(lie_bracket(xi, eta, orientation), w)
    rhs = pb_psi(moment_functional(xi), moment_functional(eta), w)
    return abs(lhs - rhs) / max(1.0, abs(lhs))


def moment_via_madelung(xi: AlgebraElement, w: WaveFunction) -> float:
    """Same value as :func:`moment`, computed as ``pairing(madelung(psi), xi)``."""
    return pairing((momentum_density(w), np.abs(w.psi) ** 2), xi)


__all__ = [
    "algebra_act",
    "apply_map",
    "compose",
    "equivariance_residual",
    "flow",
    "group_act",
    "invert_map",
    "lie_bracket",
    "linear_fluid_functional",
    "moment",
    "moment_functional",
    "moment_gradient",
    "moment_via_madelung",
    "pairing",
]
