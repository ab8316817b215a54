"""State types for the wave-function and fluid pictures, plus symmetry data."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import ResolutionError, VacuumError, WindingError
from .grid import Grid, check_finite

#: Densities below this are treated as vacuum; the transform needs a nonvanishing wave function.
RHO_MIN = 1e-8

# phases whose high-band spectrum exceeds this fraction of the peak are not resolved periodic fields
_PHASE_TAIL_TOL = 1e-3


def require_non_vacuum(rho: np.ndarray, rho_min: float = RHO_MIN) -> None:
    lo = float(np.min(rho))
    if lo < rho_min:
        raise VacuumError(f"density {lo:.3e} below vacuum threshold {rho_min:.1e}")


def _check_shape(grid: Grid, a: np.ndarray, vector: bool, name: str) -> np.ndarray:
    a = np.asarray(a)
    expected = ((grid.dim,) if vector else ()) + grid.shape
    if a.shape != expected:
        raise ValueError(f"{name} has shape {a.shape}, expected {expected}")
    check_finite(a)
    return a


@dataclass(frozen=True, eq=False)
class WaveFunction:
    grid: Grid
    psi: np.ndarray

    def __post_init__(self):
        psi = _check_shape(self.grid, self.psi, False, "psi").astype(complex)
        object.__setattr__(self, "psi", psi)

    @property
    def density(self) -> np.ndarray:
        return np.abs(self.psi) ** 2

    @property
    def mass(self) -> float:
        return float(self.grid.integrate(self.density))

    def require_non_vacuum(self, rho_min: float = RHO_MIN) -> "WaveFunction":
        require_non_vacuum(self.density, rho_min)
        return self

    def advanced(self, dpsi: np.ndarray, dt: float) -> "WaveFunction":
        return WaveFunction(self.grid, self.psi + dt * dpsi)


@dataclass(frozen=True, eq=False)
class FluidState:
    """Momentum density ``mu`` (vector field) and mass density ``rho`` (positive)."""

    grid: Grid
    mu: np.ndarray
    rho: np.ndarray

    def __post_init__(self):
        mu = _check_shape(self.grid, self.mu, True, "mu").astype(float)
        rho = _check_shape(self.grid, self.rho, False, "rho").astype(float)
        if np.any(rho <= 0):
            raise VacuumError("fluid density must be strictly positive")
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "rho", rho)

    @property
    def velocity(self) -> np.ndarray:
        return self.mu / self.rho

    @property
    def mass(self) -> float:
        return float(self.grid.integrate(self.rho))

    def require_non_vacuum(self, rho_min: float = RHO_MIN) -> "FluidState":
        require_non_vacuum(self.rho, rho_min)
        return self

    def advanced(self, tangent, dt: float) -> "FluidState":
        dmu, drho = tangent
        return FluidState(self.grid, self.mu + dt * dmu, self.rho + dt * drho)


@dataclass(frozen=True, eq=False)
class PolarDecomposition:
    """``psi = sqrt(rho) exp(i tau)`` with ``tau`` stored as its mean-zero representative."""

    grid: Grid
    rho: np.ndarray
    tau: np.ndarray

    def __post_init__(self):
        rho = _check_shape(self.grid, self.rho, False, "rho").astype(float)
        tau = _check_shape(self.grid, self.tau, False, "tau").astype(float)
        if np.any(rho <= 0):
            raise VacuumError("polar density must be strictly positive")
        object.__setattr__(self, "rho", rho)
        object.__setattr__(self, "tau", tau - tau.mean())


@dataclass(frozen=True, eq=False)
class AlgebraElement:
    """Vector field ``v`` paired with a scalar field ``alpha``."""

    grid: Grid
    v: np.ndarray
    alpha: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "v", _check_shape(self.grid, self.v, True, "v").astype(float))
        object.__setattr__(self, "alpha", _check_shape(self.grid, self.alpha, False, "alpha").astype(float))

    @classmethod
    def zero(cls, grid: Grid) -> "AlgebraElement":
        return cls(grid, np.zeros((grid.dim,) + grid.shape), np.zeros(grid.shape))

    def __add__(self, other: "AlgebraElement") -> "AlgebraElement":
        return AlgebraElement(self.grid, self.v + other.v, self.alpha + other.alpha)

    def __mul__(self, c: float) -> "AlgebraElement":
        return AlgebraElement(self.grid, c * self.v, c * self.alpha)

    __rmul__ = __mul__

    def __neg__(self) -> "AlgebraElement":
        return self * -1.0

    def __sub__(self, other: "AlgebraElement") -> "AlgebraElement":
        return self + (-other)


def jacobian_determinant(grid: Grid, displacement: np.ndarray) -> np.ndarray:
    """``det(I + Df)`` at the grid nodes, with ``Df`` computed spectrally."""
    J = grid.jacobian(displacement)
    if grid.dim == 1:
        return 1.0 + J[0, 0]
    return (1.0 + J[0, 0]) * (1.0 + J[1, 1]) - J[0, 1] * J[1, 0]


@dataclass(frozen=True, eq=False)
class GroupElement:
    """Torus diffeomorphism ``g = id + displacement`` (mod the periods) and a phase field."""

    grid: Grid
    displacement: np.ndarray
    phase: np.ndarray

    def __post_init__(self):
        f = _check_shape(self.grid, self.displacement, True, "displacement").astype(float)
        a = _check_shape(self.grid, self.phase, False, "phase").astype(float)
        if np.any(jacobian_determinant(self.grid, f) <= 0):
            raise ValueError("displacement does not define an orientation-preserving diffeomorphism")
        object.__setattr__(self, "displacement", f)
        object.__setattr__(self, "phase", a)

    @classmethod
    def identity(cls, grid: Grid) -> "GroupElement":
        return cls(grid, np.zeros((grid.dim,) + grid.shape), np.zeros(grid.shape))


# -- polar form -------------------------------------------------------------


def from_polar(p: PolarDecomposition) -> WaveFunction:
    """Classical Madelung direction ``(tau, rho) -> sqrt(rho) exp(i tau)``.

    The phase must be a resolved single-valued periodic field; a sampled
    multivalued phase (e.g. ``tau = x``) shows up as a slowly decaying spectrum
    and is rejected.
    """
    grid = p.grid
    if grid.spectral_tail(p.tau) > _PHASE_TAIL_TOL:
        raise ResolutionError("phase is not a resolved single-valued periodic field")
    return WaveFunction(grid, np.sqrt(p.rho) * np.exp(1j * p.tau))


def to_polar(w: WaveFunction, rho_min: float = RHO_MIN) -> PolarDecomposition:
    """Recover ``(rho, [tau])`` from a nonvanishing, non-winding wave function.

    ``tau`` solves ``grad tau = Im(conj(psi) grad psi) / rho`` in the
    least-squares sense in Fourier space.
    """
    from .madelung import winding_numbers  # madelung imports this module

    grid = w.grid
    rho = w.density
    require_non_vacuum(rho, rho_min)
    windings = winding_numbers(w, rho_min)
    if any(windings):
        raise WindingError(f"wave function has winding numbers {windings}; no periodic phase")
    vel = np.imag(np.conj(w.psi) * grid.gradient(w.psi)) / rho
    axes = tuple(range(1, grid.dim + 1))
    vhat = np.fft.fftn(vel, axes=axes)
    num = np.zeros(grid.shape, dtype=complex)
    den = np.zeros(grid.shape)
    for a in range(grid.dim):
        k = grid.wavenumbers(a).copy()
        k[grid.n[a] // 2] = 0.0
        k = k.reshape([-1 if b == a else 1 for b in range(grid.dim)])
        num = num + np.conj(1j * k) * vhat[a]
        den = den + k**2
    tau_hat = np.where(den > 0, num / np.where(den > 0, den, 1.0), 0.0)
    tau = np.fft.ifftn(tau_hat).real
    return PolarDecomposition(grid, rho, tau)


def phase_aligned_distance(a: WaveFunction, b: WaveFunction) -> float:
    """Relative L2 distance ``min_theta ||a exp(i theta) - b|| / ||b||``.

    The optimal global phase is ``theta = arg <a, b>`` (complex inner product).
    """
    grid = b.grid
    overlap = np.sum(np.conj(a.psi) * b.psi)
    theta = np.angle(overlap) if abs(overlap) > 0 else 0.0
    return grid.norm(a.psi * np.exp(1j * theta) - b.psi) / grid.norm(b.psi)
