"""Periodic grids and spectral calculus on the flat torus.

Fields are plain numpy arrays sampled on the grid nodes with ``indexing="ij"``
(axis-major order: the first axis varies slowest when flattened in C order).

* scalar / complex field: shape ``grid.shape``
* vector field: shape ``(grid.dim, *grid.shape)``

Derivatives always act on the trailing ``grid.dim`` axes, so stacks of fields
can be differentiated in one call.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .exceptions import NonFiniteError

TWO_PI = 2.0 * np.pi


def check_finite(*arrays: np.ndarray) -> None:
    for a in arrays:
        if not np.all(np.isfinite(a)):
            raise NonFiniteError("field contains non-finite samples")


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid on ``[0, L_1) x ... x [0, L_dim)``.

    Parameters
    ----------
    n : tuple of int
        Points per axis. Each must be even and at least 8.
    lengths : tuple of float
        Period per axis.
    """

    n: tuple[int, ...]
    lengths: tuple[float, ...]
    _cache: dict = field(default_factory=dict, init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        n = tuple(int(v) for v in self.n)
        lengths = tuple(float(v) for v in self.lengths)
        if len(n) not in (1, 2):
            raise ValueError(f"dimension must be 1 or 2, got {len(n)}")
        if len(lengths) != len(n):
            raise ValueError("need one length per axis")
        for npts in n:
            if npts < 8 or npts % 2:
                raise ValueError(f"points per axis must be even and >= 8, got {npts}")
        for length in lengths:
            if not (np.isfinite(length) and length > 0):
                raise ValueError(f"axis length must be positive, got {length}")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "lengths", lengths)

    @classmethod
    def uniform(cls, N: int, L: float = TWO_PI, dim: int = 1) -> "Grid":
        return cls((N,) * dim, (L,) * dim)

    # -- geometry ---------------------------------------------------------

    @property
    def dim(self) -> int:
        return len(self.n)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.n

    @property
    def size(self) -> int:
        return int(np.prod(self.n))

    @property
    def spacing(self) -> tuple[float, ...]:
        return tuple(L / N for L, N in zip(self.lengths, self.n))

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacing))

    @property
    def volume(self) -> float:
        return float(np.prod(self.lengths))

    @property
    def axes(self) -> tuple[np.ndarray, ...]:
        return tuple(np.arange(N) * h for N, h in zip(self.n, self.spacing))

    @property
    def coords(self) -> np.ndarray:
        """Node coordinates, shape ``(dim, *shape)``."""
        if "coords" not in self._cache:
            self._cache["coords"] = np.array(np.meshgrid(*self.axes, indexing="ij"))
        return self._cache["coords"]

    def wavenumbers(self, axis: int) -> np.ndarray:
        """Angular wavenumbers along ``axis`` in FFT order; index N/2 is the Nyquist mode."""
        N, L = self.n[axis], self.lengths[axis]
        return np.fft.fftfreq(N, d=1.0 / N) * (TWO_PI / L)

    def mode_indices(self, axis: int) -> np.ndarray:
        N = self.n[axis]
        return np.fft.fftfreq(N, d=1.0 / N).astype(int)

    def _kshape(self, axis: int, ndim: int) -> tuple[int, ...]:
        shape = [1] * ndim
        shape[ndim - self.dim + axis] = self.n[axis]
        return tuple(shape)

    def k_squared(self) -> np.ndarray:
        if "ksq" not in self._cache:
            ks = np.meshgrid(*(self.wavenumbers(a) for a in range(self.dim)), indexing="ij")
            self._cache["ksq"] = sum(k**2 for k in ks)
        return self._cache["ksq"]

    def _fft_axes(self, ndim: int) -> tuple[int, ...]:
        return tuple(range(ndim - self.dim, ndim))

    # -- spectral calculus ------------------------------------------------

    def derivative(self, f: np.ndarray, axis: int, order: int = 1) -> np.ndarray:
        """Spectral derivative along one axis. Odd orders zero the Nyquist mode."""
        f = np.asarray(f)
        check_finite(f)
        ax = f.ndim - self.dim + axis
        symbol = (1j * self.wavenumbers(axis)) ** order
        if order % 2:
            symbol[self.n[axis] // 2] = 0.0
        out = np.fft.ifft(np.fft.fft(f, axis=ax) * symbol.reshape(self._kshape(axis, f.ndim)), axis=ax)
        return out.real if np.isrealobj(f) else out

    def gradient(self, f: np.ndarray) -> np.ndarray:
        """Gradient of a scalar (or complex) field, shape ``(dim, *shape)``."""
        return np.stack([self.derivative(f, a) for a in range(self.dim)])

    def jacobian(self, v: np.ndarray) -> np.ndarray:
        """``J[j, i] = d v_j / d x_i`` for a vector field ``v``."""
        return np.stack([self.gradient(v[j]) for j in range(self.dim)])

    def divergence(self, v: np.ndarray) -> np.ndarray:
        v = np.asarray(v)
        if v.shape[0] != self.dim:
            raise ValueError("vector field has wrong number of components")
        return sum(self.derivative(v[a], a) for a in range(self.dim))

    def advect(self, u: np.ndarray, w: np.ndarray) -> np.ndarray:
        """Directional derivative ``(u . grad) w`` of a scalar or vector field ``w``."""
        w = np.asarray(w)
        if w.ndim == self.dim:
            return self.dot(u, self.gradient(w))
        return np.stack([self.dot(u, self.gradient(w[j])) for j in range(w.shape[0])])

    def laplacian(self, f: np.ndarray) -> np.ndarray:
        f = np.asarray(f)
        check_finite(f)
        axes = self._fft_axes(f.ndim)
        out = np.fft.ifftn(-self.k_squared() * np.fft.fftn(f, axes=axes), axes=axes)
        return out.real if np.isrealobj(f) else out

    @staticmethod
    def dot(a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """Pointwise Euclidean dot product of two vector fields (no conjugation)."""
        return np.sum(np.asarray(a) * np.asarray(b), axis=0)

    # -- quadrature -------------------------------------------------------

    def integrate(self, f: np.ndarray):
        """Rectangle-rule integral over the trailing grid axes."""
        f = np.asarray(f)
        check_finite(f)
        return self.cell_volume * f.sum(axis=self._fft_axes(f.ndim))

    def inner(self, f: np.ndarray, g: np.ndarray) -> float:
        """Real Hermitian inner product ``Re int conj(f) g dx`` (summed over components)."""
        return float(np.real(self.cell_volume * np.sum(np.conj(f) * g)))

    def norm(self, f: np.ndarray) -> float:
        return float(np.sqrt(self.inner(f, f)))

    # -- interpolation ----------------------------------------------------

    def _interp_matrix(self, axis: int, x: np.ndarray) -> np.ndarray:
        k = self.wavenumbers(axis)
        E = np.exp(1j * np.outer(x, k))
        nyq = self.n[axis] // 2
        # split the Nyquist coefficient symmetrically so real fields stay real off-grid
        E[:, nyq] = np.cos(x * k[nyq])
        return E

    def interpolate(self, f: np.ndarray, points: np.ndarray) -> np.ndarray:
        """Evaluate the trigonometric interpolant of ``f`` at off-grid points.

        ``points`` has shape ``(dim, M)``; coordinates are reduced modulo the
        period. Leading axes of ``f`` beyond the grid axes are carried through,
        so a vector field gives a result of shape ``(dim, M)``.
        """
        f = np.asarray(f)
        points = np.atleast_2d(np.asarray(points, dtype=float))
        check_finite(f, points)
        if points.shape[0] != self.dim:
            raise ValueError("points must have shape (dim, M)")
        points = np.mod(points, np.array(self.lengths)[:, None])
        axes = self._fft_axes(f.ndim)
        coeffs = np.fft.fftn(f, axes=axes) / self.size
        lead = f.shape[: f.ndim - self.dim]
        coeffs = coeffs.reshape((-1,) + self.shape)
        E = [self._interp_matrix(a, points[a]) for a in range(self.dim)]
        if self.dim == 1:
            out = coeffs @ E[0].T
        else:
            tmp = coeffs @ E[1].T  # (b, i, m)
            out = np.sum(E[0].T[None] * tmp, axis=1)
        out = out.reshape(lead + (points.shape[1],))
        return out.real if np.isrealobj(f) else out

    # -- field construction -----------------------------------------------

    def field_from_modes(self, modes: Iterable[dict]) -> np.ndarray:
        """Real field ``sum Re((re + i im) exp(i k.x))`` from integer mode numbers ``k``."""
        x = self.coords
        out = np.zeros(self.shape)
        for mode in modes:
            k = np.atleast_1d(np.asarray(mode.get("k", 0), dtype=float))
            if k.size == 1 and self.dim > 1:
                k = np.concatenate([k, np.zeros(self.dim - 1)])
            if k.size != self.dim:
                raise ValueError(f"mode {mode} does not match grid dimension {self.dim}")
            phase = sum(k[a] * TWO_PI / self.lengths[a] * x[a] for a in range(self.dim))
            c = complex(mode.get("re", 0.0), mode.get("im", 0.0))
            out += np.real(c * np.exp(1j * phase))
        return out

    def random_field(
        self,
        rng: np.random.Generator,
        *,
        complex_valued: bool = False,
        max_mode: int | None = None,
        components: int | None = None,
        zero_mean: bool = False,
    ) -> np.ndarray:
        """Random band-limited field.

        Coefficients are i.i.d. Gaussian on integer modes ``|k| <= max_mode``
        (default ``N/8``) with amplitude decay ``1/(1 + |k|^2)``; the result is
        scaled to unit sup norm.
        """
        if components is not None:
            return np.stack(
                [
                    self.random_field(rng, complex_valued=complex_valued, max_mode=max_mode, zero_mean=zero_mean)
                    for _ in range(components)
                ]
            )
        max_mode = min(self.n) // 8 if max_mode is None else max_mode
        idx = np.meshgrid(*(self.mode_indices(a) for a in range(self.dim)), indexing="ij")
        kk = np.sqrt(sum(m.astype(float) ** 2 for m in idx))
        mask = kk <= max_mode
        c = (rng.standard_normal(self.shape) + 1j * rng.standard_normal(self.shape)) * mask / (1.0 + kk**2)
        if zero_mean:
            c.flat[0] = 0.0
        f = np.fft.ifftn(c) * self.size
        if not complex_valued:
            f = f.real
        scale = np.max(np.abs(f))
        return f / scale if scale > 0 else f

    def spectral_tail(self, f: np.ndarray, fraction: float = 0.25) -> float:
        """Largest coefficient magnitude with some ``|mode| >= fraction * N``, relative to the largest overall."""
        c = np.abs(np.fft.fftn(np.asarray(f), axes=self._fft_axes(np.ndim(f))))
        c = c.reshape((-1,) + self.shape).max(axis=0)
        idx = np.meshgrid(*(np.abs(self.mode_indices(a)) for a in range(self.dim)), indexing="ij")
        high = np.zeros(self.shape, dtype=bool)
        for a, m in enumerate(idx):
            high |= m >= fraction * self.n[a]
        top = c.max()
        return float(c[high].max() / top) if top > 0 else 0.0


# -- field snapshot files -------------------------------------------------

_KINDS = ("scalar", "vector", "complex", "complex_vector")


def write_field_csv(path, grid: Grid, values: np.ndarray) -> None:
    """Write a field snapshot: header ``dim, N..., L...`` then one node per row.

    Each row holds the node coordinates followed by the value components;
    complex components are stored as ``re, im`` column pairs.
    """
    values = np.asarray(values)
    comps = values.reshape((-1, grid.size)) if values.ndim > grid.dim else values.reshape((1, grid.size))
    coords = grid.coords.reshape(grid.dim, grid.size)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([grid.dim, *grid.n, *(repr(L) for L in grid.lengths)])
        for j in range(grid.size):
            row = [repr(float(c)) for c in coords[:, j]]
            for comp in comps[:, j]:
                if np.iscomplexobj(values):
                    row += [repr(float(comp.real)), repr(float(comp.imag))]
                else:
                    row.append(repr(float(comp)))
            w.writerow(row)


def read_field_csv(path, kind: str = "scalar") -> tuple[Grid, np.ndarray]:
    """Read a snapshot written by :func:`write_field_csv`.

    ``kind`` is one of ``scalar``, ``vector``, ``complex``, ``complex_vector``;
    the column layout alone cannot distinguish a complex scalar from a real 2-vector.
    """
    if kind not in _KINDS:
        raise ValueError(f"kind must be one of {_KINDS}")
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ValueError(f"{path}: empty field file")
    header = rows[0]
    dim = int(header[0])
    grid = Grid(tuple(int(v) for v in header[1 : 1 + dim]), tuple(float(v) for v in header[1 + dim : 1 + 2 * dim]))
    data = np.array(rows[1:], dtype=float)
    if data.shape[0] != grid.size:
        raise ValueError(f"{path}: expected {grid.size} rows, found {data.shape[0]}")
    vals = data[:, dim:]
    if kind.startswith("complex"):
        vals = vals[:, 0::2] + 1j * vals[:, 1::2]
    vals = vals.T.reshape((-1,) + grid.shape)
    if kind in ("scalar", "complex"):
        vals = vals[0]
    check_finite(vals)
    return grid, vals


def relative_error(a: np.ndarray, b: np.ndarray, norm: str = "max") -> float:
    """``||a - b|| / ||b||`` in the sup or discrete L2 norm (absolute when ``b`` vanishes)."""
    a, b = np.asarray(a), np.asarray(b)
    if norm == "max":
        num, den = np.max(np.abs(a - b)), np.max(np.abs(b))
    else:
        num, den = np.sqrt(np.sum(np.abs(a - b) ** 2)), np.sqrt(np.sum(np.abs(b) ** 2))
    return float(num / den) if den > 1e-300 else float(num)


__all__ = [
    "Grid",
    "check_finite",
    "read_field_csv",
    "relative_error",
    "write_field_csv",
]
