"""Fixed-step time integration of NLS and QHD with conservation monitors."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .exceptions import NonFiniteError, VacuumError
from .grid import check_finite
from .hamiltonians import NonlinearityModel, hamiltonian_cf, hamiltonian_nls, nls_rhs, qhd_rhs
from .madelung import madelung
from .states import FluidState, WaveFunction, require_non_vacuum
from .symmetry import moment, pairing

logger = logging.getLogger(__name__)


def _combine(tangents, weights):
    """Weighted sum of tangents that are arrays or tuples of arrays."""
    first = tangents[0]
    if isinstance(first, tuple):
        return tuple(sum(w * t[i] for w, t in zip(weights, tangents)) for i in range(len(first)))
    return sum(w * t for w, t in zip(weights, tangents))


def _check_state(state) -> None:
    if isinstance(state, FluidState):
        require_non_vacuum(state.rho)


def step_rk4(state, rhs: Callable, dt: float):
    """One classical RK4 step for a :class:`WaveFunction` or a :class:`FluidState`.

    Raises :class:`VacuumError` if an intermediate fluid density drops below
    the vacuum threshold and :class:`NonFiniteError` on blow-up.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    k1 = rhs(state)
    s2 = state.advanced(k1, 0.5 * dt)
    _check_state(s2)
    k2 = rhs(s2)
    s3 = state.advanced(k2, 0.5 * dt)
    _check_state(s3)
    k3 = rhs(s3)
    s4 = state.advanced(k3, dt)
    _check_state(s4)
    k4 = rhs(s4)
    out = state.advanced(_combine((k1, k2, k3, k4), (1 / 6, 1 / 3, 1 / 3, 1 / 6)), dt)
    _check_state(out)
    return out


def step_strang_nls(w: WaveFunction, model: NonlinearityModel, dt: float) -> WaveFunction:
    """Strang splitting: half nonlinear phase, exact linear Fourier step, half nonlinear phase."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    grid = w.grid
    # |psi| is invariant under the nonlinear substep, so its phase rotation is exact
    psi = w.psi * np.exp(-0.5j * dt * model.f(np.abs(w.psi) ** 2))
    psi = np.fft.ifftn(np.exp(-0.5j * dt * grid.k_squared()) * np.fft.fftn(psi))
    psi = psi * np.exp(-0.5j * dt * model.f(np.abs(psi) ** 2))
    check_finite(psi)
    return WaveFunction(grid, psi)


def make_stepper(state, model: NonlinearityModel, method: str) -> Callable:
    if method == "strang":
        if not isinstance(state, WaveFunction):
            raise ValueError("Strang splitting is only available for the wave-function system")
        return lambda s, dt: step_strang_nls(s, model, dt)
    if method == "rk4":
        rhs = (lambda s: nls_rhs(s, model)) if isinstance(state, WaveFunction) else (lambda s: qhd_rhs(s, model))
        return lambda s, dt: step_rk4(s, rhs, dt)
    raise ValueError(f"unknown integrator {method!r}")


def monitor_values(state, model: NonlinearityModel, xis: dict) -> dict:
    """Energy, mass, configured momenta and the spectral tail of the state."""
    grid = state.grid
    if isinstance(state, WaveFunction):
        out = {"energy": hamiltonian_nls(state, model), "mass": state.mass}
        out.update({f"moment_{k}": moment(xi, state) for k, xi in xis.items()})
        out["spectral_tail"] = grid.spectral_tail(state.psi)
    else:
        out = {"energy": hamiltonian_cf(state, model), "mass": state.mass}
        out.update({f"moment_{k}": pairing(state, xi) for k, xi in xis.items()})
        out["spectral_tail"] = grid.spectral_tail(state.rho)
    return out


@dataclass
class Trajectory:
    times: list = field(default_factory=list)
    snapshots: list = field(default_factory=list)
    monitors: dict = field(default_factory=dict)
    failed: bool = False
    failure_time: float | None = None
    failure_reason: str | None = None

    @property
    def final(self):
        return self.snapshots[-1] if self.snapshots else None

    def drift(self, name: str) -> float:
        """``max_t |m(t) - m(0)| / max(|m(0)|, 1e-300)``."""
        vals = np.asarray(self.monitors[name])
        ref = abs(vals[0]) if abs(vals[0]) > 1e-300 else 1.0
        return float(np.max(np.abs(vals - vals[0])) / ref)


def _num_steps(dt: float, T: float) -> int:
    if T <= 0 or dt <= 0:
        raise ValueError("T and dt must be positive")
    n = int(round(T / dt))
    if abs(n * dt - T) > 1e-9 * max(1.0, T):
        raise ValueError(f"dt={dt} does not divide T={T}")
    return n


def evolve(
    initial,
    model: NonlinearityModel,
    dt: float,
    T: float,
    method: str = "rk4",
    xis: dict | None = None,
    stride: int | None = None,
) -> Trajectory:
    """Integrate from ``initial`` to time ``T``.

    Snapshots and monitors are recorded every ``stride`` steps (default: only
    the endpoints). A vacuum approach or blow-up ends the run early with
    ``failed`` set; the partial trajectory is returned.
    """
    xis = xis or {}
    n = _num_steps(dt, T)
    stride = stride or n
    step = make_stepper(initial, model, method)
    traj = Trajectory()

    def record(t, s):
        traj.times.append(t)
        traj.snapshots.append(s)
        for k, v in monitor_values(s, model, xis).items():
            traj.monitors.setdefault(k, []).append(v)

    state = initial
    record(0.0, state)
    for i in range(1, n + 1):
        try:
            state = step(state, dt)
        except (VacuumError, NonFiniteError) as exc:
            traj.failed, traj.failure_time, traj.failure_reason = True, i * dt, str(exc)
            logger.warning("run failed at t=%.6g: %s", i * dt, exc)
            return traj
        if i % stride == 0 or i == n:
            record(i * dt, state)
    return traj


def fluid_distance(a: FluidState, b: FluidState) -> float:
    """Relative discrete L2 distance between two fluid states (``b`` is the reference)."""
    num = np.sum((a.mu - b.mu) ** 2) + np.sum((a.rho - b.rho) ** 2)
    den = np.sum(b.mu**2) + np.sum(b.rho**2)
    return float(np.sqrt(num / den))


def compare_flows(
    w0: WaveFunction,
    model: NonlinearityModel,
    dt: float,
    T: float,
    nls_method: str = "strang",
    qhd_method: str = "rk4",
    stride: int = 1,
) -> tuple[list, list, bool]:
    """Run NLS from ``w0`` and QHD from ``madelung(w0)`` side by side.

    Returns ``(times, residuals, failed)`` where each residual is the relative
    L2 distance between ``madelung(psi(t))`` and the QHD state at time ``t``.
    """
    n = _num_steps(dt, T)
    step_nls = make_stepper(w0, model, nls_method)
    s0 = madelung(w0)
    step_qhd = make_stepper(s0, model, qhd_method)
    w, s = w0, s0
    times, residuals = [0.0], [0.0]
    for i in range(1, n + 1):
        try:
            w = step_nls(w, dt)
            s = step_qhd(s, dt)
            image = madelung(w)
        except (VacuumError, NonFiniteError) as exc:
            logger.warning("comparison failed at t=%.6g: %s", i * dt, exc)
            return times, residuals, True
        if i % stride == 0 or i == n:
            times.append(i * dt)
            residuals.append(fluid_distance(image, s))
    return times, residuals, False


def observed_order(errors: Sequence[float], ratio: float = 2.0) -> float:
    """Convergence order from errors at step sizes ``dt, dt/ratio, ...`` (last pair)."""
    return float(np.log(errors[-2] / errors[-1]) / np.log(ratio))


def _state_distance(a, b) -> float:
    if isinstance(a, FluidState):
        return fluid_distance(a, b)
    return float(np.linalg.norm(a.psi - b.psi) / np.linalg.norm(b.psi))


def convergence_errors(initial, model: NonlinearityModel, method: str, dts: Sequence[float], T: float) -> list[float]:
    """Self-convergence study: ``|u_dt(T) - u_{dt/2}(T)|`` for successive pairs of ``dts``.

    The differences shrink like the global error, so their ratios give the
    observed order without a reference solution.
    """
    finals = []
    for dt in dts:
        traj = evolve(initial, model, dt, T, method)
        if traj.failed:
            raise RuntimeError(f"convergence run with dt={dt} failed: {traj.failure_reason}")
        finals.append(traj.final)
    return [_state_distance(finals[i], finals[i + 1]) for i in range(len(finals) - 1)]
