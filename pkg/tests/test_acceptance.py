"""Acceptance criteria; each test prints one PASS/FAIL line."""
import time

import numpy as np
import pytest

from madelung_lab.brackets import fd_variational_derivative
from madelung_lab.dynamics import compare_flows, convergence_errors, evolve, observed_order
from madelung_lab.grid import Grid
from madelung_lab.hamiltonians import (
    MODELS,
    get_model,
    gross_pitaevskii,
    hamiltonian_cf,
    hamiltonian_cf_derivatives,
    hamiltonian_nls,
    hamiltonian_nls_gradient,
)
from madelung_lab.madelung import madelung
from madelung_lab.states import AlgebraElement, PolarDecomposition, from_polar
from madelung_lab.verification import (
    antisymmetry_suite,
    composition_suite,
    equivariance_suite,
    flow_derivative_errors,
    hamiltonian_suite,
    intertwining_suite,
    jacobi_suite,
    lie_poisson_suite,
    momentum_map_suite,
    poisson_map_suite,
    random_wavefunction,
    unitarity_suite,
)

SEED = 2024
G1 = Grid.uniform(64)
G2 = Grid.uniform(32, dim=2)


@pytest.fixture
def verdict(capsys):
    def emit(criterion, ok, detail):
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {criterion}: {detail}")
        assert ok, detail

    return emit


def _rng(*key):
    return np.random.default_rng([SEED, *key])


def _checks_line(checks):
    return "; ".join(f"{c.name}@{c.detail.get('grid', '')} max={c.max_residual:.2e} tol={c.tolerance:.0e}" for c in checks)


def _on(grid, result):
    for r in result if isinstance(result, tuple) else (result,):
        r.detail["grid"] = f"{grid.dim}D N={grid.n[0]}"
    return result


def _flow_initial(N=128):
    g = Grid.uniform(N)
    (x,) = g.coords
    return from_polar(PolarDecomposition(g, 1 + 0.2 * np.cos(x), 0.1 * np.sin(x)))


def test_momentum_map(verdict):
    t0 = time.perf_counter()
    checks = [_on(g, momentum_map_suite(g, _rng(1, g.dim), samples=50)) for g in (G1, G2)]
    elapsed = time.perf_counter() - t0
    ok = all(c.passed for c in checks) and elapsed < 10
    verdict(1, ok, f"{_checks_line(checks)}; {elapsed:.2f}s")


def test_equivariance_and_power(verdict):
    checks = []
    for g in (G1, G2):
        checks.extend(_on(g, equivariance_suite(g, _rng(2, g.dim), samples=50)))
    good = [c for c in checks if c.name == "equivariance"]
    power = [c for c in checks if c.name == "equivariance_power"]
    weakest = min(c.detail["min_flipped_residual"] for c in power)
    ok = all(c.passed for c in checks)
    verdict(2, ok, f"{_checks_line(good)}; flipped bracket residual min={weakest:.2e} max={max(c.max_residual for c in power):.2e}")


def test_poisson_map(verdict):
    checks = [_on(g, poisson_map_suite(g, _rng(3, g.dim), samples=20)) for g in (G1, G2)]
    verdict(3, all(c.passed for c in checks), _checks_line(checks))


def test_intertwining(verdict):
    g2 = Grid.uniform(64, dim=2)
    checks = [_on(g, intertwining_suite(g, _rng(4, g.dim), samples=20)) for g in (G1, g2)]
    per_model = {k: max(c.detail["per_model"][k] for c in checks) for k in MODELS}
    detail = _checks_line(checks) + "; " + ", ".join(f"{k}={v:.2e}" for k, v in per_model.items())
    verdict(4, all(c.passed for c in checks) and all(c.samples == 20 * len(MODELS) for c in checks), detail)


def test_flow_level_equivalence(verdict):
    t0 = time.perf_counter()
    times, res, failed = compare_flows(_flow_initial(), gross_pitaevskii(), 1e-3, 0.5, "strang", "rk4", stride=50)
    elapsed = time.perf_counter() - t0
    ok = not failed and abs(times[-1] - 0.5) < 1e-12 and res[-1] <= 1e-4 and elapsed < 60
    verdict(5, ok, f"residual at T=0.5 {res[-1]:.2e} (max over run {max(res):.2e}) tol=1e-4; {elapsed:.2f}s")


def test_hamiltonian_correspondence(verdict):
    checks = [_on(g, hamiltonian_suite(g, _rng(6, g.dim), samples=20)) for g in (G1, G2)]
    verdict(6, all(c.passed for c in checks), _checks_line(checks))


def test_conservation(verdict):
    w0 = _flow_initial()
    g = w0.grid
    xis = {
        "translation": AlgebraElement(g, np.ones((1,) + g.shape), np.zeros(g.shape)),
        "phase": AlgebraElement(g, np.zeros((1,) + g.shape), np.ones(g.shape)),
    }
    model = gross_pitaevskii()
    runs = {
        "rk4": evolve(w0, model, 1e-3, 1.0, "rk4", xis, stride=100),
        "strang": evolve(w0, model, 1e-3, 1.0, "strang", xis, stride=100),
        "qhd-rk4": evolve(madelung(w0), model, 1e-3, 1.0, "rk4", xis, stride=100),
    }
    mass_tol = {"rk4": 1e-10, "strang": 1e-13, "qhd-rk4": 1e-10}  # Strang: roundoff
    ok, parts = True, []
    for name, traj in runs.items():
        drifts = {k: traj.drift(k) for k in ("energy", "mass", "moment_translation", "moment_phase")}
        ok &= not traj.failed and abs(traj.times[-1] - 1.0) < 1e-12
        ok &= drifts["energy"] <= 1e-8 and drifts["mass"] <= mass_tol[name]
        ok &= drifts["moment_translation"] <= 1e-8 and drifts["moment_phase"] <= 1e-8
        parts.append(f"{name}: " + " ".join(f"{k}={v:.1e}" for k, v in drifts.items()))
    verdict(7, bool(ok), "; ".join(parts))


def test_bracket_algebra(verdict):
    checks = []
    for g in (G1, G2):
        checks.append(_on(g, antisymmetry_suite(g, _rng(8, 0, g.dim), samples=20)))
        checks.append(_on(g, jacobi_suite(g, _rng(8, 1, g.dim), samples=20)))
        checks.append(_on(g, lie_poisson_suite(g, _rng(8, 2, g.dim), samples=20)))
    verdict(8, all(c.passed for c in checks), _checks_line(checks))


def test_numerics_hygiene(verdict):
    rng = _rng(9)
    # spectral exactness: random band-limited fields against their analytic derivatives
    spec_err = 0.0
    for g in (G1, G2):
        modes = []
        for _ in range(6):
            k = [int(rng.integers(-g.n[0] // 4, g.n[0] // 4 + 1)) for _ in range(g.dim)]
            modes.append({"k": k, "re": float(rng.normal()), "im": float(rng.normal())})
        f = g.field_from_modes(modes)
        for a in range(g.dim):
            df = g.field_from_modes(
                [{"k": m["k"], "re": -m["im"] * m["k"][a], "im": m["re"] * m["k"][a]} for m in modes]
            )
            spec_err = max(spec_err, np.max(np.abs(g.derivative(f, a) - df)))
    # time-integrator order from self-convergence
    g16 = Grid.uniform(16)
    w = random_wavefunction(g16, rng, max_mode=2)
    gp = gross_pitaevskii()
    rk4_nls = observed_order(convergence_errors(w, gp, "rk4", (0.025, 0.0125, 0.00625, 0.003125), 0.5))
    rk4_qhd = observed_order(convergence_errors(madelung(w), gp, "rk4", (0.025, 0.0125, 0.00625, 0.003125), 0.5))
    strang = observed_order(convergence_errors(w, gp, "strang", (0.05, 0.025, 0.0125), 0.5))
    # finite differences against analytic gradients at eps = 1e-5
    fd_err = 0.0
    for name in MODELS:
        m = get_model(name)
        w32 = random_wavefunction(Grid.uniform(32), rng, max_mode=2)
        fd = fd_variational_derivative(lambda u: hamiltonian_nls(u, m), w32, eps=1e-5)
        fd_err = max(fd_err, np.max(np.abs(fd - hamiltonian_nls_gradient(w32, m))))
        s = madelung(w32)
        d_mu, d_rho = fd_variational_derivative(lambda u: hamiltonian_cf(u, m), s, eps=1e-5)
        a_mu, a_rho = hamiltonian_cf_derivatives(s, m)
        fd_err = max(fd_err, np.max(np.abs(d_mu - a_mu)), np.max(np.abs(d_rho - a_rho)))
    ok = (
        spec_err <= 1e-11
        and abs(rk4_nls - 4) <= 0.2
        and abs(rk4_qhd - 4) <= 0.2
        and abs(strang - 2) <= 0.1
        and fd_err <= 1e-6
    )
    verdict(
        9,
        ok,
        f"spectral derivative err={spec_err:.1e}; RK4 order NLS={rk4_nls:.3f} QHD={rk4_qhd:.3f}; "
        f"Strang order={strang:.3f}; FD gradient err={fd_err:.1e}",
    )


def test_group_action(verdict):
    checks = []
    for g in (G1, G2):
        checks.append(_on(g, unitarity_suite(g, _rng(10, 0, g.dim), samples=10)))
        checks.append(_on(g, composition_suite(g, _rng(10, 1, g.dim), samples=5 if g.dim == 2 else 10)))
    errs = flow_derivative_errors(G1, _rng(10, 2), eps_values=(1e-2, 5e-3, 2.5e-3))
    ratios = [errs[i] / errs[i + 1] for i in range(len(errs) - 1)]
    second_order = all(abs(r - 4) <= 0.4 for r in ratios)
    ok = all(c.passed for c in checks) and second_order
    verdict(
        10,
        ok,
        f"{_checks_line(checks)}; flow-derivative errors {', '.join(f'{e:.2e}' for e in errs)} "
        f"(halving ratios {', '.join(f'{r:.2f}' for r in ratios)}, expect 4)",
    )
