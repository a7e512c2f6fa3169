import numpy as np
import pytest

from baryrom import (
    DivergedSolutionError,
    Grid1D,
    ShapeMismatchError,
    SolverConfig,
    initial_profile,
    run,
    step,
)
from baryrom.solver import Stepper, resolve_backend
from baryrom._kernels import HAVE_NUMBA

BACKENDS = ["numpy"] + (["numba"] if HAVE_NUMBA else [])


def periodic_laplacian_dense(n, dx):
    L = np.zeros((n, n))
    for i in range(n):
        L[i, i] = -2.0
        L[i, (i + 1) % n] = 1.0
        L[i, (i - 1) % n] = 1.0
    return L / dx**2


# ------------------------------------------------------------- single step

@pytest.mark.parametrize("backend", BACKENDS)
def test_constant_state_is_fixed_point(backend):
    grid = Grid1D(32, 1.0)
    cfg = SolverConfig(nu=0.2, dt=0.01, steps=1)
    u = np.full(32, 3.7)
    out = step(u, u, cfg, grid, backend=backend)
    np.testing.assert_allclose(out, u, atol=1e-13)


@pytest.mark.parametrize("backend", BACKENDS)
def test_implicit_solve_matches_dense_oracle(backend):
    # diffusion only: one step must solve (I - nu dt L) u = u_old exactly
    n, nu, dt = 16, 0.3, 0.01
    grid = Grid1D(n, 1.0)
    cfg = SolverConfig(nu=nu, dt=dt, steps=1, convection=False)
    A = np.eye(n) - nu * dt * periodic_laplacian_dense(n, grid.dx)
    rng = np.random.default_rng(0)
    for _ in range(5):
        u = rng.standard_normal(n)
        np.testing.assert_allclose(step(u, u, cfg, grid, backend=backend),
                                   np.linalg.solve(A, u), atol=1e-13)


@pytest.mark.parametrize("backend", BACKENDS)
def test_full_step_matches_dense_oracle(backend):
    # with convection: rhs = u - dt*(1.5 N(u1) - 0.5 N(u2)), skew form
    n, nu, dt = 24, 0.05, 0.002
    grid = Grid1D(n, 2 * np.pi)
    cfg = SolverConfig(nu=nu, dt=dt, steps=1)
    A = np.eye(n) - nu * dt * periodic_laplacian_dense(n, grid.dx)
    rng = np.random.default_rng(1)
    u1 = 1.0 + 0.3 * rng.standard_normal(n)
    u2 = 1.0 + 0.3 * rng.standard_normal(n)

    def conv(v):
        vp = np.roll(v, -1)
        vm = np.roll(v, 1)
        return (0.5 * v * (vp - vm) + 0.25 * (vp**2 - vm**2)) / (2 * grid.dx)

    rhs = u1 - dt * (1.5 * conv(u1) - 0.5 * conv(u2))
    np.testing.assert_allclose(step(u1, u2, cfg, grid, backend=backend),
                               np.linalg.solve(A, rhs), atol=1e-13)


def test_step_validates_shapes():
    grid = Grid1D(16, 1.0)
    cfg = SolverConfig(nu=0.1, dt=0.01, steps=1)
    with pytest.raises(ShapeMismatchError):
        step(np.zeros(8), np.zeros(8), cfg, grid)


# ------------------------------------------------------------- convergence

def test_heat_limit_temporal_first_order():
    # convection off, compare against the exact semi-discrete decay of the
    # grid eigenmode sin(x): error must halve when dt halves
    grid = Grid1D(64, 2 * np.pi)
    nu, t_end = 0.5, 0.5
    u0 = np.sin(grid.x)
    # sin(x) is an exact eigenvector of the 3-point Laplacian
    lam = -nu * (2.0 - 2.0 * np.cos(2 * np.pi / grid.n)) / grid.dx**2
    exact = np.exp(lam * t_end) * u0
    errs = []
    for dt in (1e-2, 5e-3, 2.5e-3):
        steps = round(t_end / dt)
        cfg = SolverConfig(nu=nu, dt=dt, steps=steps, initial=u0,
                           save_every=steps, convection=False)
        snap = run(cfg, grid)
        errs.append(np.max(np.abs(snap.values[:, -1] - exact)))
    for a, b in zip(errs, errs[1:]):
        assert 1.7 < a / b < 2.3


def test_heat_limit_tracks_continuum_solution():
    grid = Grid1D(256, 2 * np.pi)
    nu, t_end, dt = 0.3, 0.4, 1e-3
    steps = round(t_end / dt)
    cfg = SolverConfig(nu=nu, dt=dt, steps=steps, initial=np.sin(grid.x),
                       save_every=steps, convection=False)
    snap = run(cfg, grid)
    exact = np.exp(-nu * t_end) * np.sin(grid.x)
    assert np.max(np.abs(snap.values[:, -1] - exact)) < 5e-4  # O(dt) + O(dx^2)


def test_spatial_second_order():
    # full nonlinear scheme vs a fine-grid reference at matching points
    nu, dt, t_end = 0.1, 1e-4, 0.25
    steps = round(t_end / dt)
    length = 2 * np.pi

    def final_state(n):
        grid = Grid1D(n, length)
        cfg = SolverConfig(nu=nu, dt=dt, steps=steps, initial="two_mode",
                           save_every=steps)
        return run(cfg, grid).values[:, -1]

    ref = final_state(512)
    errs = []
    for n in (32, 64, 128):
        coarse = final_state(n)
        stride = 512 // n
        errs.append(np.max(np.abs(coarse - ref[::stride])))
    for a, b in zip(errs, errs[1:]):
        assert 3.0 < a / b < 5.2


# --------------------------------------------------------------- invariants

@pytest.mark.parametrize("backend", BACKENDS)
def test_momentum_conservation(backend):
    grid = Grid1D(128, 2 * np.pi)
    cfg = SolverConfig(nu=0.05, dt=1e-3, steps=200, save_every=1)
    snap = run(cfg, grid, backend=backend)
    means = snap.values.mean(axis=0)
    assert np.max(np.abs(np.diff(means))) < 1e-12


@pytest.mark.parametrize("backend", BACKENDS)
def test_diffusion_never_amplifies(backend):
    grid = Grid1D(64, 1.0)
    cfg = SolverConfig(nu=0.4, dt=0.05, steps=1, convection=False)
    rng = np.random.default_rng(3)
    for _ in range(10):
        u = rng.standard_normal(64)
        out = step(u, u, cfg, grid, backend=backend)
        assert np.linalg.norm(out) <= np.linalg.norm(u) * (1 + 1e-14)


# --------------------------------------------------------------------- run

def test_run_zero_steps_returns_initial():
    grid = Grid1D(32, 2 * np.pi)
    cfg = SolverConfig(nu=0.1, dt=1e-3, steps=0)
    snap = run(cfg, grid)
    np.testing.assert_array_equal(snap.values[:, 0], initial_profile(cfg, grid))
    assert snap.values.shape == (32, 1)
    assert snap.times[0] == 0.0


def test_run_strong_damping_reaches_uniform_state():
    grid = Grid1D(64, 2 * np.pi)
    cfg = SolverConfig(nu=2.0, dt=1e-3, steps=8000, save_every=8000)
    final = run(cfg, grid).values[:, -1]
    assert np.max(np.abs(final - final.mean())) < 1e-6


@pytest.mark.parametrize("backend", BACKENDS)
def test_run_is_deterministic(backend):
    grid = Grid1D(48, 2 * np.pi)
    cfg = SolverConfig(nu=0.07, dt=1e-3, steps=60, save_every=10, transient=15)
    a = run(cfg, grid, backend=backend)
    b = run(cfg, grid, backend=backend)
    assert a.values.tobytes() == b.values.tobytes()


@pytest.mark.skipif(not HAVE_NUMBA, reason="numba unavailable")
def test_backends_agree():
    grid = Grid1D(96, 2 * np.pi)
    cfg = SolverConfig(nu=0.06, dt=1e-3, steps=300, save_every=60, transient=40)
    a = run(cfg, grid, backend="numba")
    b = run(cfg, grid, backend="numpy")
    np.testing.assert_allclose(a.values, b.values, rtol=1e-10, atol=1e-12)


def test_backend_env_flag(monkeypatch):
    monkeypatch.setenv("BARYROM_NO_NUMBA", "1")
    assert resolve_backend() == "numpy"
    monkeypatch.setenv("BARYROM_NO_NUMBA", "0")
    if HAVE_NUMBA:
        assert resolve_backend() == "numba"


def test_chunked_advance_composes_exactly():
    grid = Grid1D(40, 2 * np.pi)
    cfg = SolverConfig(nu=0.08, dt=1e-3, steps=1)
    stepper = Stepper(cfg, grid)
    u0 = initial_profile(cfg, grid)
    ua, upa = stepper.advance(u0.copy(), u0.copy(), 12)
    ub, upb = u0.copy(), u0.copy()
    for _ in range(4):
        ub, upb = stepper.advance(ub, upb, 3)
    assert ua.tobytes() == ub.tobytes() and upa.tobytes() == upb.tobytes()


def test_divergence_detected():
    grid = Grid1D(32, 2 * np.pi)
    cfg = SolverConfig(nu=0.01, dt=1e-3, steps=10,
                       initial=1e7 * np.sin(Grid1D(32, 2 * np.pi).x))
    with pytest.raises(DivergedSolutionError):
        run(cfg, grid)


def test_unknown_profile_rejected():
    grid = Grid1D(32, 2 * np.pi)
    with pytest.raises(ValueError):
        initial_profile(SolverConfig(nu=0.1, dt=1e-3, steps=1, initial="sawtooth"),
                        grid)


def test_custom_initial_vector():
    grid = Grid1D(32, 2 * np.pi)
    u0 = np.cos(3 * grid.x)
    cfg = SolverConfig(nu=0.1, dt=1e-3, steps=0, initial=u0)
    np.testing.assert_array_equal(run(cfg, grid).values[:, 0], u0)
