"""Time integration of the capillary fluid system, its quantum special case,
the semiclassical Schrodinger equation, and the bridges between them.

One explicit RK4 stepper drives the spectral method of lines for every
periodic system; the half-line quantum stepper is finite-difference based and
flagged experimental (no well-posedness theory backs it).
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from . import fields as F
from .errors import (
    DimensionError,
    InstabilityError,
    VacuumError,
)
from .grids import Grid, HALFLINE_1D
from .laws import LawPair


@dataclass
class FluidState:
    """Density/velocity snapshot; u holds one component array per axis."""

    grid: Grid
    rho: np.ndarray
    u: tuple
    t: float = 0.0

    def __post_init__(self):
        self.rho = F.check_field(self.grid, self.rho)
        self.u = tuple(F.check_field(self.grid, c) for c in self.u)
        if len(self.u) != self.grid.dim:
            raise DimensionError(f"{len(self.u)} velocity components on a {self.grid.dim}-d grid")

    def copy(self) -> "FluidState":
        return FluidState(self.grid, self.rho.copy(), tuple(c.copy() for c in self.u), self.t)


@dataclass
class ComplexState:
    """Complex reformulation z = u + i w with w the scaled density gradient."""

    grid: Grid
    z: tuple  # complex component arrays
    w: tuple
    a: np.ndarray
    ell: np.ndarray
    eps: float
    t: float = 0.0


@dataclass
class SolverConfig:
    dt: Optional[float] = None  # None: dispersive/hyperbolic CFL pick
    cfl_safety: float = 0.8
    dealias: bool = True
    rho_floor: float = 0.1
    store_every: int = 1


def cfl_dt(state: FluidState, eps: float, laws: LawPair, cfg: SolverConfig) -> float:
    """Auto step: min of the dispersive and hyperbolic CFL restrictions."""
    dx = state.grid.spacing
    gp = laws.pressure.deriv(state.rho, 1)
    sound = float(np.max(np.sqrt(np.maximum(gp * state.rho, 0.0))))
    umax = max(F.linf_norm(c) for c in state.u)
    dt_hyp = cfg.cfl_safety * dx / max(umax + sound, 1e-12)
    if eps > 0:
        amax = float(np.max(laws.capillarity.a(state.rho)))
        dt_disp = cfg.cfl_safety * dx**2 / (np.pi * eps * max(amax, 1e-12))
        return min(dt_hyp, dt_disp)
    return dt_hyp


def _rk4(y, rhs, dt, project=None):
    """One classical RK4 step on a flat tuple of arrays."""
    if project:
        y = project(y)
    k1 = rhs(y)
    y2 = tuple(a + 0.5 * dt * b for a, b in zip(y, k1))
    if project:
        y2 = project(y2)
    k2 = rhs(y2)
    y3 = tuple(a + 0.5 * dt * b for a, b in zip(y, k2))
    if project:
        y3 = project(y3)
    k3 = rhs(y3)
    y4 = tuple(a + dt * b for a, b in zip(y, k3))
    if project:
        y4 = project(y4)
    k4 = rhs(y4)
    out = tuple(
        a + dt / 6.0 * (b1 + 2.0 * b2 + 2.0 * b3 + b4)
        for a, b1, b2, b3, b4 in zip(y, k1, k2, k3, k4)
    )
    return project(out) if project else out


def _check_state(grid, arrays, t, floor):
    rho = arrays[0]
    if not np.all(np.isfinite(rho)) or any(not np.all(np.isfinite(c)) for c in arrays[1:]):
        raise InstabilityError("NaN/Inf during stepping", t=t)
    rho_min = float(rho.min())
    if rho_min < floor:
        raise VacuumError(f"density {rho_min:.4g} below floor {floor}", t=t, rho_min=rho_min)


def ek_rhs(grid: Grid, eps: float, laws: LawPair, dealias: bool):
    """Method-of-lines right-hand side for the capillary fluid system."""
    d = grid.dim
    filt = (lambda f: F.dealias(grid, f)) if (dealias and grid.periodic) else (lambda f: f)

    def rhs(y):
        rho, *u = y
        drho = -F.divergence(grid, [rho * u[a] for a in range(d)])
        grad_rho = F.gradient(grid, rho)
        K = laws.capillarity(rho)
        Kp = laws.capillarity.deriv(rho, 1)
        grad_sq = sum(g * g for g in grad_rho)
        cap = K * F.laplacian(grid, rho) + 0.5 * Kp * grad_sq
        g_rho = laws.pressure(rho)
        out_u = []
        for a in range(d):
            adv = sum(u[b] * F.derivative(grid, u[a], axis=b) for b in range(d))
            du = -adv - F.derivative(grid, g_rho, axis=a)
            if eps != 0.0:
                du = du + eps**2 * F.derivative(grid, cap, axis=a)
            out_u.append(filt(du))
        return (filt(drho),) + tuple(out_u)

    return rhs


def step_ek(state: FluidState, eps: float, laws: LawPair, cfg: SolverConfig, dt: Optional[float] = None) -> FluidState:
    """Advance one RK4 step of the spectral semi-discretization."""
    if not state.grid.periodic:
        raise DimensionError("step_ek integrates periodic grids; see step_ek_halfline")
    _check_state(state.grid, (state.rho,) + state.u, state.t, cfg.rho_floor)
    h = dt if dt is not None else (cfg.dt if cfg.dt is not None else cfl_dt(state, eps, laws, cfg))
    rhs = ek_rhs(state.grid, eps, laws, cfg.dealias)
    y = _rk4((state.rho,) + state.u, rhs, h)
    _check_state(state.grid, y, state.t + h, cfg.rho_floor)
    return FluidState(state.grid, y[0], tuple(y[1:]), state.t + h)


@dataclass
class Trajectory:
    """Stored history of a run on a uniform time grid."""

    grid: Grid
    times: np.ndarray
    rho: np.ndarray  # [nt, *grid.shape]
    u: np.ndarray  # [nt, d, *grid.shape]
    eps: float
    laws: LawPair

    @property
    def dt(self) -> float:
        return float(self.times[1] - self.times[0]) if len(self.times) > 1 else 0.0

    def state(self, i: int) -> FluidState:
        return FluidState(self.grid, self.rho[i], tuple(self.u[i]), float(self.times[i]))

    def __len__(self):
        return len(self.times)


def run_ek(state: FluidState, eps: float, laws: LawPair, T: float, cfg: SolverConfig) -> Trajectory:
    """Integrate to time T storing every cfg.store_every steps (uniform dt)."""
    h = cfg.dt if cfg.dt is not None else cfl_dt(state, eps, laws, cfg)
    nsteps = max(1, int(np.ceil(T / h - 1e-12)))
    h = T / nsteps
    rhos = [state.rho.copy()]
    us = [np.stack(state.u)]
    times = [state.t]
    s = state
    for i in range(nsteps):
        s = step_ek(s, eps, laws, cfg, dt=h)
        if (i + 1) % cfg.store_every == 0 or i == nsteps - 1:
            rhos.append(s.rho.copy())
            us.append(np.stack(s.u))
            times.append(s.t)
    return Trajectory(state.grid, np.array(times), np.stack(rhos), np.stack(us), eps, laws)


# ---------------------------------------------------------------------------
# complex-variable change and its inverse


def to_z(state: FluidState, eps: float, laws: LawPair) -> ComplexState:
    """w = eps sqrt(K/rho) grad rho, z = u + i w, a = sqrt(rho K),
    ell the integrated potential with ell(1) = 0."""
    rho = state.rho
    if rho.min() <= 0:
        raise VacuumError("nonpositive density in to_z", t=state.t, rho_min=float(rho.min()))
    grid = state.grid
    coeff = eps * np.sqrt(laws.capillarity(rho) / rho)
    w = tuple(coeff * g for g in F.gradient(grid, rho))
    z = tuple(state.u[a] + 1j * w[a] for a in range(grid.dim))
    a = laws.capillarity.a(rho)
    ell = eps * laws.capillarity.w_potential(rho)
    return ComplexState(grid, z, w, a, ell, eps, state.t)


def from_z(cs: ComplexState, laws: LawPair) -> FluidState:
    """Invert the potential ell = eps * int sqrt(K/s) ds by vectorized Newton
    (the integrand is positive, so ell is strictly monotone in rho)."""
    target = cs.ell / cs.eps
    rho = np.ones_like(cs.ell)
    for _ in range(60):
        val = laws.capillarity.w_potential(rho) - target
        slope = np.sqrt(laws.capillarity(rho) / rho)
        step = val / slope
        rho = np.clip(rho - step, 1e-10, None)
        if np.max(np.abs(step)) < 1e-15:
            break
    u = tuple(np.real(c) for c in cs.z)
    return FluidState(cs.grid, rho, u, cs.t)


# ---------------------------------------------------------------------------
# semiclassical Schrodinger splitting and the Madelung bridge


def step_nls(psi: np.ndarray, grid: Grid, eps: float, pressure, dt: float) -> np.ndarray:
    """Strang split step: half potential rotation, full Fourier kinetic step,
    half potential rotation.  Mass is conserved to rounding."""
    if not grid.periodic:
        raise DimensionError("step_nls integrates periodic grids")
    psi = np.asarray(psi, dtype=complex)
    half = np.exp(-1j * (0.5 * dt / eps) * pressure(np.abs(psi) ** 2))
    psi = half * psi
    k = grid.wavenumbers()
    if grid.dim == 1:
        k2 = k**2
    else:
        k2 = k[:, None] ** 2 + k[None, :] ** 2
    psi = np.fft.ifftn(np.exp(-1j * 0.5 * eps * dt * k2) * np.fft.fftn(psi))
    half = np.exp(-1j * (0.5 * dt / eps) * pressure(np.abs(psi) ** 2))
    return half * psi


def run_nls(psi0: np.ndarray, grid: Grid, eps: float, pressure, T: float, dt: float):
    """Integrate the splitting to time T; returns (times, psi history)."""
    nsteps = max(1, int(np.ceil(T / dt - 1e-12)))
    dt = T / nsteps
    psi = np.asarray(psi0, dtype=complex)
    out = [psi.copy()]
    times = [0.0]
    for i in range(nsteps):
        psi = step_nls(psi, grid, eps, pressure, dt)
        out.append(psi.copy())
        times.append((i + 1) * dt)
    return np.array(times), np.stack(out)


def madelung(psi: np.ndarray, grid: Grid, eps: float, floor: float = 1e-4) -> FluidState:
    """Fluid variables (|psi|^2, eps Im(conj(psi) grad psi)/|psi|^2)."""
    psi = np.asarray(psi, dtype=complex)
    rho = np.abs(psi) ** 2
    if rho.min() < floor:
        raise VacuumError(f"|psi|^2 = {rho.min():.3g} below floor {floor}", rho_min=float(rho.min()))
    u = tuple(eps * np.imag(np.conj(psi) * F.derivative(grid, psi, axis=a)) / rho for a in range(grid.dim))
    return FluidState(grid, rho, u)


# ---------------------------------------------------------------------------
# experimental half-line quantum stepper (K = 1/rho)


def qhd_halfline_rhs(grid: Grid, eps: float, laws: LawPair):
    if laws.capillarity.tag != "quantum":
        raise DimensionError("half-line stepping is implemented for K = 1/rho only")

    def rhs(y):
        rho, u = y
        d1 = lambda f: F.derivative(grid, f, order=1)
        rho_x = d1(rho)
        rho_xx = F.derivative(grid, rho, order=2)
        cap = rho_xx / rho - 0.5 * rho_x**2 / rho**2
        drho = -d1(rho * u)
        du = -u * d1(u) - laws.pressure.deriv(rho, 1) * rho_x + eps**2 * d1(cap)
        return (drho, du)

    return rhs


def _halfline_project(y):
    rho, u = y
    rho = rho.copy()
    u = u.copy()
    rho[0] = 1.0
    u[0] = 0.0
    return (rho, u)


def step_ek_halfline(state: FluidState, eps: float, laws: LawPair, cfg: SolverConfig, dt: Optional[float] = None) -> FluidState:
    """EXPERIMENTAL: one step of the half-line quantum system with the
    density/normal-velocity traces pinned at the boundary node.  Long-time
    output is unverified by design."""
    if state.grid.kind != HALFLINE_1D:
        raise DimensionError("step_ek_halfline requires a halfline-1d grid")
    _check_state(state.grid, (state.rho,) + state.u, state.t, cfg.rho_floor)
    h = dt if dt is not None else (cfg.dt if cfg.dt is not None else cfl_dt(state, eps, laws, cfg))
    rhs = qhd_halfline_rhs(state.grid, eps, laws)
    y = _rk4((state.rho, state.u[0]), rhs, h, project=_halfline_project)
    _check_state(state.grid, y, state.t + h, cfg.rho_floor)
    return FluidState(state.grid, y[0], (y[1],), state.t + h)


def run_ek_halfline(state: FluidState, eps: float, laws: LawPair, T: float, cfg: SolverConfig) -> Trajectory:
    """Integrate the experimental half-line stepper with an instability
    detector (sustained exponential norm growth over 10 steps aborts)."""
    h = cfg.dt if cfg.dt is not None else cfl_dt(state, eps, laws, cfg)
    nsteps = max(1, int(np.ceil(T / h - 1e-12)))
    h = T / nsteps
    rhos = [state.rho.copy()]
    us = [np.stack(state.u)]
    times = [state.t]
    s = state
    window = []
    for i in range(nsteps):
        s = step_ek_halfline(s, eps, laws, cfg, dt=h)
        norm = F.l2_norm(s.grid, s.rho - 1.0) + F.l2_norm(s.grid, s.u[0])
        window.append(norm)
        if len(window) > 10:
            window.pop(0)
            if window[-1] > 50.0 * window[0] and all(b > a for a, b in zip(window, window[1:])):
                raise InstabilityError(f"norm grew x{window[-1] / window[0]:.1f} over 10 steps", t=s.t)
        if (i + 1) % cfg.store_every == 0 or i == nsteps - 1:
            rhos.append(s.rho.copy())
            us.append(np.stack(s.u))
            times.append(s.t)
    return Trajectory(state.grid, np.array(times), np.stack(rhos), np.stack(us), eps, laws)
