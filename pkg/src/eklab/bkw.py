"""Expansion cascade on the torus and on the half line.

Rank 0 is the compressible Euler system; every higher rank is the
linearization of Euler around rank 0 driven by forcings that collect the
lower-order terms.  Forcings are never hand-expanded: they are defined as
minus the order-k coefficient of the full-system residual with the rank-k
unknowns zeroed, produced mechanically by the jet engine.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import fields as F
from . import jets as J
from .dynamics import FluidState, SolverConfig, Trajectory, _rk4, ek_rhs
from .errors import DependencyError, DimensionError, HyperbolicityError, InstabilityError
from .grids import Grid, HALFLINE_1D
from .laws import LawPair


# ---------------------------------------------------------------------------
# rank-0 solver


def solve_euler(state: FluidState, laws: LawPair, T: float, cfg: SolverConfig) -> Trajectory:
    """Integrate the Euler system (no dispersion) with a running
    hyperbolicity check min(g'(rho), rho) >= alpha; aborts with the partial
    history attached if the floor is crossed."""
    grid = state.grid
    gp0 = laws.pressure.deriv(state.rho, 1)
    alpha = 0.5 * min(float(np.min(gp0)), float(np.min(state.rho)))
    if alpha <= 0:
        raise HyperbolicityError("initial data violate g' > 0, rho > 0", t=state.t)

    if grid.periodic:
        rhs = ek_rhs(grid, 0.0, laws, cfg.dealias)
        project = None
    else:
        rhs = _euler_halfline_rhs(grid, laws)
        project = _nonpenetration_project

    from .dynamics import cfl_dt

    h = cfg.dt if cfg.dt is not None else cfl_dt(state, 0.0, laws, cfg)
    nsteps = max(1, int(np.ceil(T / h - 1e-12)))
    h = T / nsteps
    rhos = [state.rho.copy()]
    us = [np.stack(state.u)]
    times = [state.t]
    y = (state.rho,) + state.u
    t = state.t
    for _ in range(nsteps):
        y = _rk4(y, rhs, h, project=project)
        t += h
        rho = y[0]
        if not np.all(np.isfinite(rho)):
            raise InstabilityError("NaN in Euler solve", t=t)
        floor = min(float(np.min(laws.pressure.deriv(rho, 1))), float(np.min(rho)))
        if floor < alpha:
            partial = Trajectory(grid, np.array(times), np.stack(rhos), np.stack(us), 0.0, laws)
            raise HyperbolicityError(
                f"hyperbolicity floor {floor:.4g} < alpha {alpha:.4g}", t=t, partial_history=partial
            )
        rhos.append(rho.copy())
        us.append(np.stack(y[1:]))
        times.append(t)
    return Trajectory(grid, np.array(times), np.stack(rhos), np.stack(us), 0.0, laws)


def _nonpenetration_project(y):
    rho, u = y[0], y[1]
    u = u.copy()
    u[0] = 0.0
    return (rho, u) + tuple(y[2:])


def _euler_halfline_rhs(grid: Grid, laws: LawPair):
    def rhs(y):
        rho, u = y
        d1 = lambda f: F.derivative(grid, f, order=1)
        drho = -d1(rho * u)
        du = -u * d1(u) - laws.pressure.deriv(rho, 1) * d1(rho)
        return (drho, du)

    return rhs


# ---------------------------------------------------------------------------
# the cascade on the torus (velocity form)


@dataclass
class BKWExpansion:
    """Ordered interior terms r^k plus velocity (torus) or potential
    (half line) histories, with optional layer profiles attached by the
    boundary-layer builder."""

    grid: Grid
    laws: LawPair
    times: np.ndarray
    r: np.ndarray  # [N+1, nt, *grid.shape]
    v: np.ndarray  # velocity or potential per rank: [N+1, nt, *grid.shape]
    potential_form: bool = False
    layers: Optional[dict] = None
    boundary_traces: Optional[dict] = None

    @property
    def N(self) -> int:
        return self.r.shape[0] - 1

    @property
    def T(self) -> float:
        return float(self.times[-1])

    @property
    def dt(self) -> float:
        return float(self.times[1] - self.times[0])

    def rank_fields(self, k: int, i: int):
        return self.r[k, i], self.v[k, i]


def _cascade_rhs_all(grid: Grid, laws: LawPair, N: int, r_list, u_list, dealias: bool):
    """Right-hand sides of every rank at one instant.

    Rank 0 is Euler; rank k >= 1 is the linearization around rank 0 plus the
    jet-extracted forcing.  The lower-rank time derivatives feeding the
    forcings are the freshly computed right-hand sides, so the construction
    is exact at the semi-discrete level.
    """
    if grid.dim != 1:
        raise DimensionError("the cascade builder is one-dimensional")
    filt = (lambda f: F.dealias(grid, f)) if (dealias and grid.periodic) else (lambda f: f)
    d1 = lambda f: F.derivative(grid, f, order=1)

    rho0 = 1.0 + r_list[0]
    u0 = u_list[0]
    rhs_r = [filt(-d1(rho0 * u0))]
    rhs_u = [filt(-u0 * d1(u0) - d1(laws.pressure(rho0)))]
    gp0 = laws.pressure.deriv(rho0, 1)

    for k in range(1, N + 1):
        f1, f2 = _instant_forcing(grid, laws, k, r_list, u_list, rhs_r, rhs_u)
        rk, uk = r_list[k], u_list[k]
        drk = -d1(rk * u0 + rho0 * uk) + f1
        duk = -(u0 * d1(uk) + uk * d1(u0)) - d1(gp0 * rk) + f2
        rhs_r.append(filt(drk))
        rhs_u.append(filt(duk))
    return rhs_r, rhs_u


def _instant_forcing(grid: Grid, laws: LawPair, k: int, r_list, u_list, rhs_r, rhs_u):
    """(f1^k, f2^k): minus the order-k residual coefficient with the rank-k
    unknowns (fields and their time derivatives) zeroed."""
    zero = np.zeros(grid.shape)
    rjet = J.jet_from_fields(grid, [1.0 + r_list[0]] + [r_list[j] for j in range(1, k)] + [zero], k)
    ujet = J.jet_from_fields(grid, [u_list[j] for j in range(k)] + [zero], k)
    dtr = J.jet_from_fields(grid, [rhs_r[j] for j in range(k)] + [zero], k)
    dtu = J.jet_from_fields(grid, [rhs_u[j] for j in range(k)] + [zero], k)
    mass, momentum = J.ek_residual_jet(rjet, [ujet], laws, dtr, [dtu])
    return -mass.coeffs[k], -momentum[0].coeffs[k]


def mass_forcing_formula(grid: Grid, k: int, r_list, u_list):
    """Displayed convolution-sum form of the mass forcing,
    -div( sum_{j,l>=1, j+l=k} r^j u^l ); cross-checks the jet route."""
    total = np.zeros(grid.shape)
    for j in range(1, k):
        l = k - j
        if l >= 1:
            total = total + r_list[j] * u_list[l]
    return -F.divergence(grid, [total])


def build_expansion(grid: Grid, data, laws: LawPair, T: float, cfg: SolverConfig) -> BKWExpansion:
    """Solve ranks 0..N together (one RK4 over the stacked triangular
    system) from per-rank initial data [(r0^k, u0^k)].  This reproduces the
    sequential cascade while keeping all ranks on one time grid with no
    interpolation."""
    if not grid.periodic or grid.dim != 1:
        raise DimensionError("build_expansion runs on periodic-1d grids")
    N = len(data) - 1
    state0 = FluidState(grid, 1.0 + np.asarray(data[0][0], dtype=float), (np.asarray(data[0][1], dtype=float),))
    from .dynamics import cfl_dt

    h = cfg.dt if cfg.dt is not None else cfl_dt(state0, 0.0, laws, cfg)
    nsteps = max(1, int(np.ceil(T / h - 1e-12)))
    h = T / nsteps

    gp0 = laws.pressure.deriv(state0.rho, 1)
    alpha = 0.5 * min(float(np.min(gp0)), float(np.min(state0.rho)))
    if alpha <= 0:
        raise HyperbolicityError("initial data violate g' > 0, rho > 0", t=0.0)

    y = tuple(np.asarray(rk, dtype=float).copy() for rk, _ in data) + tuple(
        np.asarray(uk, dtype=float).copy() for _, uk in data
    )

    def rhs(yy):
        r_list = list(yy[: N + 1])
        u_list = list(yy[N + 1 :])
        rhs_r, rhs_u = _cascade_rhs_all(grid, laws, N, r_list, u_list, cfg.dealias)
        return tuple(rhs_r) + tuple(rhs_u)

    r_hist = [[y[k].copy()] for k in range(N + 1)]
    u_hist = [[y[N + 1 + k].copy()] for k in range(N + 1)]
    times = [0.0]
    t = 0.0
    for i in range(nsteps):
        y = _rk4(y, rhs, h)
        t += h
        rho0 = 1.0 + y[0]
        if not all(np.all(np.isfinite(c)) for c in y):
            raise InstabilityError("NaN in cascade integration", t=t)
        floor = min(float(np.min(laws.pressure.deriv(rho0, 1))), float(np.min(rho0)))
        if floor < alpha:
            raise HyperbolicityError(f"hyperbolicity floor {floor:.4g} < alpha {alpha:.4g}", t=t)
        if (i + 1) % cfg.store_every == 0 or i == nsteps - 1:
            for k in range(N + 1):
                r_hist[k].append(y[k].copy())
                u_hist[k].append(y[N + 1 + k].copy())
            times.append(t)
    return BKWExpansion(
        grid,
        laws,
        np.array(times),
        np.stack([np.stack(hh) for hh in r_hist]),
        np.stack([np.stack(hh) for hh in u_hist]),
    )


def cascade_forcing(expansion: BKWExpansion, k: int):
    """Forcing histories (f1^k, f2^k) recovered from a stored expansion.
    Requires ranks 0..k-1; the lower-rank time derivatives are re-evaluated
    from the cascade right-hand sides."""
    if k < 1:
        raise DependencyError("forcings start at rank 1")
    if k > expansion.N + 1:
        raise DependencyError(f"rank {k} needs ranks 0..{k - 1}; expansion holds 0..{expansion.N}")
    grid = expansion.grid
    laws = expansion.laws
    nt = len(expansion.times)
    f1 = np.empty((nt,) + grid.shape)
    f2 = np.empty((nt,) + grid.shape)
    for i in range(nt):
        r_list = [expansion.r[j, i] for j in range(k)]
        u_list = [expansion.v[j, i] for j in range(k)]
        rhs_r, rhs_u = _cascade_rhs_all(grid, laws, k - 1, r_list, u_list, dealias=True)
        f1[i], f2[i] = _instant_forcing(grid, laws, k, r_list + [np.zeros(grid.shape)], u_list + [np.zeros(grid.shape)], rhs_r, rhs_u)
    return f1, f2


def solve_linearized(
    k: int,
    background: Trajectory,
    forcing,
    data,
    laws: LawPair,
    dealias: bool = True,
) -> Trajectory:
    """Integrate the rank-k linear system over the background history.

    The stepper advances with twice the history spacing so every RK4 stage
    lands on a stored node (no interpolation of background or forcing).
    ``forcing`` is (f1_hist, f2_hist) on the background time grid, or None.
    """
    grid = background.grid
    if not grid.periodic:
        raise DimensionError("solve_linearized integrates periodic grids; see the half-line variant")
    nt = len(background.times)
    if nt < 3 or nt % 2 == 0:
        raise DependencyError("background history must hold an odd number (>= 3) of snapshots")
    if forcing is None:
        forcing = (np.zeros((nt,) + grid.shape), np.zeros((nt,) + grid.shape))
    f1, f2 = forcing
    d1 = lambda f: F.derivative(grid, f, order=1)
    filt = (lambda f: F.dealias(grid, f)) if dealias else (lambda f: f)

    def rhs_at(i):
        rho0 = 1.0 + background.rho[i]
        u0 = background.u[i, 0]
        gp0 = laws.pressure.deriv(rho0, 1)

        def rhs(y):
            rk, uk = y
            drk = -d1(rk * u0 + rho0 * uk) + f1[i]
            duk = -(u0 * d1(uk) + uk * d1(u0)) - d1(gp0 * rk) + f2[i]
            return (filt(drk), filt(duk))

        return rhs

    h = 2.0 * background.dt
    rk = np.asarray(data[0], dtype=float).copy()
    uk = np.asarray(data[1], dtype=float).copy()
    r_hist, u_hist, times = [rk.copy()], [uk.copy()], [background.times[0]]
    for i in range(0, nt - 2, 2):
        y = (rk, uk)
        s1 = rhs_at(i)(y)
        s2 = rhs_at(i + 1)(tuple(a + 0.5 * h * b for a, b in zip(y, s1)))
        s3 = rhs_at(i + 1)(tuple(a + 0.5 * h * b for a, b in zip(y, s2)))
        s4 = rhs_at(i + 2)(tuple(a + h * b for a, b in zip(y, s3)))
        rk, uk = tuple(
            a + h / 6.0 * (b1 + 2 * b2 + 2 * b3 + b4) for a, b1, b2, b3, b4 in zip(y, s1, s2, s3, s4)
        )
        r_hist.append(rk.copy())
        u_hist.append(uk.copy())
        times.append(float(background.times[i + 2]))
    return Trajectory(grid, np.array(times), np.stack(r_hist), np.stack(u_hist)[:, None], 0.0, laws)


# ---------------------------------------------------------------------------
# assembly and residual reports


def assemble_interior(expansion: BKWExpansion, eps: float):
    """Evaluate the truncated sum: (rho_app, u_app) histories."""
    powers = eps ** np.arange(expansion.N + 1)
    rho_app = 1.0 + np.tensordot(powers, expansion.r, axes=(0, 0))
    u_app = np.tensordot(powers, expansion.v, axes=(0, 0))
    return rho_app, u_app


def interior_residual(expansion: BKWExpansion, eps: float):
    """Residual histories (e1, e2) of the assembled interior fields in the
    full system, with time derivatives by 4th-order differencing of the
    stored histories (independent of the cascade construction)."""
    grid = expansion.grid
    laws = expansion.laws
    rho_app, u_app = assemble_interior(expansion, eps)
    dt = expansion.dt
    dtr = F.time_derivative(rho_app, dt, 1)
    dtu = F.time_derivative(u_app, dt, 1)
    nt = rho_app.shape[0]
    e1 = np.empty_like(rho_app)
    e2 = np.empty_like(u_app)
    d1 = lambda f: F.derivative(grid, f, order=1)
    for i in range(nt):
        rho, u = rho_app[i], u_app[i]
        e1[i] = dtr[i] + d1(rho * u)
        grad_rho = d1(rho)
        cap = laws.capillarity(rho) * F.derivative(grid, rho, order=2) + 0.5 * laws.capillarity.deriv(rho, 1) * grad_rho**2
        e2[i] = dtu[i] + u * d1(u) + laws.pressure.deriv(rho, 1) * grad_rho - eps**2 * d1(cap)
    return e1, e2


def sup_l2_residual(expansion: BKWExpansion, eps: float, skip_edges: int = 3):
    """sup over interior snapshots of the L2 norms of (e1, e2)."""
    e1, e2 = interior_residual(expansion, eps)
    grid = expansion.grid
    sl = slice(skip_edges, len(expansion.times) - skip_edges)
    n1 = max(F.l2_norm(grid, e) for e in e1[sl])
    n2 = max(F.l2_norm(grid, e) for e in e2[sl])
    return n1, n2


def residual_jet_coefficients(expansion: BKWExpansion, i: int, time_derivative_mode: str = "fd"):
    """Coefficients 0..N of the full-system residual evaluated on the stored
    ranks at snapshot i.  With mode 'fd' the time derivatives come from
    4th-order differencing of the histories (independent oracle); with
    'cascade' they are the cascade right-hand sides (wiring check)."""
    grid = expansion.grid
    laws = expansion.laws
    N = expansion.N
    r_list = [expansion.r[k, i] for k in range(N + 1)]
    u_list = [expansion.v[k, i] for k in range(N + 1)]
    if time_derivative_mode == "fd":
        dtr_list = [F.time_derivative(expansion.r[k], expansion.dt, 1)[i] for k in range(N + 1)]
        dtu_list = [F.time_derivative(expansion.v[k], expansion.dt, 1)[i] for k in range(N + 1)]
    elif time_derivative_mode == "cascade":
        dtr_list, dtu_list = _cascade_rhs_all(grid, laws, N, r_list, u_list, dealias=True)
    else:
        raise ValueError("time_derivative_mode must be 'fd' or 'cascade'")
    rjet = J.jet_from_fields(grid, [1.0 + r_list[0]] + r_list[1:], N)
    ujet = J.jet_from_fields(grid, u_list, N)
    dtr = J.jet_from_fields(grid, dtr_list, N)
    dtu = J.jet_from_fields(grid, dtu_list, N)
    mass, momentum = J.ek_residual_jet(rjet, [ujet], laws, dtr, [dtu])
    return mass.coeffs, momentum[0].coeffs


# ---------------------------------------------------------------------------
# compatibility conditions at the half-line boundary


def compatibility_check(grid: Grid, data, laws: LawPair, depth: int = 1) -> dict:
    """Boundary compatibility report for per-rank half-line data.

    Order 0: the constrained traces (density offset and normal velocity)
    vanish rank by rank.  Order 1: the time derivative of the constrained
    traces, evaluated through the equations and expanded in powers of the
    small parameter, vanishes to the requested depth.  Report only.
    """
    if grid.kind != HALFLINE_1D:
        raise DimensionError("compatibility conditions live on the half line")
    N = len(data) - 1
    report = {"order0": {}, "order1": {}}
    for k, (rk, uk) in enumerate(data):
        report["order0"][k] = {
            "rho_trace": abs(float(np.asarray(rk)[0])),
            "u_trace": abs(float(np.asarray(uk)[0])),
        }
    order = max(N, depth)
    zero = np.zeros(grid.shape)
    r_fields = [1.0 + np.asarray(data[0][0], dtype=float)] + [
        np.asarray(data[j][0], dtype=float) for j in range(1, N + 1)
    ]
    u_fields = [np.asarray(data[j][1], dtype=float) for j in range(N + 1)]
    rjet = J.jet_from_fields(grid, r_fields, order)
    ujet = J.jet_from_fields(grid, u_fields, order)
    zjet = J.jet_from_fields(grid, [zero], order)
    # with zero time-derivative inputs the residual coefficients are minus
    # the evolution map applied to the data; their traces give order 1
    mass, momentum = J.ek_residual_jet(rjet, [ujet], laws, zjet, [zjet])
    for k in range(min(depth, order) + 1):
        report["order1"][k] = {
            "mass": abs(float(mass.coeffs[k][0])),
            "momentum": abs(float(momentum[0].coeffs[k][0])),
        }
    return report
