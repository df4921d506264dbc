"""Energy functionals and trajectory monitors.

The hierarchy couples the physical energy with weighted H^{2n}-level
functionals whose weights phi_n = a^{2n} rho, psi_n = a^{2n} g' and theta_n
(fixed by a quadrature identity) are chosen so the loss-of-derivative terms
cancel.  All monitors are pure observers of stored trajectories.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import fields as F
from .dynamics import FluidState, Trajectory, to_z
from .errors import DomainValidityError, HistoryTooShortError
from .grids import Grid
from .laws import LawPair


# ---------------------------------------------------------------------------
# weights


@dataclass
class EnergyWeights:
    """Weight laws of rho for the order-n functional.

    theta_n is pinned by theta_n(1) = 1 and the quadrature identity
    (theta_n^2)' / 2 = a^{2n}; its derivative is evaluated from that identity
    so the cancellation used by the rate estimate holds to rounding.
    """

    laws: LawPair
    n: int
    theta_ref: float = 1.0

    def a2n(self, rho):
        return self.laws.capillarity.a(rho) ** (2 * self.n)

    def phi(self, rho):
        return self.a2n(rho) * np.asarray(rho, dtype=float)

    def psi(self, rho):
        return self.a2n(rho) * self.laws.pressure.deriv(rho, 1)

    def theta_sq(self, rho):
        return self.theta_ref**2 + 2.0 * self.laws.capillarity.a2n_antiderivative(rho, self.n)

    def theta(self, rho):
        t2 = self.theta_sq(rho)
        if np.any(t2 <= 0):
            raise DomainValidityError("theta_n^2 nonpositive: outside the weight validity interval")
        return np.sqrt(t2)

    def theta_prime(self, rho):
        return self.a2n(rho) / self.theta(rho)

    # identities used by the rate estimate; both vanish to rounding
    def weight_identity(self, rho):
        return -self.phi(rho) * self.laws.pressure.deriv(rho, 1) + self.psi(rho) * np.asarray(rho, dtype=float)

    def theta_identity(self, rho):
        rho = np.asarray(rho, dtype=float)
        a = self.laws.capillarity.a(rho)
        K = self.laws.capillarity(rho)
        return self.theta(rho) * self.theta_prime(rho) * a * np.sqrt(rho / K) - self.phi(rho)


# ---------------------------------------------------------------------------
# energies


def physical_energy(state: FluidState, eps: float, laws: LawPair) -> float:
    """Conserved functional rho |z|^2 / 2 + G(rho) integrated over the domain
    (G' = g, G(1) = 0); evaluated directly from (rho, u)."""
    grid = state.grid
    rho = state.rho
    kinetic = 0.5 * rho * sum(c**2 for c in state.u)
    grad_rho = F.gradient(grid, rho)
    cap = 0.5 * eps**2 * laws.capillarity(rho) * sum(g**2 for g in grad_rho)
    return float(F.integrate(grid, kinetic + cap + laws.pressure.potential(rho)))


def _iterated_laplacian(grid: Grid, f, n: int):
    out = f
    for _ in range(n):
        out = F.laplacian(grid, out)
    return out


def modified_energy(state: FluidState, eps: float, laws: LawPair, n: int, weights: Optional[EnergyWeights] = None) -> float:
    """Order-n weighted functional
    (1/2) int a^{2n} rho |Q lap^n z|^2 + |P(theta_n lap^n z)|^2
            + g' a^{2n} |lap^n (rho-1)|^2."""
    w = weights if weights is not None else EnergyWeights(laws, n)
    grid = state.grid
    rho = state.rho
    cs = to_z(state, eps, laws)
    lap_z = tuple(_iterated_laplacian(grid, c, n) for c in cs.z)
    lap_r = _iterated_laplacian(grid, rho - 1.0, n)
    phi = w.phi(rho)
    psi = w.psi(rho)
    if grid.dim == 1:
        # Q = identity, P = 0 in one dimension
        q_term = phi * np.abs(lap_z[0]) ** 2
        p_term = 0.0
    else:
        q, p = F.leray_project(grid, lap_z)
        theta_lap = tuple(w.theta(rho) * c for c in lap_z)
        _, p_theta = F.leray_project(grid, theta_lap)
        q_term = phi * sum(np.abs(c) ** 2 for c in q)
        p_term = sum(np.abs(c) ** 2 for c in p_theta)
    density = 0.5 * (q_term + p_term + psi * np.abs(lap_r) ** 2)
    return float(F.integrate(grid, density))


def difference_energy(exact: FluidState, approx: FluidState, eps: float, laws: LawPair, n: int, weights: Optional[EnergyWeights] = None) -> float:
    """Same functional applied to the difference of the complex variables and
    densities, weights evaluated at the exact state."""
    w = weights if weights is not None else EnergyWeights(laws, n)
    grid = exact.grid
    za = to_z(exact, eps, laws)
    zb = to_z(approx, eps, laws)
    dz = tuple(a - b for a, b in zip(za.z, zb.z))
    dr = exact.rho - approx.rho
    lap_z = tuple(_iterated_laplacian(grid, c, n) for c in dz)
    lap_r = _iterated_laplacian(grid, dr, n)
    rho = exact.rho
    phi = w.phi(rho)
    psi = w.psi(rho)
    if grid.dim == 1:
        q_term = phi * np.abs(lap_z[0]) ** 2
        p_term = 0.0
    else:
        q, p = F.leray_project(grid, lap_z)
        theta_lap = tuple(w.theta(rho) * c for c in lap_z)
        _, p_theta = F.leray_project(grid, theta_lap)
        q_term = phi * sum(np.abs(c) ** 2 for c in q)
        p_term = sum(np.abs(c) ** 2 for c in p_theta)
    density = 0.5 * (q_term + p_term + psi * np.abs(lap_r) ** 2)
    return float(F.integrate(grid, density))


# ---------------------------------------------------------------------------
# monitors


@dataclass
class EnergyReport:
    """Column-oriented time series of energy diagnostics."""

    times: np.ndarray
    series: dict  # name -> array
    constants: dict = field(default_factory=dict)

    def to_csv(self, path):
        names = list(self.series)
        with open(path, "w") as fh:
            fh.write(",".join(["t"] + names) + "\n")
            for i, t in enumerate(self.times):
                row = [format(t, ".17g")] + [format(self.series[k][i], ".17g") for k in names]
                fh.write(",".join(row) + "\n")

    def sidecar(self, path):
        with open(path, "w") as fh:
            json.dump(self.constants, fh, indent=2, sort_keys=True)
            fh.write("\n")


def _z_norms(state: FluidState, eps: float, laws: LawPair, n: int):
    cs = to_z(state, eps, laws)
    grid = state.grid
    z_norm = np.sqrt(sum(F.sobolev_norm(grid, c, 2 * n) ** 2 for c in cs.z))
    r_norm = F.sobolev_norm(grid, state.rho - 1.0, 2 * n)
    return z_norm, r_norm


def norm_equivalence_probe(traj: Trajectory, n: int, eps: Optional[float] = None):
    """Empirical two-sided comparison of E_0 + E_n against the squared
    H^{2n} norms; returns (c_est, C_est, ratio series)."""
    eps = traj.eps if eps is None else eps
    w0 = EnergyWeights(traj.laws, 0)
    wn = EnergyWeights(traj.laws, n)
    ratios = np.full(len(traj), np.nan)
    for i in range(len(traj)):
        s = traj.state(i)
        z_norm, r_norm = _z_norms(s, eps, traj.laws, n)
        denom = z_norm**2 + r_norm**2
        if denom < 1e-28:  # skip zero states: 0/0 guarded
            continue
        e = modified_energy(s, eps, traj.laws, 0, w0) + modified_energy(s, eps, traj.laws, n, wn)
        ratios[i] = e / denom
    good = ratios[np.isfinite(ratios)]
    if len(good) == 0:
        return 0.0, 0.0, ratios
    return float(good.min()), float(good.max()), ratios


def energy_rate_monitor(traj: Trajectory, n: int, eps: Optional[float] = None) -> EnergyReport:
    """Ratio of dE_n/dt to the norm bracket
    (||z||_{H^{2n}} + ||rho-1||_{H^{2n}})^2 (||u||_{W^{1,inf}} + ||rho||_{W^{2,inf}});
    boundedness of the max across a sweep is the epsilon-uniformity signal."""
    eps = traj.eps if eps is None else eps
    wn = EnergyWeights(traj.laws, n)
    nt = len(traj)
    if nt < 6:
        raise HistoryTooShortError("rate monitor needs at least 6 snapshots")
    E = np.array([modified_energy(traj.state(i), eps, traj.laws, n, wn) for i in range(nt)])
    dE = F.time_derivative(E, traj.dt, 1, order=4)
    ratio = np.full(nt, np.nan)
    for i in range(nt):
        s = traj.state(i)
        z_norm, r_norm = _z_norms(s, eps, traj.laws, n)
        bracket = (z_norm + r_norm) ** 2
        pointwise = F.wk_inf_norm(s.grid, s.u[0], 1) + F.wk_inf_norm(s.grid, s.rho, 2)
        for extra in s.u[1:]:
            pointwise += F.wk_inf_norm(s.grid, extra, 1)
        denom = bracket * pointwise
        if denom > 1e-24:
            ratio[i] = abs(dE[i]) / denom
    finite = ratio[np.isfinite(ratio)]
    constants = {"max_ratio": float(finite.max()) if len(finite) else 0.0, "n": n, "eps": eps}
    return EnergyReport(traj.times, {"E_n": E, "dE_dt": dE, "ratio": ratio}, constants)


def difference_energy_monitor(exact: Trajectory, approx: Trajectory, n: int, eps: Optional[float] = None) -> EnergyReport:
    """Difference-energy series with a growth-law fit
    E(t) <= (E(0) + source) exp(Lambda t); the fitted source must track the
    square of the consistency order of the approximate trajectory."""
    eps = exact.eps if eps is None else eps
    if len(exact) != len(approx) or abs(exact.dt - approx.dt) > 1e-14:
        raise HistoryTooShortError("trajectories must share the time mesh")
    wn = EnergyWeights(exact.laws, n)
    nt = len(exact)
    E = np.array([
        difference_energy(exact.state(i), approx.state(i), eps, exact.laws, n, wn)
        for i in range(nt)
    ])
    t = exact.times
    sup = float(E.max())
    # growth exponent from the window where the difference is appreciable
    mask = E > max(sup * 1e-3, 1e-300)
    if mask.sum() >= 2 and sup > 0:
        tt = t[mask]
        yy = np.log(E[mask])
        lam = float(np.polyfit(tt, yy, 1)[0]) if len(tt) > 1 else 0.0
    else:
        lam = 0.0
    source = float(max(np.max(E * np.exp(-lam * (t - t[0]))) - E[0], 0.0)) if sup > 0 else 0.0
    constants = {"Lambda": lam, "source": source, "sup": sup, "E0": float(E[0]), "n": n, "eps": eps}
    return EnergyReport(t, {"E_diff": E}, constants)


# ---------------------------------------------------------------------------
# half-line tangential diagnostics


def tangential_energy(traj: Trajectory, alpha0: int, eps: Optional[float] = None) -> np.ndarray:
    """E_alpha(t) = (1/2) int rho |d_t^{alpha0} z|^2 + g'(rho) |d_t^{alpha0} rho|^2
    on the half line (only time derivatives are tangential in one dimension)."""
    eps = traj.eps if eps is None else eps
    grid = traj.grid
    nt = len(traj)
    z_hist = np.stack([np.asarray(to_z(traj.state(i), eps, traj.laws).z[0]) for i in range(nt)])
    dz = F.time_derivative(z_hist, traj.dt, alpha0) if alpha0 else z_hist
    dr = F.time_derivative(traj.rho, traj.dt, alpha0) if alpha0 else traj.rho
    out = np.empty(nt)
    for i in range(nt):
        rho = traj.rho[i]
        gp = traj.laws.pressure.deriv(rho, 1)
        out[i] = 0.5 * F.integrate(grid, rho * np.abs(dz[i]) ** 2 + gp * np.abs(dr[i]) ** 2)
    return out


def normal_curvature_reconstruction(traj: Trajectory, i: int, eps: Optional[float] = None):
    """Second normal derivative of z recovered from the evolution equation
    (the noncharacteristicity trade) against direct differencing; returns
    (reconstructed, direct, relative error)."""
    eps = traj.eps if eps is None else eps
    grid = traj.grid
    nt = len(traj)
    z_hist = np.stack([np.asarray(to_z(traj.state(j), eps, traj.laws).z[0]) for j in range(nt)])
    dz_dt = F.time_derivative(z_hist, traj.dt, 1)[i]
    s = traj.state(i)
    cs = to_z(s, eps, traj.laws)
    z = cs.z[0]
    w = cs.w[0]
    u = s.u[0]
    zx = F.derivative(grid, z, order=1)
    g_x = F.derivative(grid, traj.laws.pressure(s.rho), order=1)
    rec = 1j * dz_dt / eps + (1j / eps) * (u * zx + 1j * zx * w + g_x)
    direct = F.derivative(grid, z, order=2)
    # compare away from the boundary closures
    sl = slice(4, -4)
    scale = max(float(np.max(np.abs(z))), 1e-30)
    err = float(np.max(np.abs(rec[sl] - direct[sl]))) / scale
    return rec, direct, err
