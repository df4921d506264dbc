"""Truncated power series in the small parameter with field coefficients.

An EpsilonJet of order N stores coefficients c_0..c_N of
c_0 + eps c_1 + ... + eps^N c_N, each a field on a common grid (scalars are
broadcast).  Arithmetic never reads beyond the truncation order, so ring
identities hold exactly at fixed order.

The jets mechanize the expansion cascade: the forcing of rank k is minus the
order-k coefficient of the full system residual with the rank-k unknowns
zeroed, which sidesteps any hand expansion of the nonlinear terms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import fields as F
from .errors import ShapeError
from .grids import Grid


@dataclass
class EpsilonJet:
    """coeffs[k] is the coefficient of eps^k; all coefficients share a grid."""

    grid: Grid
    coeffs: list

    def __post_init__(self):
        self.coeffs = [np.asarray(c, dtype=self._dtype()) for c in self.coeffs]
        shape = self.grid.shape
        self.coeffs = [np.broadcast_to(c, shape).copy() if c.shape != shape else c for c in self.coeffs]

    def _dtype(self):
        return complex if any(np.iscomplexobj(c) for c in self.coeffs) else float

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    def copy(self) -> "EpsilonJet":
        return EpsilonJet(self.grid, [c.copy() for c in self.coeffs])

    def check_compatible(self, other: "EpsilonJet"):
        self.grid.check_same(other.grid)
        if self.order != other.order:
            raise ShapeError(f"jet order mismatch: {self.order} vs {other.order}")

    # -- linear structure ---------------------------------------------------

    def __add__(self, other):
        if isinstance(other, EpsilonJet):
            self.check_compatible(other)
            return EpsilonJet(self.grid, [a + b for a, b in zip(self.coeffs, other.coeffs)])
        out = self.copy()
        out.coeffs[0] = out.coeffs[0] + other
        return out

    __radd__ = __add__

    def __neg__(self):
        return EpsilonJet(self.grid, [-c for c in self.coeffs])

    def __sub__(self, other):
        return self + (-other if isinstance(other, EpsilonJet) else -np.asarray(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, EpsilonJet):
            return jet_mul(self, other)
        return EpsilonJet(self.grid, [c * other for c in self.coeffs])

    __rmul__ = __mul__

    # -- evaluation and reshaping -------------------------------------------

    def __call__(self, eps: float) -> np.ndarray:
        out = np.zeros(self.grid.shape, dtype=self.coeffs[0].dtype)
        for k in range(self.order, -1, -1):
            out = out * eps + self.coeffs[k]
        return out

    def shifted(self, s: int) -> "EpsilonJet":
        """Multiply by eps^s: push coefficients up s slots, truncate the top."""
        if s < 0:
            raise ValueError("shift must be nonnegative")
        zeros = [np.zeros(self.grid.shape, dtype=self.coeffs[0].dtype) for _ in range(min(s, self.order + 1))]
        return EpsilonJet(self.grid, (zeros + [c.copy() for c in self.coeffs])[: self.order + 1])

    def map_coeffs(self, fn) -> "EpsilonJet":
        return EpsilonJet(self.grid, [fn(c) for c in self.coeffs])


def constant_jet(grid: Grid, value, order: int) -> EpsilonJet:
    coeffs = [np.full(grid.shape, 0.0) for _ in range(order + 1)]
    coeffs[0] = np.broadcast_to(np.asarray(value, dtype=float), grid.shape).copy()
    return EpsilonJet(grid, coeffs)


def jet_from_fields(grid: Grid, field_list, order: int) -> EpsilonJet:
    """Jet with the given fields as leading coefficients, zero-padded."""
    coeffs = [np.asarray(f) for f in field_list]
    dtype = complex if any(np.iscomplexobj(c) for c in coeffs) else float
    while len(coeffs) < order + 1:
        coeffs.append(np.zeros(grid.shape, dtype=dtype))
    return EpsilonJet(grid, coeffs[: order + 1])


def jet_mul(a: EpsilonJet, b: EpsilonJet) -> EpsilonJet:
    """Truncated Cauchy product."""
    a.check_compatible(b)
    N = a.order
    dtype = np.result_type(a.coeffs[0].dtype, b.coeffs[0].dtype)
    out = [np.zeros(a.grid.shape, dtype=dtype) for _ in range(N + 1)]
    for i, ca in enumerate(a.coeffs):
        for j in range(N + 1 - i):
            out[i + j] += ca * b.coeffs[j]
    return EpsilonJet(a.grid, out)


def jet_compose(law_derivs, a: EpsilonJet) -> EpsilonJet:
    """g(a) for a scalar smooth law, Taylor-expanded around the order-zero
    coefficient and evaluated by Horner in jet arithmetic.

    ``law_derivs(m)`` must return the m-th derivative of the law evaluated at
    a.coeffs[0] (m = 0..a.order); no Faa di Bruno tables are required.
    """
    N = a.order
    delta = a.copy()
    delta.coeffs[0] = np.zeros_like(delta.coeffs[0])
    fact = 1.0
    taylor = []
    for m in range(N + 1):
        if m > 0:
            fact *= m
        taylor.append(np.asarray(law_derivs(m), dtype=float) / fact)
    result = jet_from_fields(a.grid, [np.broadcast_to(taylor[N], a.grid.shape)], N)
    for m in range(N - 1, -1, -1):
        result = jet_mul(result, delta)
        result.coeffs[0] = result.coeffs[0] + taylor[m]
    return result


# ---------------------------------------------------------------------------
# differential operators lifted to jets


def jet_derivative(a: EpsilonJet, axis: int = 0, order: int = 1) -> EpsilonJet:
    return a.map_coeffs(lambda c: F.derivative(a.grid, c, axis=axis, order=order))


def jet_laplacian(a: EpsilonJet) -> EpsilonJet:
    return a.map_coeffs(lambda c: F.laplacian(a.grid, c))


def jet_div(components) -> EpsilonJet:
    grid = components[0].grid
    out = jet_derivative(components[0], axis=0)
    for ax in range(1, len(components)):
        out = out + jet_derivative(components[ax], axis=ax)
    return out


# ---------------------------------------------------------------------------
# full-system residuals collected by powers of the small parameter


def ek_residual_jet(rho: EpsilonJet, u_components, laws, dt_rho: EpsilonJet, dt_u_components):
    """Residual of the capillary fluid system, by powers of eps.

    Inputs are jets for the density, the velocity components, and their time
    derivatives.  The quadratic dispersion prefactor shifts the capillary
    contribution down two slots.  Returns (mass, momentum_components).
    """
    grid = rho.grid
    N = rho.order
    d = len(u_components)

    # mass: dt rho + div(rho u)
    mass = dt_rho + jet_div([jet_mul(rho, u_components[ax]) for ax in range(d)])

    # g(rho) and the capillary scalar K(rho) lap(rho) + K'(rho) |grad rho|^2 / 2
    g_of_rho = jet_compose(lambda m: laws.pressure.deriv(rho.coeffs[0], m) if m else laws.pressure(rho.coeffs[0]), rho)
    K_of_rho = jet_compose(lambda m: laws.capillarity.deriv(rho.coeffs[0], m), rho)
    Kp_of_rho = jet_compose(lambda m: laws.capillarity.deriv(rho.coeffs[0], m + 1), rho)
    grad_rho = [jet_derivative(rho, axis=ax) for ax in range(d)]
    grad_sq = grad_rho[0] * grad_rho[0]
    for ax in range(1, d):
        grad_sq = grad_sq + grad_rho[ax] * grad_rho[ax]
    capillary = K_of_rho * jet_laplacian(rho) + 0.5 * (Kp_of_rho * grad_sq)

    momentum = []
    for ax in range(d):
        adv = u_components[0] * jet_derivative(u_components[ax], axis=0)
        for bx in range(1, d):
            adv = adv + u_components[bx] * jet_derivative(u_components[ax], axis=bx)
        mom = dt_u_components[ax] + adv + jet_derivative(g_of_rho, axis=ax)
        mom = mom - jet_derivative(capillary, axis=ax).shifted(2)
        momentum.append(mom)
    return mass, momentum


def qhd_potential_residual_jet(rho: EpsilonJet, phi: EpsilonJet, pressure, dt_rho: EpsilonJet, dt_phi: EpsilonJet):
    """Residual of the quantum-fluid system in potential form (K = 1/rho),
    by powers of eps:

        mass      = dt rho + div(rho grad phi)
        bernoulli = dt phi + |grad phi|^2/2 + g(rho)
                    - eps^2 (lap rho / rho - |grad rho|^2 / (2 rho^2))
    """
    grid = rho.grid
    d = grid.dim
    grad_phi = [jet_derivative(phi, axis=ax) for ax in range(d)]
    mass = dt_rho + jet_div([jet_mul(rho, grad_phi[ax]) for ax in range(d)])

    grad_sq = grad_phi[0] * grad_phi[0]
    for ax in range(1, d):
        grad_sq = grad_sq + grad_phi[ax] * grad_phi[ax]
    g_of_rho = jet_compose(lambda m: pressure.deriv(rho.coeffs[0], m) if m else pressure(rho.coeffs[0]), rho)

    inv_rho = jet_compose(lambda m: (-1.0) ** m * math.factorial(m) * rho.coeffs[0] ** (-m - 1.0) if m else 1.0 / rho.coeffs[0], rho)
    inv_rho2 = inv_rho * inv_rho
    grad_rho = [jet_derivative(rho, axis=ax) for ax in range(d)]
    grad_rho_sq = grad_rho[0] * grad_rho[0]
    for ax in range(1, d):
        grad_rho_sq = grad_rho_sq + grad_rho[ax] * grad_rho[ax]
    capillary = jet_laplacian(rho) * inv_rho - 0.5 * (grad_rho_sq * inv_rho2)

    bernoulli = dt_phi + 0.5 * grad_sq + g_of_rho - capillary.shifted(2)
    return mass, bernoulli
