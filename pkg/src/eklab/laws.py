"""Pressure and capillarity laws with analytic derivatives.

Laws expose derivatives to arbitrary order so that series expansions never
fall back on numerical differentiation of the constitutive relations.  The
pressure law also carries its potential G (G' = g, G(1) = 0); the
capillarity law carries the antiderivative of sqrt(K(s)/s) used by the
complex-variable change and the antiderivative of (s K(s))^n used by the
energy weights.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.integrate import quad

from .errors import DomainValidityError


def _validate(values, interval, what):
    lo, hi = interval
    v = np.asarray(values)
    bad = (v < lo) | (v > hi)
    if np.any(bad):
        raise DomainValidityError(
            f"{what} evaluated outside validity interval [{lo}, {hi}]",
            nodes=np.nonzero(bad),
        )


@dataclass(frozen=True)
class PressureLaw:
    """Smooth barotropic pressure law g with g' > 0 near rho = 1."""

    name: str
    g: Callable
    derivs: tuple  # derivs[m-1] evaluates g^{(m)}
    G: Callable  # antiderivative of g with G(1) = 0
    interval: tuple = (1e-8, np.inf)

    def __call__(self, rho):
        _validate(rho, self.interval, f"pressure law {self.name}")
        return self.g(rho)

    def deriv(self, rho, m: int = 1):
        """m-th derivative of g."""
        if m == 0:
            return self.g(rho)
        if m <= len(self.derivs):
            return self.derivs[m - 1](rho)
        raise ValueError(f"derivative order {m} not provided for {self.name}")

    def potential(self, rho):
        """G(rho) with G' = g, G(1) = 0."""
        return self.G(rho)


def gross_pitaevskii() -> PressureLaw:
    """g(rho) = rho - 1."""
    one = lambda rho: np.ones_like(np.asarray(rho, dtype=float))
    zero = lambda rho: np.zeros_like(np.asarray(rho, dtype=float))
    return PressureLaw(
        name="gp",
        g=lambda rho: np.asarray(rho, dtype=float) - 1.0,
        derivs=(one,) + (zero,) * 11,
        G=lambda rho: 0.5 * (np.asarray(rho, dtype=float) - 1.0) ** 2,
    )


def polytropic(gamma: float) -> PressureLaw:
    """g(rho) = (rho^gamma - 1)/gamma."""
    if gamma <= 0:
        raise ValueError("gamma must be positive")

    def make_deriv(m):
        coeff = 1.0 / gamma
        for j in range(m):
            coeff *= gamma - j
        expo = gamma - m
        return lambda rho, c=coeff, e=expo: c * np.asarray(rho, dtype=float) ** e

    derivs = tuple(make_deriv(m) for m in range(1, 13))

    def G(rho):
        rho = np.asarray(rho, dtype=float)
        if abs(gamma + 1.0) < 1e-14:
            prim = np.log(rho)
        else:
            prim = (rho ** (gamma + 1.0) - 1.0) / (gamma + 1.0)
        return (prim - (rho - 1.0)) / gamma

    return PressureLaw(
        name=f"polytropic:{gamma}",
        g=lambda rho: (np.asarray(rho, dtype=float) ** gamma - 1.0) / gamma,
        derivs=derivs,
        G=G,
    )


@dataclass(frozen=True)
class CapillarityLaw:
    """Positive capillarity coefficient K(rho).

    ``tag`` is one of general/quantum/schrodinger/constant; the quantum and
    schrodinger tags are K = 1/rho and K = 1/(4 rho).
    """

    name: str
    tag: str
    K: Callable
    derivs: tuple
    ell0: Optional[Callable] = None  # antiderivative of sqrt(K(s)/s), zero at 1
    interval: tuple = (1e-8, np.inf)

    def __call__(self, rho):
        _validate(rho, self.interval, f"capillarity law {self.name}")
        return self.K(rho)

    def deriv(self, rho, m: int = 1):
        if m == 0:
            return self.K(rho)
        if m <= len(self.derivs):
            return self.derivs[m - 1](rho)
        raise ValueError(f"derivative order {m} not provided for {self.name}")

    def a(self, rho):
        """a = sqrt(rho K(rho)); commutes the weights with the dispersion."""
        return np.sqrt(np.asarray(rho, dtype=float) * self.K(rho))

    def w_potential(self, rho):
        """Antiderivative of sqrt(K/s), zero at 1 (the epsilon-free part of
        the log-density potential)."""
        if self.ell0 is not None:
            return self.ell0(rho)
        rho_arr = np.asarray(rho, dtype=float)
        flat = rho_arr.ravel()
        out = np.array([quad(lambda s: math.sqrt(self.K(s) / s), 1.0, r, limit=200)[0] for r in flat])
        return out.reshape(rho_arr.shape) if rho_arr.shape else float(out[0])

    def a2n_antiderivative(self, rho, n: int):
        """Antiderivative of a(s)^{2n} = (s K(s))^n, zero at 1."""
        rho_arr = np.asarray(rho, dtype=float)
        if self.tag == "quantum":  # a = 1
            return rho_arr - 1.0
        if self.tag == "schrodinger":  # a = 1/2
            return 0.25**n * (rho_arr - 1.0)
        if self.tag == "constant":
            k0 = float(self.K(1.0))
            return k0**n * (rho_arr ** (n + 1) - 1.0) / (n + 1)
        flat = rho_arr.ravel()
        out = np.array([quad(lambda s: (s * self.K(s)) ** n, 1.0, r, limit=200)[0] for r in flat])
        return out.reshape(rho_arr.shape) if rho_arr.shape else float(out[0])


def quantum_capillarity() -> CapillarityLaw:
    """K = 1/rho (quantum hydrodynamics)."""

    def make_deriv(m):
        coeff = (-1.0) ** m * math.factorial(m)
        return lambda rho, c=coeff, e=-(m + 1): c * np.asarray(rho, dtype=float) ** e

    return CapillarityLaw(
        name="quantum",
        tag="quantum",
        K=lambda rho: 1.0 / np.asarray(rho, dtype=float),
        derivs=tuple(make_deriv(m) for m in range(1, 13)),
        ell0=lambda rho: np.log(np.asarray(rho, dtype=float)),
    )


def schrodinger_capillarity() -> CapillarityLaw:
    """K = 1/(4 rho) (fluid form of the semiclassical Schrodinger equation)."""

    def make_deriv(m):
        coeff = 0.25 * (-1.0) ** m * math.factorial(m)
        return lambda rho, c=coeff, e=-(m + 1): c * np.asarray(rho, dtype=float) ** e

    return CapillarityLaw(
        name="schrodinger",
        tag="schrodinger",
        K=lambda rho: 0.25 / np.asarray(rho, dtype=float),
        derivs=tuple(make_deriv(m) for m in range(1, 13)),
        ell0=lambda rho: 0.5 * np.log(np.asarray(rho, dtype=float)),
    )


def constant_capillarity(k0: float = 1.0) -> CapillarityLaw:
    """K = const > 0."""
    if k0 <= 0:
        raise ValueError("capillarity coefficient must be positive")
    zero = lambda rho: np.zeros_like(np.asarray(rho, dtype=float))
    return CapillarityLaw(
        name=f"constant:{k0}",
        tag="constant",
        K=lambda rho: np.full_like(np.asarray(rho, dtype=float), k0),
        derivs=(zero, zero, zero, zero, zero, zero, zero, zero),
        ell0=lambda rho: 2.0 * math.sqrt(k0) * (np.sqrt(np.asarray(rho, dtype=float)) - 1.0),
    )


@dataclass(frozen=True)
class LawPair:
    """Pressure + capillarity bundle passed around the solvers."""

    pressure: PressureLaw
    capillarity: CapillarityLaw

    @property
    def g(self):
        return self.pressure

    @property
    def K(self):
        return self.capillarity


def qhd_gp() -> LawPair:
    """Quantum hydrodynamics with the Gross-Pitaevskii pressure."""
    return LawPair(gross_pitaevskii(), quantum_capillarity())


def nls_gp() -> LawPair:
    """Fluid counterpart of the cubic semiclassical Schrodinger equation."""
    return LawPair(gross_pitaevskii(), schrodinger_capillarity())


_PRESSURES = {"gp": gross_pitaevskii}
_CAPILLARITIES = {
    "quantum": quantum_capillarity,
    "schrodinger": schrodinger_capillarity,
}


def pressure_from_name(name: str) -> PressureLaw:
    if name in _PRESSURES:
        return _PRESSURES[name]()
    if name.startswith("polytropic:"):
        return polytropic(float(name.split(":", 1)[1]))
    raise ValueError(f"unknown pressure law {name!r}")


def capillarity_from_name(name: str) -> CapillarityLaw:
    if name in _CAPILLARITIES:
        return _CAPILLARITIES[name]()
    if name.startswith("constant:"):
        return constant_capillarity(float(name.split(":", 1)[1]))
    raise ValueError(f"unknown capillarity law {name!r}")
