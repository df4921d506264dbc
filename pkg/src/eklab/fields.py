"""Differential operators, norms and projectors on the supported grids.

Periodic grids use exact Fourier differentiation; the half line uses
4th-order centered stencils with 4th-order one-sided closures at both ends.
All operations are pure functions of their inputs.
"""

from __future__ import annotations

import numpy as np

from .errors import DimensionError, ShapeError, UnsupportedOrderError, HistoryTooShortError
from .grids import Grid, HALFLINE_1D

# ---------------------------------------------------------------------------
# validation helpers


def check_field(grid: Grid, f: np.ndarray) -> np.ndarray:
    f = np.asarray(f)
    if f.shape != grid.shape:
        raise ShapeError(f"field shape {f.shape} does not match grid shape {grid.shape}")
    if not np.all(np.isfinite(f)):
        raise ShapeError("field contains NaN/Inf")
    return f


# ---------------------------------------------------------------------------
# finite-difference weights (Fornberg's algorithm)


def fd_weights(nodes, x0: float, m: int) -> np.ndarray:
    """Weights w such that sum w_i f(nodes_i) ~ f^(m)(x0).

    Fornberg's recursion; exact for polynomials of degree len(nodes)-1.
    """
    nodes = np.asarray(nodes, dtype=float)
    n = len(nodes)
    if m >= n:
        raise UnsupportedOrderError(f"need more than {n} nodes for derivative order {m}")
    c = np.zeros((n, m + 1))
    c[0, 0] = 1.0
    c1 = 1.0
    c4 = nodes[0] - x0
    for i in range(1, n):
        mn = min(i, m)
        c2 = 1.0
        c5 = c4
        c4 = nodes[i] - x0
        for j in range(i):
            c3 = nodes[i] - nodes[j]
            c2 *= c3
            if j == i - 1:
                for k in range(mn, 0, -1):
                    c[i, k] = c1 * (k * c[i - 1, k - 1] - c5 * c[i - 1, k]) / c2
                c[i, 0] = -c1 * c5 * c[i - 1, 0] / c2
            for k in range(mn, 0, -1):
                c[j, k] = (c4 * c[j, k] - k * c[j, k - 1]) / c3
            c[j, 0] = c4 * c[j, 0] / c3
        c1 = c2
    return c[:, m]


# half-line stencils: centered 4th order in the interior, one-sided 4th order
# closures built once per (n, order) pair.
_HALFLINE_CACHE: dict = {}


def _halfline_matrix_rows(n: int, h: float, order: int):
    """Stencil offsets/weights for each row of the half-line derivative."""
    key = (n, order)
    if key in _HALFLINE_CACHE:
        offs, wts = _HALFLINE_CACHE[key]
        return offs, wts / h**order
    width = order + 4  # 4th-order accuracy
    half = width // 2
    offs = []
    wts = []
    for i in range(n):
        lo = min(max(i - half, 0), n - width)
        idx = np.arange(lo, lo + width)
        offs.append(idx)
        wts.append(fd_weights(idx.astype(float), float(i), order))
    offs = np.array(offs)
    wts = np.array(wts)
    _HALFLINE_CACHE[key] = (offs, wts)
    return offs, wts / h**order


def derivative(grid: Grid, f: np.ndarray, axis: int = 0, order: int = 1) -> np.ndarray:
    """order-th partial derivative of f along axis.

    Periodic: exact spectral differentiation.  Half line: 4th-order finite
    differences (orders 1 and 2 native, order 3 by composition; beyond that
    the closures degrade and we refuse).
    """
    f = check_field(grid, f)
    if order < 1:
        raise UnsupportedOrderError("derivative order must be >= 1")
    if axis >= grid.dim:
        raise DimensionError(f"axis {axis} on a {grid.dim}-d grid")
    if grid.periodic:
        k = grid.wavenumbers()
        fh = np.fft.fft(f, axis=axis)
        shape = [1] * grid.dim
        shape[axis] = grid.points
        mult = (1j * k.reshape(shape)) ** order
        if order % 2 == 1:
            # zero the (unpaired) Nyquist mode for odd derivatives
            nyq = grid.points // 2
            idx = [slice(None)] * grid.dim
            idx[axis] = nyq
            mult = mult.copy()
            mult[tuple(idx)] = 0.0
        out = np.fft.ifft(mult * fh, axis=axis)
        return out if np.iscomplexobj(f) else out.real
    if order > 3:
        raise UnsupportedOrderError("half-line differences support order <= 3")
    if order == 3:
        return derivative(grid, derivative(grid, f, axis, 2), axis, 1)
    offs, wts = _halfline_matrix_rows(grid.points, grid.spacing, order)
    return np.einsum("ij,ij->i", wts, f[offs])


def gradient(grid: Grid, f: np.ndarray):
    """Tuple of first derivatives along every axis."""
    return tuple(derivative(grid, f, axis=a, order=1) for a in range(grid.dim))


def divergence(grid: Grid, u) -> np.ndarray:
    """Divergence of a vector field given as a tuple/list of components."""
    if len(u) != grid.dim:
        raise DimensionError(f"{len(u)} components on a {grid.dim}-d grid")
    out = derivative(grid, u[0], axis=0, order=1)
    for a in range(1, grid.dim):
        out = out + derivative(grid, u[a], axis=a, order=1)
    return out


def laplacian(grid: Grid, f: np.ndarray) -> np.ndarray:
    out = derivative(grid, f, axis=0, order=2)
    for a in range(1, grid.dim):
        out = out + derivative(grid, f, axis=a, order=2)
    return out


def dealias(grid: Grid, f: np.ndarray) -> np.ndarray:
    """2/3-rule truncation of the upper third of the spectrum."""
    if not grid.periodic:
        return f
    fh = np.fft.fftn(f)
    k = np.fft.fftfreq(grid.points) * grid.points
    cutoff = grid.points / 3.0
    mask1 = np.abs(k) <= cutoff
    if grid.dim == 1:
        fh *= mask1
    else:
        fh *= mask1[:, None] & mask1[None, :]
    out = np.fft.ifftn(fh)
    return out if np.iscomplexobj(f) else out.real


# ---------------------------------------------------------------------------
# quadrature and norms


def integrate(grid: Grid, f: np.ndarray) -> float:
    """Integral over the domain (rectangle rule / trapezoid)."""
    f = np.asarray(f)
    if grid.periodic:
        return f.sum() * grid.spacing**grid.dim
    return float(np.trapezoid(f, dx=grid.spacing))


def l2_norm(grid: Grid, f: np.ndarray) -> float:
    return float(np.sqrt(integrate(grid, np.abs(np.asarray(f)) ** 2).real))


def linf_norm(f) -> float:
    return float(np.max(np.abs(np.asarray(f))))


def wk_inf_norm(grid: Grid, f: np.ndarray, k: int) -> float:
    """W^{k,inf} surrogate: grid maximum over derivatives of order <= k."""
    total = linf_norm(f)
    g = np.asarray(f)
    fields = [g]
    for _ in range(k):
        fields = [derivative(grid, h, axis=a, order=1) for h in fields for a in range(grid.dim)]
        total += max(linf_norm(h) for h in fields)
    return total


def sobolev_norm(grid: Grid, f: np.ndarray, s: int) -> float:
    """H^s norm; Fourier multiplier (1+|xi|^2)^{s/2} on periodic grids,
    sum of L2 norms of derivatives up to s on the half line."""
    if s < 0 or int(s) != s:
        raise ValueError("Sobolev index must be a nonnegative integer")
    f = check_field(grid, f)
    if grid.periodic:
        fh = np.fft.fftn(f)
        k = grid.wavenumbers()
        if grid.dim == 1:
            k2 = k**2
        else:
            k2 = k[:, None] ** 2 + k[None, :] ** 2
        weight = (1.0 + k2) ** s
        # Parseval: ||f||^2 = sum |fh|^2 * (L/n)^d / n^d ... with numpy fft
        # conventions, |fh|^2 * dx^d / n^d integrates |f|^2.
        scale = grid.spacing**grid.dim / grid.points**grid.dim
        return float(np.sqrt(np.sum(weight * np.abs(fh) ** 2) * scale))
    total = l2_norm(grid, f) ** 2
    g = f
    for _ in range(s):
        g = derivative(grid, g, order=1)
        total += l2_norm(grid, g) ** 2
    return float(np.sqrt(total))


# ---------------------------------------------------------------------------
# Leray (Helmholtz) projectors


def leray_project(grid: Grid, u):
    """Split a 2-d periodic vector field into irrotational and solenoidal
    parts (q, p), q + p = u.  The zero mode is assigned to q by convention.

    On 1-d grids the decomposition is trivial (q = u, p = 0); we refuse and
    point callers at that identity instead of silently reshaping.
    """
    if grid.dim != 2:
        raise DimensionError("leray_project needs a periodic-2d grid; in 1-d, q = u and p = 0")
    if len(u) != 2:
        raise ShapeError("expected a 2-component vector field")
    ux, uy = (check_field(grid, c) for c in u)
    k = grid.wavenumbers()
    kx = k[:, None]
    ky = k[None, :]
    k2 = kx**2 + ky**2
    inv = np.where(k2 > 0, 1.0 / np.where(k2 > 0, k2, 1.0), 0.0)
    fx = np.fft.fft2(ux)
    fy = np.fft.fft2(uy)
    dot = kx * fx + ky * fy
    qx = kx * dot * inv
    qy = ky * dot * inv
    # zero mode (mean flow) goes to the irrotational part
    qx[0, 0] = fx[0, 0]
    qy[0, 0] = fy[0, 0]
    px = fx - qx
    py = fy - qy
    real = not (np.iscomplexobj(ux) or np.iscomplexobj(uy))
    def back(a):
        b = np.fft.ifft2(a)
        return b.real if real else b
    return (back(qx), back(qy)), (back(px), back(py))


# ---------------------------------------------------------------------------
# one-sided traces and time differentiation of histories


def boundary_trace(grid: Grid, f: np.ndarray, m: int = 0) -> float:
    """m-th normal derivative of f at x = 0 on the half line, one-sided
    4th-order stencil."""
    if grid.kind != HALFLINE_1D:
        raise DimensionError("boundary traces are defined on half-line grids")
    f = check_field(grid, f)
    if m == 0:
        return float(f[0])
    width = m + 4
    w = fd_weights(np.arange(width, dtype=float), 0.0, m) / grid.spacing**m
    return float(np.dot(w, f[:width]))


def time_derivative(series: np.ndarray, dt: float, m: int, order: int = 4) -> np.ndarray:
    """m-th time derivative of a sampled series (axis 0), centered stencils
    of the requested accuracy, one-sided near the ends."""
    series = np.asarray(series)
    if m == 0:
        return series.copy()
    width = m + order if (m + order) % 2 == 1 else m + order + 1
    n = series.shape[0]
    if n < width:
        raise HistoryTooShortError(f"need {width} snapshots for d^{m}/dt^{m}, have {n}")
    half = width // 2
    out = np.empty_like(series, dtype=np.result_type(series.dtype, float))
    for i in range(n):
        lo = min(max(i - half, 0), n - width)
        idx = np.arange(lo, lo + width)
        w = fd_weights(idx.astype(float), float(i), m) / dt**m
        out[i] = np.tensordot(w, series[idx], axes=(0, 0))
    return out


def xn_tangential_norm(grid: Grid, z_history: np.ndarray, dt: float, n: int, t_index: int) -> float:
    """Tangential functional on the half line: in one space dimension the
    tangential variables reduce to time, so this is
    sum over 2*a0 <= n of ||d_t^{a0} z(t)||_{L2}."""
    if n % 2 != 0 or n < 0:
        raise ValueError("n must be a nonnegative even integer")
    if grid.kind != HALFLINE_1D:
        raise DimensionError("X^n norms are defined on half-line grids")
    total = 0.0
    for a0 in range(n // 2 + 1):
        dz = time_derivative(z_history, dt, a0)[t_index]
        total += l2_norm(grid, dz)
    return float(total)
