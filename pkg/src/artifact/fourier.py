"""Weighted sup-norm, inverse Fourier transform and convolution on a truncated m-grid.

Functions of the frequency variable m live in the space of continuous h with
finite norm sup (1+|m|)^mu e^(beta|m|) |h(m)|.  Every transform here returns a
value together with an analytic bound on the error made by truncating the real
line to [-M_max, M_max].
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple

import numpy as np
from scipy import integrate
from scipy.interpolate import CubicSpline
from scipy.signal import fftconvolve

SQRT_2PI = math.sqrt(2.0 * math.pi)


class GridMismatchError(ValueError):
    pass


class StripError(ValueError):
    """Raised when z leaves the strip |Im z| < beta."""


@dataclass(frozen=True)
class FrequencyGrid:
    nodes: np.ndarray
    weights: np.ndarray
    M_max: float

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        if nodes.ndim != 1 or nodes.size == 0:
            raise ValueError("frequency grid must be a nonempty 1-D array")
        if self.M_max <= 0:
            raise ValueError("M_max must be positive")
        if np.any(np.diff(nodes) <= 0):
            raise ValueError("frequency nodes must be strictly increasing")
        if not np.allclose(nodes, -nodes[::-1], atol=1e-12 * max(1.0, self.M_max)):
            raise ValueError("frequency nodes must be symmetric about 0")
        if np.any(np.asarray(self.weights) <= 0):
            raise ValueError("quadrature weights must be positive")

    @property
    def size(self) -> int:
        return len(self.nodes)

    @property
    def is_uniform(self) -> bool:
        d = np.diff(self.nodes)
        return bool(np.allclose(d, d[0], rtol=1e-10))

    @property
    def spacing(self) -> float:
        return float(self.nodes[1] - self.nodes[0]) if self.size > 1 else 2 * self.M_max

    def same_as(self, other: "FrequencyGrid") -> bool:
        return self.size == other.size and np.allclose(self.nodes, other.nodes)

    def refined(self) -> "FrequencyGrid":
        return uniform_grid(self.M_max, self.spacing / 2)


def uniform_grid(M_max: float = 40.0, dm: float = 0.05) -> FrequencyGrid:
    """Symmetric uniform grid on [-M_max, M_max] with composite trapezoid weights."""
    n = int(round(M_max / dm))
    if n < 1 or not math.isclose(n * dm, M_max, rel_tol=1e-9):
        raise ValueError(f"M_max={M_max} is not a multiple of dm={dm}")
    nodes = np.linspace(-M_max, M_max, 2 * n + 1)
    w = np.full(nodes.shape, dm)
    w[0] = w[-1] = dm / 2
    return FrequencyGrid(nodes, w, float(M_max))


@dataclass
class FrequencyFunction:
    values: np.ndarray
    grid: FrequencyGrid
    beta: float = 1.0
    mu: float = 2.0

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)
        if self.values.shape[-1] != self.grid.size:
            raise GridMismatchError("values do not match the frequency grid")

    @classmethod
    def from_callable(cls, fn, grid: FrequencyGrid, beta=1.0, mu=2.0) -> "FrequencyFunction":
        return cls(np.asarray(fn(grid.nodes), dtype=complex), grid, beta, mu)

    def __add__(self, other):
        _check_same(self, other)
        return FrequencyFunction(self.values + other.values, self.grid, self.beta, self.mu)

    def __mul__(self, a):
        return FrequencyFunction(self.values * a, self.grid, self.beta, self.mu)

    __rmul__ = __mul__

    def times_im(self) -> "FrequencyFunction":
        """The symbol of d/dz: m -> i m f(m)."""
        return FrequencyFunction(1j * self.grid.nodes * self.values, self.grid, self.beta,
                                 self.mu - 1.0)

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["m", "re", "im"])
            for m, v in zip(self.grid.nodes, self.values):
                w.writerow([repr(float(m)), repr(float(v.real)), repr(float(v.imag))])

    @classmethod
    def from_csv(cls, path: str | Path, beta=1.0, mu=2.0) -> "FrequencyFunction":
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        m = data[:, 0]
        dm = m[1] - m[0]
        grid = uniform_grid(float(m[-1]), float(dm))
        return cls(data[:, 1] + 1j * data[:, 2], grid, beta, mu)


class Transformed(NamedTuple):
    value: complex
    bound: float


def _check_same(f: FrequencyFunction, g: FrequencyFunction):
    if not f.grid.same_as(g.grid):
        raise GridMismatchError("frequency functions live on different grids")


def e_weight(m, beta: float, mu: float) -> np.ndarray:
    m = np.abs(np.asarray(m, dtype=float))
    return (1.0 + m) ** mu * np.exp(beta * m)


def e_norm(h, grid: FrequencyGrid | None = None, beta: float | None = None,
           mu: float | None = None) -> float:
    """Grid sup of (1+|m|)^mu e^(beta|m|) |h(m)|.

    Accepts a FrequencyFunction, or raw values plus grid, beta and mu.
    """
    if isinstance(h, FrequencyFunction):
        grid = h.grid
        beta = h.beta if beta is None else beta
        mu = h.mu if mu is None else mu
        vals = h.values
    else:
        vals = np.asarray(h)
    if grid is None or beta is None or mu is None:
        raise ValueError("grid, beta and mu are required for raw values")
    if vals.size == 0:
        return 0.0
    return float(np.max(e_weight(grid.nodes, beta, mu) * np.abs(vals)))


def tail_bound(norm: float, M_max: float, decay: float, mu: float) -> float:
    """2 ||h|| int_{M_max}^inf (1+m)^-mu e^{-decay m} dm."""
    if norm == 0.0:
        return 0.0
    if decay <= 0:
        return math.inf if mu <= 1 else 2 * norm * (1 + M_max) ** (1 - mu) / (mu - 1)
    val, _ = integrate.quad(lambda m: (1 + m) ** (-mu) * math.exp(-decay * (m - M_max)),
                            M_max, math.inf)
    return 2.0 * norm * val * math.exp(-decay * M_max)


def inverse_fourier(h: FrequencyFunction, z: complex) -> Transformed:
    """(1/sqrt(2 pi)) sum_i w_i h(m_i) e^(i z m_i) and its truncation bound."""
    z = complex(z)
    if abs(z.imag) >= h.beta:
        raise StripError(f"|Im z| = {abs(z.imag)} is outside the strip of width {h.beta}")
    m = h.grid.nodes
    value = np.sum(h.grid.weights * h.values * np.exp(1j * z * m)) / SQRT_2PI
    bound = tail_bound(e_norm(h), h.grid.M_max, h.beta - abs(z.imag), h.mu) / SQRT_2PI
    return Transformed(complex(value), bound)


def inverse_fourier_many(values: np.ndarray, grid: FrequencyGrid, z) -> np.ndarray:
    """Vectorized discrete inverse transform along the last axis of ``values``.

    Returns an array of shape ``values.shape[:-1] + np.shape(z)``.
    """
    z = np.asarray(z, dtype=complex)
    kernel = grid.weights[:, None] * np.exp(1j * np.outer(grid.nodes, z.ravel())) / SQRT_2PI
    out = np.asarray(values) @ kernel
    return out.reshape(np.shape(values)[:-1] + z.shape)


def convolve_on_grid(f: np.ndarray, g: np.ndarray, grid: FrequencyGrid) -> np.ndarray:
    """(1/sqrt(2 pi)) sum_j w_j f(m_i - m_j) g(m_j) along the last axis.

    On a uniform symmetric grid every difference m_i - m_j is itself a node (or
    lies outside the grid, where f is taken as zero), so no interpolation is
    needed and the sum is an exact discrete convolution evaluated by FFT.
    """
    if not grid.is_uniform:
        raise GridMismatchError("FFT convolution needs a uniform grid")
    n = grid.size
    wg = np.asarray(g) * grid.weights
    full = fftconvolve(np.asarray(f), wg, axes=-1)
    c = (n - 1) // 2
    return full[..., c:c + n] / SQRT_2PI


def fourier_convolution(f: FrequencyFunction, g: FrequencyFunction) -> FrequencyFunction:
    """psi(m) = (1/sqrt(2 pi)) (f * g)(m) on the shared grid."""
    _check_same(f, g)
    grid = f.grid
    if grid.is_uniform:
        vals = _direct_convolution(f.values, g.values, grid)
    else:
        # off-grid values of f by cubic interpolation, zero outside the grid
        re = CubicSpline(grid.nodes, f.values.real)
        im = CubicSpline(grid.nodes, f.values.imag)
        diff = grid.nodes[:, None] - grid.nodes[None, :]
        inside = np.abs(diff) <= grid.M_max
        fv = np.where(inside, re(diff) + 1j * im(diff), 0.0)
        vals = fv @ (grid.weights * g.values) / SQRT_2PI
    return FrequencyFunction(vals, grid, min(f.beta, g.beta), min(f.mu, g.mu))


def _direct_convolution(f: np.ndarray, g: np.ndarray, grid: FrequencyGrid) -> np.ndarray:
    n = grid.size
    idx = np.arange(n)[:, None] - np.arange(n)[None, :] + (n - 1) // 2
    inside = (idx >= 0) & (idx < n)
    fv = np.where(inside, f[np.clip(idx, 0, n - 1)], 0.0)
    return fv @ (grid.weights * g) / SQRT_2PI


def derivative_check(f: FrequencyFunction, z: complex, h_fd: float = 1e-3) -> tuple[complex, complex]:
    """Centered difference of the inverse transform against the transform of i m f."""
    z = complex(z)
    lhs = (inverse_fourier(f, z + h_fd).value - inverse_fourier(f, z - h_fd).value) / (2 * h_fd)
    phi = FrequencyFunction(1j * f.grid.nodes * f.values, f.grid, f.beta, f.mu)
    rhs = inverse_fourier(phi, z).value
    return lhs, rhs


def convolution_constant(grid: FrequencyGrid, beta: float, mu: float) -> float:
    """e_norm of the convolution of two inverse weights (both of unit norm).

    This is the constant C in e_norm(f*g) <= C e_norm(f) e_norm(g) attained by
    the extremal pair; it stabilizes as the grid is refined.
    """
    w = 1.0 / e_weight(grid.nodes, beta, mu)
    return e_norm(_direct_convolution(w, w, grid), grid, beta, mu)


__all__ = [
    "FrequencyFunction", "FrequencyGrid", "GridMismatchError", "SQRT_2PI", "StripError",
    "Transformed", "convolution_constant", "convolve_on_grid", "derivative_check", "e_norm",
    "e_weight", "fourier_convolution", "inverse_fourier", "inverse_fourier_many", "tail_bound",
    "uniform_grid",
]
