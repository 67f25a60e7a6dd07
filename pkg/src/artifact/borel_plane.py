"""Functions on the Borel domain (disc U ray) x ray x frequency grid.

Covers the weighted exponential-growth norm, the Borel transform of the
forcing, the divisor P_m, its root locus in tau2, and the choice of
integration directions that keep P_m away from zero.

Radial discretization: on every ray the nodes are Chebyshev points of the first
kind on [0, R].  Gridded functions are stored as values; off-node values on the
same ray come from barycentric interpolation of the reduced function
omega/tau, which is smooth at the origin for functions vanishing linearly there.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import NamedTuple

import numpy as np
from scipy.interpolate import BarycentricInterpolator
from scipy.optimize import minimize_scalar
from scipy.special import gamma, roots_jacobi

from .config import ConfigError, ProblemConfig, is_integer_ratio
from .fourier import FrequencyGrid


class RootIterationError(RuntimeError):
    pass


class DirectionSearchError(RuntimeError):
    pass


# --------------------------------------------------------------------------
# quadrature and interpolation on a ray


def cheb_nodes(n: int, R: float) -> np.ndarray:
    """Chebyshev points of the first kind mapped to (0, R), increasing."""
    j = np.arange(n)
    x = -np.cos((2 * j + 1) * np.pi / (2 * n))
    return R * (1 + x) / 2


def interp_matrix(nodes: np.ndarray, targets: np.ndarray) -> np.ndarray:
    """Matrix B with B @ values = polynomial interpolant evaluated at targets."""
    targets = np.asarray(targets, dtype=float)
    bi = BarycentricInterpolator(nodes, np.eye(len(nodes)), axis=0)
    return np.atleast_2d(bi(targets.ravel())).reshape(targets.shape + (len(nodes),))


@lru_cache(maxsize=256)
def jacobi01(n: int, alpha: float) -> tuple[np.ndarray, np.ndarray]:
    """Gauss rule on [0, 1] for the weight (1 - x)^alpha."""
    t, w = roots_jacobi(n, alpha, 0.0)
    x = (1 + t) / 2
    return x, w * 2.0 ** (-alpha - 1)


@lru_cache(maxsize=64)
def legendre01(n: int) -> tuple[np.ndarray, np.ndarray]:
    t, w = np.polynomial.legendre.leggauss(n)
    return (1 + t) / 2, w / 2


def ray_power(r, theta: float, a: float):
    """(r e^{i theta})^a with the argument of the ray, constant along it."""
    return np.asarray(r, dtype=float) ** a * np.exp(1j * a * theta)


# --------------------------------------------------------------------------
# geometry


@dataclass(frozen=True)
class SectorGeometry:
    direction: float
    half_opening: float
    inner_radius: float = 0.0
    outer_radius: float = math.inf

    def __post_init__(self):
        if not 0 < self.half_opening < math.pi:
            raise ValueError("half opening must lie in (0, pi)")
        if self.inner_radius < 0 or self.inner_radius >= self.outer_radius:
            raise ValueError("need 0 <= inner_radius < outer_radius")

    @property
    def opening(self) -> float:
        return 2 * self.half_opening

    def angular_distance(self, x) -> np.ndarray:
        """Unsigned distance of arg x from the bisecting direction, in [0, pi]."""
        a = np.angle(np.asarray(x, dtype=complex)) - self.direction
        return np.abs((a + np.pi) % (2 * np.pi) - np.pi)

    def contains_angle(self, theta) -> np.ndarray:
        a = np.asarray(theta, dtype=float) - self.direction
        return np.abs((a + np.pi) % (2 * np.pi) - np.pi) < self.half_opening

    def contains(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=complex)
        r = np.abs(x)
        return (r > self.inner_radius) & (r < self.outer_radius) & (
            self.angular_distance(x) < self.half_opening)

    def to_dict(self) -> dict:
        return {"direction": self.direction, "half_opening": self.half_opening,
                "inner_radius": self.inner_radius,
                "outer_radius": None if math.isinf(self.outer_radius) else self.outer_radius}


@dataclass
class BorelGrid:
    """Nodes covering (D(0, rho1) U ray d1) x ray d2 x m-grid.

    ``theta1[0] == d1`` and ray 0 reaches ``R1``; the remaining
    ``n_ang - 1`` rays are equally spaced and stop at ``rho1``.
    """

    d1: float
    d2: float
    R1: float
    R2: float
    rho1: float
    n_rad: int
    n_ang: int
    m_grid: FrequencyGrid
    n_rad2: int | None = None
    theta1: np.ndarray = field(init=False)
    radii1: np.ndarray = field(init=False)
    radii2: np.ndarray = field(init=False)

    def __post_init__(self):
        if self.n_rad < 2 or self.n_ang < 1:
            raise ValueError("need at least 2 radial nodes and 1 ray")
        if min(self.R1, self.R2, self.rho1) <= 0:
            raise ValueError("grid radii must be positive")
        self.n_rad2 = self.n_rad if self.n_rad2 is None else self.n_rad2
        self.theta1 = self.d1 + 2 * np.pi * np.arange(self.n_ang) / self.n_ang
        ray_len = np.full(self.n_ang, self.rho1)
        ray_len[0] = max(self.R1, self.rho1)
        self.radii1 = np.stack([cheb_nodes(self.n_rad, L) for L in ray_len])
        self.radii2 = cheb_nodes(self.n_rad2, self.R2)

    @property
    def ray_lengths(self) -> np.ndarray:
        out = np.full(self.n_ang, self.rho1)
        out[0] = max(self.R1, self.rho1)
        return out

    @property
    def tau1(self) -> np.ndarray:
        return self.radii1 * np.exp(1j * self.theta1)[:, None]

    @property
    def tau2(self) -> np.ndarray:
        return self.radii2 * np.exp(1j * self.d2)

    @property
    def shape(self) -> tuple[int, int, int, int]:
        return (self.n_ang, self.n_rad, self.n_rad2, self.m_grid.size)

    def mesh(self):
        """Broadcastable (tau1, tau2, m) arrays of the full node shape."""
        t1 = self.tau1[:, :, None, None]
        t2 = self.tau2[None, None, :, None]
        m = self.m_grid.nodes[None, None, None, :]
        return t1, t2, m

    def refined(self, factor: int = 2) -> "BorelGrid":
        return BorelGrid(self.d1, self.d2, self.R1, self.R2, self.rho1, self.n_rad * factor,
                         self.n_ang, self.m_grid, self.n_rad2 * factor)

    def describe(self) -> dict:
        return {"d1": self.d1, "d2": self.d2, "R1": self.R1, "R2": self.R2, "rho1": self.rho1,
                "n_rad": self.n_rad, "n_rad2": self.n_rad2, "n_ang": self.n_ang,
                "M_max": self.m_grid.M_max, "n_m": self.m_grid.size}


@dataclass
class BorelFunction:
    grid: BorelGrid
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)
        if self.values.shape != self.grid.shape:
            raise ValueError(f"values shape {self.values.shape} != grid shape {self.grid.shape}")

    @classmethod
    def zeros(cls, grid: BorelGrid) -> "BorelFunction":
        return cls(grid, np.zeros(grid.shape, dtype=complex))

    @classmethod
    def from_callable(cls, grid: BorelGrid, fn) -> "BorelFunction":
        t1, t2, m = grid.mesh()
        return cls(grid, np.broadcast_to(fn(t1, t2, m), grid.shape).copy())

    def __add__(self, other: "BorelFunction") -> "BorelFunction":
        return BorelFunction(self.grid, self.values + other.values)

    def __sub__(self, other: "BorelFunction") -> "BorelFunction":
        return BorelFunction(self.grid, self.values - other.values)

    def __mul__(self, a) -> "BorelFunction":
        return BorelFunction(self.grid, self.values * a)

    __rmul__ = __mul__

    def reduced(self) -> np.ndarray:
        """omega / (tau1 tau2), smooth along every ray for functions vanishing linearly."""
        t1, t2, _ = self.grid.mesh()
        return self.values / (t1 * t2)

    def to_csv(self, path: str | Path) -> None:
        g = self.grid
        t1, t2, m = g.mesh()
        t1, t2, m = np.broadcast_arrays(t1, t2, m)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["abs_tau1", "arg_tau1", "abs_tau2", "arg_tau2", "m", "re", "im"])
            for a, b, c, v in zip(t1.ravel(), t2.ravel(), m.ravel(), self.values.ravel()):
                w.writerow([f"{abs(a):.17g}", f"{np.angle(a):.17g}", f"{abs(b):.17g}",
                            f"{np.angle(b):.17g}", f"{c.real:.17g}", f"{v.real:.17g}",
                            f"{v.imag:.17g}"])


@dataclass(frozen=True)
class NormParams:
    nu1: float
    nu2: float
    beta: float
    mu: float
    k1: int
    k2: int
    eps: complex

    def __post_init__(self):
        if min(self.nu1, self.nu2, self.beta) <= 0 or self.mu <= 1:
            raise ValueError("need nu, beta > 0 and mu > 1")
        if self.eps == 0:
            raise ValueError("eps must be nonzero")

    def with_eps(self, eps: complex) -> "NormParams":
        return NormParams(self.nu1, self.nu2, self.beta, self.mu, self.k1, self.k2, eps)


def norm_weight(tau1, tau2, m, p: NormParams) -> np.ndarray:
    """The multiplier whose grid sup against |omega| is the weighted norm."""
    a1 = np.abs(np.asarray(tau1) / p.eps)
    a2 = np.abs(np.asarray(tau2) / p.eps)
    am = np.abs(np.asarray(m, dtype=float))
    return ((1 + am) ** p.mu * (1 + a1 ** (2 * p.k1)) / a1 * (1 + a2 ** (2 * p.k2)) / a2
            * np.exp(p.beta * am - p.nu1 * a1 ** p.k1 - p.nu2 * a2 ** p.k2))


def inverse_weight(grid: BorelGrid, p: NormParams) -> BorelFunction:
    t1, t2, m = grid.mesh()
    return BorelFunction(grid, np.broadcast_to(1.0 / norm_weight(t1, t2, m, p), grid.shape))


def weighted_norm(omega: BorelFunction, p: NormParams) -> float:
    t1, t2, m = omega.grid.mesh()
    return float(np.max(norm_weight(t1, t2, m, p) * np.abs(omega.values)))


# --------------------------------------------------------------------------
# forcing and divisor


def psi_k(cfg: ProblemConfig, tau1, tau2, m, eps: complex, n_max: int = 8) -> np.ndarray:
    """Borel transform of the forcing: sum F_n tau1^n1 tau2^n2 / (G(n1/k1) G(n2/k2))."""
    tau1, tau2, m = np.broadcast_arrays(np.asarray(tau1, dtype=complex),
                                        np.asarray(tau2, dtype=complex),
                                        np.asarray(m, dtype=float))
    out = np.zeros(tau1.shape, dtype=complex)
    for t in cfg.forcing.terms:
        if t.n1 > n_max or t.n2 > n_max or t.kind == "zero":
            continue
        c = t(m, eps) / (gamma(t.n1 / cfg.k1) * gamma(t.n2 / cfg.k2))
        out = out + c * tau1 ** t.n1 * tau2 ** t.n2
    return out


def psi_k_tail(cfg: ProblemConfig, tau1: complex, tau2: complex, n_max: int,
               n_cut: int = 200) -> float:
    """Bound on the part of psi_k with max(n1, n2) > n_max under the forcing bound."""
    K0, T0 = cfg.forcing.K0, cfg.forcing.T0
    a, b = abs(tau1) / T0, abs(tau2) / T0
    n = np.arange(1, n_cut + 1)
    with np.errstate(over="ignore", under="ignore"):
        s1 = np.exp(n * math.log(a) - np.log(gamma(n / cfg.k1))) if a > 0 else np.zeros(n_cut)
        s2 = np.exp(n * math.log(b) - np.log(gamma(n / cfg.k2))) if b > 0 else np.zeros(n_cut)
    total = s1.sum() * s2.sum()
    head = s1[:n_max].sum() * s2[:n_max].sum()
    return float(K0 * max(total - head, 0.0))


def p_m(cfg: ProblemConfig, tau1, tau2, m) -> np.ndarray:
    """The divisor Q(im) + R_D1D2(im)(k1 tau1^k1)^dD1 (k2 tau2^k2)^(dD2-1) + R_D3(im)(k2 tau2^k2)^(dD3-1)."""
    tau1 = np.asarray(tau1, dtype=complex)
    tau2 = np.asarray(tau2, dtype=complex)
    im = 1j * np.asarray(m, dtype=float)
    x1 = cfg.k1 * tau1 ** cfg.k1
    x2 = cfg.k2 * tau2 ** cfg.k2
    return (cfg.Q(im) + cfg.R_D1D2(im) * x1 ** cfg.delta_D1 * x2 ** (cfg.deltat_D2 - 1)
            + cfg.R_D3(im) * x2 ** (cfg.deltat_D3 - 1))


class RootLocus(NamedTuple):
    T0: complex
    iterations: int
    residual: float
    roots: np.ndarray
    increments: tuple[float, ...] = ()


def _psi_map(cfg: ProblemConfig, tau1: complex, m: float):
    im = 1j * m
    r = (cfg.deltat_D3 - cfg.deltat_D2) // (cfg.deltat_D2 - 1)
    a = cfg.R_D1D2(im) * cfg.k1 ** cfg.delta_D1 * cfg.k2 ** (cfg.deltat_D2 - 1) \
        * tau1 ** (cfg.k1 * cfg.delta_D1)
    b = cfg.R_D3(im) * cfg.k2 ** (cfg.deltat_D3 - 1)
    q = cfg.Q(im)

    def psi(T):
        return -q / (a + b * T ** r)

    def dpsi(T):
        if r == 0:
            return 0.0 * T
        return q * b * r * T ** (r - 1) / (a + b * T ** r) ** 2

    return psi, dpsi


def psi_root_iterate(cfg: ProblemConfig, tau1: complex, m: float, rho2: float,
                     tol: float = 1e-14, max_iter: int = 200) -> RootLocus:
    """Fixed point of T -> Psi(T) giving the tau2-roots of P_m for fixed tau1.

    The map is a contraction of the disc of radius (rho2/2)^(k2 (dD2 - 1)) once
    |tau1| is large; this is checked on a polar sample of the disc before
    iterating from T = 0.  Returns T0, the iteration count, the final residual
    |Psi(T0) - T0| and the k2 (dD2 - 1) roots tau2 = T0^(1/n) e^(2 pi i j / n).
    """
    ok, _ = is_integer_ratio(cfg)
    if not ok:
        raise ConfigError("root locus is only supported when (dD3 - dD2)/(dD2 - 1) is an integer")
    n = cfg.k2 * (cfg.deltat_D2 - 1)
    q = complex(cfg.Q(1j * m))
    if q == 0:
        return RootLocus(0j, 0, 0.0, np.zeros(n, dtype=complex))
    psi, dpsi = _psi_map(cfg, complex(tau1), float(m))
    radius = (rho2 / 2) ** n
    rr, tt = np.meshgrid(np.linspace(0, radius, 12), np.linspace(0, 2 * np.pi, 24, endpoint=False))
    sample = (rr * np.exp(1j * tt)).ravel()
    with np.errstate(divide="ignore", invalid="ignore"):
        vals = np.abs(psi(sample))
        ders = np.abs(dpsi(sample))
    if not (np.all(np.isfinite(vals)) and vals.max() <= radius and ders.max() <= 0.5):
        raise RootIterationError("tau1 too small: Psi is not a contraction of the disc")
    T = 0j
    increments = []
    for it in range(1, max_iter + 1):
        T_new = complex(psi(T))
        increments.append(abs(T_new - T))
        T = T_new
        res = abs(complex(psi(T)) - T)
        if res <= tol:
            break
    else:
        raise RootIterationError(f"no convergence after {max_iter} iterations (residual {res:.3e})")
    base = T ** (1.0 / n) if T != 0 else 0j
    roots = base * np.exp(2j * np.pi * np.arange(n) / n)
    return RootLocus(T, it, float(res), roots, tuple(increments))


# --------------------------------------------------------------------------
# lower bound on |P_m| and direction choice


class PmBound(NamedTuple):
    C_emp: float
    worst_point: tuple[complex, complex, float]
    passed: bool


def pm_ratio(cfg: ProblemConfig, tau1, tau2, m, rho1: float) -> np.ndarray:
    """|P_m / Q(im)| divided by the comparison function of the lower bound."""
    tau1, tau2, m = np.broadcast_arrays(np.asarray(tau1, dtype=complex),
                                        np.asarray(tau2, dtype=complex),
                                        np.asarray(m, dtype=float))
    a1 = np.abs(tau1) ** cfg.k1
    a2 = np.abs(tau2) ** cfg.k2
    expo = np.where(np.abs(tau1) <= rho1, cfg.deltat_D3 - 1, cfg.deltat_D2 - 1)
    comp = (1 + a1) ** cfg.delta_D1 * (1 + a2) ** expo
    return np.abs(p_m(cfg, tau1, tau2, m) / cfg.Q(1j * m)) / comp


def verify_pm_lower_bound(cfg: ProblemConfig, grid, rho1: float,
                          threshold: float = 1e-3) -> PmBound:
    """Empirical constant C_emp of the lower bound for |P_m| on the grid nodes.

    ``grid`` is a BorelGrid or a tuple (tau1_nodes, tau2_nodes, m_nodes).
    """
    if isinstance(grid, BorelGrid):
        t1, t2, m = grid.tau1.ravel(), grid.tau2, grid.m_grid.nodes
    else:
        t1, t2, m = (np.ravel(np.asarray(v)) for v in grid)
    ratio = pm_ratio(cfg, t1[:, None, None], t2[None, :, None], m[None, None, :], rho1)
    i = np.unravel_index(int(np.argmin(ratio)), ratio.shape)
    c = float(ratio[i])
    return PmBound(c, (complex(t1[i[0]]), complex(t2[i[1]]), float(m[i[2]])), c > threshold)


def default_rho1(cfg: ProblemConfig, m_nodes: np.ndarray, rho0: float = 1.0) -> float:
    """Largest disc radius on which |A(m, tau)| <= 1/2 for |tau2| >= rho0, capped by rho."""
    im = 1j * np.asarray(m_nodes, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        s = np.max(np.abs(cfg.R_D1D2(im) / cfg.R_D3(im)))
    if not np.isfinite(s):
        return cfg.rho
    s *= cfg.k1 ** cfg.delta_D1 * cfg.k2 ** (cfg.deltat_D2 - 1) / cfg.k2 ** (cfg.deltat_D3 - 1)
    s /= rho0 ** (cfg.k2 * (cfg.deltat_D3 - cfg.deltat_D2))
    if s == 0:
        return cfg.rho
    return float(min(cfg.rho, (1.0 / (2 * s)) ** (1.0 / (cfg.k1 * cfg.delta_D1))))


@dataclass
class DirectionChoice:
    d1: float
    d2: float
    rho1: float
    C_emp: float
    diagnostics: dict

    def to_dict(self) -> dict:
        return {"d1": self.d1, "d2": self.d2, "rho1": self.rho1, "C_emp": self.C_emp,
                **self.diagnostics}


def _scan_nodes(R: float, n: int, r_min: float = 1e-3) -> np.ndarray:
    return np.geomspace(r_min, R, n)


def select_directions(cfg: ProblemConfig, m_grid: FrequencyGrid, rho1_hint: float | None = None,
                      scan_radii: tuple[float, float] = (1.5, 1.5), n_scan: int = 72,
                      n_rad: int = 20, threshold: float = 1e-3, n_disc_angles: int = 16,
                      d1_fixed: float | None = None, d2_fixed: float | None = None) -> DirectionChoice:
    """Pick (d1, d2) maximizing the empirical lower-bound constant C_emp.

    A coarse scan over ``n_scan`` x ``n_scan`` direction pairs is refined by a
    bounded scalar search in each direction.  Either direction may be pinned.
    """
    rho1 = default_rho1(cfg, m_grid.nodes) if rho1_hint is None else min(rho1_hint, cfg.rho)
    m = m_grid.nodes
    r1 = _scan_nodes(scan_radii[0], n_rad)
    r2 = _scan_nodes(scan_radii[1], n_rad)
    disc_r = _scan_nodes(rho1, max(4, n_rad // 2))
    disc = (disc_r[None, :] * np.exp(2j * np.pi * np.arange(n_disc_angles) / n_disc_angles)[:, None]).ravel()

    def c_emp(d1, d2):
        t1 = np.concatenate([r1 * np.exp(1j * d1), disc])
        t2 = r2 * np.exp(1j * d2)
        return float(np.min(pm_ratio(cfg, t1[:, None, None], t2[None, :, None], m[None, None, :], rho1)))

    angles = 2 * np.pi * np.arange(n_scan) / n_scan
    d1_list = angles if d1_fixed is None else np.array([d1_fixed])
    d2_list = angles if d2_fixed is None else np.array([d2_fixed])
    # the disc part does not depend on d1: scan it once per d2
    t2_all = r2[None, :] * np.exp(1j * d2_list)[:, None]
    disc_min = np.array([
        np.min(pm_ratio(cfg, disc[:, None, None], t2[None, :, None], m[None, None, :], rho1))
        for t2 in t2_all])
    table = np.empty((len(d1_list), len(d2_list)))
    im = 1j * m
    q = cfg.Q(im)
    c12 = cfg.R_D1D2(im) / q
    c3 = cfg.R_D3(im) / q
    x2 = (cfg.k2 * t2_all ** cfg.k2)[:, :, None]
    a2 = np.abs(t2_all) ** cfg.k2
    term3 = c3[None, None, :] * x2 ** (cfg.deltat_D3 - 1)
    x2c = x2 ** (cfg.deltat_D2 - 1) * c12[None, None, :]
    comp2 = (1 + a2) ** (cfg.deltat_D2 - 1)
    for a, d1 in enumerate(d1_list):
        t1 = r1 * np.exp(1j * d1)
        x1 = (cfg.k1 * t1 ** cfg.k1) ** cfg.delta_D1
        comp1 = (1 + np.abs(t1) ** cfg.k1) ** cfg.delta_D1
        # ray nodes beyond rho1 use the dD2 comparison; inside rho1 the dD3 one
        comp = comp1[:, None, None] * np.where(np.abs(t1)[:, None, None] <= rho1,
                                               ((1 + a2) ** (cfg.deltat_D3 - 1))[None],
                                               comp2[None])
        val = np.abs(1 + x1[:, None, None, None] * x2c[None] + term3[None])
        ratio = val / comp[..., None]
        table[a] = np.minimum(ratio.min(axis=(0, 2, 3)), disc_min)
    i, j = np.unravel_index(int(np.argmax(table)), table.shape)
    d1, d2 = float(d1_list[i]), float(d2_list[j])
    best = float(table[i, j])
    step = 2 * np.pi / n_scan
    # golden-section style refinement, one coordinate at a time
    for _ in range(2):
        if d1_fixed is None:
            res = minimize_scalar(lambda a: -c_emp(a, d2), bounds=(d1 - step, d1 + step),
                                  method="bounded", options={"xatol": 1e-4})
            if -res.fun > best:
                d1, best = float(res.x), float(-res.fun)
        if d2_fixed is None:
            res = minimize_scalar(lambda b: -c_emp(d1, b), bounds=(d2 - step, d2 + step),
                                  method="bounded", options={"xatol": 1e-4})
            if -res.fun > best:
                d2, best = float(res.x), float(-res.fun)
    diagnostics = {"scan_max": float(table.max()), "scan_min": float(table.min()),
                   "n_pairs": int(table.size), "threshold": threshold}
    if best <= threshold:
        raise DirectionSearchError(
            f"no direction pair reaches C_emp > {threshold} (best {best:.3e}); refine the grid or annulus data")
    return DirectionChoice(float(np.mod(d1, 2 * np.pi)), float(np.mod(d2, 2 * np.pi)), rho1, best,
                           diagnostics)


def tau2_root_arguments(cfg: ProblemConfig, m_nodes, tau1_samples) -> np.ndarray:
    """Arguments of all tau2-roots of P_m over sampled tau1 and m (equal-delta case)."""
    if cfg.deltat_D2 != cfg.deltat_D3:
        raise ConfigError("closed-form roots need deltat_D2 == deltat_D3")
    n = cfg.k2 * (cfg.deltat_D2 - 1)
    out = []
    for m in np.ravel(m_nodes):
        for t1 in np.ravel(tau1_samples):
            psi, _ = _psi_map(cfg, complex(t1), float(m))
            T0 = complex(psi(0j))
            base = T0 ** (1.0 / n)
            out.extend(np.angle(base * np.exp(2j * np.pi * np.arange(n) / n)))
    return np.asarray(out)


__all__ = [
    "BorelFunction", "BorelGrid", "DirectionChoice", "DirectionSearchError", "NormParams",
    "PmBound", "RootIterationError", "RootLocus", "SectorGeometry", "cheb_nodes",
    "default_rho1", "interp_matrix", "inverse_weight", "jacobi01", "legendre01", "norm_weight",
    "p_m", "pm_ratio", "psi_k", "psi_k_tail", "psi_root_iterate", "ray_power",
    "select_directions", "tau2_root_arguments", "verify_pm_lower_bound", "weighted_norm",
]
