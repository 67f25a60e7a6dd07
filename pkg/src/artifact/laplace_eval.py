"""Good coverings, associated sectors and evaluation of the sectorial solutions.

A solution u_p is the double Laplace transform (orders k1, k2) of the Borel
fixed point followed by the inverse Fourier transform in m.  The Laplace
integrals run along the grid rays, so every node value is used exactly and
off-node values come from the same barycentric interpolation as the operator.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate
from scipy.special import gamma

from .borel_plane import (BorelFunction, BorelGrid, SectorGeometry, interp_matrix, legendre01,
                          pm_ratio)
from .config import ProblemConfig
from .fixed_point import (FixedPointReport, build_grid, solve_fixed_point, volterra_callable)
from .fourier import SQRT_2PI, convolve_on_grid, inverse_fourier_many, tail_bound

log = logging.getLogger(__name__)


class CoveringError(ValueError):
    pass


class AssociationError(ValueError):
    pass


class DirectionError(ValueError):
    """The Laplace decay contract cos(k (gamma - arg(eps t))) >= delta fails."""


def _wrap(x):
    return (np.asarray(x) + np.pi) % (2 * np.pi) - np.pi


# --------------------------------------------------------------------------
# good coverings


@dataclass
class GoodCovering:
    sectors: list[list[SectorGeometry]]
    sigma1: int
    sigma2: int
    opening: float
    eps0: float

    def cells(self):
        for p1 in range(self.sigma1):
            for p2 in range(self.sigma2):
                yield (p1, p2), self.sectors[p1][p2]

    def sector(self, p) -> SectorGeometry:
        return self.sectors[p[0]][p[1]]

    def multiplicity(self, angles) -> np.ndarray:
        angles = np.asarray(angles, dtype=float)
        return sum(s.contains_angle(angles).astype(int) for _, s in self.cells())

    def overlapping_pairs(self):
        """Pairs of distinct cells whose sectors intersect, with the intersection bisector."""
        cells = list(self.cells())
        out = []
        for i in range(len(cells)):
            for j in range(i + 1, len(cells)):
                (p, a), (q, b) = cells[i], cells[j]
                lo, hi = _arc_intersection(a, b)
                if lo is not None:
                    out.append((p, q, lo, hi))
        return out

    def to_dict(self) -> dict:
        return {"sigma1": self.sigma1, "sigma2": self.sigma2, "opening": self.opening,
                "eps0": self.eps0,
                "sectors": [[s.to_dict() for s in row] for row in self.sectors]}


def _arc_intersection(a: SectorGeometry, b: SectorGeometry):
    """Angular interval (lo, hi) common to two sectors, or (None, None)."""
    d = float(_wrap(b.direction - a.direction))
    lo = max(-a.half_opening, d - b.half_opening)
    hi = min(a.half_opening, d + b.half_opening)
    if hi > lo:
        return a.direction + lo, a.direction + hi
    # the other way around the circle
    d2 = d - 2 * np.pi if d > 0 else d + 2 * np.pi
    lo = max(-a.half_opening, d2 - b.half_opening)
    hi = min(a.half_opening, d2 + b.half_opening)
    if hi > lo:
        return a.direction + lo, a.direction + hi
    return None, None


def required_opening(k1: int, k2: int) -> float:
    """pi/k2 when k1 < k2, pi/k1 otherwise."""
    return math.pi / k2 if k1 < k2 else math.pi / k1


def build_good_covering(sigma1: int, sigma2: int, eps0: float, k1: int, k2: int,
                        overlap_frac: float = 0.1, opening: float | None = None,
                        n_check: int = 3600) -> GoodCovering:
    """sigma1*sigma2 equal sectors with equally spaced bisectors starting at 0.

    The opening is slightly larger than the required one; ``opening``
    overrides it.  Coverage (every angle in >= 1 sector) and the absence of
    triple overlaps are checked on ``n_check`` angles.
    """
    if not 0 < overlap_frac < 0.5:
        raise CoveringError("overlap_frac must lie in (0, 1/2)")
    n = sigma1 * sigma2
    if n < 1:
        raise CoveringError("need at least one sector")
    if opening is None:
        opening = required_opening(k1, k2) * (1 + overlap_frac)
    if n < math.ceil(2 * math.pi / opening - 1e-12):
        raise CoveringError(f"{n} sectors of opening {opening:.4f} cannot cover the circle")
    sectors = [[SectorGeometry(2 * math.pi * (p1 * sigma2 + p2) / n, opening / 2, 0.0, eps0)
                for p2 in range(sigma2)] for p1 in range(sigma1)]
    cov = GoodCovering(sectors, sigma1, sigma2, opening, eps0)
    mult = cov.multiplicity(2 * math.pi * (np.arange(n_check) + 0.5) / n_check)
    if mult.min() < 1:
        raise CoveringError(f"gap in the covering: opening {opening:.4f} with {n} sectors")
    if mult.max() > 2:
        raise CoveringError(f"triple overlap: opening {opening:.4f} with {n} sectors")
    return cov


# --------------------------------------------------------------------------
# associated sectors


@dataclass
class AssociatedFamily:
    time_sectors: tuple[SectorGeometry, SectorGeometry]
    directions: dict
    theta: tuple[float, float]
    covering: GoodCovering

    def cell_directions(self, p) -> tuple[float, float]:
        return self.directions[tuple(p)]

    def membership(self, n: int = 10) -> tuple[bool, list]:
        """Check eps t_j in S_{d_j, theta_j} on an n x n x n sample per cell and variable.

        Returns (ok, violations) with violations listing (cell, j, eps, t).
        """
        bad = []
        for p, sec in self.covering.cells():
            d = self.directions[p]
            eps_arg = sec.direction + sec.half_opening * np.linspace(-1, 1, n) * (1 - 1e-9)
            eps_mod = sec.outer_radius * np.linspace(0.1, 1.0, n)
            for j in range(2):
                ts = self.time_sectors[j]
                t_arg = ts.direction + ts.half_opening * np.linspace(-1, 1, n) * (1 - 1e-9)
                t_mod = ts.outer_radius * np.linspace(0.1, 1.0, n)
                ang = eps_arg[:, None, None] + t_arg[None, None, :] + 0 * t_mod[None, :, None]
                dist = np.abs(_wrap(ang - d[j]))
                mask = dist >= self.theta[j] / 2
                if mask.any():
                    a, b, c = np.argwhere(mask)[0]
                    bad.append((p, j + 1, complex(eps_mod[b] * np.exp(1j * eps_arg[a])),
                                complex(t_mod[b] * np.exp(1j * t_arg[c]))))
        return not bad, bad

    def to_dict(self) -> dict:
        return {"time_sectors": [s.to_dict() for s in self.time_sectors],
                "theta": list(self.theta),
                "directions": {f"{p[0]},{p[1]}": list(d) for p, d in self.directions.items()}}


def default_direction_table(cov: GoodCovering, time_dirs=(0.0, 0.0)) -> dict:
    """d_j(p) = bisector of the cell + bisector of the time sector T_j."""
    return {p: (float(np.mod(s.direction + time_dirs[0], 2 * np.pi)),
                float(np.mod(s.direction + time_dirs[1], 2 * np.pi)))
            for p, s in cov.cells()}


def associate_sectors(cov: GoodCovering, cfg: ProblemConfig, direction_table: dict | None = None,
                      time_dirs=(0.0, 0.0), time_openings=(0.1, 0.1), time_radius: float = 0.5,
                      theta: tuple[float, float] | None = None, n_samples: int = 10) -> AssociatedFamily:
    """Time sectors T1, T2 and Borel openings theta_j > pi/k_j compatible with the covering.

    By default theta_j is the smallest admissible value: slightly above both
    pi/k_j and the angular width swept by eps t_j over a cell.
    """
    table = direction_table or default_direction_table(cov, time_dirs)
    missing = [p for p, _ in cov.cells() if p not in table]
    if missing:
        raise AssociationError(f"no directions for cells {missing}")
    ks = (cfg.k1, cfg.k2)
    if theta is None:
        theta = tuple(max(math.pi / ks[j], cov.opening + time_openings[j]) * (1 + 1e-3)
                      for j in range(2))
    if any(theta[j] <= math.pi / ks[j] for j in range(2)):
        raise AssociationError("theta_j must exceed pi/k_j")
    ts = tuple(SectorGeometry(time_dirs[j], time_openings[j] / 2, 0.0, time_radius)
               for j in range(2))
    fam = AssociatedFamily(ts, {tuple(p): tuple(d) for p, d in table.items()}, theta, cov)
    ok, bad = fam.membership(n_samples)
    if not ok:
        p, j, e, t = bad[0]
        raise AssociationError(f"eps t{j} leaves S_(d{j}, theta{j}) in cell {p} at eps={e:.3g}, t={t:.3g}")
    return fam


# --------------------------------------------------------------------------
# Laplace quadrature


def _decay_cos(k: int, gamma_dir: float, T: complex) -> float:
    return math.cos(k * float(_wrap(gamma_dir - np.angle(T))))


def _weight_factor(r, eps, k, nu):
    a = np.abs(r / eps)
    return a / (1 + a ** (2 * k)) * np.exp(nu * a ** k)


def laplace_ray_weights(radii: np.ndarray, L: float, theta: float, T: complex, k: int,
                        n_quad: int = 64, cutoff: float = 40.0, min_cos: float = 1e-3):
    """Weights W with k int_0^inf omega(r e^{i theta}) e^{-(r e^{i theta}/T)^k} dr/r = sum_i W_i g_i.

    ``g`` holds the reduced values omega/tau at the Chebyshev nodes ``radii``
    of [0, L].  The integral is cut where the kernel falls below e^-cutoff.
    Returns (W, L_eff, cos) with cos the decay factor cos(k(theta - arg T)).
    """
    c = _decay_cos(k, theta, T)
    if c < min_cos:
        raise DirectionError(f"cos(k(gamma - arg T)) = {c:.3g} < {min_cos}")
    L_eff = min(L, abs(T) * (cutoff / c) ** (1.0 / k))
    x, w = legendre01(n_quad)
    r = L_eff * x
    B = interp_matrix(radii, r)
    kern = k * w * L_eff * np.exp(-(r * np.exp(1j * theta) / T) ** k) * np.exp(1j * theta)
    return kern @ B, L_eff, c


def _laplace_tail(L_eff, T, k, c, eps, nu):
    """int_{L_eff}^inf of the weight factor times exp(-c (r/|T|)^k) dr/r, and the full integral."""
    rate = c / abs(T) ** k - nu / abs(eps) ** k
    if rate <= 0:
        return math.inf, math.inf

    def f(r):
        a = r / abs(eps)
        return k * a / (1 + a ** (2 * k)) * math.exp(-rate * r ** k) / r

    full, _ = integrate.quad(f, 0, math.inf, limit=200)
    tail, _ = integrate.quad(f, L_eff, math.inf, limit=200)
    return max(tail, 0.0), full


@dataclass
class SolutionSample:
    t1: np.ndarray
    t2: np.ndarray
    z: np.ndarray
    eps: complex
    u: np.ndarray
    bound: np.ndarray

    def to_csv(self, path) -> None:
        import csv
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["re_t1", "im_t1", "re_t2", "im_t2", "re_z", "im_z", "re_eps", "im_eps",
                        "re_u", "im_u", "bound"])
            for idx in np.ndindex(self.u.shape):
                a, b, c = self.t1[idx[0]], self.t2[idx[1]], self.z[idx[2]]
                v = self.u[idx]
                w.writerow([f"{x:.17g}" for x in (a.real, a.imag, b.real, b.imag, c.real, c.imag,
                                                   self.eps.real, self.eps.imag, v.real, v.imag,
                                                   self.bound[idx])])


class SolutionEvaluator:
    """u(t, z, eps) = (k1 k2/sqrt(2 pi)) int int int omega e^{-(u1/(eps t1))^k1 - (u2/(eps t2))^k2} e^{izm}.

    Built from a fixed point on a grid whose ray 0 and tau2 ray are the
    Laplace directions gamma1, gamma2.
    """

    def __init__(self, omega: BorelFunction, cfg: ProblemConfig, eps: complex,
                 varpi: float | None = None, n_quad: int = 64, nu=None):
        self.omega = omega
        self.cfg = cfg
        self.eps = complex(eps)
        g = omega.grid
        self.grid = g
        self.gamma1 = float(g.theta1[0])
        self.gamma2 = float(g.d2)
        self.n_quad = n_quad
        self.nu = nu or cfg.nu
        t1, t2, _ = g.mesh()
        self.reduced = (omega.values / (t1 * t2))[0]          # ray 0 only: (N1, N2, M)
        self.varpi = varpi
        self.m = g.m_grid.nodes

    def profile(self, t1, t2) -> np.ndarray:
        """U(eps t1, eps t2, m) on the m-grid for arrays t1 (P,), t2 (Q,): shape (P, Q, M)."""
        t1 = np.atleast_1d(np.asarray(t1, dtype=complex))
        t2 = np.atleast_1d(np.asarray(t2, dtype=complex))
        g = self.grid
        W1 = np.stack([laplace_ray_weights(g.radii1[0], g.ray_lengths[0], self.gamma1,
                                           self.eps * a, self.cfg.k1, self.n_quad)[0] for a in t1])
        W2 = np.stack([laplace_ray_weights(g.radii2, g.R2, self.gamma2, self.eps * b,
                                           self.cfg.k2, self.n_quad)[0] for b in t2])
        return np.einsum("pi,qj,ijm->pqm", W1, W2, self.reduced)

    def __call__(self, t1, t2, z) -> np.ndarray:
        """u on the product of the point arrays t1, t2, z: shape (P, Q, Z)."""
        prof = self.profile(t1, t2)
        return inverse_fourier_many(prof, self.grid.m_grid, np.atleast_1d(z))

    def bound(self, t1: complex, t2: complex, z: complex) -> float:
        """Truncation bound: Laplace tails beyond the cut plus the Fourier tail beyond M_max."""
        if self.varpi is None or self.varpi == 0:
            return 0.0
        cfg, g = self.cfg, self.grid
        parts = []
        for j, (t, k, L, gam, nu) in enumerate(((t1, cfg.k1, g.ray_lengths[0], self.gamma1, self.nu[0]),
                                                 (t2, cfg.k2, g.R2, self.gamma2, self.nu[1]))):
            T = self.eps * t
            c = _decay_cos(k, gam, T)
            L_eff = min(L, abs(T) * (40.0 / c) ** (1.0 / k))
            parts.append(_laplace_tail(L_eff, T, k, c, self.eps, nu))
        (tail1, full1), (tail2, full2) = parts
        decay = cfg.beta - abs(complex(z).imag)
        m_int = 2 * integrate.quad(lambda m: (1 + m) ** (-cfg.mu) * math.exp(-decay * m),
                                   0, math.inf)[0]
        lap = self.varpi * (tail1 * full2 + full1 * tail2) * m_int / SQRT_2PI
        four = tail_bound(self.varpi, g.m_grid.M_max, decay, cfg.mu) * full1 * full2 / SQRT_2PI
        return float(lap + four)

    def sample(self, t1, t2, z) -> SolutionSample:
        t1 = np.atleast_1d(np.asarray(t1, dtype=complex))
        t2 = np.atleast_1d(np.asarray(t2, dtype=complex))
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        u = self(t1, t2, z)
        b = np.array([[[self.bound(a, b_, c) for c in z] for b_ in t2] for a in t1])
        return SolutionSample(t1, t2, z, self.eps, u, b)


def evaluate_solution(omega: BorelFunction, cfg: ProblemConfig, t1: complex, t2: complex,
                      z: complex, eps: complex, gamma1: float, gamma2: float,
                      varpi: float | None = None) -> tuple[complex, float]:
    """u(t1, t2, z, eps) and its truncation bound along the grid rays gamma1, gamma2."""
    if abs(complex(z).imag) >= cfg.beta_prime:
        raise DirectionError(f"|Im z| = {abs(complex(z).imag)} outside the strip of width {cfg.beta_prime}")
    g = omega.grid
    for name, have, want in (("gamma1", g.theta1[0], gamma1), ("gamma2", g.d2, gamma2)):
        if abs(_wrap(have - want)) > 1e-12:
            raise DirectionError(f"{name} = {want} is not a grid ray (grid has {have})")
    if not np.any(omega.values):
        return 0j, 0.0
    ev = SolutionEvaluator(omega, cfg, eps, varpi)
    for j, (t, k, gam) in enumerate(((t1, cfg.k1, gamma1), (t2, cfg.k2, gamma2)), start=1):
        if _decay_cos(k, gam, eps * t) < 1e-3:
            raise DirectionError(f"decay contract fails in variable t{j}")
    u = complex(ev(t1, t2, z)[0, 0, 0])
    return u, ev.bound(t1, t2, z) if varpi is not None else 0.0


# --------------------------------------------------------------------------
# sectorial solutions with per-eps solves


def root_free_projection(cfg: ProblemConfig, start: tuple[float, float], target: tuple[float, float],
                         extents: tuple[float, float], threshold: float = 1e-3,
                         rho1: float = 0.5, n_steps: int = 48, n_rad: int = 24):
    """Walk from ``start`` toward ``target`` in direction space; stop before |P_m| gets small.

    Returns the last direction pair on the segment whose rays (out to the
    grid extents) keep C_emp above ``threshold``.
    """
    m = cfg.m_grid.nodes
    r1 = np.geomspace(1e-4 * extents[0], extents[0], n_rad)
    r2 = np.geomspace(1e-4 * extents[1], extents[1], n_rad)

    def ok(d1, d2):
        t1 = r1 * np.exp(1j * d1)
        t2 = r2 * np.exp(1j * d2)
        return np.min(pm_ratio(cfg, t1[:, None, None], t2[None, :, None], m[None, None, :], rho1)) > threshold

    s = np.asarray(start, dtype=float)
    delta = _wrap(np.asarray(target, dtype=float) - s)
    if not ok(*s):
        raise AssociationError(f"cell directions {tuple(s)} already meet a root of P_m")
    last = s
    for frac in np.linspace(0, 1, n_steps + 1)[1:]:
        cand = s + frac * delta
        if not ok(*cand):
            break
        last = cand
    return float(last[0]), float(last[1])


@dataclass
class SectorialSolution:
    """u_p(t, z, eps) for one covering cell, solving the Borel problem per eps.

    For each eps the Laplace rays point at arg(eps t_c) (t_c the time-sector
    bisector), moved back toward the cell directions only as far as needed to
    stay clear of the roots of P_m.  With ``track=False`` the rays stay on the
    cell directions.
    """

    cfg: ProblemConfig
    directions: tuple[float, float]
    time_dirs: tuple[float, float] = (0.0, 0.0)
    n_rad: int = 24
    tol: float = 1e-12
    t_max: float = 0.5
    threshold: float = 1e-3
    track: bool = True
    max_iter: int = 60
    cache: dict = field(default_factory=dict, repr=False)

    def rays(self, eps: complex) -> tuple[float, float]:
        if not self.track:
            return self.directions
        target = (np.angle(eps) + self.time_dirs[0], np.angle(eps) + self.time_dirs[1])
        from .fixed_point import grid_extent
        ext = (grid_extent(eps, self.cfg.k1, self.t_max), grid_extent(eps, self.cfg.k2, self.t_max))
        return root_free_projection(self.cfg, self.directions, target, ext, self.threshold)

    def solve(self, eps: complex) -> tuple[SolutionEvaluator, FixedPointReport]:
        key = complex(eps)
        if key not in self.cache:
            g1, g2 = self.rays(eps)
            grid = build_grid(self.cfg, eps, g1, g2, n_rad=self.n_rad, n_ang=1, t_max=self.t_max)
            rep = solve_fixed_point(self.cfg, eps, None, grid, tol=self.tol, max_iter=self.max_iter)
            self.cache[key] = (SolutionEvaluator(rep.omega, self.cfg, eps, rep.varpi_emp), rep)
        return self.cache[key]

    def __call__(self, t1, t2, z, eps) -> np.ndarray:
        ev, _ = self.solve(eps)
        return ev(t1, t2, z)


# --------------------------------------------------------------------------
# transform identities


@dataclass(frozen=True)
class SeparableTest:
    """omega(u1, u2, m) = u1^a1 e^{-u1^b1} u2^a2 e^{-u2^b2} h(m) with h(m) = e^{-m^2}."""

    a1: int = 1
    a2: int = 1
    b1: int = 1
    b2: int = 2

    def g1(self, u):
        return u ** self.a1 * np.exp(-u ** self.b1)

    def g2(self, u):
        return u ** self.a2 * np.exp(-u ** self.b2)

    @staticmethod
    def h(m):
        return np.exp(-np.asarray(m) ** 2)


def _laplace_nodes(T: complex, k: int, gamma_dir: float, n: int, cutoff: float = 46.0):
    c = _decay_cos(k, gamma_dir, T)
    if c <= 0.05:
        raise DirectionError(f"decay factor {c:.3g} too small for a Laplace quadrature")
    L = abs(T) * (cutoff / c) ** (1.0 / k)
    x, w = legendre01(n)
    r = L * x
    u = r * np.exp(1j * gamma_dir)
    kern = k * w * L / r * np.exp(-(u / T) ** k)
    return u, kern


def laplace_2d(fn, T1: complex, T2: complex, k1: int, k2: int, gamma1: float | None = None,
               gamma2: float | None = None, n: int = 160) -> np.ndarray:
    """k1 k2 int int fn(u1, u2) e^{-(u1/T1)^k1 - (u2/T2)^k2} du2/u2 du1/u1 on the rays gamma_j.

    ``fn(u1[:, None], u2[None, :])`` may return a trailing axis (e.g. m).
    """
    g1 = np.angle(T1) if gamma1 is None else gamma1
    g2 = np.angle(T2) if gamma2 is None else gamma2
    u1, w1 = _laplace_nodes(T1, k1, g1, n)
    u2, w2 = _laplace_nodes(T2, k2, g2, n)
    vals = fn(u1[:, None], u2[None, :])
    return np.einsum("i,j,ij...->...", w1, w2, vals)


def _cauchy_derivative(fn, T: complex, radius: float, n: int = 48):
    th = 2 * np.pi * np.arange(n) / n
    vals = np.stack([fn(T + radius * np.exp(1j * a)) for a in th])
    e = np.exp(-1j * th).reshape((n,) + (1,) * (vals.ndim - 1))
    return np.mean(vals * e, axis=0) / radius


def kconv_callable(f, g, tau: np.ndarray, k: int, nq: int = 48) -> np.ndarray:
    """int_0^{tau^k} f((tau^k-s)^(1/k)) g(s^(1/k)) ds/((tau^k-s)s) for exact f, g (vectorized in tau)."""
    tau = np.asarray(tau, dtype=complex)
    hx = 2.0 ** (-1.0 / k)
    xs, ws = legendre01(nq)
    x = hx * xs
    w = hx * ws
    y = (1 - x ** k) ** (1.0 / k)
    T = tau[..., None]
    ker = k * w * y ** (1.0 - k) / (x * y)
    # f(tau y) g(tau x)/(tau^k) * k/(x (1-x^k)) dx, written with y^(1-k)/(x y) = 1/(x (1-x^k))
    total = (f(T * y) * g(T * x) + f(T * x) * g(T * y)) * ker
    return np.sum(total, axis=-1) / tau ** k


@dataclass
class IdentityResult:
    name: str
    lhs: complex
    rhs: complex
    T: tuple[complex, complex]

    @property
    def rel_error(self) -> float:
        scale = max(abs(self.lhs), abs(self.rhs))
        return 0.0 if scale == 0 else abs(self.lhs - self.rhs) / scale


@dataclass
class IdentityReport:
    results: list[IdentityResult]
    skipped: list[str] = field(default_factory=list)

    def max_error(self, prefix: str = "") -> float:
        errs = [r.rel_error for r in self.results if r.name.startswith(prefix)]
        return max(errs) if errs else 0.0

    def passed(self, tol: float = 1e-5) -> bool:
        return self.max_error() <= tol

    def to_dict(self) -> dict:
        return {"results": [{"name": r.name, "T": [str(t) for t in r.T], "rel_error": r.rel_error}
                            for r in self.results], "skipped": self.skipped}


DEFAULT_T_POINTS = (
    (0.5 + 0j, 0.5 + 0j),
    (0.3 + 0j, 0.7 + 0j),
    (0.6 * np.exp(0.2j), 0.4 * np.exp(-0.1j)),
    (0.25 + 0j, 0.35 * np.exp(0.15j)),
    (0.8 * np.exp(-0.3j), 0.3 + 0j),
)


def laplace_identity_suite(test_fns, k1: int, k2: int, T_points=DEFAULT_T_POINTS,
                           m_nodes=None, powers=(1, 2, 3)) -> IdentityReport:
    """Check the three Laplace-algebra identities on separable test functions.

    (i)   T_j^(k_j+1) d_{T_j} U  =  transform of k_j u_j^k_j omega
    (ii)  T_j^n U  =  transform of the Riemann-Liouville kernel expression
    (iii) int U(m-m1) U(m1) dm1  =  transform of the double k-convolution
    Test functions without a separable form are skipped.
    """
    results: list[IdentityResult] = []
    skipped: list[str] = []
    if m_nodes is None:
        from .fourier import uniform_grid
        mg = uniform_grid(4.0, 0.25)
    else:
        mg = m_nodes
    ks = (k1, k2)
    for tf in test_fns:
        if tf is None or not isinstance(tf, SeparableTest):
            skipped.append(f"{tf!r}: no separable closed form")
            continue
        h = tf.h(mg.nodes)

        def omega(u1, u2, tf=tf):
            return tf.g1(u1) * tf.g2(u2)

        for T1, T2 in T_points:
            g1, g2 = np.angle(T1), np.angle(T2)

            def U(a, b):
                return laplace_2d(omega, a, b, k1, k2, g1, g2)

            base = U(T1, T2)
            # (i) derivative identities
            for j in (1, 2):
                T = (T1, T2)[j - 1]
                k = ks[j - 1]
                fn = (lambda s: U(s, T2)) if j == 1 else (lambda s: U(T1, s))
                lhs = T ** (k + 1) * _cauchy_derivative(fn, T, 0.2 * abs(T))
                if j == 1:
                    rhs = laplace_2d(lambda a, b: k1 * a ** k1 * omega(a, b), T1, T2, k1, k2, g1, g2)
                else:
                    rhs = laplace_2d(lambda a, b: k2 * b ** k2 * omega(a, b), T1, T2, k1, k2, g1, g2)
                results.append(IdentityResult(f"derivative_t{j}", complex(lhs), complex(rhs), (T1, T2)))
            # (ii) multiplication by T_j^n
            for n in powers:
                c = n / k1

                def rl1(a, b, c=c):
                    inner = volterra_callable(tf.g1, a[:, 0], k1, c, 0.0)
                    return (a[:, 0] ** k1 * inner / gamma(c))[:, None] * tf.g2(b)

                rhs = laplace_2d(rl1, T1, T2, k1, k2, g1, g2)
                results.append(IdentityResult(f"power_t1^{n}", complex(T1 ** n * base), complex(rhs),
                                              (T1, T2)))
                c2 = n / k2

                def rl2(a, b, c=c2):
                    inner = volterra_callable(tf.g2, b[0, :], k2, c, 0.0)
                    return tf.g1(a) * (b[0, :] ** k2 * inner / gamma(c))[None, :]

                rhs = laplace_2d(rl2, T1, T2, k1, k2, g1, g2)
                results.append(IdentityResult(f"power_t2^{n}", complex(T2 ** n * base), complex(rhs),
                                              (T1, T2)))
            # (iii) convolution in m
            Um = base * h
            lhs_m = convolve_on_grid(Um, Um, mg) * SQRT_2PI

            def conv(a, b):
                c1 = kconv_callable(tf.g1, tf.g1, a[:, 0], k1)
                c2_ = kconv_callable(tf.g2, tf.g2, b[0, :], k2)
                return (a[:, 0] ** k1 * c1)[:, None] * (b[0, :] ** k2 * c2_)[None, :]

            hh = convolve_on_grid(h, h, mg) * SQRT_2PI
            rhs_m = laplace_2d(conv, T1, T2, k1, k2, g1, g2) * hh
            i0 = int(np.argmax(np.abs(lhs_m)))
            results.append(IdentityResult("convolution", complex(lhs_m[i0]), complex(rhs_m[i0]),
                                          (T1, T2)))
    return IdentityReport(results, skipped)


# --------------------------------------------------------------------------
# PDE residual


@dataclass
class ResidualReport:
    max_residual: float
    relative_residual: float
    f_scale: float
    u_scale: float
    per_node: np.ndarray
    fourier_tail: float

    def to_dict(self) -> dict:
        return {"max_residual": self.max_residual, "relative_residual": self.relative_residual,
                "f_scale": self.f_scale, "u_scale": self.u_scale, "fourier_tail": self.fourier_tail}


def _derivative_table(ev: SolutionEvaluator, t1: complex, t2: complex, orders, radius_frac=0.3,
                      n: int = 16) -> dict:
    """All mixed t-derivatives of U(eps t, m) at (t1, t2) by trapezoidal Cauchy integrals."""
    th = 2 * np.pi * np.arange(n) / n
    r1, r2 = radius_frac * abs(t1), radius_frac * abs(t2)
    prof = ev.profile(t1 + r1 * np.exp(1j * th), t2 + r2 * np.exp(1j * th))   # (n, n, M)
    out = {}
    for a, b in orders:
        e = np.exp(-1j * a * th)[:, None, None] * np.exp(-1j * b * th)[None, :, None]
        out[(a, b)] = (math.factorial(a) * math.factorial(b) / (r1 ** a * r2 ** b)
                       * np.mean(prof * e, axis=(0, 1)))
    return out


def forcing_values(cfg: ProblemConfig, t1, t2, z, eps, m_grid) -> np.ndarray:
    """f(t, z, eps) with the inverse Fourier transform taken on the m-grid."""
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    total = np.zeros(z.shape, dtype=complex)
    for term in cfg.forcing.terms:
        if term.kind == "zero":
            continue
        Fm = term(m_grid.nodes, eps)
        total += inverse_fourier_many(Fm, m_grid, z) * (eps * t1) ** term.n1 * (eps * t2) ** term.n2
    return total


def pde_residual(cfg: ProblemConfig, ev: SolutionEvaluator, eps: complex, t1_pts, t2_pts, z_pts,
                 radius_frac: float = 0.3, n_contour: int = 16) -> ResidualReport:
    """Max over the (t1, t2, z) nodes of |LHS - RHS| of the main problem for u = ev.

    t-derivatives come from Cauchy integrals on circles of radius
    ``radius_frac * |t_j|``; z-derivatives are exact multiplications by im.
    """
    eps = complex(eps)
    mg = ev.grid.m_grid
    im = 1j * mg.nodes
    z_pts = np.atleast_1d(np.asarray(z_pts, dtype=complex))
    if np.any(np.abs(z_pts.imag) >= cfg.beta_prime):
        raise DirectionError("z outside the strip")
    orders = {(0, 0), (0, 1), (cfg.delta_D1, cfg.deltat_D2), (0, cfg.deltat_D3)}
    for l1 in range(cfg.D1):
        for l2 in range(cfg.D2):
            orders.add((cfg.delta[l1], cfg.deltat[l2]))
    p1 = cfg.P1.at_eps(eps)(im)
    p2 = cfg.P2.at_eps(eps)(im)
    res = np.zeros((len(t1_pts), len(t2_pts), len(z_pts)))
    f_scale = 0.0
    u_scale = 0.0
    for a, t1 in enumerate(t1_pts):
        for b, t2 in enumerate(t2_pts):
            D = _derivative_table(ev, complex(t1), complex(t2), sorted(orders), radius_frac, n_contour)
            lhs = (cfg.Q(im) * D[(0, 1)]
                   + eps ** (cfg.Delta1 + cfg.Deltat2) * t1 ** cfg.d1 * t2 ** cfg.dt2
                   * D[(cfg.delta_D1, cfg.deltat_D2)] * cfg.R_D1D2(im)
                   + eps ** cfg.Deltat3 * t2 ** cfg.dt3 * D[(0, cfg.deltat_D3)] * cfg.R_D3(im))
            lin = np.zeros_like(lhs)
            for l1 in range(cfg.D1):
                for l2 in range(cfg.D2):
                    lin += (eps ** cfg.Delta[l1][l2] * t1 ** cfg.d[l1] * t2 ** cfg.dt[l2]
                            * D[(cfg.delta[l1], cfg.deltat[l2])] * cfg.R[l1][l2](im))
            side = inverse_fourier_many(lhs - lin, mg, z_pts)
            u1 = inverse_fourier_many(p1 * D[(0, 0)], mg, z_pts)
            u2 = inverse_fourier_many(p2 * D[(0, 0)], mg, z_pts)
            f = forcing_values(cfg, t1, t2, z_pts, eps, mg)
            res[a, b] = np.abs(side - u1 * u2 - f)
            f_scale = max(f_scale, float(np.max(np.abs(f))))
            u_scale = max(u_scale, float(np.max(np.abs(inverse_fourier_many(D[(0, 0)], mg, z_pts)))))
    # truncation of the true forcing transform to [-M_max, M_max]
    tail = 0.0
    for term in cfg.forcing.terms:
        if term.kind == "zero":
            continue
        nrm = float(np.max(np.abs(term(mg.nodes, eps)) * (1 + np.abs(mg.nodes)) ** cfg.mu
                           * np.exp(cfg.beta * np.abs(mg.nodes))))
        decay = cfg.beta - float(np.max(np.abs(z_pts.imag)))
        scale = max(abs(eps * t) for t in t1_pts) ** term.n1 * max(abs(eps * t) for t in t2_pts) ** term.n2
        tail += tail_bound(nrm, mg.M_max, decay, cfg.mu) / SQRT_2PI * scale
    mx = float(res.max())
    return ResidualReport(mx, mx / f_scale if f_scale > 0 else mx, f_scale, u_scale, res, tail)


__all__ = [
    "AssociatedFamily", "AssociationError", "CoveringError", "DirectionError", "GoodCovering",
    "IdentityReport", "ResidualReport", "SectorialSolution", "SeparableTest", "SolutionEvaluator",
    "SolutionSample", "associate_sectors", "build_good_covering", "default_direction_table",
    "evaluate_solution", "forcing_values", "kconv_callable", "laplace_2d",
    "laplace_identity_suite", "laplace_ray_weights", "pde_residual", "required_opening",
    "root_free_projection",
]
