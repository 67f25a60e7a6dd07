"""The Borel-plane operator H_eps and its fixed point.

Every integral in H_eps is a Volterra or convolution integral along the ray of
its own variable.  Writing s = (tau x)^k turns each of them into an integral
over the fraction x in [0, 1] of the way along the ray; the Beta-type endpoint
factor (1 - x^k)^(c-1) is absorbed by a Gauss-Jacobi rule and off-node values
come from barycentric interpolation of the ray's Chebyshev data.  With these
rules each linear block is an N x N matrix per ray, and the bilinear
convolution is an N x N x N tensor per ray.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np
from scipy import fft as sfft
from scipy.special import gamma

from .borel_plane import (BorelFunction, BorelGrid, NormParams, cheb_nodes, interp_matrix,
                          inverse_weight, jacobi01, legendre01, norm_weight, p_m, psi_k,
                          weighted_norm)
from .config import ProblemConfig, derive_exponents
from .fourier import SQRT_2PI

log = logging.getLogger(__name__)


class DivergenceError(RuntimeError):
    pass


class NonConvergenceError(RuntimeError):
    pass


class SingularDivisorError(RuntimeError):
    pass


# --------------------------------------------------------------------------
# shift coefficients


@dataclass(frozen=True)
class OperatorCoefficients:
    """Coefficients A_{delta,p}, p = 1..delta-1, of the expansion

    T^(delta(k+1)) d^delta = (T^(k+1) d)^delta + sum_p A_p T^(k(delta-p)) (T^(k+1) d)^p.
    """

    delta: int
    k: int
    coeffs: tuple[Fraction, ...]

    def as_floats(self) -> tuple[float, ...]:
        return tuple(float(c) for c in self.coeffs)

    def apply_to_monomial(self, n: int) -> tuple[Fraction, Fraction]:
        """Both sides of the expansion applied to T^n; the common power T^(n+delta k) is dropped."""
        lhs = Fraction(1)
        for i in range(self.delta):
            lhs *= n - i
        rhs = _rising(n, self.delta, self.k)
        for p, a in enumerate(self.coeffs, start=1):
            rhs += a * _rising(n, p, self.k)
        return lhs, rhs


def _rising(n, p: int, k: int) -> Fraction:
    """prod_{i<p} (n + i k): the action of (T^(k+1) d)^p on T^n."""
    out = Fraction(1)
    for i in range(p):
        out *= n + i * k
    return out


def compute_shift_coefficients(delta: int, k: int) -> OperatorCoefficients:
    """Exact expansion coefficients by Newton interpolation at n = 0, -k, -2k, ...

    The products prod_{i<p}(n + i k) form a Newton basis with nodes -i k, so
    matching both sides as polynomials in n is a triangular solve.
    """
    if delta < 1 or k < 1:
        raise ValueError("need delta >= 1 and k >= 1")
    # target polynomial: falling factorial minus the leading rising product
    def target(n):
        lhs = Fraction(1)
        for i in range(delta):
            lhs *= n - i
        return lhs - _rising(n, delta, k)

    coeffs: list[Fraction] = []
    for p in range(delta):
        n = -p * k
        acc = target(n)
        for q, a in enumerate(coeffs):
            acc -= a * _rising(n, q, k)
        coeffs.append(acc / _rising(n, p, k))
    if coeffs[0] != 0:
        raise ArithmeticError("constant term of the expansion must vanish")
    return OperatorCoefficients(delta, k, tuple(coeffs[1:]))


# --------------------------------------------------------------------------
# ray operators


@lru_cache(maxsize=512)
def _volterra_unit(n: int, k: int, c: float, p: float, e: float, nq: int) -> np.ndarray:
    """Unit-ray matrix for int_0^{tau^k} (tau^k - s)^(c-1) s^p w(s^(1/k)) ds/s.

    Acts on reduced values w/tau^e at Chebyshev nodes of [0, 1] and returns
    the integral at the same nodes, with the factor tau^(k(c-1+p)+e) included
    for tau on the positive axis.
    """
    rho = cheb_nodes(n, 1.0)
    x, w = jacobi01(nq, c - 1.0)
    h = np.ones_like(x) if k == 1 else (1 - x ** k) / (1 - x)
    kern = w * h ** (c - 1.0) * x ** (k * p + e - 1.0)
    B = interp_matrix(rho, rho[:, None] * x[None, :])
    return k * rho[:, None] ** (k * (c - 1.0 + p) + e) * np.einsum("q,iqj->ij", kern, B)


@lru_cache(maxsize=64)
def _convolution_unit(n: int, k: int, nq: int) -> np.ndarray:
    """Unit-ray tensor for int_0^{tau^k} f((tau^k - s)^(1/k)) g(s^(1/k)) ds / ((tau^k - s) s).

    Inputs are reduced values f/tau, g/tau; the output omits the factor
    tau^(2-k).  The interval is split at s = tau^k / 2 and each half is written
    in the variable of the nearer endpoint, so both integrands are smooth.
    """
    rho = cheb_nodes(n, 1.0)
    hx = 2.0 ** (-1.0 / k)
    xs, ws = legendre01(nq)
    x = hx * xs
    w = hx * ws
    y = (1 - x ** k) ** (1.0 / k)
    Bx = interp_matrix(rho, rho[:, None] * x[None, :])
    By = interp_matrix(rho, rho[:, None] * y[None, :])
    ker = k * w * y ** (1.0 - k)
    return (np.einsum("q,iqj,iql->ijl", ker, By, Bx) + np.einsum("q,iqj,iql->ijl", ker, Bx, By))


def _nq(n: int) -> int:
    return max(16, n + 8)


def _ray_phase(L, theta, power):
    return L ** power * np.exp(1j * power * theta)


def volterra_tau1(values: np.ndarray, grid: BorelGrid, k: int, c: float, p: float,
                  e: float = 1.0) -> np.ndarray:
    """Apply the tau1 Volterra integral ray by ray; ``values`` are full (not reduced)."""
    U = _volterra_unit(grid.n_rad, k, float(c), float(p), float(e), _nq(grid.n_rad))
    power = k * (c - 1.0 + p) + e
    out = np.empty_like(values, dtype=complex)
    for a in range(grid.n_ang):
        red = values[a]
        if e:
            red = values[a] / _ray_phase(grid.radii1[a], grid.theta1[a], e)[:, None, None]
        scale = _ray_phase(grid.ray_lengths[a], grid.theta1[a], power)
        out[a] = scale * np.tensordot(U, red, axes=(1, 0))
    return out


def volterra_tau2(values: np.ndarray, grid: BorelGrid, k: int, c: float, p: float,
                  e: float = 1.0, reduced: bool = False) -> np.ndarray:
    """Apply the tau2 Volterra integral along the single tau2 ray.

    With ``reduced`` the input is already divided by tau2^e.
    """
    U = _volterra_unit(grid.n_rad2, k, float(c), float(p), float(e), _nq(grid.n_rad2))
    power = k * (c - 1.0 + p) + e
    red = values
    if not reduced and e:
        red = values / _ray_phase(grid.radii2, grid.d2, e)[None, None, :, None]
    scale = _ray_phase(grid.R2, grid.d2, power)
    return scale * np.einsum("ij,abjm->abim", U, red)


def volterra_callable(fn, tau: np.ndarray, k: int, c: float, p: float, nq: int = 48) -> np.ndarray:
    """Same integral for an exactly known integrand w(sigma) at points tau.

    ``fn`` receives the points tau*x and must vanish like sigma^(1-kp) or
    faster at 0 so that the x^(kp-1) endpoint factor stays integrable.
    """
    tau = np.asarray(tau, dtype=complex)
    x, w = jacobi01(nq, c - 1.0)
    h = np.ones_like(x) if k == 1 else (1 - x ** k) / (1 - x)
    kern = w * h ** (c - 1.0) * x ** (k * p - 1.0)
    pts = tau[..., None] * x
    theta = np.angle(tau)
    pref = k * np.abs(tau) ** (k * (c - 1.0 + p)) * np.exp(1j * k * (c - 1.0 + p) * theta)
    return pref * np.sum(kern * fn(pts), axis=-1)


# --------------------------------------------------------------------------
# operator blocks


@dataclass
class Workspace:
    """Cached, eps-dependent node data shared by all blocks."""

    cfg: ProblemConfig
    grid: BorelGrid
    eps: complex
    pm: np.ndarray
    im: np.ndarray
    p1: np.ndarray
    p2: np.ndarray
    tau1: np.ndarray
    tau2: np.ndarray
    pm_floor: float = 1e-12


def make_workspace(cfg: ProblemConfig, grid: BorelGrid, eps: complex,
                   pm_floor: float = 1e-12) -> Workspace:
    t1, t2, m = grid.mesh()
    pm = p_m(cfg, t1, t2, m)
    q = np.abs(cfg.Q(1j * m))
    bad = np.abs(pm) < pm_floor * q
    if np.any(bad):
        idx = np.unravel_index(int(np.argmax(bad)), bad.shape)
        node = (complex(t1[idx[0], idx[1], 0, 0]), complex(t2[0, 0, idx[2], 0]),
                float(m[0, 0, 0, idx[3]]))
        raise SingularDivisorError(f"|P_m| below floor at node (tau1, tau2, m) = {node}")
    im = 1j * grid.m_grid.nodes
    return Workspace(cfg, grid, complex(eps), pm, im, cfg.P1.at_eps(eps)(im),
                     cfg.P2.at_eps(eps)(im), t1, t2, pm_floor)


def _A1_body(values, ws: Workspace, coeffs: OperatorCoefficients):
    """sum_p A_p/Gamma(delta-p) int_0^{tau1^k1} (tau1^k1 - s)^(delta-p-1) (k1 s)^p w ds/s.

    The tau1^k1 prefactor of the operator is left out.
    """
    k = ws.cfg.k1
    out = np.zeros_like(values)
    for p, a in enumerate(coeffs.as_floats(), start=1):
        c = coeffs.delta - p
        out += a / gamma(c) * k ** p * volterra_tau1(values, ws.grid, k, c, p)
    return out


def _A2_body(values, ws: Workspace, coeffs: OperatorCoefficients):
    k = ws.cfg.k2
    out = np.zeros_like(values)
    for p, a in enumerate(coeffs.as_floats(), start=1):
        c = coeffs.delta - p
        out += a / gamma(c) * k ** p * volterra_tau2(values, ws.grid, k, c, p)
    return out


def apply_A_op(omega: BorelFunction, which: str, coeffs: OperatorCoefficients,
               cfg: ProblemConfig) -> BorelFunction:
    """The Borel-plane counterpart of the lower-order shift terms, prefactor included.

    ``which`` is "D1" (acts in tau1) or "D2"/"D3" (act in tau2).  The p-th term
    carries (k s)^p, the Borel image of (T^(k+1) d_T)^p.
    """
    ws = _light_workspace(cfg, omega.grid)
    t1, t2, _ = omega.grid.mesh()
    if which == "D1":
        vals = t1 ** cfg.k1 * _A1_body(omega.values, ws, coeffs)
    elif which in ("D2", "D3"):
        vals = t2 ** cfg.k2 * _A2_body(omega.values, ws, coeffs)
    else:
        raise ValueError(f"unknown operator {which!r}")
    return BorelFunction(omega.grid, vals)


def _light_workspace(cfg, grid):
    t1, t2, _ = grid.mesh()
    return Workspace(cfg, grid, 1.0, None, None, None, None, t1, t2)


def _bilinear(fa: np.ndarray, gb: np.ndarray, ws: Workspace) -> np.ndarray:
    """Triple convolution (tau1, tau2, m) of two reduced arrays.

    Returns the tau1-convolution with its tau1^(2-k1) factor, the
    tau2-convolution without its tau2^(2-k2) factor, and the m-convolution
    with the 1/sqrt(2 pi) normalization.
    """
    grid = ws.grid
    k1, k2 = ws.cfg.k1, ws.cfg.k2
    n1, n2 = grid.n_rad, grid.n_rad2
    W1 = _convolution_unit(n1, k1, _nq(n1)) * cheb_nodes(n1, 1.0)[:, None, None] ** (2 - k1)
    W2 = _convolution_unit(n2, k2, _nq(n2))
    W2s = W2 * _ray_phase(grid.R2, grid.d2, 2 - k2)
    M = grid.m_grid.size
    L = sfft.next_fast_len(2 * M - 1)
    wm = grid.m_grid.weights
    Fh = sfft.fft(fa, n=L, axis=-1)
    Gh = sfft.fft(gb * wm, n=L, axis=-1)
    W2r = W2s.transpose(2, 0, 1).reshape(n2, n2 * n2)          # [l2, (i2, j2)]
    W1r = W1.reshape(n1, n1 * n1)                                # [i1, (j1, l1)]
    out = np.empty((grid.n_ang, n1, n2, L), dtype=complex)
    for a in range(grid.n_ang):
        s1 = _ray_phase(grid.ray_lengths[a], grid.theta1[a], 2 - k1)
        G = np.moveaxis(Gh[a], -1, 0)                            # [z, l1, l2]
        F = np.moveaxis(Fh[a], -1, 0)                            # [z, j1, j2]
        T = (G.reshape(L * n1, n2) @ W2r).reshape(L, n1, n2, n2)  # [z, l1, i2, j2]
        T = T.transpose(0, 3, 1, 2).reshape(L, n2, n1 * n2)      # [z, j2, (l1, i2)]
        K = np.matmul(F, T).reshape(L, n1, n1, n2)               # [z, j1, l1, i2]
        K = K.transpose(1, 2, 0, 3).reshape(n1 * n1, L * n2)     # [(j1, l1), (z, i2)]
        out[a] = s1 * (W1r @ K).reshape(n1, L, n2).transpose(0, 2, 1)
    res = sfft.ifft(out, axis=-1)
    c = (M - 1) // 2
    return res[..., c:c + M] / SQRT_2PI


def nonlinear_convolution(omega_a: BorelFunction, omega_b: BorelFunction, cfg: ProblemConfig,
                          eps: complex, ws: Workspace | None = None,
                          divide_pm: bool = False) -> BorelFunction:
    """The quadratic block of H_eps (without the 1/P_m division unless requested)."""
    ws = ws or make_workspace(cfg, omega_a.grid, eps)
    t1, t2 = ws.tau1, ws.tau2
    fa = ws.p1 * omega_a.values / (t1 * t2)
    gb = ws.p2 * omega_b.values / (t1 * t2)
    conv = _bilinear(fa, gb, ws)
    k2 = cfg.k2
    outer = volterra_tau2(conv, ws.grid, k2, 1.0 + 1.0 / k2, 1.0, e=2.0 - k2, reduced=True)
    vals = outer * (t1 ** cfg.k1) / (eps * k2 * gamma(1.0 + 1.0 / k2))
    if divide_pm:
        vals = vals / ws.pm
    return BorelFunction(omega_a.grid, vals)


def linear_l1l2_term(omega: BorelFunction, cfg: ProblemConfig, eps: complex, l1: int, l2: int,
                     ws: Workspace | None = None, divide_pm: bool = False) -> BorelFunction:
    """One summand of the (l1, l2) block: a double Riemann-Liouville integral."""
    ws = ws or make_workspace(cfg, omega.grid, eps)
    ex = derive_exponents(cfg)
    k1, k2 = cfg.k1, cfg.k2
    c1 = ex.d_k1[l1] / k1
    c2 = ex.d_k2[l2] / k2
    dl1, dl2 = cfg.delta[l1], cfg.deltat[l2]
    power = cfg.Delta[l1][l2] - cfg.d[l1] - cfg.dt[l2] + dl1 + dl2 - 1
    inner = volterra_tau2(omega.values, ws.grid, k2, c2, dl2)
    both = volterra_tau1(inner, ws.grid, k1, c1, dl1)
    im = 1j * ws.grid.m_grid.nodes
    pref = (eps ** power * cfg.R[l1][l2](im) * k1 ** dl1 * k2 ** dl2
            / (k2 * gamma(c1) * gamma(c2)))
    vals = pref * ws.tau1 ** k1 * both
    if divide_pm:
        vals = vals / ws.pm
    return BorelFunction(omega.grid, vals)


def forcing_term(cfg: ProblemConfig, eps: complex, grid: BorelGrid, n_max: int = 8,
                 ws: Workspace | None = None, nq: int = 48) -> BorelFunction:
    """The forcing block: Riemann-Liouville integral in tau2 of psi_k, divided by P_m."""
    ws = ws or make_workspace(cfg, grid, eps)
    k2 = cfg.k2
    t1, t2, m = grid.mesh()
    if cfg.forcing.is_zero:
        return BorelFunction.zeros(grid)
    m_nodes = grid.m_grid.nodes

    # psi_k depends on tau1 only through the monomials tau1^n1: group terms by n1
    vals = np.zeros(grid.shape, dtype=complex)
    by_n1: dict[int, list] = {}
    for term in cfg.forcing.terms:
        if term.kind != "zero" and term.n1 <= n_max and term.n2 <= n_max:
            by_n1.setdefault(term.n1, []).append(term)
    tau2 = grid.tau2
    for n1, terms in by_n1.items():
        def fn(sig, terms=terms):
            out = np.zeros(sig.shape + (len(m_nodes),), dtype=complex)
            for t in terms:
                coef = t(m_nodes, eps) / (gamma(t.n1 / cfg.k1) * gamma(t.n2 / k2))
                out += coef * (sig ** t.n2)[..., None]
            return out
        x, w = jacobi01(nq, 1.0 / k2)
        h = np.ones_like(x) if k2 == 1 else (1 - x ** k2) / (1 - x)
        kern = w * h ** (1.0 / k2) * x ** (-1.0)
        pts = tau2[:, None] * x[None, :]
        theta = grid.d2
        pref = k2 * grid.radii2 ** (k2 * (1.0 / k2)) * np.exp(1j * k2 * (1.0 / k2) * theta)
        integral = pref[:, None] * np.einsum("q,jqm->jm", kern, fn(pts))
        vals += (grid.tau1 ** n1)[:, :, None, None] * integral[None, None, :, :]
    vals = vals / (eps * k2 * gamma(1.0 + 1.0 / k2) * ws.pm)
    return BorelFunction(grid, vals)


def linear_blocks(omega: BorelFunction, cfg: ProblemConfig, eps: complex, ws: Workspace,
                  coeffs=None) -> np.ndarray:
    """Sum of the four shift blocks and the (l1, l2) blocks, divided by P_m."""
    k1, k2 = cfg.k1, cfg.k2
    im = ws.im
    r12 = cfg.R_D1D2(im)
    r3 = cfg.R_D3(im)
    t1, t2 = ws.tau1, ws.tau2
    c1, c2, c3 = coeffs or (compute_shift_coefficients(cfg.delta_D1, k1),
                            compute_shift_coefficients(cfg.deltat_D2, k2),
                            compute_shift_coefficients(cfg.deltat_D3, k2))
    w = omega.values
    total = np.zeros_like(w)
    if c2.coeffs:
        a2w = _A2_body(w, ws, c2) / k2                     # A~_D2 w / (k2 tau2^k2)
        total -= (k1 * t1 ** k1) ** cfg.delta_D1 * a2w * r12
        if c1.coeffs:
            total -= t1 ** k1 * _A1_body(a2w, ws, c1) * r12
    if c1.coeffs:
        total -= (k2 * t2 ** k2) ** (cfg.deltat_D2 - 1) * t1 ** k1 * _A1_body(w, ws, c1) * r12
    if c3.coeffs:
        total -= _A2_body(w, ws, c3) / k2 * r3
    total = total / ws.pm
    for l1 in range(cfg.D1):
        for l2 in range(cfg.D2):
            if cfg.R[l1][l2].is_zero:
                continue
            total += linear_l1l2_term(omega, cfg, eps, l1, l2, ws, divide_pm=True).values
    return total


def apply_H(omega: BorelFunction, cfg: ProblemConfig, eps: complex,
            ws: Workspace | None = None, forcing: BorelFunction | None = None,
            coeffs=None) -> BorelFunction:
    """One application of H_eps: shift blocks, quadratic block, (l1, l2) blocks, forcing."""
    ws = ws or make_workspace(cfg, omega.grid, eps)
    forcing = forcing if forcing is not None else forcing_term(cfg, eps, omega.grid, ws=ws)
    vals = linear_blocks(omega, cfg, eps, ws, coeffs)
    if np.any(omega.values):
        vals = vals + nonlinear_convolution(omega, omega, cfg, eps, ws, divide_pm=True).values
    return BorelFunction(omega.grid, vals + forcing.values)


# --------------------------------------------------------------------------
# Picard iteration


@dataclass
class FixedPointReport:
    omega: BorelFunction
    residual: float
    relative_residual: float
    contraction_estimate: float
    iterations: int
    varpi_emp: float
    bound_pass: bool
    increments: list[float] = field(default_factory=list)
    eps: complex = 0j
    converged: bool = True

    def to_dict(self) -> dict:
        return {"eps": [self.eps.real, self.eps.imag], "residual": self.residual,
                "relative_residual": self.relative_residual,
                "contraction_estimate": self.contraction_estimate,
                "iterations": self.iterations, "varpi_emp": self.varpi_emp,
                "bound_pass": self.bound_pass, "converged": self.converged,
                "increments": list(self.increments), "grid": self.omega.grid.describe()}


def grid_extent(eps: complex, k: int, t_max: float = 0.5, decay: float = 40.0,
                margin: float = 1.3) -> float:
    """Radius beyond which the Laplace kernel exp(-(u/(eps t))^k) is below e^-decay for |t| <= t_max."""
    return margin * abs(eps) * t_max * decay ** (1.0 / k)


def build_grid(cfg: ProblemConfig, eps: complex, d1: float, d2: float, n_rad: int = 24,
               n_ang: int = 16, rho1: float = 0.5, t_max: float = 0.5,
               n_rad2: int | None = None) -> BorelGrid:
    """Borel grid whose long rays reach the Laplace cut-off for |t| <= t_max."""
    R1 = grid_extent(eps, cfg.k1, t_max)
    R2 = grid_extent(eps, cfg.k2, t_max)
    return BorelGrid(d1, d2, R1, R2, rho1, n_rad, n_ang, cfg.m_grid, n_rad2)


def default_norm_params(cfg: ProblemConfig, eps: complex) -> NormParams:
    return NormParams(cfg.nu[0], cfg.nu[1], cfg.beta, cfg.mu, cfg.k1, cfg.k2, eps)


def solve_fixed_point(cfg: ProblemConfig, eps: complex, p: NormParams | None, grid: BorelGrid,
                      tol: float = 1e-12, max_iter: int = 60, n_max: int = 8) -> FixedPointReport:
    """Picard iteration omega_{n+1} = H_eps(omega_n) from omega_0 = 0.

    Stops when the weighted norm of the increment drops below
    ``tol * max(||omega||, tiny)``.  The contraction estimate is the largest
    ratio of successive increment norms.  Three consecutive ratios >= 1 (or a
    non-finite iterate) raise DivergenceError.
    """
    p = p or default_norm_params(cfg, eps)
    ws = make_workspace(cfg, grid, eps)
    coeffs = (compute_shift_coefficients(cfg.delta_D1, cfg.k1),
              compute_shift_coefficients(cfg.deltat_D2, cfg.k2),
              compute_shift_coefficients(cfg.deltat_D3, cfg.k2))
    force = forcing_term(cfg, eps, grid, n_max=n_max, ws=ws)
    weight = norm_weight(ws.tau1, ws.tau2, grid.m_grid.nodes[None, None, None, :], p)
    omega = BorelFunction.zeros(grid)
    increments: list[float] = []
    ratios: list[float] = []
    bad_streak = 0
    converged = False
    for it in range(1, max_iter + 1):
        new = apply_H(omega, cfg, eps, ws, force, coeffs)
        if not np.all(np.isfinite(new.values)):
            raise DivergenceError(f"iterate {it} is not finite; reduce eps0 or the forcing")
        inc = float(np.max(weight * np.abs(new.values - omega.values)))
        size = float(np.max(weight * np.abs(new.values)))
        if increments and increments[-1] > 0:
            r = inc / increments[-1]
            ratios.append(r)
            bad_streak = bad_streak + 1 if r >= 1 else 0
            if bad_streak >= 3:
                raise DivergenceError(
                    f"increments grew for 3 consecutive iterations (ratio {r:.3g}); "
                    "reduce eps0 or the forcing")
        increments.append(inc)
        omega = new
        log.debug("iteration %d increment %.3e", it, inc)
        if inc <= tol * max(size, 1e-300) or inc == 0.0:
            converged = True
            break
    if not converged:
        raise NonConvergenceError(f"no convergence in {max_iter} iterations (last increment {inc:.3e})")
    final = apply_H(omega, cfg, eps, ws, force, coeffs) if np.any(omega.values) else omega
    residual = float(np.max(weight * np.abs(final.values - omega.values)))
    varpi = float(np.max(weight * np.abs(omega.values)))
    with np.errstate(divide="ignore", over="ignore"):
        inv = 1.0 / weight            # inf where the weight underflows: no constraint there
    bound_ok = bool(np.isfinite(varpi) and np.all(np.abs(omega.values) <= varpi * inv * (1 + 1e-12) + 1e-300))
    return FixedPointReport(
        omega=omega, residual=residual,
        relative_residual=residual / varpi if varpi > 0 else 0.0,
        contraction_estimate=max(ratios) if ratios else 0.0,
        iterations=it, varpi_emp=varpi, bound_pass=bound_ok, increments=increments,
        eps=complex(eps), converged=True)


# --------------------------------------------------------------------------
# empirical norm inequalities


@dataclass
class LemmaResult:
    name: str
    constant: float
    ratios: list[float]
    eps_power: float

    @property
    def finite(self) -> bool:
        return bool(np.isfinite(self.constant))


@dataclass
class LemmaReport:
    results: dict[str, LemmaResult]

    def constants(self) -> dict[str, float]:
        return {k: v.constant for k, v in self.results.items()}

    def to_dict(self) -> dict:
        return {k: {"constant": v.constant, "eps_power": v.eps_power, "ratios": v.ratios}
                for k, v in self.results.items()}


def random_samples(grid: BorelGrid, p: NormParams, n: int, seed: int) -> list[BorelFunction]:
    """Smooth sample functions with finite weighted norm.

    f = c tau1 tau2 / eps^2 * exp(a1 (tau1/eps)^k1 + a2 (tau2/eps)^k2) * (1+|m|)^-mu e^-beta|m|
    with |a_j| below nu_j so the growth stays inside the weight.
    """
    rng = np.random.default_rng(seed)
    t1, t2, m = grid.mesh()
    out = []
    for _ in range(n):
        a1 = p.nu1 * 0.8 * rng.uniform(-1, 1) + 1j * p.nu1 * 0.3 * rng.uniform(-1, 1)
        a2 = p.nu2 * 0.8 * rng.uniform(-1, 1) + 1j * p.nu2 * 0.3 * rng.uniform(-1, 1)
        c = rng.normal() + 1j * rng.normal()
        b = rng.uniform(0.5, 1.5)
        vals = (c * t1 * t2 / p.eps ** 2 * (1 + b * t1 * t2 / p.eps ** 2)
                * np.exp(a1 * (t1 / p.eps) ** p.k1 + a2 * (t2 / p.eps) ** p.k2)
                * (1 + np.abs(m)) ** (-p.mu) * np.exp(-p.beta * np.abs(m)))
        out.append(BorelFunction(grid, np.broadcast_to(vals, grid.shape).copy()))
    return out


def _lemma_operators(cfg: ProblemConfig, p: NormParams, grid: BorelGrid):
    """Operators and eps-powers for the five norm inequalities with fixed exponents."""
    k1, k2 = p.k1, p.k2
    t1, t2, m = grid.mesh()
    sig1, sig2 = 1.0, 1.0
    a = 1.0 / ((1 + np.abs(t1) ** k1) ** sig1 * (1 + np.abs(t2) ** k2) ** sig2)
    ws = _light_workspace(cfg, grid)

    def bound_tau2(f):
        # sigma3 = 0, sigma4 = 1/2, tilde sigma = 0: int (tau2^k2 - s)^0 s^(1/2) f ds
        return a * volterra_tau2(f.values, grid, k2, 1.0, 1.5)

    def bound_tau1(f):
        return a * volterra_tau1(f.values, grid, k1, 1.0, 1.5)

    def bound_both(f):
        return a * volterra_tau1(volterra_tau2(f.values, grid, k2, 1.0, 1.5), grid, k1, 1.0, 1.5)

    gam = 1.0 / k2

    def bound_aux(f):
        return volterra_tau2(f.values, grid, k2, 1.0 + gam, 0.0)

    ws_full = make_workspace(cfg, grid, p.eps)
    q = cfg.Q(1j * m)

    def bound_product(f, g):
        nl = nonlinear_convolution(f, g, cfg, p.eps, ws_full).values
        # undo the eps^-1 and 1/(k2 Gamma) factors to obtain the bare integral over R(im)
        return a * nl * p.eps * k2 * gamma(1 + 1 / k2) / q

    powers = {
        "lemma_tau2": k2 * (1 + 0.0 + 0.5 - sig2),
        "lemma_tau1": k1 * (1 + 0.0 + 0.5 - sig1),
        "lemma_both": k1 * (1 + 0.5 - sig1) + k2 * (1 + 0.5 - sig2),
        "lemma_aux": k2 * gam,
        "lemma_product": 1.0,
    }
    return {"lemma_tau2": bound_tau2, "lemma_tau1": bound_tau1, "lemma_both": bound_both,
            "lemma_aux": bound_aux, "lemma_product": bound_product}, powers


def check_norm_lemmas(samples: list[BorelFunction], p: NormParams,
                      cfg: ProblemConfig) -> LemmaReport:
    """Largest ratio LHS / (|eps|^power ||f|| [||g||]) over the samples, per inequality.

    The bilinear inequality pairs consecutive samples.
    """
    if not samples:
        return LemmaReport({})
    grid = samples[0].grid
    ops, powers = _lemma_operators(cfg, p, grid)
    t1, t2, m = grid.mesh()
    weight = norm_weight(t1, t2, m, p)
    norms = [float(np.max(weight * np.abs(s.values))) for s in samples]
    results = {}
    for name, op in ops.items():
        ratios = []
        scale = abs(p.eps) ** powers[name]
        for i, s in enumerate(samples):
            if name == "lemma_product":
                g = samples[(i + 1) % len(samples)]
                ng = norms[(i + 1) % len(samples)]
                denom = scale * norms[i] * ng
                lhs = op(s, g)
            else:
                denom = scale * norms[i]
                lhs = op(s)
            val = float(np.max(weight * np.abs(lhs)))
            ratios.append(0.0 if denom == 0 else val / denom)
        results[name] = LemmaResult(name, max(ratios), ratios, powers[name])
    return LemmaReport(results)


__all__ = [
    "DivergenceError", "FixedPointReport", "LemmaReport", "NonConvergenceError",
    "OperatorCoefficients", "SingularDivisorError", "Workspace", "apply_A_op", "apply_H",
    "check_norm_lemmas", "compute_shift_coefficients", "default_norm_params", "forcing_term",
    "linear_blocks", "linear_l1l2_term", "make_workspace", "nonlinear_convolution",
    "build_grid", "grid_extent", "random_samples", "solve_fixed_point", "volterra_callable", "volterra_tau1", "volterra_tau2",
]
