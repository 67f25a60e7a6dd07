"""Flatness of solution differences, covering classification, formal series and Gevrey fits."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gamma

from .config import ProblemConfig
from .fourier import FrequencyGrid, convolve_on_grid, inverse_fourier_many

log = logging.getLogger(__name__)

U0 = "U0"


class FitError(ValueError):
    pass


class DiscretizationError(ValueError):
    pass


def label(k: int) -> str:
    """Class of pairs flat of order k, e.g. U_1."""
    return f"U_{k}"


# --------------------------------------------------------------------------
# flatness


@dataclass
class FlatnessFit:
    K: float
    M: float
    kappa: int
    rmse: float
    rmse_by_order: dict
    monotone: bool = True
    exactly_flat: bool = False

    def to_dict(self) -> dict:
        return {"K": self.K, "M": self.M, "kappa": self.kappa, "rmse": self.rmse,
                "rmse_by_order": {str(k): v for k, v in self.rmse_by_order.items()},
                "monotone": self.monotone, "exactly_flat": self.exactly_flat}


def eps_ladder(lo: float, hi: float, n: int = 8, arg: float = 0.0) -> np.ndarray:
    """n logarithmically spaced moduli from hi down to lo on the ray arg."""
    return np.geomspace(hi, lo, n) * np.exp(1j * arg)


def flatness_fit(diffs, eps_samples, candidate_orders=(1, 2)) -> FlatnessFit:
    """Least-squares fit of log diff = log K - M |eps|^-kappa with kappa from ``candidate_orders``.

    The order with the lower rmse wins; ties go to the smaller order.
    """
    diffs = np.asarray(diffs, dtype=float)
    a = np.abs(np.asarray(eps_samples))
    if diffs.shape != a.shape:
        raise FitError("diffs and eps samples differ in length")
    if np.all(diffs == 0):
        return FlatnessFit(0.0, math.inf, min(candidate_orders), 0.0, {}, True, True)
    if len(a) < 5:
        raise FitError("need at least 5 samples")
    if a.max() / a.min() < 8 * (1 - 1e-9):
        raise FitError("samples must span a factor of at least 8 in |eps|")
    if np.any(diffs <= 0):
        raise FitError("diffs must be all positive or all zero")
    order = np.argsort(a)
    monotone = bool(np.all(np.diff(diffs[order]) > 0))
    if not monotone:
        log.warning("diffs are not monotone in |eps|; fit quality is doubtful")
    y = np.log(diffs)
    best = None
    table = {}
    for k in sorted(candidate_orders):
        x = a ** (-float(k))
        A = np.stack([np.ones_like(x), x], axis=1)
        coef, *_ = np.linalg.lstsq(A, y, rcond=None)
        rmse = float(np.sqrt(np.mean((A @ coef - y) ** 2)))
        table[k] = rmse
        if best is None or rmse < best[3] * (1 - 1e-9):
            best = (float(np.exp(coef[0])), float(-coef[1]), k, rmse)
    K, M, k, rmse = best
    return FlatnessFit(K, M, k, rmse, table, monotone)


def pair_difference(u_a, u_b, eps_samples, t1, t2, z, return_scale: bool = False):
    """sup over the (t1, t2, z) grid of |u_a - u_b| for each eps; u(t1, t2, z, eps) -> array.

    With ``return_scale`` also returns the largest |u_a|, |u_b| seen, which sets
    the round-off level of the differences.
    """
    diffs, scale = [], 0.0
    for e in eps_samples:
        a, b = u_a(t1, t2, z, e), u_b(t1, t2, z, e)
        diffs.append(float(np.max(np.abs(a - b))))
        scale = max(scale, float(np.max(np.abs(a))), float(np.max(np.abs(b))))
    diffs = np.array(diffs)
    return (diffs, scale) if return_scale else diffs


@dataclass
class FlatnessReport:
    pair: tuple
    eps: np.ndarray
    diffs: np.ndarray
    fit: FlatnessFit | None
    classification: str

    def to_dict(self) -> dict:
        return {"pair": [list(p) for p in self.pair],
                "eps": [[float(e.real), float(e.imag)] for e in np.atleast_1d(self.eps)],
                "diffs": [float(d) for d in np.atleast_1d(self.diffs)],
                "fit": None if self.fit is None else self.fit.to_dict(),
                "classification": self.classification}

    def to_csv(self, path) -> None:
        import csv
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["abs_eps", "arg_eps", "diff"])
            for e, d in zip(np.atleast_1d(self.eps), np.atleast_1d(self.diffs)):
                w.writerow([f"{abs(e):.17g}", f"{np.angle(e):.17g}", f"{d:.17g}"])


def flatness_report(pair, diffs, eps_samples, k1: int, k2: int, disjoint: bool = False,
                    noise_floor: float = 0.0) -> FlatnessReport:
    """Fit a pair's ladder and label it; disjoint cells are U0 without samples.

    Identical solutions are flat of every order and are labelled U_k1.  Diffs
    all at or below ``noise_floor`` count as identical.
    """
    if disjoint:
        return FlatnessReport(tuple(pair), np.array([]), np.array([]), None, U0)
    diffs = np.asarray(diffs, dtype=float)
    fitted = diffs
    if noise_floor > 0 and np.all(diffs <= noise_floor):
        fitted = np.zeros_like(diffs)
    fit = flatness_fit(fitted, eps_samples, sorted({k1, k2}))
    cls = label(k1) if fit.exactly_flat else label(fit.kappa)
    return FlatnessReport(tuple(pair), np.asarray(eps_samples), np.asarray(diffs), fit, cls)


# --------------------------------------------------------------------------
# covering classification


@dataclass
class MultisumVerdict:
    verdict: str
    ok: bool
    chain: list = field(default_factory=list)
    obstruction: tuple | None = None

    def to_dict(self) -> dict:
        return {"verdict": self.verdict, "ok": self.ok,
                "chain": [[list(p), list(q)] for p, q in self.chain],
                "obstruction": None if self.obstruction is None else [list(p) for p in self.obstruction]}


GEVREY_VERDICT = "uniform Gevrey 1/k1 regime"
MULTISUM_VERDICT = "(k1,k2)-summability hypotheses satisfied"


def _pair_key(p, q):
    return tuple(sorted((tuple(p), tuple(q))))


def classify_covering(reports, cov, k1: int, k2: int) -> MultisumVerdict:
    """Decide the summability route from pair labels and sector geometry only."""
    labels = {_pair_key(*r.pair): r.classification for r in reports}
    needed = [_pair_key(p, q) for p, q, _, _ in cov.overlapping_pairs()]
    missing = [k for k in needed if k not in labels]
    if missing:
        raise ValueError(f"no flatness report for overlapping pairs {missing}")
    good = label(k1)
    if k2 > k1:
        bad = [k for k in needed if labels[k] != good]
        if bad:
            return MultisumVerdict(f"not {GEVREY_VERDICT}: pair labelled {labels[bad[0]]}", False,
                                   obstruction=bad[0])
        return MultisumVerdict(GEVREY_VERDICT, True)
    cells = sorted((s.direction, p) for p, s in cov.cells())
    n = len(cells)
    half = cov.opening / 2
    blocking = None
    for y in range(1, n // 2 + 1):
        for c in range(n):
            idx = [(c + j) % n for j in range(-y, y + 1)]
            chain = [(cells[idx[j]][1], cells[idx[j + 1]][1]) for j in range(2 * y)]
            missing_link = next((pq for pq in chain if labels.get(_pair_key(*pq)) != good), None)
            if missing_link is not None:
                blocking = blocking or missing_link
                continue
            span = 2 * math.pi * (2 * y) / n + 2 * half
            if span > math.pi / k2:
                return MultisumVerdict(MULTISUM_VERDICT, True, chain)
    return MultisumVerdict("no U_k1 chain spans an opening > pi/k2", False, obstruction=blocking)


# --------------------------------------------------------------------------
# formal series


Poly = dict  # (a, b) -> m-array, the monomial t1^a t2^b


def _padd(p: Poly, key, val):
    if key in p:
        p[key] = p[key] + val
    else:
        p[key] = val


def _apply_monomial_op(p: Poly, mul1: int, mul2: int, der1: int, der2: int, coef: np.ndarray) -> Poly:
    """coef(m) t1^mul1 t2^mul2 d_t1^der1 d_t2^der2 applied to a polynomial."""
    out: Poly = {}
    for (a, b), v in p.items():
        if a < der1 or b < der2:
            continue
        c = math.perm(a, der1) * math.perm(b, der2)
        _padd(out, (a - der1 + mul1, b - der2 + mul2), c * coef * v)
    return out


def _poly_product(p: Poly, q: Poly, grid: FrequencyGrid) -> Poly:
    out: Poly = {}
    for ka, va in p.items():
        for kb, vb in q.items():
            _padd(out, (ka[0] + kb[0], ka[1] + kb[1]), convolve_on_grid(va, vb, grid))
    return out


def _poly_eval(p: Poly, t1, t2, M: int) -> np.ndarray:
    t1 = np.atleast_1d(np.asarray(t1, dtype=complex))
    t2 = np.atleast_1d(np.asarray(t2, dtype=complex))
    out = np.zeros((len(t1), len(t2), M), dtype=complex)
    for (a, b), v in p.items():
        out += (t1[:, None, None] ** a) * (t2[None, :, None] ** b) * v
    return out


@dataclass
class FormalCoefficients:
    """H_m(t, z) on a (t1, t2, z) grid together with the exact t-polynomials of U_m = H_m/m!."""

    H: np.ndarray
    polys: list
    t1: np.ndarray
    t2: np.ndarray
    z: np.ndarray
    residuals: list
    grid: FrequencyGrid

    @property
    def m_max(self) -> int:
        return len(self.polys) - 1

    def evaluate(self, m: int, t1, t2, z) -> np.ndarray:
        prof = _poly_eval(self.polys[m], t1, t2, self.grid.size)
        return math.factorial(m) * inverse_fourier_many(prof, self.grid, np.atleast_1d(z))

    def partial_sum(self, N: int, eps: complex) -> np.ndarray:
        """sum_{m < N} H_m eps^m / m! on the stored grid."""
        out = np.zeros(self.H.shape[1:], dtype=complex)
        for m in range(min(N, len(self.H))):
            out += self.H[m] * eps ** m / math.factorial(m)
        return out

    def to_csv(self, path, m: int) -> None:
        import csv
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["re_t1", "im_t1", "re_t2", "im_t2", "re_z", "im_z", "re_H", "im_H"])
            for i, a in enumerate(self.t1):
                for j, b in enumerate(self.t2):
                    for l, c in enumerate(self.z):
                        v = self.H[m, i, j, l]
                        w.writerow([f"{x:.17g}" for x in (a.real, a.imag, b.real, b.imag,
                                                           c.real, c.imag, v.real, v.imag)])


def _forcing_order(cfg: ProblemConfig, r: int, grid: FrequencyGrid) -> Poly:
    """eps^r coefficient of f in Fourier space: F_n(m, eps) (eps t1)^n1 (eps t2)^n2."""
    out: Poly = {}
    for term in cfg.forcing.terms:
        if term.kind == "zero":
            continue
        s = r - term.n1 - term.n2
        if 0 <= s < len(term.eps_coeffs):
            _padd(out, (term.n1, term.n2), term.eps_coeffs[s] * term.profile(grid.nodes))
    return out


def _series(ep, r: int, im) -> np.ndarray:
    return ep.eps_coefficient(r)(im) if r < len(ep.series) else np.zeros(im.shape, dtype=complex)


def _order_rhs(cfg: ProblemConfig, U: list, r: int, grid: FrequencyGrid) -> Poly:
    """Everything except Q(im) d_t2 U_r at order eps^r, moved to the right-hand side."""
    im = 1j * grid.nodes
    rhs = _forcing_order(cfg, r, grid)
    e1 = cfg.Delta1 + cfg.Deltat2
    if r - e1 >= 0:
        for k, v in _apply_monomial_op(U[r - e1], cfg.d1, cfg.dt2, cfg.delta_D1, cfg.deltat_D2,
                                       -cfg.R_D1D2(im)).items():
            _padd(rhs, k, v)
    if r - cfg.Deltat3 >= 0:
        for k, v in _apply_monomial_op(U[r - cfg.Deltat3], 0, cfg.dt3, 0, cfg.deltat_D3,
                                       -cfg.R_D3(im)).items():
            _padd(rhs, k, v)
    for l1 in range(cfg.D1):
        for l2 in range(cfg.D2):
            s = r - cfg.Delta[l1][l2]
            if s >= 0:
                for k, v in _apply_monomial_op(U[s], cfg.d[l1], cfg.dt[l2], cfg.delta[l1],
                                               cfg.deltat[l2], cfg.R[l1][l2](im)).items():
                    _padd(rhs, k, v)
    # (P1 u)(P2 u): sum over a + b + c + e = r with U_b, U_e already known
    for b in range(r + 1):
        for e in range(r - b + 1):
            for a in range(r - b - e + 1):
                c = r - b - e - a
                if b == r or e == r:
                    # would need U_r itself; excluded since U_0 = 0
                    continue
                if not U[b] or not U[e]:
                    continue
                p1 = _series(cfg.P1, a, im)
                p2 = _series(cfg.P2, c, im)
                if not np.any(p1) or not np.any(p2):
                    continue
                left = {k: p1 * v for k, v in U[b].items()}
                right = {k: p2 * v for k, v in U[e].items()}
                for k, v in _poly_product(left, right, grid).items():
                    _padd(rhs, k, v)
    return rhs


def formal_recursion(cfg: ProblemConfig, m_max: int, t1, t2, z,
                     grid: FrequencyGrid | None = None) -> FormalCoefficients:
    """Coefficients H_m of the formal solution sum H_m eps^m/m! of the main problem.

    The problem is expanded in eps directly: at each order Q(im) d_t2 U_r
    equals a polynomial in (t1, t2) built from U_0..U_{r-1} and the forcing,
    and U_r is its t2-antiderivative vanishing at t2 = 0.  Products are
    convolutions on the m-grid, the same discretization as the solver.
    """
    grid = grid or cfg.m_grid
    t1 = np.atleast_1d(np.asarray(t1, dtype=complex))
    t2 = np.atleast_1d(np.asarray(t2, dtype=complex))
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    im = 1j * grid.nodes
    q = cfg.Q(im)
    if np.min(np.abs(q)) == 0:
        raise DiscretizationError("Q(im) vanishes on the frequency grid")
    U: list = []
    residuals = []
    for r in range(m_max + 1):
        rhs = _order_rhs(cfg, U, r, grid)
        if r == 0 and rhs:
            raise DiscretizationError("forcing at eps^0 makes the recursion implicit")
        Ur: Poly = {}
        for (a, b), v in rhs.items():
            if np.any(v):
                _padd(Ur, (a, b + 1), v / (q * (b + 1)))
        U.append(Ur)
        # order-r identity evaluated at the grid points
        lhs = _poly_eval(_apply_monomial_op(Ur, 0, 0, 0, 1, q), t1, t2, grid.size)
        ref = _poly_eval(rhs, t1, t2, grid.size)
        scale = float(np.max(np.abs(ref))) if rhs else 0.0
        err = float(np.max(np.abs(lhs - ref))) if (rhs or Ur) else 0.0
        residuals.append(err / scale if scale > 0 else err)
    H = np.stack([math.factorial(r) * inverse_fourier_many(_poly_eval(U[r], t1, t2, grid.size), grid, z)
                  for r in range(m_max + 1)])
    return FormalCoefficients(H, U, t1, t2, z, residuals, grid)


def cauchy_coefficients(u_of_eps, radius: float, n: int = 64, m_max: int = 3) -> np.ndarray:
    """Taylor coefficients a_m = (1/2 pi i) oint u eps^(-m-1) d eps by the trapezoid rule.

    ``u_of_eps(eps)`` returns an array; the result has shape (m_max+1,) + that shape.
    """
    th = 2 * np.pi * np.arange(n) / n
    vals = np.stack([np.asarray(u_of_eps(radius * np.exp(1j * a))) for a in th])
    out = []
    for m in range(m_max + 1):
        e = np.exp(-1j * m * th).reshape((n,) + (1,) * (vals.ndim - 1))
        out.append(np.mean(vals * e, axis=0) / radius ** m)
    return np.stack(out)


# --------------------------------------------------------------------------
# Gevrey remainders


@dataclass
class GevreyFit:
    C: float
    M: float
    margins: np.ndarray
    remainders: np.ndarray
    eps: np.ndarray
    k: int
    ok: bool
    spread: float

    def to_dict(self) -> dict:
        return {"C": self.C, "M": self.M, "k": self.k, "ok": self.ok, "spread": self.spread,
                "margins": [float(x) for x in self.margins],
                "eps": [[float(e.real), float(e.imag)] for e in self.eps],
                "remainders": [[float(x) for x in row] for row in self.remainders]}


def _margins(R, a, N_vals, k, M):
    g = np.array([gamma(1 + N / k) for N in N_vals])
    scaled = R / (M ** N_vals[:, None] * g[:, None] * a[None, :] ** N_vals[:, None])
    return scaled.max(axis=1)


def gevrey_remainder_fit(u_of_eps, H, N_max: int, eps_samples, k: int = 1,
                         max_spread: float = 1e3) -> GevreyFit:
    """Fit R_N(eps) <= C M^N Gamma(1+N/k) |eps|^N for N = 0..N_max.

    ``H`` is a sequence of arrays H_m (same shape as ``u_of_eps(eps)``) or a
    FormalCoefficients.  M minimizes the spread max/min of the per-N
    margins; C is the largest margin.  N with R_N identically 0 are exact and
    do not enter the spread.
    """
    Hs = H.H if isinstance(H, FormalCoefficients) else H
    if len(Hs) < N_max:
        raise FitError(f"need H_m for m < {N_max}")
    eps = np.asarray(eps_samples, dtype=complex)
    a = np.abs(eps)
    N_vals = np.arange(N_max + 1)
    R = np.zeros((len(N_vals), len(eps)))
    for j, e in enumerate(eps):
        u = np.asarray(u_of_eps(e))
        partial = np.zeros_like(u, dtype=complex)
        for N in N_vals:
            R[N, j] = float(np.max(np.abs(u - partial)))
            if N < len(Hs):
                partial = partial + Hs[N] * e ** N / math.factorial(N)
    live = R.max(axis=1) > 0
    if not live.any():
        return GevreyFit(0.0, 1.0, np.zeros(len(N_vals)), R, eps, k, True, 1.0)

    def spread(logM):
        m = _margins(R[live], a, N_vals[live], k, math.exp(logM))
        return float(np.log(m.max() / m.min()))

    grid = np.linspace(-12, 12, 4801)
    vals = np.array([spread(x) for x in grid])
    logM = float(grid[int(np.argmin(vals))])
    M = math.exp(logM)
    margins = _margins(R, a, N_vals, k, M)
    sp = float(np.exp(vals.min()))
    return GevreyFit(float(margins.max()), M, margins, R, eps, k, sp <= max_spread, sp)


__all__ = [
    "DiscretizationError", "FitError", "FlatnessFit", "FlatnessReport", "FormalCoefficients",
    "GEVREY_VERDICT", "GevreyFit", "MULTISUM_VERDICT", "MultisumVerdict", "U0",
    "cauchy_coefficients", "classify_covering", "eps_ladder", "flatness_fit", "flatness_report",
    "formal_recursion", "gevrey_remainder_fit", "label", "pair_difference",
]
