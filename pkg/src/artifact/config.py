"""Problem instances of the two-time singularly perturbed PDE and their validation.

A :class:`ProblemConfig` holds every integer exponent, polynomial and forcing
coefficient of one instance.  :func:`validate_config` returns a report of named
checks (data, not exceptions) so that all violations can be shown at once.
"""

from __future__ import annotations

import json

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

import numpy as np

from .fourier import FrequencyGrid, e_norm, uniform_grid


class ConfigError(ValueError):
    """Raised for structurally malformed configurations."""


# --------------------------------------------------------------------------
# polynomials


@dataclass(frozen=True)
class ComplexPolynomial:
    """Polynomial with complex coefficients in ascending powers."""

    coeffs: tuple[complex, ...]

    def __post_init__(self):
        if len(self.coeffs) == 0:
            raise ConfigError("polynomial with empty coefficient list")
        c = [complex(x) for x in self.coeffs]
        while len(c) > 1 and c[-1] == 0:
            c.pop()
        object.__setattr__(self, "coeffs", tuple(c))

    @classmethod
    def constant(cls, value: complex) -> "ComplexPolynomial":
        return cls((complex(value),))

    @property
    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coeffs)

    @property
    def degree(self) -> int:
        """Index of the last nonzero coefficient, -1 for the zero polynomial."""
        return -1 if self.is_zero else len(self.coeffs) - 1

    @property
    def leading(self) -> complex:
        return self.coeffs[-1]

    def __call__(self, x):
        x = np.asarray(x, dtype=complex)
        out = np.zeros_like(x)
        for c in reversed(self.coeffs):
            out = out * x + c
        return out


@dataclass(frozen=True)
class EpsPolynomial:
    """Polynomial in X whose coefficients are truncated power series in eps.

    ``series[j][r]`` is the coefficient of ``eps**r * X**j``.
    """

    series: tuple[tuple[complex, ...], ...]

    def __post_init__(self):
        if len(self.series) == 0 or any(len(s) == 0 for s in self.series):
            raise ConfigError("eps-polynomial with empty coefficient list")
        object.__setattr__(
            self, "series", tuple(tuple(complex(v) for v in s) for s in self.series)
        )

    @property
    def degree(self) -> int:
        deg = -1
        for j, s in enumerate(self.series):
            if any(v != 0 for v in s):
                deg = j
        return deg

    @property
    def eps_order(self) -> int:
        return max(len(s) for s in self.series) - 1

    def at_eps(self, eps: complex) -> ComplexPolynomial:
        coeffs = [sum(v * eps**r for r, v in enumerate(s)) for s in self.series]
        return ComplexPolynomial(tuple(coeffs))

    def eps_coefficient(self, r: int) -> ComplexPolynomial:
        """Polynomial in X multiplying ``eps**r``."""
        coeffs = [s[r] if r < len(s) else 0.0 for s in self.series]
        return ComplexPolynomial(tuple(coeffs))


# --------------------------------------------------------------------------
# forcing


@dataclass(frozen=True)
class ForcingTerm:
    """One coefficient F_{n1,n2}(m, eps) given by a named closed form.

    The profile in m is multiplied by the eps power series ``eps_coeffs``.
    """

    n1: int
    n2: int
    kind: str
    amplitude: complex = 1.0
    params: tuple[tuple[str, float], ...] = ()
    eps_coeffs: tuple[complex, ...] = (1.0,)

    def __post_init__(self):
        if self.n1 < 1 or self.n2 < 1:
            raise ConfigError(f"forcing indices must be >= 1, got ({self.n1}, {self.n2})")
        if self.kind not in PROFILES:
            raise ConfigError(f"unknown forcing profile {self.kind!r}")

    def param(self, name: str, default: float) -> float:
        return dict(self.params).get(name, default)

    def profile(self, m) -> np.ndarray:
        m = np.asarray(m, dtype=float)
        return self.amplitude * PROFILES[self.kind](self, m)

    def eps_factor(self, eps: complex) -> complex:
        return sum(c * eps**r for r, c in enumerate(self.eps_coeffs))

    def __call__(self, m, eps: complex = 0.0) -> np.ndarray:
        return self.profile(m) * self.eps_factor(eps)


def _inverse_weight(term: ForcingTerm, m):
    beta = term.param("beta", 1.0)
    mu = term.param("mu", 2.0)
    return (1.0 + np.abs(m)) ** (-mu) * np.exp(-beta * np.abs(m))


def _gaussian(term: ForcingTerm, m):
    width = term.param("width", 1.0)
    return np.exp(-((m / width) ** 2))


def _zero(term: ForcingTerm, m):
    return np.zeros_like(m)


PROFILES: dict[str, Callable] = {
    "inverse_weight": _inverse_weight,
    "gaussian": _gaussian,
    "zero": _zero,
}


@dataclass(frozen=True)
class ForcingSpec:
    terms: tuple[ForcingTerm, ...] = ()
    K0: float = 1.0
    T0: float = 1.0

    def __post_init__(self):
        if self.K0 <= 0 or self.T0 <= 0:
            raise ConfigError("forcing constants K0, T0 must be positive")

    @property
    def is_zero(self) -> bool:
        return all(t.kind == "zero" or t.amplitude == 0 for t in self.terms)

    @property
    def n_max(self) -> int:
        return max([max(t.n1, t.n2) for t in self.terms], default=0)

    def coefficient(self, n1: int, n2: int, m, eps: complex = 0.0) -> np.ndarray:
        m = np.asarray(m, dtype=float)
        out = np.zeros(m.shape, dtype=complex)
        for t in self.terms:
            if (t.n1, t.n2) == (n1, n2):
                out = out + t(m, eps)
        return out

    def scaled(self, factor: complex) -> "ForcingSpec":
        terms = tuple(
            ForcingTerm(t.n1, t.n2, t.kind, t.amplitude * factor, t.params, t.eps_coeffs)
            for t in self.terms
        )
        return ForcingSpec(terms, self.K0, self.T0)


# --------------------------------------------------------------------------
# the instance


@dataclass(frozen=True)
class Annulus:
    """Sectorial annulus {r < |x| < R, arg x in (alpha, beta)}."""

    r: float
    R: float
    alpha: float
    beta: float

    def contains(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=complex)
        mod = np.abs(x)
        rel = np.mod(np.angle(x) - self.alpha, 2 * np.pi)
        inside_arg = (rel > 0) & (rel < self.beta - self.alpha)
        if self.beta - self.alpha >= 2 * np.pi:
            inside_arg = np.ones_like(mod, dtype=bool)
        return (mod > self.r) & (mod < self.R) & inside_arg


@dataclass(frozen=True)
class ProblemConfig:
    k1: int
    k2: int
    D1: int
    D2: int
    d1: int
    dt2: int
    dt3: int
    Delta1: int
    Deltat2: int
    Deltat3: int
    delta_D1: int
    deltat_D2: int
    deltat_D3: int
    d: tuple[int, ...]
    delta: tuple[int, ...]
    dt: tuple[int, ...]
    deltat: tuple[int, ...]
    Delta: tuple[tuple[int, ...], ...]
    Q: ComplexPolynomial
    R_D1D2: ComplexPolynomial
    R_D3: ComplexPolynomial
    R: tuple[tuple[ComplexPolynomial, ...], ...]
    P1: EpsPolynomial
    P2: EpsPolynomial
    forcing: ForcingSpec = field(default_factory=ForcingSpec)
    eps0: float = 0.2
    rho: float = 0.5
    beta: float = 1.0
    mu: float = 2.0
    beta_prime: float = 0.5
    annulus_D3: Annulus = Annulus(0.5, 2.0, -np.pi / 4, np.pi / 4)
    annulus_D1D2: Annulus = Annulus(0.5, 2.0, -np.pi / 4, np.pi / 4)
    M_max: float = 10.0
    dm: float = 0.5
    nu: tuple[float, float] = (1.0, 1.0)
    name: str = "instance"

    def __post_init__(self):
        if self.k1 < 1 or self.k2 < 1:
            raise ConfigError("k1, k2 must be positive integers")
        if self.D1 < 2 or self.D2 < 2:
            raise ConfigError("D1, D2 must be >= 2")
        for label, arr, n in (("d", self.d, self.D1), ("delta", self.delta, self.D1),
                              ("dt", self.dt, self.D2), ("deltat", self.deltat, self.D2)):
            if len(arr) != n:
                raise ConfigError(f"array {label} must have length {n}, got {len(arr)}")
        if len(self.Delta) != self.D1 or any(len(row) != self.D2 for row in self.Delta):
            raise ConfigError(f"Delta must be a {self.D1}x{self.D2} array")
        if len(self.R) != self.D1 or any(len(row) != self.D2 for row in self.R):
            raise ConfigError(f"R must be a {self.D1}x{self.D2} array of polynomials")
        if not self.beta_prime < self.beta:
            raise ConfigError("beta_prime must be smaller than beta")
        if min(self.eps0, self.rho, self.beta, self.beta_prime) <= 0:
            raise ConfigError("eps0, rho, beta, beta_prime must be positive")

    @property
    def m_grid(self) -> FrequencyGrid:
        return uniform_grid(self.M_max, self.dm)

    def replace(self, **changes) -> "ProblemConfig":
        data = {f: getattr(self, f) for f in self.__dataclass_fields__}
        data.update(changes)
        return ProblemConfig(**data)

    def with_forcing(self, forcing: ForcingSpec) -> "ProblemConfig":
        return self.replace(forcing=forcing)


@dataclass(frozen=True)
class DerivedExponents:
    d_k1: tuple[int, ...]
    d_k2: tuple[int, ...]


# --------------------------------------------------------------------------
# validation


@dataclass
class Check:
    name: str
    passed: bool
    witness: Any = None
    detail: str = ""

    def to_dict(self) -> dict:
        w = self.witness
        if isinstance(w, tuple):
            w = [_jsonable(v) for v in w]
        else:
            w = _jsonable(w)
        return {"name": self.name, "passed": bool(self.passed), "witness": w, "detail": self.detail}


def _jsonable(v):
    if isinstance(v, (complex, np.complexfloating)):
        return [float(v.real), float(v.imag)]
    if isinstance(v, np.generic):
        return v.item()
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    return v


CONSTRAINT_FAMILIES = (
    "order_condition",
    "monotone_deltas",
    "balance_identities",
    "d1_identity",
    "dtilde_identities",
    "strict_lower_bounds",
    "degree_conditions",
    "Q_nonvanishing",
    "mu_bound",
    "annulus_membership",
)


@dataclass
class ValidationReport:
    checks: list[Check]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failed(self) -> list[Check]:
        return [c for c in self.checks if not c.passed]

    def failed_names(self) -> set[str]:
        return {c.name for c in self.failed()}

    def __getitem__(self, name: str) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {"passed": self.passed, "checks": [c.to_dict() for c in self.checks]}

    def table(self) -> str:
        width = max(len(c.name) for c in self.checks)
        lines = []
        for c in self.checks:
            mark = "PASS" if c.passed else "FAIL"
            extra = "" if c.passed else f"  witness={c.to_dict()['witness']} {c.detail}"
            lines.append(f"{c.name:<{width}}  {mark}{extra}")
        return "\n".join(lines)


def _first(pred_items):
    for item in pred_items:
        return item
    return None


def validate_config(cfg: ProblemConfig, m_grid: FrequencyGrid | None = None) -> ValidationReport:
    """Check every admissibility condition of an instance.

    The frequency-dependent conditions are sampled on ``m_grid`` (defaults to
    the grid declared by the config); the limit of the polynomial ratios as
    ``|m| -> inf`` is checked separately as ``limit_ratio``.
    """
    grid = m_grid if m_grid is not None else cfg.m_grid
    m = grid.nodes
    checks: list[Check] = []

    # 2/k2 < deltat_D2 <= deltat_D3
    if not 2.0 / cfg.k2 < cfg.deltat_D2:
        checks.append(Check("order_condition", False, (2.0 / cfg.k2, cfg.deltat_D2),
                            "requires 2/k2 < deltat_D2"))
    elif not cfg.deltat_D2 <= cfg.deltat_D3:
        checks.append(Check("order_condition", False, (cfg.deltat_D2, cfg.deltat_D3),
                            "requires deltat_D2 <= deltat_D3"))
    else:
        checks.append(Check("order_condition", True, (2.0 / cfg.k2, cfg.deltat_D2, cfg.deltat_D3)))

    bad = _first(("delta", l, cfg.delta[l], cfg.delta[l + 1])
                 for l in range(cfg.D1 - 1) if not cfg.delta[l] < cfg.delta[l + 1])
    if bad is None:
        bad = _first(("deltat", l, cfg.deltat[l], cfg.deltat[l + 1])
                     for l in range(cfg.D2 - 1) if not cfg.deltat[l] < cfg.deltat[l + 1])
    checks.append(Check("monotone_deltas", bad is None, bad,
                        "" if bad is None else "sequence must be strictly increasing"))

    s1 = cfg.Delta1 + cfg.Deltat2 - cfg.d1 - cfg.dt2 - 1 + cfg.delta_D1 + cfg.deltat_D2
    s2 = cfg.Deltat3 - cfg.dt3 + cfg.deltat_D3 - 1
    checks.append(Check("balance_identities", s1 == 0 and s2 == 0, (s1, s2),
                        "" if s1 == 0 and s2 == 0 else "both sums must vanish"))

    rhs = cfg.delta_D1 * (cfg.k1 + 1)
    checks.append(Check("d1_identity", cfg.d1 == rhs, (cfg.d1, rhs),
                        "" if cfg.d1 == rhs else "d1 = delta_D1 (k1+1)"))

    w2 = (cfg.k2 + 1 + cfg.dt2, cfg.deltat_D2 * (cfg.k2 + 1))
    w3 = (cfg.k2 + 1 + cfg.dt3, cfg.deltat_D3 * (cfg.k2 + 1))
    ok = w2[0] == w2[1] and w3[0] == w3[1]
    checks.append(Check("dtilde_identities", ok, w2 + w3,
                        "" if ok else "k2+1+dt_j = deltat_Dj (k2+1)"))

    bad = None
    for l1 in range(cfg.D1):
        if not cfg.d[l1] > cfg.delta[l1] * (cfg.k1 + 1):
            bad = bad or ("d", l1, cfg.d[l1], cfg.delta[l1] * (cfg.k1 + 1))
    for l2 in range(cfg.D2):
        if not cfg.dt[l2] > (cfg.deltat[l2] - 1) * (cfg.k2 + 1):
            bad = bad or ("dt", l2, cfg.dt[l2], (cfg.deltat[l2] - 1) * (cfg.k2 + 1))
    lower = cfg.delta_D1 * cfg.k1 + (cfg.deltat_D2 - 1) * cfg.k2
    for l1 in range(cfg.D1):
        for l2 in range(cfg.D2):
            if not cfg.Delta[l1][l2] > lower:
                bad = bad or ("Delta", (l1, l2), cfg.Delta[l1][l2], lower)
    checks.append(Check("strict_lower_bounds", bad is None, bad,
                        "" if bad is None else "strict lower bound violated"))

    dq = cfg.Q.degree
    bad = None
    for l1 in range(cfg.D1):
        for l2 in range(cfg.D2):
            if cfg.R[l1][l2].degree > dq:
                bad = bad or ("R", (l1, l2), cfg.R[l1][l2].degree, dq)
    for label, p in (("P1", cfg.P1), ("P2", cfg.P2)):
        if p.degree > dq:
            bad = bad or (label, p.degree, dq)
    if not (cfg.R_D3.degree == dq and cfg.R_D1D2.degree == dq):
        bad = bad or ("R_D3/R_D1D2", cfg.R_D3.degree, cfg.R_D1D2.degree, dq)
    checks.append(Check("degree_conditions", bad is None, bad,
                        "" if bad is None else "degree condition violated"))

    qv = cfg.Q(1j * m)
    qmin = float(np.min(np.abs(qv)))
    i = int(np.argmin(np.abs(qv)))
    checks.append(Check("Q_nonvanishing", qmin > 0, (float(m[i]), qmin),
                        "" if qmin > 0 else "Q(im) vanishes on the grid"))

    need = max(cfg.P1.degree, cfg.P2.degree) + 1
    checks.append(Check("mu_bound", cfg.mu > need, (cfg.mu, need),
                        "" if cfg.mu > need else "mu > max(deg P_j) + 1"))

    bad = None
    with np.errstate(divide="ignore", invalid="ignore"):
        for label, poly, ann in (("R_D3/Q", cfg.R_D3, cfg.annulus_D3),
                                 ("R_D1D2/Q", cfg.R_D1D2, cfg.annulus_D1D2)):
            ratio = poly(1j * m) / qv
            inside = ann.contains(ratio)
            if not np.all(inside):
                j = int(np.argmin(inside))
                bad = bad or (label, float(m[j]), complex(ratio[j]))
    checks.append(Check("annulus_membership", bad is None, bad,
                        "" if bad is None else "ratio outside its annulus"))

    bad = None
    if not cfg.Q.is_zero:
        for label, poly, ann in (("R_D3/Q", cfg.R_D3, cfg.annulus_D3),
                                 ("R_D1D2/Q", cfg.R_D1D2, cfg.annulus_D1D2)):
            if poly.degree != dq:
                bad = bad or (label, "degree mismatch")
                continue
            # leading terms of P(im) are c_n (i m)^n: the ratio tends to c_n/q_n for both signs of m
            lim = poly.leading / cfg.Q.leading
            if not bool(ann.contains(lim)):
                bad = bad or (label, complex(lim))
    else:
        bad = ("Q", "zero polynomial")
    checks.append(Check("limit_ratio", bad is None, bad,
                        "" if bad is None else "limit of ratio outside annulus"))
    return ValidationReport(checks)


def derive_exponents(cfg: ProblemConfig) -> DerivedExponents:
    """Integers d_{l1,k1}, d_{l2,k2} splitting the time exponents.

    Raises ConfigError when a derived exponent is not positive, which means a
    strict lower bound of the instance is violated.
    """
    d_k1 = tuple(cfg.d[l] - cfg.delta[l] * (cfg.k1 + 1) for l in range(cfg.D1))
    d_k2 = tuple(cfg.dt[l] - (cfg.deltat[l] - 1) * (cfg.k2 + 1) for l in range(cfg.D2))
    for label, vals in (("d_k1", d_k1), ("d_k2", d_k2)):
        for l, v in enumerate(vals):
            if v <= 0:
                raise ConfigError(f"derived exponent {label}[{l}] = {v} is not positive")
    return DerivedExponents(d_k1, d_k2)


def check_forcing_bound(spec: ForcingSpec, beta: float, mu: float, n_max: int,
                        m_grid: FrequencyGrid | None = None,
                        eps: complex = 0.0) -> tuple[bool, float]:
    """Check ||F_{n1,n2}||_(beta,mu) <= K0 T0^-(n1+n2) on the stored indices.

    Returns the pass flag and the largest ratio ||F|| T0^(n1+n2) / K0.
    """
    if n_max < 1:
        raise ConfigError("n_max must be >= 1")
    grid = m_grid if m_grid is not None else uniform_grid(40.0, 0.05)
    ratio = 0.0
    seen = {(t.n1, t.n2) for t in spec.terms}
    for n1, n2 in seen:
        if n1 > n_max or n2 > n_max:
            continue
        vals = spec.coefficient(n1, n2, grid.nodes, eps)
        norm = e_norm(vals, grid, beta, mu)
        ratio = max(ratio, norm * spec.T0 ** (n1 + n2) / spec.K0)
    return ratio <= 1.0 + 1e-12, float(ratio)


# --------------------------------------------------------------------------
# serialization


def _poly(data) -> ComplexPolynomial:
    if not isinstance(data, list) or len(data) == 0:
        raise ConfigError(f"malformed polynomial {data!r}")
    return ComplexPolynomial(tuple(_cplx(c) for c in data))


def _cplx(c) -> complex:
    if isinstance(c, (int, float)):
        return complex(c)
    if isinstance(c, list) and len(c) == 2 and all(isinstance(v, (int, float)) for v in c):
        return complex(c[0], c[1])
    raise ConfigError(f"malformed complex coefficient {c!r}")


def _eps_poly(data) -> EpsPolynomial:
    if not isinstance(data, list) or len(data) == 0:
        raise ConfigError(f"malformed eps-polynomial {data!r}")
    series = []
    for entry in data:
        # a bare [re, im] pair is an eps-independent coefficient
        if isinstance(entry, list) and entry and isinstance(entry[0], list):
            series.append(tuple(_cplx(c) for c in entry))
        else:
            series.append((_cplx(entry),))
    return EpsPolynomial(tuple(series))


def _forcing(data, beta: float, mu: float) -> ForcingSpec:
    if data is None:
        return ForcingSpec()
    terms = []
    for t in data.get("terms", []):
        kind = t.get("kind", "zero")
        params = dict(t.get("params", {}))
        if kind == "inverse_weight":
            params.setdefault("beta", beta)
            params.setdefault("mu", mu)
        eps_coeffs = tuple(_cplx(c) for c in t.get("eps_coeffs", [1.0]))
        terms.append(ForcingTerm(int(t["n1"]), int(t["n2"]), kind, _cplx(t.get("amplitude", 1.0)),
                                 tuple(sorted(params.items())), eps_coeffs))
    return ForcingSpec(tuple(terms), float(data.get("K0", 1.0)), float(data.get("T0", 1.0)))


def config_from_dict(data: dict) -> ProblemConfig:
    """Build a ProblemConfig from its JSON-compatible description."""
    try:
        D1, D2 = int(data["D1"]), int(data["D2"])
        beta = float(data.get("beta", 1.0))
        mu = float(data.get("mu", 2.0))
        R_raw = data.get("R")
        if R_raw is None:
            R = tuple(tuple(ComplexPolynomial.constant(0.0) for _ in range(D2)) for _ in range(D1))
        else:
            R = tuple(tuple(_poly(p) for p in row) for row in R_raw)
        ann = data.get("annulus", {})
        kwargs = dict(
            k1=int(data["k1"]), k2=int(data["k2"]), D1=D1, D2=D2,
            d1=int(data["d1"]), dt2=int(data["dt2"]), dt3=int(data["dt3"]),
            Delta1=int(data["Delta1"]), Deltat2=int(data["Deltat2"]), Deltat3=int(data["Deltat3"]),
            delta_D1=int(data["delta_D1"]), deltat_D2=int(data["deltat_D2"]),
            deltat_D3=int(data["deltat_D3"]),
            d=tuple(int(v) for v in data["d"]), delta=tuple(int(v) for v in data["delta"]),
            dt=tuple(int(v) for v in data["dt"]), deltat=tuple(int(v) for v in data["deltat"]),
            Delta=tuple(tuple(int(v) for v in row) for row in data["Delta"]),
            Q=_poly(data["Q"]), R_D1D2=_poly(data["R_D1D2"]), R_D3=_poly(data["R_D3"]), R=R,
            P1=_eps_poly(data.get("P1", [[0.0, 0.0]])), P2=_eps_poly(data.get("P2", [[0.0, 0.0]])),
            forcing=_forcing(data.get("forcing"), beta, mu),
            eps0=float(data.get("eps0", 0.2)), rho=float(data.get("rho", 0.5)),
            beta=beta, mu=mu, beta_prime=float(data.get("beta_prime", 0.5 * beta)),
            M_max=float(data.get("M_max", 10.0)), dm=float(data.get("dm", 0.5)),
            nu=tuple(float(v) for v in data.get("nu", (1.0, 1.0))),
            name=str(data.get("name", "instance")),
        )
        if "D3" in ann:
            kwargs["annulus_D3"] = Annulus(*[float(v) for v in ann["D3"]])
        if "D1D2" in ann:
            kwargs["annulus_D1D2"] = Annulus(*[float(v) for v in ann["D1D2"]])
    except KeyError as exc:
        raise ConfigError(f"missing field {exc.args[0]!r}") from exc
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from exc
    return ProblemConfig(**kwargs)


def load_config(path: str | Path) -> ProblemConfig:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config root must be an object")
    return config_from_dict(data)


def _c(z: complex) -> list[float]:
    return [float(z.real), float(z.imag)]


def config_to_dict(cfg: ProblemConfig) -> dict:
    terms = []
    for t in cfg.forcing.terms:
        terms.append({"n1": t.n1, "n2": t.n2, "kind": t.kind, "amplitude": _c(complex(t.amplitude)),
                      "params": dict(t.params), "eps_coeffs": [_c(complex(c)) for c in t.eps_coeffs]})
    return {
        "name": cfg.name,
        "k1": cfg.k1, "k2": cfg.k2, "D1": cfg.D1, "D2": cfg.D2,
        "d1": cfg.d1, "dt2": cfg.dt2, "dt3": cfg.dt3,
        "Delta1": cfg.Delta1, "Deltat2": cfg.Deltat2, "Deltat3": cfg.Deltat3,
        "delta_D1": cfg.delta_D1, "deltat_D2": cfg.deltat_D2, "deltat_D3": cfg.deltat_D3,
        "d": list(cfg.d), "delta": list(cfg.delta), "dt": list(cfg.dt), "deltat": list(cfg.deltat),
        "Delta": [list(r) for r in cfg.Delta],
        "Q": [_c(c) for c in cfg.Q.coeffs], "R_D1D2": [_c(c) for c in cfg.R_D1D2.coeffs],
        "R_D3": [_c(c) for c in cfg.R_D3.coeffs],
        "R": [[[_c(c) for c in p.coeffs] for p in row] for row in cfg.R],
        "P1": [[_c(c) for c in s] for s in cfg.P1.series],
        "P2": [[_c(c) for c in s] for s in cfg.P2.series],
        "forcing": {"K0": cfg.forcing.K0, "T0": cfg.forcing.T0, "terms": terms},
        "eps0": cfg.eps0, "rho": cfg.rho, "beta": cfg.beta, "mu": cfg.mu,
        "beta_prime": cfg.beta_prime, "M_max": cfg.M_max, "dm": cfg.dm, "nu": list(cfg.nu),
        "annulus": {
            "D3": [cfg.annulus_D3.r, cfg.annulus_D3.R, cfg.annulus_D3.alpha, cfg.annulus_D3.beta],
            "D1D2": [cfg.annulus_D1D2.r, cfg.annulus_D1D2.R, cfg.annulus_D1D2.alpha,
                     cfg.annulus_D1D2.beta],
        },
    }


def reference_config(amplitude: float = 0.01, **overrides) -> ProblemConfig:
    """The integer tuple k1=1, k2=2 used throughout the tests and examples.

    All polynomials (P1 and P2 included) are constant 1 and the forcing is ``amplitude`` times the
    inverse weight placed on (n1, n2) = (1, 1) and (2, 1).
    """
    one = ComplexPolynomial.constant(1.0)
    unit = EpsPolynomial(((1.0,),))
    shape = (("beta", 1.0), ("mu", 2.0))
    forcing = ForcingSpec(
        (ForcingTerm(1, 1, "inverse_weight", amplitude, shape),
         ForcingTerm(2, 1, "inverse_weight", amplitude, shape)),
        K0=max(amplitude, 1e-300), T0=1.0,
    )
    base = dict(
        k1=1, k2=2, D1=2, D2=2, d1=4, dt2=3, dt3=3, Delta1=2, Deltat2=2, Deltat3=2,
        delta_D1=2, deltat_D2=2, deltat_D3=2,
        d=(1, 3), delta=(0, 1), dt=(0, 1), deltat=(0, 1), Delta=((5, 5), (5, 5)),
        Q=one, R_D1D2=one, R_D3=one, R=((one, one), (one, one)),
        P1=unit, P2=unit, forcing=forcing, eps0=0.2, rho=0.5, beta=1.0, mu=2.0,
        beta_prime=0.5, name="reference",
    )
    base.update(overrides)
    return ProblemConfig(**base)


def is_integer_ratio(cfg: ProblemConfig) -> tuple[bool, int]:
    """Whether (deltat_D3 - deltat_D2)/(deltat_D2 - 1) is a nonnegative integer."""
    num = cfg.deltat_D3 - cfg.deltat_D2
    den = cfg.deltat_D2 - 1
    if den <= 0:
        return False, -1
    return num % den == 0, num // den if num % den == 0 else -1


__all__ = [
    "Annulus", "Check", "ComplexPolynomial", "ConfigError", "CONSTRAINT_FAMILIES",
    "DerivedExponents", "EpsPolynomial", "ForcingSpec", "ForcingTerm", "ProblemConfig",
    "ValidationReport", "check_forcing_bound", "config_from_dict", "config_to_dict",
    "derive_exponents", "is_integer_ratio", "load_config", "reference_config", "validate_config",
]


