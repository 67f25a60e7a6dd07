"""Command line front end: validate, solve and analyze an instance file.

Exit codes: 0 success, 1 analysis failure, 2 input error.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import logging
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .asymptotics import (GEVREY_VERDICT, MULTISUM_VERDICT, classify_covering, eps_ladder,
                          flatness_report, formal_recursion, gevrey_remainder_fit, pair_difference)
from .borel_plane import select_directions
from .config import ConfigError, ProblemConfig, load_config, validate_config
from .fixed_point import (DivergenceError, NonConvergenceError, SingularDivisorError, build_grid,
                          check_norm_lemmas, default_norm_params, random_samples, solve_fixed_point)
from .laplace_eval import (AssociationError, CoveringError, SectorialSolution, associate_sectors,
                           build_good_covering)

log = logging.getLogger("artifact")

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2
THREADS_ENV = "ARTIFACT_THREADS"
NOISE_REL = 1e-12      # pair differences below this fraction of |u| are round-off


class InputError(ValueError):
    pass


@dataclass
class RunManifest:
    config_path: str
    command: str
    resolution: dict
    out_dir: str
    input_hash: str
    version: str = __version__
    timings: dict = field(default_factory=dict)

    @property
    def seed(self) -> int:
        return int(self.input_hash[:8], 16)

    def write(self, root: Path) -> None:
        (root / "manifest.json").write_text(json.dumps(asdict(self) | {"seed": self.seed}, indent=2))


def _hash_inputs(config_path: Path, command: str, resolution: dict) -> str:
    h = hashlib.sha256()
    h.update(config_path.read_bytes())
    h.update(command.encode())
    h.update(json.dumps(resolution, sort_keys=True).encode())
    return h.hexdigest()


def _layout(out: Path) -> dict:
    dirs = {k: out / k for k in ("reports", "grids", "trace")}
    for d in dirs.values():
        d.mkdir(parents=True, exist_ok=True)
    return dirs


def _write_json(path: Path, doc) -> None:
    path.write_text(json.dumps(doc, indent=2, default=_json_default))


def _json_default(o):
    if isinstance(o, complex):
        return [o.real, o.imag]
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, float) and not math.isfinite(o):
        return str(o)
    return str(o)


def _threads() -> int:
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise InputError(f"{THREADS_ENV} must be an integer, got {raw!r}")


# --------------------------------------------------------------------------
# argument parsing


def parse_eps_list(text: str) -> list[complex]:
    """Comma separated moduli or complex literals: '0.05,0.04' or '0.05+0.01j'."""
    try:
        vals = [complex(s.strip().replace(" ", "")) for s in text.split(",") if s.strip()]
    except ValueError as exc:
        raise InputError(f"bad eps list {text!r}") from exc
    if not vals or any(v == 0 for v in vals):
        raise InputError("eps values must be nonzero")
    return vals


def parse_ladder(text: str) -> tuple[float, float, int]:
    """'min:max:count'."""
    try:
        lo, hi, n = text.split(":")
        lo, hi, n = float(lo), float(hi), int(n)
    except ValueError as exc:
        raise InputError(f"eps ladder must be min:max:count, got {text!r}") from exc
    if not 0 < lo < hi or n < 2:
        raise InputError("eps ladder needs 0 < min < max and count >= 2")
    return lo, hi, n


GRID_KEYS = {"n_rad": int, "n_ang": int, "rho1": float, "t_max": float, "n_rad2": int}


def parse_grid(text: str | None) -> dict:
    """'n_rad=24,n_ang=16' style overrides of the Borel grid."""
    out = {"n_rad": 24, "n_ang": 16, "rho1": 0.5, "t_max": 0.5}
    if not text:
        return out
    for item in text.split(","):
        if "=" not in item:
            raise InputError(f"grid entry {item!r} is not key=value")
        k, v = (s.strip() for s in item.split("=", 1))
        if k not in GRID_KEYS:
            raise InputError(f"unknown grid key {k!r}; known: {sorted(GRID_KEYS)}")
        try:
            out[k] = GRID_KEYS[k](v)
        except ValueError as exc:
            raise InputError(f"grid value {v!r} for {k}") from exc
    return out


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="artifact", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("config", help="instance file (JSON)")
    common.add_argument("--out", default="out", help="output directory")
    common.add_argument("--tol", type=float, default=1e-12, help="fixed-point stopping tolerance")
    common.add_argument("--grid", default=None, help="grid overrides, e.g. n_rad=24,n_ang=16")

    v = sub.add_parser("validate", help="check the structural constraints of an instance")
    v.add_argument("config")

    s = sub.add_parser("solve", parents=[common], help="solve the Borel fixed point per eps")
    s.add_argument("--eps", required=True, help="comma separated eps values")
    s.add_argument("--lemmas", action="store_true", help="also run the norm-inequality suite")

    a = sub.add_parser("analyze", parents=[common], help="covering, flatness and Gevrey analysis")
    a.add_argument("--sigma1", type=int, default=2)
    a.add_argument("--sigma2", type=int, default=2)
    a.add_argument("--eps-ladder", default="0.01:0.08:8", help="min:max:count for the flatness fits")
    a.add_argument("--gevrey-ladder", default="0.025:0.2:8", help="min:max:count for the Gevrey remainder fit")
    a.add_argument("--opening", type=float, default=None, help="override the sector opening")
    return ap


# --------------------------------------------------------------------------
# commands


def _load(path: str) -> tuple[ProblemConfig, Path]:
    p = Path(path)
    return load_config(p), p


def cmd_validate(args) -> int:
    cfg, _ = _load(args.config)
    rep = validate_config(cfg)
    print(rep.table())
    if rep.passed:
        print("all constraints satisfied")
        return EXIT_OK
    print("violated: " + ", ".join(c.name for c in rep.failed()))
    return EXIT_FAIL


def _write_omega(path: Path, omega) -> None:
    g = omega.grid
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["ray", "re_tau1", "im_tau1", "re_tau2", "im_tau2", "m", "re_omega", "im_omega"])
        for a in range(g.n_ang):
            for i in range(len(g.radii1[a])):
                t1 = g.tau1[a, i]
                for j, t2 in enumerate(g.tau2):
                    for l, m in enumerate(g.m_grid.nodes):
                        v = omega.values[a, i, j, l]
                        w.writerow([a] + [f"{x:.17g}" for x in (t1.real, t1.imag, t2.real, t2.imag, m,
                                                                 v.real, v.imag)])


def _write_trace(path: Path, increments) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["iteration", "increment"])
        for i, v in enumerate(increments, start=1):
            w.writerow([i, f"{v:.17g}"])


def _start(args, resolution: dict) -> tuple[ProblemConfig, RunManifest, dict]:
    cfg, path = _load(args.config)
    rep = validate_config(cfg)
    if not rep.passed:
        print(rep.table())
        raise InputError("constraint check failed: " + ", ".join(c.name for c in rep.failed()))
    out = Path(args.out)
    dirs = _layout(out)
    man = RunManifest(str(path), args.command, resolution, str(out),
                      _hash_inputs(path, args.command, resolution))
    return cfg, man, dirs


def cmd_solve(args) -> int:
    grid_opts = parse_grid(args.grid)
    eps_list = parse_eps_list(args.eps)
    res = {"grid": grid_opts, "tol": args.tol, "eps": [[e.real, e.imag] for e in eps_list]}
    cfg, man, dirs = _start(args, res)
    t0 = time.perf_counter()
    choice = select_directions(cfg, cfg.m_grid, grid_opts["rho1"])
    man.timings["directions"] = time.perf_counter() - t0
    _write_json(dirs["reports"] / "directions.json", choice.to_dict())

    def one(idx_eps):
        idx, eps = idx_eps
        grid = build_grid(cfg, eps, choice.d1, choice.d2, n_rad=grid_opts["n_rad"],
                          n_ang=grid_opts["n_ang"], rho1=grid_opts["rho1"],
                          t_max=grid_opts["t_max"], n_rad2=grid_opts.get("n_rad2"))
        try:
            rep = solve_fixed_point(cfg, eps, None, grid, tol=args.tol)
        except (DivergenceError, NonConvergenceError, SingularDivisorError) as exc:
            return idx, eps, None, f"{type(exc).__name__}: {exc}"
        return idx, eps, rep, None

    failures = 0
    with ThreadPoolExecutor(max_workers=_threads()) as pool:
        results = list(pool.map(one, enumerate(eps_list)))
    for idx, eps, rep, err in results:
        tag = f"eps{idx}"
        if err is not None:
            failures += 1
            print(f"eps={eps:.6g}: {err}")
            _write_json(dirs["reports"] / f"solve_{tag}.json", {"eps": eps, "error": err})
            continue
        doc = rep.to_dict()
        if args.lemmas:
            p = default_norm_params(cfg, eps)
            samples = random_samples(rep.omega.grid, p, 10, man.seed + idx)
            doc["lemmas"] = check_norm_lemmas(samples, p, cfg).to_dict()
        _write_json(dirs["reports"] / f"solve_{tag}.json", doc)
        _write_omega(dirs["grids"] / f"omega_{tag}.csv", rep.omega)
        _write_trace(dirs["trace"] / f"increments_{tag}.csv", rep.increments)
        print(f"eps={eps:.6g}: converged in {rep.iterations} iterations, residual {rep.residual:.3e}, "
              f"contraction {rep.contraction_estimate:.3f}")
    man.timings["total"] = time.perf_counter() - t0
    man.write(Path(args.out))
    return EXIT_FAIL if failures else EXIT_OK


def _time_points(ts, n: int = 3) -> np.ndarray:
    return ts.outer_radius * np.linspace(0.4, 1.0, n) * np.exp(1j * ts.direction)


def cmd_analyze(args) -> int:
    grid_opts = parse_grid(args.grid)
    lo, hi, n = parse_ladder(args.eps_ladder)
    glo, ghi, gn = parse_ladder(args.gevrey_ladder)
    res = {"grid": grid_opts, "tol": args.tol, "ladder": [lo, hi, n], "gevrey_ladder": [glo, ghi, gn], "sigma": [args.sigma1, args.sigma2],
           "opening": args.opening}
    cfg, man, dirs = _start(args, res)
    t0 = time.perf_counter()
    cov = build_good_covering(args.sigma1, args.sigma2, cfg.eps0, cfg.k1, cfg.k2, opening=args.opening)
    fam = associate_sectors(cov, cfg, time_radius=grid_opts["t_max"])
    _write_json(dirs["reports"] / "covering.json", {"covering": cov.to_dict(), "association": fam.to_dict()})
    sols = {p: SectorialSolution(cfg, fam.cell_directions(p), n_rad=grid_opts["n_rad"], tol=args.tol,
                                 t_max=grid_opts["t_max"])
            for p, _ in cov.cells()}
    t1 = _time_points(fam.time_sectors[0])
    t2 = _time_points(fam.time_sectors[1])
    z = np.array([-0.5, 0.0, 0.5])
    pairs = cov.overlapping_pairs()
    reports = []
    for p, q, a, b in pairs:
        eps = eps_ladder(lo, hi, n, 0.5 * (a + b))
        diffs, scale = pair_difference(sols[p], sols[q], eps, t1, t2, z, return_scale=True)
        rep = flatness_report((p, q), diffs, eps, cfg.k1, cfg.k2, noise_floor=NOISE_REL * scale)
        reports.append(rep)
        name = f"pair_{p[0]}{p[1]}_{q[0]}{q[1]}"
        _write_json(dirs["reports"] / f"flatness_{name}.json", rep.to_dict())
        rep.to_csv(dirs["trace"] / f"diffs_{name}.csv")
    summary: dict = {"pairs": len(pairs)}
    status = EXIT_OK
    if not pairs:
        summary["verdict"] = "no overlap data"
        print("no overlap data")
        status = EXIT_FAIL
    else:
        verdict = classify_covering(reports, cov, cfg.k1, cfg.k2)
        _write_json(dirs["reports"] / "verdict.json", verdict.to_dict())
        summary["classification"] = verdict.to_dict()
        if cfg.k2 > cfg.k1:
            p0 = next(iter(sols))
            sec = cov.sector(p0)
            eps = eps_ladder(glo, ghi, gn, sec.direction)
            fc = formal_recursion(cfg, 3, t1, t2, z)
            for m in range(fc.m_max + 1):
                fc.to_csv(dirs["grids"] / f"H_{m}.csv", m)
            fit = gevrey_remainder_fit(lambda e: sols[p0](t1, t2, z, e), fc, 3, eps, cfg.k1)
            _write_json(dirs["reports"] / "gevrey.json", fit.to_dict())
            summary["gevrey"] = fit.to_dict()
            ok = verdict.verdict == GEVREY_VERDICT and fit.spread <= 10
            summary["verdict"] = ("Gevrey 1/k1 expansion verified at N <= 3" if ok
                                  else f"Gevrey check failed ({verdict.verdict}; margin spread {fit.spread:.3g})")
        else:
            ok = verdict.verdict == MULTISUM_VERDICT
            summary["verdict"] = ("(k1,k2)-multisummability hypotheses satisfied" if ok
                                  else f"multisummability not established: {verdict.verdict}")
        print(summary["verdict"])
        status = EXIT_OK if ok else EXIT_FAIL
    _write_json(dirs["reports"] / "summary.json", summary)
    man.timings["total"] = time.perf_counter() - t0
    man.write(Path(args.out))
    return status


COMMANDS = {"validate": cmd_validate, "solve": cmd_solve, "analyze": cmd_analyze}


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on bad usage and 0 for --help/--version
        return EXIT_OK if exc.code in (0, None) else EXIT_INPUT
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (ConfigError, InputError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (CoveringError, AssociationError) as exc:
        print(f"analysis error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
