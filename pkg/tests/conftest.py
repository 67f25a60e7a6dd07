from __future__ import annotations

from pathlib import Path

import numpy as np
import pytest

from artifact.borel_plane import select_directions
from artifact.config import load_config, reference_config
from artifact.fixed_point import build_grid, solve_fixed_point

CONFIGS = Path(__file__).resolve().parent.parent / "configs"

# criterion name -> (passed, detail); printed at the end of the session
ACCEPTANCE: dict[str, tuple[bool, str]] = {}


def record(name: str, passed: bool, detail: str = "") -> None:
    line = f"{'PASS' if passed else 'FAIL'}  {name}  {detail}".rstrip()
    print(line)
    ACCEPTANCE[name] = (passed, detail)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(ACCEPTANCE, key=lambda s: int(s.split()[0])):
        ok, detail = ACCEPTANCE[name]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}  {detail}".rstrip())


@pytest.fixture(scope="session")
def cfg():
    return reference_config()


@pytest.fixture(scope="session")
def small_cfg():
    return load_config(CONFIGS / "small_forcing.json")


@pytest.fixture(scope="session")
def directions(cfg):
    return select_directions(cfg, cfg.m_grid)


@pytest.fixture(scope="session")
def solved(cfg, directions):
    """Converged fixed point at eps = 0.05 on the default 24 x 16 x 41 grid."""
    eps = 0.05
    grid = build_grid(cfg, eps, directions.d1, directions.d2)
    return solve_fixed_point(cfg, eps, None, grid)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
