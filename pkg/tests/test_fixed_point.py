from __future__ import annotations

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import beta as B

from artifact.borel_plane import BorelFunction, BorelGrid, weighted_norm
from artifact.config import ForcingSpec, load_config
from artifact.fixed_point import (DivergenceError, NonConvergenceError, SingularDivisorError,
                                  apply_A_op, apply_H, build_grid, check_norm_lemmas,
                                  compute_shift_coefficients, default_norm_params, forcing_term,
                                  grid_extent, make_workspace, nonlinear_convolution,
                                  random_samples, solve_fixed_point, volterra_callable)

from .conftest import CONFIGS


def tiny_grid(cfg, eps=0.05, n=10, n_ang=2):
    return build_grid(cfg, eps, 0.0, 0.0, n_rad=n, n_ang=n_ang)


def monomial(grid, a=1, b=1):
    return BorelFunction.from_callable(grid, lambda t1, t2, m: t1 ** a * t2 ** b * np.exp(-m ** 2))


@pytest.mark.parametrize("delta,k,expected", [
    (1, 1, ()),
    (2, 1, (Fraction(-2),)),
    (2, 2, (Fraction(-3),)),
    (3, 1, (Fraction(6), Fraction(-6))),
])
def test_shift_coefficients_known_values(delta, k, expected):
    assert compute_shift_coefficients(delta, k).coeffs == expected


@pytest.mark.parametrize("delta", [1, 2, 3, 4, 5])
@pytest.mark.parametrize("k", [1, 2, 3])
def test_shift_coefficients_balance(delta, k):
    co = compute_shift_coefficients(delta, k)
    for n in range(-3, 12):
        lhs, rhs = co.apply_to_monomial(n)
        assert lhs == rhs


def test_shift_coefficients_reject_bad_input():
    with pytest.raises(ValueError):
        compute_shift_coefficients(0, 1)


@pytest.mark.parametrize("k,c,p,n", [(1, 0.5, 1.0, 2), (2, 1.5, 1.0, 1), (2, 0.5, 2.0, 3), (3, 1.0, 1.0, 2)])
def test_volterra_callable_beta(k, c, p, n):
    tau = np.array([0.3, 0.7 * np.exp(0.4j)])
    got = volterra_callable(lambda s: s ** n, tau, k, c, p)
    expect = tau ** (k * (c - 1 + p) + n) * B(c, p + n / k)
    assert np.allclose(got, expect, rtol=1e-10)


def test_grid_extent_scales_with_eps():
    assert grid_extent(0.1, 2) == pytest.approx(2 * grid_extent(0.05, 2))


def test_unknown_shift_operator(cfg):
    g = tiny_grid(cfg)
    with pytest.raises(ValueError):
        apply_A_op(monomial(g), "D4", compute_shift_coefficients(2, 1), cfg)


def test_singular_divisor_reported(cfg):
    with pytest.raises(SingularDivisorError):
        make_workspace(cfg, tiny_grid(cfg), 0.05, pm_floor=10.0)


def test_zero_forcing_gives_zero_solution():
    cfg = load_config(CONFIGS / "zero_forcing.json")
    g = tiny_grid(cfg)
    rep = solve_fixed_point(cfg, 0.05, None, g)
    assert rep.converged and rep.iterations == 1
    assert not np.any(rep.omega.values)
    assert rep.residual == 0.0


def test_huge_forcing_diverges():
    cfg = load_config(CONFIGS / "huge_forcing.json")
    with pytest.raises(DivergenceError):
        solve_fixed_point(cfg, 0.05, None, tiny_grid(cfg))


def test_iteration_cap(cfg):
    with pytest.raises(NonConvergenceError):
        solve_fixed_point(cfg, 0.05, None, tiny_grid(cfg), max_iter=2)


def test_fixed_point_is_fixed(cfg):
    g = tiny_grid(cfg)
    rep = solve_fixed_point(cfg, 0.05, None, g)
    again = apply_H(rep.omega, cfg, 0.05)
    p = default_norm_params(cfg, 0.05)
    # convergence is measured in the weighted norm the iteration contracts in
    assert weighted_norm(again - rep.omega, p) < 1e-10 * weighted_norm(rep.omega, p)
    assert rep.contraction_estimate < 0.5 and rep.bound_pass
    doc = rep.to_dict()
    assert doc["grid"]["n_rad"] == 10 and len(doc["increments"]) == rep.iterations


def test_solution_linear_in_small_forcing(cfg):
    """For tiny forcing the quadratic block is negligible: doubling F doubles omega."""
    g = tiny_grid(cfg)
    a = solve_fixed_point(cfg.replace(forcing=cfg.forcing.scaled(1e-3)), 0.05, None, g).omega.values
    b = solve_fixed_point(cfg.replace(forcing=cfg.forcing.scaled(2e-3)), 0.05, None, g).omega.values
    assert np.max(np.abs(b - 2 * a)) < 1e-3 * np.max(np.abs(b))


def test_forcing_block_without_terms(cfg):
    c = cfg.replace(forcing=ForcingSpec())
    assert not np.any(forcing_term(c, 0.05, tiny_grid(c)).values)


def test_lemma_report_shape(cfg):
    g = tiny_grid(cfg)
    p = default_norm_params(cfg, 0.05)
    rep = check_norm_lemmas(random_samples(g, p, 4, 0), p, cfg)
    assert set(rep.constants()) == {"lemma_tau2", "lemma_tau1", "lemma_both", "lemma_aux",
                                    "lemma_product"}
    assert all(r.finite and len(r.ratios) == 4 for r in rep.results.values())
    assert check_norm_lemmas([], p, cfg).results == {}


def test_random_samples_reproducible(cfg):
    g = tiny_grid(cfg)
    p = default_norm_params(cfg, 0.05)
    a = random_samples(g, p, 2, 3)
    b = random_samples(g, p, 2, 3)
    assert all(np.array_equal(x.values, y.values) for x, y in zip(a, b))


@settings(max_examples=15, deadline=None)
@given(c=st.complex_numbers(max_magnitude=5, allow_nan=False, allow_infinity=False),
       which=st.sampled_from(["D1", "D2", "D3"]))
def test_shift_blocks_linear(cfg, c, which):
    g = tiny_grid(cfg, n=6, n_ang=1)
    f, h = monomial(g, 1, 1), monomial(g, 2, 3)
    co = compute_shift_coefficients(2, cfg.k1 if which == "D1" else cfg.k2)
    lhs = apply_A_op(f * c + h, which, co, cfg).values
    rhs = c * apply_A_op(f, which, co, cfg).values + apply_A_op(h, which, co, cfg).values
    assert np.allclose(lhs, rhs, rtol=1e-12, atol=1e-14 * (1 + abs(c)))


@settings(max_examples=10, deadline=None)
@given(a=st.integers(1, 3), b=st.integers(1, 3), s=st.floats(0.1, 10))
def test_quadratic_block_symmetric_and_bilinear(cfg, a, b, s):
    g = tiny_grid(cfg, n=6, n_ang=1)
    f, h = monomial(g, a, b), monomial(g, b, a)
    fh = nonlinear_convolution(f, h, cfg, 0.05).values
    hf = nonlinear_convolution(h, f, cfg, 0.05).values
    scaled = nonlinear_convolution(f * s, h, cfg, 0.05).values
    tol = 1e-10 * np.max(np.abs(fh))
    assert np.max(np.abs(fh - hf)) < tol
    assert np.max(np.abs(scaled - s * fh)) < s * tol


def test_quadratic_block_on_explicit_grid(cfg):
    g = BorelGrid(0.1, 0.2, 0.5, 0.5, 0.5, 8, 1, cfg.m_grid)
    assert nonlinear_convolution(monomial(g), monomial(g), cfg, 0.05).values.shape == g.shape
