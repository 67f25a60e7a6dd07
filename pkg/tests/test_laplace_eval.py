from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from artifact.borel_plane import BorelFunction, cheb_nodes
from artifact.fixed_point import build_grid
from artifact.laplace_eval import (AssociationError, CoveringError, DirectionError,
                                   SectorialSolution, SeparableTest, SolutionEvaluator,
                                   associate_sectors, build_good_covering, evaluate_solution,
                                   kconv_callable, laplace_2d, laplace_identity_suite,
                                   laplace_ray_weights, pde_residual, required_opening)


def monomial_omega(cfg, eps, a, b, gamma1=0.0, gamma2=0.0):
    g = build_grid(cfg, eps, gamma1, gamma2, n_rad=24, n_ang=1)
    return BorelFunction.from_callable(g, lambda t1, t2, m: t1 ** a * t2 ** b * np.exp(-m ** 2))


def test_reference_covering():
    cov = build_good_covering(2, 2, 0.2, 1, 2)
    assert cov.opening == pytest.approx(required_opening(1, 2) * 1.1)
    assert len(cov.overlapping_pairs()) == 4
    mult = cov.multiplicity(np.linspace(0, 2 * np.pi, 721))
    assert mult.min() >= 1 and mult.max() <= 2
    assert len(cov.to_dict()["sectors"]) == 2


@pytest.mark.parametrize("s1,s2,opening", [(1, 2, 2 * np.pi / 3), (1, 3, 1.0), (0, 2, None)])
def test_bad_coverings_raise(s1, s2, opening):
    with pytest.raises(CoveringError):
        build_good_covering(s1, s2, 0.2, 1, 2, opening=opening)


def test_triple_overlap_rejected():
    with pytest.raises(CoveringError, match="triple"):
        build_good_covering(2, 2, 0.2, 1, 2, opening=3.5)


def test_associated_sectors(cfg):
    cov = build_good_covering(2, 2, 0.2, 1, 2)
    fam = associate_sectors(cov, cfg)
    ok, bad = fam.membership(8)
    assert ok and not bad
    assert fam.theta[0] > math.pi and fam.theta[1] > math.pi / 2
    assert fam.cell_directions((1, 0)) == pytest.approx((np.pi, np.pi))
    with pytest.raises(AssociationError):
        associate_sectors(cov, cfg, theta=(3.0, 3.0))
    with pytest.raises(AssociationError):
        associate_sectors(cov, cfg, direction_table={(0, 0): (0.0, 0.0)})


def test_ray_weights_reproduce_monomial_transform():
    radii = cheb_nodes(20, 5.0)
    T = 0.4 * np.exp(0.2j)
    W, L_eff, c = laplace_ray_weights(radii, 5.0, 0.0, T, 2)
    # k int_0^inf r^3 e^{-(r/T)^2} dr/r = T^3 Gamma(3/2), with g = omega/r = r^2
    assert W @ radii ** 2 == pytest.approx(T ** 3 * math.gamma(1.5), rel=1e-10)
    assert 0 < L_eff <= 5.0 and 0 < c <= 1
    with pytest.raises(DirectionError):
        laplace_ray_weights(radii, 5.0, np.pi / 2, 0.4, 1)


@pytest.mark.parametrize("a,b", [(1, 1), (2, 3), (3, 2)])
def test_evaluator_on_monomial(cfg, a, b):
    eps = 0.05
    ev = SolutionEvaluator(monomial_omega(cfg, eps, a, b), cfg, eps)
    t1, t2, z = 0.3, 0.4, np.array([0.0, 0.5, 0.2j])
    got = ev(t1, t2, z)[0, 0]
    T1, T2 = eps * t1, eps * t2
    expect = (T1 ** a * math.gamma(a / cfg.k1) * T2 ** b * math.gamma(b / cfg.k2)
              * np.exp(-z ** 2 / 4) / math.sqrt(2))
    assert np.allclose(got, expect, rtol=1e-9)


def test_evaluate_solution_errors(cfg):
    om = monomial_omega(cfg, 0.05, 1, 1)
    u, bnd = evaluate_solution(om, cfg, 0.3, 0.4, 0.0, 0.05, 0.0, 0.0)
    assert abs(u) > 0 and bnd == 0.0
    with pytest.raises(DirectionError, match="strip"):
        evaluate_solution(om, cfg, 0.3, 0.4, 5j, 0.05, 0.0, 0.0)
    with pytest.raises(DirectionError, match="grid ray"):
        evaluate_solution(om, cfg, 0.3, 0.4, 0.0, 0.05, 0.5, 0.0)
    with pytest.raises(DirectionError, match="decay"):
        evaluate_solution(om, cfg, 0.3j, 0.4, 0.0, 0.05, 0.0, 0.0)


def test_zero_omega_evaluates_to_zero(cfg):
    om = monomial_omega(cfg, 0.05, 1, 1) * 0.0
    assert evaluate_solution(om, cfg, 0.3, 0.4, 0.0, 0.05, 0.0, 0.0) == (0j, 0.0)


def test_sample_csv(cfg, tmp_path):
    ev = SolutionEvaluator(monomial_omega(cfg, 0.05, 1, 1), cfg, 0.05, varpi=1.0)
    s = ev.sample([0.2, 0.3], [0.4], [0.0, 0.5])
    assert s.u.shape == s.bound.shape == (2, 1, 2)
    assert np.all(s.bound >= 0)
    s.to_csv(tmp_path / "u.csv")
    assert len((tmp_path / "u.csv").read_text().splitlines()) == 5


def test_identity_suite_skips_nonseparable():
    rep = laplace_identity_suite([SeparableTest(), None, "not a function"], 1, 2,
                                 T_points=[(0.5 + 0j, 0.5 + 0j)])
    assert len(rep.skipped) == 2
    assert rep.passed(1e-5)
    families = {r.name.split("_")[0] for r in rep.results}
    assert families == {"convolution", "derivative", "power"}


def test_laplace_2d_closed_form():
    # k1 k2 int int u1 u2^2 e^{-(u1/T1) - (u2/T2)^2} du/u = T1 Gamma(1) T2^2 Gamma(1)
    T1, T2 = 0.5 * np.exp(0.3j), 0.4
    got = laplace_2d(lambda a, b: a * b ** 2, T1, T2, 1, 2)
    assert got == pytest.approx(T1 * T2 ** 2, rel=1e-10)
    with pytest.raises(DirectionError):
        laplace_2d(lambda a, b: a * b, T1, T2, 1, 2, gamma1=np.pi)


@settings(max_examples=20, deadline=None)
@given(na=st.integers(1, 3), nb=st.integers(1, 3), k=st.integers(1, 3), r=st.floats(0.2, 2))
def test_kconv_beta(na, nb, k, r):
    """The k-convolution of tau^a and tau^b is tau^(a+b-k) B(a/k, b/k)."""
    from scipy.special import beta
    a, b = na * k, nb * k               # smooth integrand at both ends
    tau = np.array([r])
    got = kconv_callable(lambda s: s ** a, lambda s: s ** b, tau, k, nq=64)[0]
    assert got == pytest.approx(r ** (a + b - k) * beta(a / k, b / k), rel=1e-10)


@settings(max_examples=15, deadline=None)
@given(s=st.floats(0.1, 10), z=st.floats(-1, 1))
def test_evaluator_linear_in_omega(cfg, s, z):
    om = monomial_omega(cfg, 0.05, 2, 1)
    a = SolutionEvaluator(om, cfg, 0.05)(0.3, 0.4, z)
    b = SolutionEvaluator(om * s, cfg, 0.05)(0.3, 0.4, z)
    assert np.allclose(b, s * a, rtol=1e-12)


def test_sectorial_solution_residual(small_cfg):
    sol = SectorialSolution(small_cfg, (0.0, 0.0), track=False)
    ev, rep = sol.solve(0.08)
    assert sol.solve(0.08)[0] is ev                     # cached
    res = pde_residual(small_cfg, ev, 0.08, [0.2, 0.3], [0.2], [0.0, 0.5])
    assert res.relative_residual < 1e-3
    assert sol(0.2, 0.2, 0.0, 0.08).shape == (1, 1, 1)
    with pytest.raises(DirectionError):
        pde_residual(small_cfg, ev, 0.08, [0.2], [0.2], [5j])
