from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import exp1

from artifact.asymptotics import (GEVREY_VERDICT, MULTISUM_VERDICT, U0, DiscretizationError,
                                  FitError, cauchy_coefficients, classify_covering, eps_ladder,
                                  flatness_fit, flatness_report, formal_recursion,
                                  gevrey_remainder_fit, label, pair_difference)
from artifact.config import ComplexPolynomial
from artifact.laplace_eval import build_good_covering

LADDER = np.geomspace(0.1, 0.0125, 8)


def stieltjes(eps):
    """Borel sum of sum m! eps^m on the negative eps axis: x e^x E1(x), x = 1/|eps|."""
    x = 1.0 / abs(eps)
    return np.array([x * math.exp(x) * exp1(x)])


def test_eps_ladder():
    lad = eps_ladder(0.01, 0.08, 4, np.pi / 4)
    assert np.allclose(np.abs(lad), [0.08, 0.04, 0.02, 0.01])
    assert np.allclose(np.angle(lad), np.pi / 4)


@pytest.mark.parametrize("kappa,K,M", [(1, 3.0, 2.0), (2, 0.5, 0.01), (1, 1e-3, 0.3)])
def test_flatness_fit_recovers_parameters(kappa, K, M):
    fit = flatness_fit(K * np.exp(-M / LADDER ** kappa), LADDER)
    assert fit.kappa == kappa and fit.monotone and not fit.exactly_flat
    assert fit.K == pytest.approx(K, rel=1e-6)
    assert fit.M == pytest.approx(M, rel=1e-6)
    assert fit.to_dict()["kappa"] == kappa


@pytest.mark.parametrize("diffs,eps,msg", [
    (np.ones(4), np.geomspace(0.1, 0.01, 4), "5 samples"),
    (np.ones(6), np.geomspace(0.1, 0.02, 6), "factor"),
    (np.array([1, -1, 1, 1, 1, 1.0]), np.geomspace(0.1, 0.01, 6), "positive"),
    (np.ones(5), np.geomspace(0.1, 0.01, 6), "length"),
])
def test_flatness_fit_errors(diffs, eps, msg):
    with pytest.raises(FitError, match=msg):
        flatness_fit(diffs, eps)


def test_exactly_flat_and_noise_floor():
    fit = flatness_fit(np.zeros(8), LADDER)
    assert fit.exactly_flat and fit.M == math.inf
    noisy = 1e-22 * (1 + np.arange(8))
    rep = flatness_report(((0, 0), (0, 1)), noisy, LADDER, 1, 2, noise_floor=1e-20)
    assert rep.classification == label(1) and rep.fit.exactly_flat
    assert np.array_equal(rep.diffs, noisy)             # raw diffs are kept
    assert flatness_report(((0, 0), (1, 1)), [], [], 1, 2, disjoint=True).classification == U0


def test_report_csv(tmp_path):
    rep = flatness_report(((0, 0), (0, 1)), np.exp(-1 / LADDER), LADDER, 1, 2)
    rep.to_csv(tmp_path / "f.csv")
    assert len((tmp_path / "f.csv").read_text().splitlines()) == 9
    assert rep.to_dict()["classification"] == "U_1"


def test_pair_difference():
    def ua(t1, t2, z, e):
        return np.array([1.0, 2.0]) + e

    def ub(t1, t2, z, e):
        return np.array([1.0, 2.0]) + 2 * e

    d, scale = pair_difference(ua, ub, [0.1, 0.2], None, None, None, return_scale=True)
    assert np.allclose(d, [0.1, 0.2]) and scale == pytest.approx(2.4)


def reports_for(cov, kappa, k1, k2, spoil=None):
    out = []
    for p, q, _, _ in cov.overlapping_pairs():
        kap = kappa if (p, q) != spoil else (k2 if kappa == k1 else k1)
        out.append(flatness_report((p, q), np.exp(-0.01 ** (kap - 1) / LADDER ** kap), LADDER, k1, k2))
    return out


def test_classify_gevrey_regime():
    cov = build_good_covering(2, 2, 0.2, 1, 2)
    assert classify_covering(reports_for(cov, 1, 1, 2), cov, 1, 2).verdict == GEVREY_VERDICT
    pair = cov.overlapping_pairs()[0][:2]
    v = classify_covering(reports_for(cov, 1, 1, 2, spoil=pair), cov, 1, 2)
    assert not v.ok and v.obstruction == tuple(sorted(pair))


def test_classify_multisum_chain():
    cov = build_good_covering(2, 2, 0.2, 2, 1)
    v = classify_covering(reports_for(cov, 2, 2, 1), cov, 2, 1)
    assert v.ok and v.verdict == MULTISUM_VERDICT and v.chain
    bad = classify_covering(reports_for(cov, 1, 2, 1), cov, 2, 1)
    assert not bad.ok and bad.obstruction is not None
    assert bad.to_dict()["ok"] is False


def test_classify_missing_pair():
    cov = build_good_covering(2, 2, 0.2, 1, 2)
    with pytest.raises(ValueError, match="no flatness report"):
        classify_covering(reports_for(cov, 1, 1, 2)[1:], cov, 1, 2)


@settings(max_examples=30, deadline=None)
@given(K=st.floats(1e-3, 1e3), M=st.floats(0.05, 2.0), s=st.floats(1e-3, 1e3), kappa=st.sampled_from([1, 2]))
def test_flatness_fit_scale_equivariant(K, M, s, kappa):
    d = K * np.exp(-M * 0.01 ** (kappa - 1) / LADDER ** kappa)    # no underflow for kappa 2
    a, b = flatness_fit(d, LADDER), flatness_fit(s * d, LADDER)
    assert a.kappa == b.kappa == kappa
    assert b.K == pytest.approx(s * a.K, rel=1e-6)
    assert b.M == pytest.approx(a.M, rel=1e-6)


@settings(max_examples=20, deadline=None)
@given(scales=st.lists(st.floats(1e-6, 1e6), min_size=4, max_size=4))
def test_classification_depends_only_on_labels(scales):
    cov = build_good_covering(2, 2, 0.2, 1, 2)
    reps = []
    for (p, q, _, _), c in zip(cov.overlapping_pairs(), scales):
        reps.append(flatness_report((p, q), c * np.exp(-0.3 / LADDER), LADDER, 1, 2))
    assert classify_covering(reps, cov, 1, 2).verdict == GEVREY_VERDICT


def test_formal_recursion(small_cfg):
    t = np.array([0.2, 0.3])
    fc = formal_recursion(small_cfg, 3, t, t, [0.0, 0.5])
    assert fc.m_max == 3 and fc.H.shape == (4, 2, 2, 2)
    assert max(fc.residuals) < 1e-12
    assert not np.any(fc.H[0])                          # no forcing at eps^0
    assert np.allclose(fc.evaluate(2, t, t, [0.0, 0.5]), fc.H[2])
    # the lowest nonzero order is the forcing monomial integrated once in t2
    first = next(m for m in range(4) if fc.polys[m])
    assert all(b >= 1 for (_, b) in fc.polys[first])
    assert np.allclose(fc.partial_sum(1, 0.1), 0)


def test_formal_recursion_rejects_vanishing_q(small_cfg):
    with pytest.raises(DiscretizationError):
        formal_recursion(small_cfg.replace(Q=ComplexPolynomial((0.0, 1.0))), 2, [0.2], [0.2], [0.0])


def test_cauchy_coefficients_of_polynomial():
    co = cauchy_coefficients(lambda e: np.array([1 + 2 * e + 3 * e ** 2]), 0.05, 32, 4)
    assert np.allclose(co[:, 0], [1, 2, 3, 0, 0], atol=1e-10)


def test_gevrey_fit_on_stieltjes_function():
    H = [np.array([float(math.factorial(m) ** 2)]) for m in range(7)]
    fit = gevrey_remainder_fit(stieltjes, H, 6, -np.geomspace(0.1, 0.01, 8), k=1)
    assert fit.ok and abs(fit.M - 1) < 0.2
    assert fit.remainders.shape == (7, 8)
    with pytest.raises(FitError):
        gevrey_remainder_fit(stieltjes, H[:3], 6, -LADDER)


def test_gevrey_fit_exact_series():
    fit = gevrey_remainder_fit(lambda e: np.array([0.0]), [np.zeros(1)] * 4, 3, LADDER)
    assert fit.ok and fit.C == 0.0
