from __future__ import annotations

import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from artifact.config import (CONSTRAINT_FAMILIES, Annulus, ComplexPolynomial, ConfigError,
                             EpsPolynomial, ForcingSpec, ForcingTerm, check_forcing_bound,
                             config_from_dict, config_to_dict, derive_exponents, is_integer_ratio,
                             load_config, reference_config, validate_config)

from .conftest import CONFIGS


def test_reference_passes_every_family(cfg):
    rep = validate_config(cfg)
    assert rep.passed, rep.table()
    assert set(CONSTRAINT_FAMILIES) <= {c.name for c in rep.checks}


def test_derived_exponents_positive(cfg):
    ex = derive_exponents(cfg)
    assert ex.d_k1 == (1, 1)
    assert ex.d_k2 == (3, 1)


def test_derived_exponent_rejects_nonpositive(cfg):
    with pytest.raises(ConfigError, match="d_k1"):
        derive_exponents(cfg.replace(d=(0, 3)))


@pytest.mark.parametrize("name,expected", [
    ("small_forcing.json", True),
    ("zero_forcing.json", True),
    ("huge_forcing.json", True),
    ("flatness_pair.json", True),
    ("k1_greater_k2.json", True),
    ("invalid_deltat_D2.json", False),
])
def test_shipped_configs(name, expected):
    rep = validate_config(load_config(CONFIGS / name))
    assert rep.passed is expected, rep.table()


def test_invalid_config_names_the_families():
    rep = validate_config(load_config(CONFIGS / "invalid_deltat_D2.json"))
    assert {"order_condition", "balance_identities", "dtilde_identities"} <= rep.failed_names()


def test_malformed_json_raises():
    with pytest.raises(ConfigError):
        load_config(CONFIGS / "malformed.json")


def test_missing_field_is_reported():
    data = config_to_dict(reference_config())
    del data["k2"]
    with pytest.raises(ConfigError, match="k2"):
        config_from_dict(data)


def test_dict_round_trip(cfg, tmp_path):
    path = tmp_path / "c.json"
    path.write_text(json.dumps(config_to_dict(cfg)))
    back = load_config(path)
    assert config_to_dict(back) == config_to_dict(cfg)
    assert validate_config(back).passed


@pytest.mark.parametrize("changes,family", [
    ({"Q": ComplexPolynomial((0.0, 1.0))}, "Q_nonvanishing"),
    ({"R_D3": ComplexPolynomial.constant(5.0)}, "annulus_membership"),
    ({"R_D3": ComplexPolynomial((1.0, 1.0))}, "degree_conditions"),
    ({"P1": EpsPolynomial(((1.0,), (1.0,)))}, "mu_bound"),
    ({"d1": 3}, "d1_identity"),
    ({"deltat": (1, 1)}, "monotone_deltas"),
])
def test_single_violation_is_named(cfg, changes, family):
    assert family in validate_config(cfg.replace(**changes)).failed_names()


def test_structural_errors_raise(cfg):
    with pytest.raises(ConfigError):
        cfg.replace(d=(1, 2, 3))
    with pytest.raises(ConfigError):
        cfg.replace(beta_prime=2.0)
    with pytest.raises(ConfigError):
        ForcingTerm(0, 1, "inverse_weight")
    with pytest.raises(ConfigError):
        ForcingTerm(1, 1, "no_such_profile")


def test_forcing_bound(cfg):
    ok, ratio = check_forcing_bound(cfg.forcing, cfg.beta, cfg.mu, 4)
    assert ok and ratio == pytest.approx(1.0)
    ok, ratio = check_forcing_bound(cfg.forcing.scaled(2.0), cfg.beta, cfg.mu, 4)
    assert not ok and ratio == pytest.approx(2.0)
    assert check_forcing_bound(ForcingSpec(), 1.0, 2.0, 4) == (True, 0.0)


def test_eps_polynomial():
    p = EpsPolynomial(((1.0, 2.0), (0.0, 0.0, 3.0)))     # (1 + 2 eps) + 3 eps^2 X
    assert p.degree == 1
    assert p.eps_order == 2
    assert complex(p.at_eps(0.5)(2.0)) == pytest.approx(2.0 + 0.75 * 2.0)
    assert p.eps_coefficient(2).coeffs[1] == 3.0


def test_annulus_contains():
    ann = Annulus(0.5, 2.0, -np.pi / 4, np.pi / 4)
    got = ann.contains(np.array([1.0, 1j, 0.1, 3.0, np.exp(0.7j)]))
    assert got.tolist() == [True, False, False, False, True]


def test_integer_ratio(cfg):
    assert is_integer_ratio(cfg) == (True, 0)
    assert is_integer_ratio(cfg.replace(deltat_D3=4))[0]
    assert not is_integer_ratio(cfg.replace(deltat_D2=1))[0]


@settings(max_examples=40, deadline=None)
@given(shift=st.integers(0, 4), extra=st.integers(1, 5))
def test_raising_strict_quantities_keeps_validity(shift, extra):
    """Strict lower bounds only get easier when the bounded side grows."""
    cfg = reference_config()
    new = cfg.replace(Delta=((5 + shift, 5 + extra), (5 + extra, 5)), mu=2.0 + extra)
    assert validate_config(new).passed


@settings(max_examples=40, deadline=None)
@given(dD2=st.integers(-2, 5), dD3=st.integers(-2, 5))
def test_order_condition_matches_definition(dD2, dD3):
    cfg = reference_config()
    rep = validate_config(cfg.replace(deltat_D2=dD2, deltat_D3=dD3))
    expected = 2 / cfg.k2 < dD2 <= dD3
    assert rep["order_condition"].passed is expected
