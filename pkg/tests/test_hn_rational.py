import math

import numpy as np
import pytest

from slpencil.exceptions import (
    DivisionRemainder,
    DomainViolation,
    InfinityEvaluation,
    InvalidCoefficients,
    PoleEvaluation,
)
from slpencil.hn_rational import (
    RationalHN,
    ThetaCase,
    from_coeff_vector,
    from_fraction,
    in_rational_set,
    rational_set_violations,
    set_parameters,
    theta_transform,
)


def random_hn(rng, M):
    """A well-separated rational HN function of index M"""
    d, odd = divmod(M, 2)
    poles = []
    location = rng.uniform(1.0, 2.0)
    for _ in range(d):
        poles.append((location, rng.uniform(0.5, 2.0)))
        location += rng.uniform(1.0, 2.5)
    h0 = rng.uniform(0.5, 2.0) if odd else 0.0
    return RationalHN(h0=h0, h=rng.uniform(-2.0, 2.0), poles=tuple(poles))


def test_index_examples():
    """Test the index of constant, infinite and pole-carrying functions"""
    assert RationalHN.constant(3.0).index() == 0
    assert RationalHN.infinity().index() == -1
    assert RationalHN(h0=1.0, h=0.0, poles=((2.0, 0.5),)).index() == 3
    assert RationalHN(h=1.0, poles=((2.0, 0.5), (4.0, 1.0))).index() == 4


def test_invalid_coefficients():
    """Test that malformed functions are rejected"""
    with pytest.raises(InvalidCoefficients):
        RationalHN(h0=-1.0)
    with pytest.raises(InvalidCoefficients):
        RationalHN(poles=((1.0, -0.5),))
    with pytest.raises(InvalidCoefficients):
        RationalHN(poles=((2.0, 1.0), (1.0, 1.0)))


def test_evaluate_examples():
    """Test evaluation of constant, linear and single-pole functions"""
    assert RationalHN.constant(2.0).evaluate(10.0) == 2.0
    assert RationalHN.linear(1.0).evaluate(-4.0) == -4.0
    assert RationalHN(poles=((1.0, 1.0),)).evaluate(0.0) == pytest.approx(1.0)


def test_evaluate_errors():
    """Test evaluation at a pole and of the symbol infinity"""
    with pytest.raises(PoleEvaluation):
        RationalHN(poles=((1.0, 1.0),)).evaluate(1.0)
    with pytest.raises(InfinityEvaluation):
        RationalHN.infinity().evaluate(0.0)


def test_derivative_examples():
    """Test derivative values"""
    assert RationalHN.linear(1.0, 5.0).derivative_value(3.7) == 1.0
    assert RationalHN(poles=((1.0, 1.0),)).derivative_value(0.0) == pytest.approx(1.0)
    assert RationalHN.constant(4.0).derivative_value(2.0) == 0.0


def test_first_pole():
    """Test the first pole sentinel"""
    assert RationalHN.constant(1.0).first_pole() == math.inf
    assert RationalHN(poles=((3.0, 1.0),)).first_pole() == 3.0
    assert RationalHN.infinity().first_pole() == math.inf


def test_strictly_increasing_between_poles():
    """Test monotonicity on each interval between consecutive poles"""
    f = RationalHN(h0=0.5, h=-1.0, poles=((2.0, 1.0), (5.0, 0.5)))
    for lo, hi in [(-20.0, 2.0), (2.0, 5.0), (5.0, 30.0)]:
        lam = np.linspace(lo + 1e-3, hi - 1e-3, 400)
        assert np.all(np.diff(f.evaluate(lam)) > 0)


def test_to_fraction_examples():
    """Test polynomial fractions of constant, linear and infinite functions"""
    frac = RationalHN.constant(2.5).to_fraction()
    np.testing.assert_allclose(frac.up, [2.5])
    np.testing.assert_allclose(frac.down, [1.0])

    frac = RationalHN.linear(2.0, 3.0).to_fraction()
    np.testing.assert_allclose(frac.up, [1.5, 1.0])
    np.testing.assert_allclose(frac.down, [0.5])

    frac = RationalHN.infinity().to_fraction()
    np.testing.assert_allclose(frac.up, [-1.0])
    np.testing.assert_allclose(frac.down, [0.0])


def test_fraction_matches_evaluation():
    """Test that up/down reproduces f away from poles"""
    f = RationalHN(h0=1.5, h=0.3, poles=((1.5, 0.7), (3.0, 1.2)))
    frac = f.to_fraction()
    lam = np.array([-3.0, 0.0, 2.2, 4.5, 10.0])
    np.testing.assert_allclose(frac.up_at(lam) / frac.down_at(lam), f.evaluate(lam), rtol=1e-12)
    np.testing.assert_allclose(frac.wronskian_at(lam), f.derivative_value(lam) * frac.down_at(lam) ** 2, rtol=1e-10)


def test_coeff_vector_examples():
    """Test coefficient vector recovery examples"""
    f = from_coeff_vector(1, [2.0, 6.0])
    assert f.h0 == pytest.approx(0.5)
    assert f.h == pytest.approx(3.0)

    g = from_coeff_vector(0, [-1.5])
    assert g.index() == 0
    assert g.h == pytest.approx(-1.5)
    assert np.linalg.norm(g.coeff_vector()) == pytest.approx(1.5)

    assert RationalHN.infinity().coeff_vector().size == 0
    assert from_coeff_vector(-1, []).is_infinite


def test_coeff_vector_round_trip():
    """Test randomized round trips through c(f) for indices up to 5"""
    rng = np.random.default_rng(7)
    for _ in range(100):
        M = int(rng.integers(0, 6))
        f = random_hn(rng, M)
        g = from_coeff_vector(M, f.coeff_vector())
        assert g.index() == M
        assert g.h0 == pytest.approx(f.h0, abs=1e-8)
        assert g.h == pytest.approx(f.h, abs=1e-8)
        np.testing.assert_allclose(g.pole_locations, f.pole_locations, atol=1e-8)
        np.testing.assert_allclose(g.residues, f.residues, atol=1e-8)


def test_from_fraction_rejects_complex_roots():
    """Test recovery refuses denominators without real roots"""
    with pytest.raises(InvalidCoefficients):
        from_fraction([0.0, 0.0, 1.0], [1.0, 0.0, 1.0], 4)


def test_rational_set_examples():
    """Test membership in R_(M,Q,delta)"""
    assert in_rational_set(RationalHN.constant(0.5), 0, 1.0, 0.1)
    assert not in_rational_set(RationalHN(poles=((0.5, 1.0),)), 2, 10.0, 0.1)
    assert in_rational_set(RationalHN.infinity(), -1, 1.0, 5.0)
    assert rational_set_violations(RationalHN.constant(1.0), 1, 2.0, 0.5) == ["index 0 differs from 1"]


def test_set_parameters():
    """Test the tightest set parameters of a function"""
    f = RationalHN(h0=0.8, h=-1.2, poles=((1.5, 0.6), (3.0, 2.0)))
    Q, delta = set_parameters(f)
    assert Q == pytest.approx(3.0)
    assert delta == pytest.approx(0.6)
    assert in_rational_set(f, 5, Q, delta)
    assert set_parameters(RationalHN(poles=((0.5, 1.0),))) is None


def test_theta_examples():
    """Test the three closed-form theta transforms"""
    g = theta_transform(0.0, 0.0, 0.0, RationalHN.linear(1.0))
    assert g.index() == 0
    assert g.h == pytest.approx(-1.0)

    g = theta_transform(0.0, 1.0, 0.0, RationalHN.constant(0.0))
    assert g.index() == 1
    assert g.h0 == pytest.approx(1.0)
    assert g.h == pytest.approx(0.0, abs=1e-14)

    g = theta_transform(-3.0, 2.0, 0.7, RationalHN.infinity())
    assert g.index() == 0
    assert g.h == 0.7


def test_theta_domain_errors():
    """Test theta preconditions"""
    f = RationalHN(poles=((2.0, 1.0),))
    with pytest.raises(DomainViolation):
        theta_transform(2.5, 10.0, 0.0, f)
    with pytest.raises(DomainViolation):
        theta_transform(0.0, f.evaluate(0.0) - 1.0, 0.0, f)
    with pytest.raises(DivisionRemainder):
        theta_transform(0.0, f.evaluate(0.0) + 0.5, 0.0, f, ThetaCase.EQUAL)


def test_theta_pointwise_consistency():
    """Test f_hat = (mu - lam)/(f - tau) + rho on randomized admissible inputs"""
    rng = np.random.default_rng(2024)
    sample = np.linspace(-12.0, 15.0, 50) + 0.0123
    checked = 0
    for case_id in range(200):
        M = int(rng.integers(0, 6))
        f = random_hn(rng, M)
        top = min(f.first_pole(), 3.0)
        mu = top - rng.uniform(0.5, 3.0)
        equal = case_id % 2 == 0
        tau = f.evaluate(mu) + (0.0 if equal else rng.uniform(0.2, 3.0))
        rho = rng.uniform(-2.0, 2.0)

        g = theta_transform(mu, tau, rho, f, ThetaCase.EQUAL if equal else ThetaCase.GREATER)
        assert g.index() == M + (-1 if equal else 1)
        if g.is_infinite:
            continue

        bad = np.concatenate([f.pole_locations, g.pole_locations, [mu]])
        lam = sample[np.min(np.abs(sample[:, None] - bad[None, :]), axis=1) > 1e-2]
        expected = (mu - lam) / (f.evaluate(lam) - tau) + rho
        actual = g.evaluate(lam)
        assert np.all(np.abs(actual - expected) <= 1e-9 * (1.0 + np.abs(actual)))
        checked += 1
    assert checked > 150


def test_serialization():
    """Test dict forms used by problem files"""
    f = RationalHN(h0=0.5, h=1.0, poles=((2.0, 0.25),))
    assert RationalHN.from_dict(f.to_dict()) == f
    assert RationalHN.from_dict("infinity").is_infinite
    assert RationalHN.from_dict(1.5) == RationalHN.constant(1.5)
    with pytest.raises(InvalidCoefficients):
        RationalHN.from_dict({"h": 1.0, "slope": 2.0})
