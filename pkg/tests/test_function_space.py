import numpy as np
import pytest

from slpencil.exceptions import AliasRisk, DomainError
from slpencil.function_space import (
    GridFunction,
    MeanZeroFunction,
    WeightedSequence,
    l2_alpha_norm,
    mean_zero_project,
    parse_expression,
    resample,
    sine_coefficients,
    sobolev_norm,
    sobolev_norm_with_tail,
    sobolev_tail_estimate,
    uniform_grid,
)


def grid_function(fn, G=2048):
    return GridFunction(fn(uniform_grid(G)))


def test_sine_coefficients_examples():
    """Test sine coefficients of sin x, cos x and zero"""
    u = sine_coefficients(grid_function(np.sin), 16)
    assert u[0] == pytest.approx(1.0, abs=1e-10)
    np.testing.assert_allclose(u[1:], 0.0, atol=1e-10)

    c = sine_coefficients(grid_function(np.cos), 16)
    k = np.arange(1, 17)
    expected = np.where(k % 2 == 0, (2 / np.pi) * 2 * k / (k**2 - 1.0), 0.0)
    np.testing.assert_allclose(c, expected, atol=1e-9)
    assert c[1] == pytest.approx(8 / (3 * np.pi), abs=1e-10)

    np.testing.assert_array_equal(sine_coefficients(MeanZeroFunction.zero(64), 8), np.zeros(8))


def test_alias_guard():
    """Test that K above G/4 is refused"""
    with pytest.raises(AliasRisk):
        sine_coefficients(MeanZeroFunction.zero(64), 17)


def test_sobolev_norm_examples():
    """Test W2^alpha norms of single modes and zero"""
    for alpha in (0.0, 0.1, 0.25, 0.45):
        assert sobolev_norm(grid_function(np.sin), alpha) == pytest.approx(1.0, abs=1e-8)
    assert sobolev_norm(grid_function(lambda x: np.sin(2 * x)), 0.25) == pytest.approx(2**0.25, abs=1e-8)
    assert sobolev_norm(MeanZeroFunction.zero(), 0.25) == 0.0


def test_sobolev_norm_rejects_alpha():
    """Test alpha outside [0, 1/2)"""
    with pytest.raises(DomainError):
        sobolev_norm(MeanZeroFunction.zero(64), 0.5)
    with pytest.raises(DomainError):
        sobolev_norm(MeanZeroFunction.zero(64), -0.1)


def test_sobolev_norm_monotone_in_alpha():
    """Test that the norm grows with alpha"""
    u = MeanZeroFunction.from_expression("0.3*cos(x) - 0.2*cos(3*x) + x^2/10")
    norms = [sobolev_norm(u, a) for a in (0.0, 0.1, 0.2, 0.3, 0.4)]
    assert np.all(np.diff(norms) >= 0)


def test_parseval():
    """Test sum of squared coefficients against (2/pi) int u^2"""
    u = grid_function(lambda x: np.sin(x) + 0.5 * np.sin(3 * x) - 0.2 * np.sin(7 * x))
    coefficients = sine_coefficients(u, 256)
    energy = (2 / np.pi) * GridFunction(u.values**2).integral()
    assert np.sum(coefficients**2) == pytest.approx(energy, rel=1e-6)


def test_l2_alpha_norm_examples():
    """Test weighted sequence norms"""
    assert l2_alpha_norm(WeightedSequence([1.0, 0.0, 0.0], 0.3)) == 1.0
    assert l2_alpha_norm(WeightedSequence([0.0, 1.0], 0.5)) == pytest.approx(np.sqrt(2))
    n = np.arange(1, 100001)
    assert WeightedSequence(1.0 / n).norm() == pytest.approx(np.pi / np.sqrt(6), abs=1e-4)


def test_mean_zero_project_examples():
    """Test projection of constants, cos x and x"""
    x = uniform_grid(2048)
    np.testing.assert_allclose(mean_zero_project(np.full_like(x, 5.0)).values, 0.0, atol=1e-12)
    np.testing.assert_allclose(mean_zero_project(np.cos(x)).values, np.cos(x), atol=1e-12)
    np.testing.assert_allclose(mean_zero_project(x).values, x - np.pi / 2, atol=1e-12)


def test_mean_zero_invariant():
    """Test that a function with nonzero mean is refused"""
    with pytest.raises(DomainError):
        MeanZeroFunction(np.ones(65))
    with pytest.raises(DomainError):
        GridFunction(np.ones(64))


def test_arithmetic_stays_mean_zero():
    """Test sums, differences and scaling of mean-zero functions"""
    u = MeanZeroFunction.from_expression("cos(x)")
    v = MeanZeroFunction.from_expression("cos(2*x)", grid_size=1024)
    w = u + v
    assert isinstance(w, MeanZeroFunction)
    assert w.grid_size == u.grid_size
    assert abs((u - u).sup_norm()) == 0.0
    assert (-u).values[0] == pytest.approx(-1.0)
    assert u.scaled(2.0).values[0] == pytest.approx(2.0)


def test_resample_preserves_smooth_function():
    """Test cubic-spline resampling between grids"""
    u = MeanZeroFunction.from_expression("cos(x) + 0.5*cos(2*x)", grid_size=512)
    v = resample(u, 2048)
    exact = np.cos(v.x) + 0.5 * np.cos(2 * v.x)
    assert np.max(np.abs(v.values - exact)) < 1e-8


def test_expression_whitelist():
    """Test that only x, pi, sin and cos are accepted"""
    fn = parse_expression("sin(pi*x/2)^2 - 0.5")
    x = np.array([0.0, 1.0])
    np.testing.assert_allclose(fn(x), np.sin(np.pi * x / 2) ** 2 - 0.5)
    for bad in ["exp(x)", "__import__('os')", "x; y", "", "y + 1"]:
        with pytest.raises(DomainError):
            parse_expression(bad)


def test_tail_estimate_small_for_smooth_functions():
    """Test the tail estimate of a rapidly decaying sequence"""
    k = np.arange(1, 257)
    coefficients = 1.0 / k**3
    tail = sobolev_tail_estimate(coefficients, 0.25)
    assert 0 < tail < 1e-5
    assert sobolev_tail_estimate(1.0 / np.sqrt(k), 0.25) == np.inf


def test_sobolev_truncation_follows_tail():
    """Test that K stays at the default for a single mode and grows for 1/k decay"""
    head, tail, K = sobolev_norm_with_tail(grid_function(lambda x: np.sin(2 * x)), 0.25)
    assert K == 256
    assert tail == 0.0
    assert head == pytest.approx(2**0.25, abs=1e-8)

    ramp = grid_function(lambda x: x - np.pi / 2)
    head, tail, K = sobolev_norm_with_tail(ramp, 0.25)
    assert K == 512
    assert np.isfinite(tail) and tail > 1e-6 * head
    assert sobolev_norm(ramp, 0.25) == head

    assert sobolev_norm_with_tail(ramp, 0.25, K=32)[2] == 32


def test_w11_norm_examples():
    """Test the L1 + L1-of-derivative norm of sin x and a constant"""
    assert grid_function(np.sin).w11_norm() == pytest.approx(4.0, rel=1e-6)
    assert grid_function(lambda x: np.full_like(x, 0.5)).w11_norm() == pytest.approx(np.pi / 2, rel=1e-9)


def test_sobolev_embedding_constant(corpus):
    """Test one constant bounding the W2^alpha norm by the W1^1 norm across the corpus"""
    ratios = []
    for problem in corpus.values():
        sigma = problem.sigma
        for alpha in (0.0, 0.1, 0.25, 0.45):
            ratios.append(sobolev_norm(sigma, alpha) / sigma.w11_norm())
    assert min(ratios) > 0
    assert max(ratios) <= 2.0
