import numpy as np
import pytest

from slpencil.config import InverseConfig
from slpencil.direct_solver import Problem, SpectralData, spectral_data
from slpencil.exceptions import CharacterizationViolation, DomainError, IllPosed, OddParity
from slpencil.function_space import MeanZeroFunction
from slpencil.hn_rational import RationalHN
from slpencil.inverse_solver import (
    DirichletBaseSolver,
    InverseSolver,
    check_characterization,
    dirichlet_inverse,
    finite_config,
    finite_data_inverse,
    inverse,
    perturb_pairs,
)
from slpencil.stability_metrics import d_alpha


def dirichlet_data(count):
    n = np.arange(1, count + 1)
    return SpectralData(-1, -1, n**2.0, np.pi / (2.0 * n**2))


def neumann_data(count):
    n = np.arange(1, count + 1)
    gam = np.full(count, np.pi / 2)
    gam[0] = np.pi
    return SpectralData(0, 0, (n - 1.0) ** 2, gam)


def test_dirichlet_data_gives_zero_potential(fast_inverse_config):
    """Test that lambda_n = n^2, gamma_n = pi/(2 n^2) inverts to sigma = 0"""
    problem = dirichlet_inverse(dirichlet_data(12), fast_inverse_config)
    assert problem.indices == (-1, -1)
    assert problem.sigma.sup_norm() < 1e-5


def test_base_case_recovers_cosine_potential(fast_inverse_config):
    """Test the Gauss-Newton fit on data of a potential inside the basis span"""
    sigma = MeanZeroFunction.from_expression("0.3*cos(2*x)")
    exact = Problem(sigma, RationalHN.infinity(), RationalHN.infinity())
    data = spectral_data(exact, 12)
    problem, report = DirichletBaseSolver(fast_inverse_config).solve(data)
    assert report.base_converged
    assert report.base_iterations >= 1
    assert np.max(np.abs(problem.sigma.values - sigma.values)) < 1e-4


def test_base_case_preconditions(fast_inverse_config):
    """Test that the base case needs Dirichlet data and enough pairs"""
    base = DirichletBaseSolver(fast_inverse_config)
    with pytest.raises(DomainError):
        base.solve(neumann_data(12))
    with pytest.raises(IllPosed):
        base.solve(dirichlet_data(9))

    plain = InverseConfig(n_data=12, base_K=6, edge_terms=False)
    problem, _ = DirichletBaseSolver(plain).solve(dirichlet_data(8))
    assert problem.sigma.sup_norm() < 1e-5

    with pytest.raises(ValueError):
        InverseConfig(n_data=9, base_K=6)
    assert InverseConfig(n_data=8, base_K=6, edge_terms=False).n_basis == 6


def test_neumann_data_reduces_through_one_level(fast_inverse_config):
    """Test reconstruction of the Neumann problem by one T+ level"""
    solver = InverseSolver(fast_inverse_config)
    problem = solver.solve(neumann_data(solver.required_pairs(0, 0)))

    assert problem.indices == (0, 0)
    assert problem.sigma.sup_norm() < 1e-5
    assert problem.f.h == pytest.approx(0.0, abs=1e-5)
    assert problem.F.h == pytest.approx(0.0, abs=1e-5)

    report = solver.report
    assert report.t_plus_levels == 1
    assert report.swap_levels == 0
    assert report.levels[0].popped[0] == 0.0
    assert report.levels[0].popped[1] == pytest.approx(np.pi)
    assert report.data_mismatch < 1e-5
    assert report.to_dict()["levels"][0]["kind"] == "T+"


def test_odd_parity_rejected():
    """Test that data with odd M + N cannot be inverted"""
    data = SpectralData(0, -1, [0.25, 2.25, 6.25], [1.0, 1.0, 1.0])
    with pytest.raises(OddParity):
        inverse(data)


def test_characterization_rejects_unbounded_remainders():
    """Test that eigenvalues far from the asymptotics are refused"""
    n = np.arange(1, 17)
    shifted = SpectralData(-1, -1, (n + 3.0) ** 2, np.pi / (2.0 * n**2))
    with pytest.raises(CharacterizationViolation):
        check_characterization(shifted)
    check_characterization(dirichlet_data(16))


def test_required_pairs(fast_inverse_config):
    """Test the data budget at each index pair"""
    solver = InverseSolver(fast_inverse_config)
    assert solver.required_pairs(-1, -1) == 12
    assert solver.required_pairs(0, 0) == 13
    assert solver.required_pairs(1, 1) == 14
    assert solver.required_pairs(0, 2) == 14


def test_prepare_completes_or_truncates(fast_inverse_config):
    """Test completion of short data and truncation of long data"""
    solver = InverseSolver(fast_inverse_config)
    short = solver.prepare(dirichlet_data(4))
    assert len(short) == 12
    np.testing.assert_allclose(short.eigenvalues[:4], [1.0, 4.0, 9.0, 16.0])
    np.testing.assert_allclose(short.eigenvalues[4:], np.arange(5, 13) ** 2.0)
    assert len(solver.prepare(dirichlet_data(30))) == 12


def test_finite_config():
    """Test that n_data grows to the number of supplied pairs"""
    config = InverseConfig(n_data=12, base_K=6)
    assert finite_config(config, 20).n_data == 20
    assert finite_config(config, 4) is config
    assert finite_config(None, 40).n_data == 40


def test_perturb_pairs():
    """Test the absolute uniform noise model"""
    lam = np.array([1.0, 4.0, 9.0])
    gam = np.array([1.0, 0.5, 0.25])
    noisy_lam, noisy_gam = perturb_pairs(lam, gam, 1e-3, np.random.default_rng(3))
    assert np.all(np.abs(noisy_lam - lam) <= 1e-3)
    assert np.all(np.abs(noisy_gam - gam) <= 1e-3)
    again = perturb_pairs(lam, gam, 1e-3, np.random.default_rng(3))
    np.testing.assert_array_equal(again[0], noisy_lam)
    same = perturb_pairs(lam, gam, 0.0, np.random.default_rng(3))
    np.testing.assert_array_equal(same[0], lam)


def test_perturb_pairs_admissible():
    """Test redraws that keep small norming constants positive within eps"""
    data = dirichlet_data(16)
    eps = 1e-2
    for seed in range(50):
        lam, gam = perturb_pairs(data.eigenvalues, data.norming, eps, np.random.default_rng(seed), admissible=True)
        assert np.all(gam > 0)
        assert np.all(np.diff(lam) > 0)
        assert np.all(np.abs(lam - data.eigenvalues) <= eps)
        assert np.all(np.abs(gam - data.norming) <= eps)

    raw = [perturb_pairs(data.eigenvalues, data.norming, eps, np.random.default_rng(s))[1] for s in range(50)]
    assert any(np.any(g <= 0) for g in raw)

    with pytest.raises(CharacterizationViolation):
        perturb_pairs([1.0, 4.0], [1.0, -5.0], 1.0, np.random.default_rng(0), admissible=True, max_draws=20)


def test_finite_data_inverse_of_dirichlet_head(fast_inverse_config):
    """Test that a short exact Dirichlet head completes to zero potential"""
    data = dirichlet_data(4)
    problem = finite_data_inverse(data.eigenvalues, data.norming, -1, -1, fast_inverse_config)
    assert problem.sigma.sup_norm() < 1e-5


@pytest.mark.slow
@pytest.mark.parametrize("name", ["corpus_00", "corpus_11", "corpus_02", "corpus_m11"])
def test_corpus_round_trip(corpus, name):
    """Test inverse(direct(P)) against P across index pairs"""
    problem = corpus[name]
    config = InverseConfig()
    data = spectral_data(problem, InverseSolver(config).required_pairs(*problem.indices))
    restored = inverse(data, config)
    assert restored.indices == problem.indices
    assert d_alpha(restored, problem, 0.0) <= 1e-3
