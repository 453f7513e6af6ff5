import numpy as np
import pandas as pd
import pytest

from slpencil.config import InverseConfig, SolverConfig, StudyConfig
from slpencil.direct_solver import SpectralData
from slpencil.exceptions import DomainError
from slpencil.experiments import STUDY_COLUMNS, StudyResult, finite_data_study
from slpencil.problem_io import load_problem


def synthetic_result():
    rows = []
    for m in (4, 8, 16, 32):
        rows.append({"m": m, "eps": 0.0, "seed": 0, "d_alpha1": 0.3 * m**-0.3, "rho_alpha1": 0.0, "data_mismatch": 0.0, "base_iterations": 3})
    for eps in (1e-4, 1e-3, 1e-2):
        rows.append({"m": 8, "eps": eps, "seed": 1, "d_alpha1": 5.0 * eps**0.5, "rho_alpha1": eps, "data_mismatch": 0.0, "base_iterations": 3})
    return StudyResult(pd.DataFrame(rows, columns=STUDY_COLUMNS), 0.1, 0.4)


def test_study_result_slopes():
    """Test the log-log slope and noise exponent on synthetic rows"""
    result = synthetic_result()
    assert result.theoretical_slope == pytest.approx(-0.3)
    assert result.convergence_slope() == pytest.approx(-0.3, abs=1e-10)
    assert result.noise_exponent() == pytest.approx(0.5, abs=1e-10)
    assert result.noise_exponent(m=4) is None
    assert result.decreasing_in_m()

    summary = result.summary()
    assert summary["cells"] == 7
    assert summary["loglog_slope"] == pytest.approx(-0.3, abs=1e-10)


def test_study_result_degenerate():
    """Test helpers with too few cells"""
    rows = pd.DataFrame([{"m": 4, "eps": 0.0, "seed": 0, "d_alpha1": 0.1, "rho_alpha1": 0.0, "data_mismatch": 0.0, "base_iterations": 1}], columns=STUDY_COLUMNS)
    result = StudyResult(rows, 0.1, 0.4)
    assert result.convergence_slope() is None
    assert result.noise_exponent() is None
    assert result.decreasing_in_m()


def test_study_result_csv(tmp_path):
    """Test the study table written to CSV"""
    path = tmp_path / "study.csv"
    synthetic_result().to_csv(path)
    frame = pd.read_csv(path)
    assert list(frame.columns) == STUDY_COLUMNS
    assert frame.shape[0] == 7


def test_study_rejects_odd_parity(problem_dir):
    """Test that odd M + N problems cannot be studied"""
    with pytest.raises(DomainError):
        finite_data_study(load_problem(problem_dir / "robin.yaml", 512))


def test_study_rejects_short_data(dirichlet_zero):
    """Test supplied data shorter than the largest m"""
    data = SpectralData(-1, -1, [1.0, 4.0], [np.pi / 2, np.pi / 8])
    with pytest.raises(DomainError):
        finite_data_study(dirichlet_zero, StudyConfig(m_values=[4]), data=data)


def test_study_on_dirichlet_zero(problem_dir, fast_inverse_config):
    """Test that exact Dirichlet heads reconstruct the zero potential for every m"""
    problem = load_problem(problem_dir / "dirichlet_zero.yaml", 512)
    study = StudyConfig(m_values=[4, 8], eps_values=[0.0], seed=3)
    result = finite_data_study(problem, study, fast_inverse_config, SolverConfig(grid_size=512))
    assert list(result.rows["m"]) == [4, 8]
    assert np.all(result.rows["d_alpha1"] < 1e-5)
    assert np.all(result.rows["rho_alpha1"] == 0.0)


def test_study_noise_is_reproducible(problem_dir, fast_inverse_config):
    """Test that noisy cells depend only on the study seed"""
    problem = load_problem(problem_dir / "dirichlet_zero.yaml", 512)
    study = StudyConfig(m_values=[4], eps_values=[1e-3], seed=5)
    first = finite_data_study(problem, study, fast_inverse_config, SolverConfig(grid_size=512))
    second = finite_data_study(problem, study, fast_inverse_config, SolverConfig(grid_size=512))
    pd.testing.assert_frame_equal(first.rows, second.rows)
    assert first.rows["rho_alpha1"].iloc[0] > 0


def test_study_result_eps_trend():
    """Test the monotonicity and linearity helpers along eps"""
    result = synthetic_result()
    assert result.noise_linearity(8) == pytest.approx(10**-0.5, rel=1e-10)
    assert result.noise_linearity(4) is None
    # the eps = 0 cell at m = 8 comes from the m-sweep and sits above the noisy cells
    assert not result.nondecreasing_in_eps(8)

    rows = pd.DataFrame(
        {"m": 16, "eps": [0.0, 1e-4, 1e-3, 1e-2], "seed": 0, "d_alpha1": [1e-3, 0.99e-3, 2e-3, 2e-2],
         "rho_alpha1": 0.0, "data_mismatch": 0.0, "base_iterations": 1},
        columns=STUDY_COLUMNS,
    )
    trend = StudyResult(rows, 0.1, 0.4)
    assert not trend.nondecreasing_in_eps(16)
    assert trend.nondecreasing_in_eps(16, rtol=0.05)
    assert trend.noise_linearity(16) == pytest.approx(1.0)


def test_study_skips_failed_cells():
    """Test that skipped cells are ignored by the trend helpers"""
    rows = pd.DataFrame(
        {"m": [4, 8, 16], "eps": 0.0, "seed": 0, "d_alpha1": [0.2, np.nan, 0.1],
         "rho_alpha1": 0.0, "data_mismatch": 0.0, "base_iterations": [2, 0, 2],
         "note": ["", "BaseCaseNoConvergence: stalled", ""]},
        columns=STUDY_COLUMNS,
    )
    result = StudyResult(rows, 0.1, 0.4)
    assert result.decreasing_in_m()
    assert result.summary()["skipped"] == 1
    assert result.convergence_slope() == pytest.approx(np.log(0.5) / np.log(4.0))


def test_noisy_study_with_small_norming_constants(problem_dir, fast_inverse_config):
    """Test eps = 1e-2 on Dirichlet data whose later norming constants are below eps"""
    problem = load_problem(problem_dir / "dirichlet_zero.yaml", 512)
    study = StudyConfig(m_values=[16], eps_values=[1e-2], seed=5)
    result = finite_data_study(problem, study, fast_inverse_config, SolverConfig(grid_size=512))
    row = result.rows.iloc[0]
    assert row["note"] == ""
    assert np.isfinite(row["d_alpha1"]) and row["d_alpha1"] > 0
    assert row["rho_alpha1"] > 0


@pytest.mark.slow
@pytest.mark.parametrize("name", ["corpus_00", "corpus_11", "corpus_02", "corpus_m11", "corpus_20"])
def test_study_convergence_on_corpus(corpus, name):
    """Test that noise-free reconstructions improve as m grows"""
    study = StudyConfig(m_values=[4, 8, 16, 32], eps_values=[0.0], alpha1=0.1, alpha2=0.4)
    result = finite_data_study(corpus[name], study, InverseConfig())
    assert result.rows["d_alpha1"].notna().all()
    assert result.decreasing_in_m()
    assert result.convergence_slope() <= -0.15


@pytest.mark.slow
@pytest.mark.parametrize("name", ["corpus_00", "corpus_m11"])
def test_study_noise_trend_on_corpus(corpus, name):
    """Test that d_alpha1 grows with eps at m = 16, about linearly at the top"""
    study = StudyConfig(m_values=[16], eps_values=[0.0, 1e-4, 1e-3, 1e-2], seed=11)
    result = finite_data_study(corpus[name], study, InverseConfig())
    assert result.rows["d_alpha1"].notna().all()
    assert result.nondecreasing_in_eps(16, rtol=0.05)
    assert 0.1 <= result.noise_linearity(16) <= 10.0
