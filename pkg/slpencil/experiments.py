"""
Finite-data approximation studies.

For a fixed problem, the first m spectral pairs (optionally perturbed by
uniform noise of size eps) are completed with the unperturbed asymptotic
tail and inverted; the distance d_alpha1 to the true problem is recorded
for every (m, eps) cell.
"""

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence

import numpy as np
import pandas as pd
from tqdm import tqdm

from .config import InverseConfig, SolverConfig, StudyConfig
from .direct_solver import Problem, SpectralData, SturmLiouvilleSolver, complete_finite_data
from .exceptions import CharacterizationViolation, ConvergenceError, DomainError
from .inverse_solver import InverseSolver, finite_config, perturb_pairs
from .stability_metrics import d_alpha, pair_seeds, rho_alpha

logger = logging.getLogger(__name__)

STUDY_COLUMNS = ["m", "eps", "seed", "d_alpha1", "rho_alpha1", "data_mismatch", "base_iterations", "note"]


@dataclass
class StudyResult:
    rows: pd.DataFrame
    alpha1: float
    alpha2: float

    @property
    def theoretical_slope(self) -> float:
        return self.alpha1 - self.alpha2

    def exact_rows(self) -> pd.DataFrame:
        return self.rows[self.rows["eps"] == 0.0].sort_values("m")

    def convergence_slope(self) -> Optional[float]:
        """Least-squares slope of log d_alpha1 against log m over the noise-free cells."""
        exact = self.exact_rows()
        exact = exact[exact["d_alpha1"] > 0]
        if exact["m"].nunique() < 2:
            return None
        slope, _ = np.polyfit(np.log(exact["m"]), np.log(exact["d_alpha1"]), 1)
        return float(slope)

    def noise_exponent(self, m: Optional[int] = None) -> Optional[float]:
        """Slope of log d_alpha1 against log eps at fixed m, over eps > 0."""
        noisy = self.rows[(self.rows["eps"] > 0) & (self.rows["d_alpha1"] > 0)]
        if m is None and len(noisy):
            counts = noisy.groupby("m")["eps"].nunique()
            m = int(counts.idxmax())
        noisy = noisy[noisy["m"] == m]
        if noisy["eps"].nunique() < 2:
            return None
        slope, _ = np.polyfit(np.log(noisy["eps"]), np.log(noisy["d_alpha1"]), 1)
        return float(slope)

    def decreasing_in_m(self) -> bool:
        d = self.exact_rows()["d_alpha1"].dropna().to_numpy()
        return bool(len(d) < 2 or np.all(np.diff(d) < 0))

    def eps_rows(self, m: int) -> pd.DataFrame:
        return self.rows[self.rows["m"] == m].sort_values("eps")

    def nondecreasing_in_eps(self, m: int, rtol: float = 0.0) -> bool:
        d = self.eps_rows(m)["d_alpha1"].dropna().to_numpy()
        return bool(np.all(d[1:] >= (1.0 - rtol) * d[:-1]))

    def noise_linearity(self, m: int) -> Optional[float]:
        """Growth of d_alpha1 over the last two eps values divided by the growth of eps; 1 is linear."""
        noisy = self.eps_rows(m)
        noisy = noisy[(noisy["eps"] > 0) & (noisy["d_alpha1"] > 0)]
        if len(noisy) < 2:
            return None
        (e0, d0), (e1, d1) = noisy[["eps", "d_alpha1"]].to_numpy()[-2:]
        return float((d1 / d0) / (e1 / e0))

    def summary(self) -> Dict[str, object]:
        return {
            "alpha1": self.alpha1,
            "alpha2": self.alpha2,
            "cells": int(len(self.rows)),
            "skipped": int(self.rows["d_alpha1"].isna().sum()),
            "loglog_slope": self.convergence_slope(),
            "theoretical_slope": self.theoretical_slope,
            "noise_exponent": self.noise_exponent(),
            "decreasing_in_m": self.decreasing_in_m(),
        }

    def to_csv(self, path) -> None:
        self.rows.to_csv(path, index=False, float_format="%.17g")


def _study_cell(args) -> dict:
    problem, data, m, eps, cell_seed, alpha1, inverse_config, solver_config = args
    row = {"m": m, "eps": eps, "seed": cell_seed, "note": ""}
    lam, gam = data.eigenvalues[:m], data.norming[:m]
    try:
        if eps > 0:
            lam, gam = perturb_pairs(lam, gam, eps, np.random.default_rng(cell_seed), admissible=True)
        solver = InverseSolver(finite_config(inverse_config, m), solver_config)
        completed = complete_finite_data(lam, gam, data.M, data.N, solver.required_pairs(data.M, data.N))
        recovered = solver.solve(completed)
    except (CharacterizationViolation, ConvergenceError) as e:
        logger.warning(f"Skipping cell m={m}, eps={eps:g}: {e}")
        row.update({"d_alpha1": np.nan, "rho_alpha1": np.nan, "data_mismatch": np.nan, "base_iterations": 0})
        row["note"] = f"{type(e).__name__}: {e}"
        return row

    exact = complete_finite_data(data.eigenvalues[:m], data.norming[:m], data.M, data.N, len(completed))
    row.update({
        "d_alpha1": d_alpha(problem, recovered, alpha1),
        "rho_alpha1": float(rho_alpha(exact, completed, alpha1, len(completed))),
        "data_mismatch": solver.report.data_mismatch,
        "base_iterations": solver.report.base_iterations,
    })
    return row


def finite_data_study(
    problem: Problem,
    study: Optional[StudyConfig] = None,
    inverse_config: Optional[InverseConfig] = None,
    solver_config: Optional[SolverConfig] = None,
    workers: int = 1,
    data: Optional[SpectralData] = None,
) -> StudyResult:
    """d_alpha1(P, P_m) over the configured m and eps grid."""
    study = study or StudyConfig()
    if (problem.M + problem.N) % 2:
        raise DomainError(f"finite-data study needs even M+N, got {problem.indices}")

    m_values: Sequence[int] = sorted(set(study.m_values))
    eps_values: Sequence[float] = sorted(set(study.eps_values))
    if data is None:
        data = SturmLiouvilleSolver(problem, solver_config).spectral_data(max(m_values))
    elif len(data) < max(m_values):
        raise DomainError(f"study needs {max(m_values)} pairs, data has {len(data)}")

    cells = [(m, eps) for m in m_values for eps in eps_values]
    seeds = pair_seeds(study.seed, len(cells))
    jobs = [
        (problem, data, m, eps, s, study.alpha1, inverse_config, solver_config)
        for (m, eps), s in zip(cells, seeds)
    ]
    logger.info(f"Finite-data study: m={list(m_values)}, eps={list(eps_values)}, {len(jobs)} cells")

    rows: List[dict] = []
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for row in tqdm(pool.map(_study_cell, jobs), total=len(jobs), desc="study cells"):
                rows.append(row)
    else:
        for job in tqdm(jobs, desc="study cells"):
            rows.append(_study_cell(job))
    for row in rows:
        logger.info(f"m={row['m']}, eps={row['eps']:g}: d_alpha1={row['d_alpha1']:.6e}")

    frame = pd.DataFrame(rows, columns=STUDY_COLUMNS).sort_values(["m", "eps"], ignore_index=True)
    result = StudyResult(frame, study.alpha1, study.alpha2)
    slope = result.convergence_slope()
    if slope is not None:
        logger.info(f"log-log slope {slope:.4f} (theoretical {result.theoretical_slope:.4f})")
    return result
