"""
Inverse spectral map: reconstruct (sigma, f, F) from spectral data.

The data are reduced to the Dirichlet case (M, N) = (-1, -1) level by level:

    M, N >= 0  pop (lambda_1, gamma_1), invert data_t_minus(S), then T+
    M == -1    invert data_t_plus_minus(S), then T-+
    N == -1    invert data_t_minus_plus(S), then T+-

The Dirichlet base case is a damped Gauss-Newton fit of a low-order
potential against the direct solver.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .config import InverseConfig, SolverConfig
from .darboux import (
    data_t_minus,
    data_t_minus_plus,
    data_t_plus_minus,
    t_minus_plus,
    t_plus,
    t_plus_minus,
)
from .direct_solver import (
    Problem,
    SpectralData,
    SturmLiouvilleSolver,
    complete_finite_data,
    signed_sqrt,
)
from .exceptions import (
    BaseCaseNoConvergence,
    CharacterizationViolation,
    ConvergenceError,
    DomainError,
    IllPosed,
    OddParity,
)
from .function_space import MeanZeroFunction, mean_zero_project, uniform_grid
from .hn_rational import RationalHN

logger = logging.getLogger(__name__)

ARMIJO_C1 = 1e-4
MAX_HALVINGS = 30
KAPPA_BOUND = 1.0


@dataclass
class LevelRecord:
    kind: str
    before: Tuple[int, int]
    after: Tuple[int, int]
    popped: Optional[Tuple[float, float]] = None


@dataclass
class InversionReport:
    levels: List[LevelRecord] = field(default_factory=list)
    base_iterations: int = 0
    base_residual: float = float("nan")
    base_converged: bool = False
    coefficients: List[float] = field(default_factory=list)
    data_mismatch: float = float("nan")

    @property
    def t_plus_levels(self) -> int:
        return sum(1 for level in self.levels if level.kind == "T+")

    @property
    def swap_levels(self) -> int:
        return sum(1 for level in self.levels if level.kind in ("T-+", "T+-"))

    def to_dict(self) -> dict:
        return {
            "levels": [
                {"kind": lv.kind, "before": list(lv.before), "after": list(lv.after), "popped": lv.popped}
                for lv in self.levels
            ],
            "base_iterations": self.base_iterations,
            "base_residual": self.base_residual,
            "base_converged": self.base_converged,
            "coefficients": list(self.coefficients),
            "data_mismatch": self.data_mismatch,
        }


def check_characterization(data: SpectralData) -> None:
    """Necessary conditions for data to be spectral data of some problem."""
    # monotone eigenvalues and positive norming constants hold by construction
    n = len(data)
    if n >= 4:
        tail = slice(3 * n // 4, n)
        worst = float(np.max(np.abs(data.kappa[tail])))
        if worst > KAPPA_BOUND:
            raise CharacterizationViolation(
                f"remainders kappa_n do not stay bounded (max |kappa| = {worst:.3g} over n > {3 * n // 4})"
            )


class DirichletBaseSolver:
    """Gauss-Newton fit of sigma to Dirichlet spectral data."""

    def __init__(
        self,
        config: Optional[InverseConfig] = None,
        solver_config: Optional[SolverConfig] = None,
    ):
        self.config = config or InverseConfig()
        self.solver_config = solver_config or SolverConfig()
        self.grid_size = self.solver_config.grid_size
        self.basis = self._build_basis()

    def _build_basis(self) -> np.ndarray:
        x = uniform_grid(self.grid_size)
        columns = [np.cos(k * x) for k in range(1, self.config.base_K + 1)]
        if self.config.edge_terms:
            # unit slope at one endpoint, zero slope at the other
            columns.append(-((np.pi - x) ** 2) / (2 * np.pi))
            columns.append(x**2 / (2 * np.pi))
        return np.array([mean_zero_project(c).values for c in columns])

    def sigma(self, coefficients: np.ndarray) -> MeanZeroFunction:
        return mean_zero_project(coefficients @ self.basis)

    def problem(self, coefficients: np.ndarray) -> Problem:
        return Problem(self.sigma(coefficients), RationalHN.infinity(), RationalHN.infinity())

    def forward(self, coefficients: np.ndarray, n: int, guesses: Optional[np.ndarray] = None):
        solver = SturmLiouvilleSolver(self.problem(coefficients), self.solver_config)
        lam = solver.eigenvalues(n, guesses=guesses)
        return lam, solver.norming_constants(lam)

    @staticmethod
    def residuals(lam, gam, target_lam, target_gam) -> np.ndarray:
        n = np.arange(1, len(target_lam) + 1)
        return np.concatenate([
            n * (signed_sqrt(lam) - signed_sqrt(target_lam)),
            n * (gam / target_gam - 1.0),
        ])

    def _jacobian(self, x: np.ndarray, lam: np.ndarray, target: SpectralData) -> np.ndarray:
        step = self.config.fd_step
        n = len(target)

        def column(j: int) -> np.ndarray:
            e = np.zeros_like(x)
            e[j] = step
            plus = self.residuals(*self.forward(x + e, n, guesses=lam), target.eigenvalues, target.norming)
            minus = self.residuals(*self.forward(x - e, n, guesses=lam), target.eigenvalues, target.norming)
            return (plus - minus) / (2 * step)

        indices = range(len(x))
        if self.config.workers > 1:
            with ThreadPoolExecutor(max_workers=self.config.workers) as pool:
                columns = list(pool.map(column, indices))
        else:
            columns = [column(j) for j in indices]
        return np.stack(columns, axis=1)

    def _evaluate(self, x: np.ndarray, target: SpectralData):
        lam, gam = self.forward(x, len(target))
        r = self.residuals(lam, gam, target.eigenvalues, target.norming)
        return lam, r

    def solve(self, data: SpectralData) -> Tuple[Problem, InversionReport]:
        if (data.M, data.N) != (-1, -1):
            raise DomainError(f"base case needs Dirichlet data, got ({data.M}, {data.N})")
        n_basis = self.config.n_basis
        data = data.head(min(len(data), self.config.n_data))
        if len(data) < n_basis + 2:
            raise IllPosed(f"{len(data)} pairs cannot determine {n_basis} basis coefficients")

        report = InversionReport()
        x = np.zeros(n_basis)
        lam, r = self._evaluate(x, data)
        value = float(r @ r)
        stationary = False

        for iteration in range(1, self.config.max_iter + 1):
            if np.sqrt(value) < self.config.base_tol:
                break
            J = self._jacobian(x, lam, data)
            p = np.linalg.lstsq(J, -r, rcond=None)[0]
            slope = 2.0 * float((J.T @ r) @ p)

            alpha = 1.0
            accepted = False
            for _ in range(MAX_HALVINGS):
                trial = x + alpha * p
                try:
                    trial_lam, trial_r = self._evaluate(trial, data)
                    trial_value = float(trial_r @ trial_r)
                except (ConvergenceError, DomainError) as e:
                    logger.debug(f"Trial step alpha={alpha:g} failed: {e}")
                    alpha *= 0.5
                    continue
                if trial_value <= value + ARMIJO_C1 * alpha * slope:
                    accepted = True
                    break
                alpha *= 0.5

            report.base_iterations = iteration
            if not accepted:
                stationary = True
                logger.info(f"Gauss-Newton line search stalled at iteration {iteration}")
                break

            decrease = value - trial_value
            x, lam, r, value = trial, trial_lam, trial_r, trial_value
            logger.info(f"Gauss-Newton iteration {iteration}: residual {np.sqrt(value):.3e} (step {alpha:g})")
            if decrease <= 1e-10 * (value + decrease) or np.linalg.norm(alpha * p) <= 1e-12 * (1.0 + np.linalg.norm(x)):
                stationary = True
                break

        residual = float(np.sqrt(value))
        report.base_residual = residual
        report.coefficients = x.tolist()
        report.base_converged = residual < self.config.base_tol
        if not report.base_converged:
            if not stationary:
                raise BaseCaseNoConvergence(
                    f"residual {residual:.3e} above {self.config.base_tol:g} after {self.config.max_iter} iterations"
                )
            logger.warning(
                f"Base case settled at a least-squares stationary point with residual {residual:.3e}"
            )
        return self.problem(x), report


class InverseSolver:
    """Reconstruct a problem from its spectral data by inductive reduction."""

    def __init__(
        self,
        config: Optional[InverseConfig] = None,
        solver_config: Optional[SolverConfig] = None,
    ):
        self.config = config or InverseConfig()
        self.solver_config = solver_config or SolverConfig()
        self.base = DirichletBaseSolver(self.config, self.solver_config)
        self.report = InversionReport()

    def required_pairs(self, M: int, N: int) -> int:
        return self.config.n_data + (M + N) // 2 + 1

    def prepare(self, data: SpectralData) -> SpectralData:
        if (data.M + data.N) % 2:
            raise OddParity(
                f"indices ({data.M}, {data.N}) have odd sum; transforms preserve the parity of M+N "
                "so no reduction to the Dirichlet case exists"
            )
        check_characterization(data)
        needed = self.required_pairs(data.M, data.N)
        if len(data) < needed:
            logger.info(f"Completing {len(data)} pairs with asymptotic values up to n={needed}")
            return complete_finite_data(data.eigenvalues, data.norming, data.M, data.N, needed)
        return data.head(needed)

    def solve(self, data: SpectralData) -> Problem:
        self.report = InversionReport()
        M, N = data.M, data.N
        prepared = self.prepare(data)
        problem = self._reduce(prepared)

        expected_pops = (M + N) // 2 + 1
        expected_swaps = abs(M - N) // 2
        if (self.report.t_plus_levels, self.report.swap_levels) != (expected_pops, expected_swaps):
            raise RuntimeError(
                f"reduction used {self.report.t_plus_levels} T+ and {self.report.swap_levels} swap levels, "
                f"expected {expected_pops} and {expected_swaps}"
            )

        self.report.data_mismatch = self._mismatch(problem, prepared)
        logger.info(
            f"Reconstructed ({M}, {N}) problem through {len(self.report.levels)} levels; "
            f"data mismatch {self.report.data_mismatch:.3e}"
        )
        return problem

    def _mismatch(self, problem: Problem, data: SpectralData) -> float:
        n = min(len(data), self.config.n_data)
        try:
            check = SturmLiouvilleSolver(problem, self.solver_config).spectral_data(n)
        except (ConvergenceError, DomainError) as e:
            logger.warning(f"Could not re-solve the reconstructed problem: {e}")
            return float("nan")
        lam_err = np.abs(check.eigenvalues - data.eigenvalues[:n]) / (1.0 + np.abs(data.eigenvalues[:n]))
        gam_err = np.abs(check.norming / data.norming[:n] - 1.0)
        return float(max(lam_err.max(), gam_err.max()))

    def _reduce(self, data: SpectralData) -> Problem:
        M, N = data.M, data.N
        if data.eigenvalues[0] < 1:
            logger.debug(f"Intermediate ({M}, {N}) data has lambda_1={data.eigenvalues[0]:.6g} < 1")

        if M == -1 and N == -1:
            problem, base_report = self.base.solve(data)
            self.report.base_iterations = base_report.base_iterations
            self.report.base_residual = base_report.base_residual
            self.report.base_converged = base_report.base_converged
            self.report.coefficients = base_report.coefficients
            return problem

        if M >= 0 and N >= 0:
            mu, nu = float(data.eigenvalues[0]), float(data.norming[0])
            reduced = self._reduce(data_t_minus(data))
            self.report.levels.append(LevelRecord("T+", reduced.indices, (M, N), (mu, nu)))
            return t_plus(mu, nu, reduced, self.solver_config)

        if M == -1:
            reduced = self._reduce(data_t_plus_minus(data))
            self.report.levels.append(LevelRecord("T-+", reduced.indices, (M, N)))
            return t_minus_plus(reduced, self.solver_config)

        reduced = self._reduce(data_t_minus_plus(data))
        self.report.levels.append(LevelRecord("T+-", reduced.indices, (M, N)))
        return t_plus_minus(reduced, self.solver_config)


def inverse(
    data: SpectralData,
    config: Optional[InverseConfig] = None,
    solver_config: Optional[SolverConfig] = None,
) -> Problem:
    return InverseSolver(config, solver_config).solve(data)


def dirichlet_inverse(
    data: SpectralData,
    config: Optional[InverseConfig] = None,
    solver_config: Optional[SolverConfig] = None,
) -> Problem:
    problem, _ = DirichletBaseSolver(config, solver_config).solve(data)
    return problem


def finite_config(config: Optional[InverseConfig], m: int) -> InverseConfig:
    config = config or InverseConfig()
    if m > config.n_data:
        config = config.model_copy(update={"n_data": m})
    return config


def finite_data_inverse(
    eigenvalues: Sequence[float],
    norming: Sequence[float],
    M: int,
    N: int,
    config: Optional[InverseConfig] = None,
    solver_config: Optional[SolverConfig] = None,
) -> Problem:
    """Invert m pairs completed by the unperturbed asymptotic tail."""
    m = len(eigenvalues)
    config = finite_config(config, m)
    solver = InverseSolver(config, solver_config)
    data = complete_finite_data(eigenvalues, norming, M, N, solver.required_pairs(M, N))
    return solver.solve(data)


def noisy_finite_data_inverse(
    eigenvalues: Sequence[float],
    norming: Sequence[float],
    M: int,
    N: int,
    config: Optional[InverseConfig] = None,
    solver_config: Optional[SolverConfig] = None,
) -> Problem:
    """Same completion and inversion applied to perturbed heads."""
    return finite_data_inverse(eigenvalues, norming, M, N, config, solver_config)


def perturb_pairs(
    eigenvalues: Sequence[float],
    norming: Sequence[float],
    eps: float,
    rng: np.random.Generator,
    admissible: bool = False,
    max_draws: int = 200,
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Independent uniform noise on [-eps, eps] for every datum.

    With admissible=True, entries that break strict increase of the
    eigenvalues or positivity of the norming constants are redrawn within
    the same interval until the perturbed heads can be completed.
    """
    lam = np.asarray(eigenvalues, dtype=float)
    gam = np.asarray(norming, dtype=float)
    noisy_lam = lam + rng.uniform(-eps, eps, size=lam.shape)
    noisy_gam = gam + rng.uniform(-eps, eps, size=gam.shape)
    if not admissible:
        return noisy_lam, noisy_gam

    for attempt in range(max_draws + 1):
        bad_gam = noisy_gam <= 0
        bad_lam = np.zeros(lam.shape, dtype=bool)
        crossed = np.diff(noisy_lam) <= 0
        bad_lam[:-1] |= crossed
        bad_lam[1:] |= crossed
        if not (bad_gam.any() or bad_lam.any()):
            return noisy_lam, noisy_gam
        if attempt == max_draws:
            break
        noisy_gam[bad_gam] = gam[bad_gam] + rng.uniform(-eps, eps, size=int(bad_gam.sum()))
        noisy_lam[bad_lam] = lam[bad_lam] + rng.uniform(-eps, eps, size=int(bad_lam.sum()))
    raise CharacterizationViolation(f"no admissible perturbation of size {eps:g} after {max_draws} draws")
