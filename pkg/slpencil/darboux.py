"""
Darboux-type transforms on problems and on spectral data.

darboux(P, level, v) maps (sigma, f, F) to

    sigma_hat = -sigma - 2 w/v + (2/pi) ln(v(pi)/v(0))
    f_hat     = Theta(level, -w(0)/v(0), -w(0)/v(0) + (2/pi) ln(v(pi)/v(0)), f)
    F_hat     = Theta(level,  w(pi)/v(pi), w(pi)/v(pi) - (2/pi) ln(v(pi)/v(0)), F)

for a nonvanishing solution v with quasi-derivative w.  The four
specializations remove or add the first eigenvalue, or move one unit of
index between the two boundary conditions; each has an exact counterpart
acting on spectral data.
"""

import logging
import re
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .config import SolverConfig
from .direct_solver import Problem, SolutionTrace, SpectralData, SturmLiouvilleSolver
from .exceptions import (
    DomainError,
    DomainViolation,
    SignInconsistency,
    VanishingEigenfunction,
    ZeroDenominator,
)
from .function_space import mean_zero_project
from .hn_rational import ThetaCase, theta_transform

logger = logging.getLogger(__name__)

VANISHING_TOL = 1e-10
MEAN_DRIFT_TOL = 1e-6
LEVEL_OFFSET = 2.0


def darboux(
    problem: Problem,
    level: float,
    v: SolutionTrace,
    f_case: Optional[ThetaCase] = None,
    F_case: Optional[ThetaCase] = None,
) -> Problem:
    """Transform `problem` with the nonvanishing solution `v` at `level`."""
    y, w = v.y, v.quasi
    if len(y) != problem.grid_size + 1:
        raise DomainError("transform solution must live on the problem grid")
    if not (np.all(y > 0) or np.all(y < 0)):
        raise VanishingEigenfunction(f"solution at level {level:.8g} changes sign on [0, pi]")
    if np.min(np.abs(y)) <= VANISHING_TOL * np.max(np.abs(y)):
        raise VanishingEigenfunction(f"solution at level {level:.8g} nearly vanishes")
    ratio = y[-1] / y[0]
    if ratio <= 0:
        raise SignInconsistency(f"v(pi)/v(0) = {ratio:.3e} is not positive")

    shift = (2.0 / np.pi) * np.log(ratio)
    raw = -problem.sigma.values - 2.0 * w / y + shift
    sigma_hat = mean_zero_project(raw)
    drift = float(np.max(np.abs(raw - sigma_hat.values)))
    if drift > MEAN_DRIFT_TOL * (1.0 + np.max(np.abs(raw))):
        logger.warning(f"Transformed potential drifted from mean zero by {drift:.3e}")

    tau_f = -w[0] / y[0]
    tau_F = w[-1] / y[-1]
    f_hat = theta_transform(level, tau_f, tau_f + shift, problem.f, f_case)
    F_hat = theta_transform(level, tau_F, tau_F - shift, problem.F, F_case)
    return Problem(sigma_hat, f_hat, F_hat)


def first_pair(problem: Problem, config: Optional[SolverConfig] = None) -> Tuple[float, float]:
    """(lambda_1, gamma_1) of a problem."""
    solver = SturmLiouvilleSolver(problem, config)
    lam1 = float(solver.eigenvalues(1)[0])
    return lam1, float(solver.norming_constants([lam1])[0])


def t_minus(problem: Problem, config: Optional[SolverConfig] = None) -> Problem:
    """Remove lambda_1; both indices drop by one."""
    if problem.M < 0 or problem.N < 0:
        raise DomainViolation(f"T- needs finite f and F, got indices {problem.indices}")
    solver = SturmLiouvilleSolver(problem, config)
    lam1 = float(solver.eigenvalues(1)[0])
    result = darboux(problem, lam1, solver.phi(lam1), ThetaCase.EQUAL, ThetaCase.EQUAL)
    logger.info(f"T- removed lambda_1={lam1:.10g}: {problem.indices} -> {result.indices}")
    return result


def t_minus_plus(problem: Problem, config: Optional[SolverConfig] = None) -> Problem:
    """Isospectral: index of f drops, index of F rises."""
    if problem.M < 0:
        raise DomainViolation(f"T-+ needs a finite f, got indices {problem.indices}")
    solver = SturmLiouvilleSolver(problem, config)
    level = float(solver.eigenvalues(1)[0]) - LEVEL_OFFSET
    result = darboux(problem, level, solver.phi(level), ThetaCase.EQUAL, ThetaCase.GREATER)
    logger.info(f"T-+ at level {level:.10g}: {problem.indices} -> {result.indices}")
    return result


def t_plus_minus(problem: Problem, config: Optional[SolverConfig] = None) -> Problem:
    """Isospectral: index of f rises, index of F drops."""
    if problem.N < 0:
        raise DomainViolation(f"T+- needs a finite F, got indices {problem.indices}")
    solver = SturmLiouvilleSolver(problem, config)
    level = float(solver.eigenvalues(1)[0]) - LEVEL_OFFSET
    result = darboux(problem, level, solver.psi(level), ThetaCase.GREATER, ThetaCase.EQUAL)
    logger.info(f"T+- at level {level:.10g}: {problem.indices} -> {result.indices}")
    return result


def t_plus(mu: float, nu: float, problem: Problem, config: Optional[SolverConfig] = None) -> Problem:
    """Add the eigenvalue mu with norming constant nu; both indices rise by one."""
    solver = SturmLiouvilleSolver(problem, config)
    lam1 = float(solver.eigenvalues(1)[0])
    if not mu < lam1:
        raise DomainViolation(f"T+ needs mu < lambda_1 = {lam1:.10g}, got mu={mu}")
    if not nu > 0:
        raise DomainViolation(f"T+ needs nu > 0, got {nu}")

    psi0, psi1 = solver.psi(mu).start
    if abs(psi0) <= VANISHING_TOL * (abs(psi0) + abs(psi1)):
        raise VanishingEigenfunction(f"psi(0, {mu:.8g}) vanishes")
    kappa = -psi1 / psi0

    up = float(solver.f_frac.up_at(mu))
    down = float(solver.f_frac.down_at(mu))
    cross = kappa * down - up
    numerator = nu * kappa + up * cross
    denominator = nu + down * cross
    if abs(denominator) <= 1e-14 * (abs(nu) + abs(down * cross)):
        raise ZeroDenominator(f"T+ parameter rho is undefined for (mu, nu)=({mu}, {nu})")
    rho = numerator / denominator

    result = darboux(problem, mu, solver.z(mu, rho), ThetaCase.GREATER, ThetaCase.GREATER)
    logger.info(f"T+ added (mu, nu)=({mu:.10g}, {nu:.10g}): {problem.indices} -> {result.indices}")
    return result


# Spectral-data counterparts


def data_t_minus(data: SpectralData) -> SpectralData:
    if data.M < 0 or data.N < 0:
        raise DomainViolation(f"T- data map needs M, N >= 0, got ({data.M}, {data.N})")
    if len(data) < 2:
        raise DomainViolation("T- data map needs at least two pairs")
    lam, gam = data.eigenvalues, data.norming
    return SpectralData(data.M - 1, data.N - 1, lam[1:], gam[1:] / (lam[1:] - lam[0]))


def data_t_minus_plus(data: SpectralData) -> SpectralData:
    if data.M < 0:
        raise DomainViolation(f"T-+ data map needs M >= 0, got {data.M}")
    lam, gam = data.eigenvalues, data.norming
    return SpectralData(data.M - 1, data.N + 1, lam, gam / (lam - lam[0] + LEVEL_OFFSET))


def data_t_plus_minus(data: SpectralData) -> SpectralData:
    if data.N < 0:
        raise DomainViolation(f"T+- data map needs N >= 0, got {data.N}")
    lam, gam = data.eigenvalues, data.norming
    return SpectralData(data.M + 1, data.N - 1, lam, gam * (lam - lam[0] + LEVEL_OFFSET))


def data_t_plus(mu: float, nu: float, data: SpectralData) -> SpectralData:
    lam, gam = data.eigenvalues, data.norming
    if len(lam) and not mu < lam[0]:
        raise DomainViolation(f"T+ data map needs mu < lambda_1 = {lam[0]:.10g}, got {mu}")
    if not nu > 0:
        raise DomainViolation(f"T+ data map needs nu > 0, got {nu}")
    if mu < 1:
        logger.debug(f"T+ data map with mu={mu:.6g} < 1 leaves the lambda_1 >= 1 class")
    return SpectralData(
        data.M + 1,
        data.N + 1,
        np.concatenate([[mu], lam]),
        np.concatenate([[nu], gam * (lam - mu)]),
    )


# Chains

_STEP_PATTERN = re.compile(r"T\+\s*\(([^)]*)\)|T-\+|T\+-|T-|T\+")


@dataclass(frozen=True)
class TransformStep:
    kind: str  # "T-", "T-+", "T+-" or "T+"
    mu: Optional[float] = None
    nu: Optional[float] = None

    @property
    def auto(self) -> bool:
        return self.kind == "T+" and self.mu is None

    def __str__(self) -> str:
        if self.kind != "T+":
            return self.kind
        return "T+(auto)" if self.auto else f"T+({self.mu:g},{self.nu:g})"


def parse_chain(chain: str) -> List[TransformStep]:
    """Parse e.g. "T- T+(auto)" or "T-+ T+-" or "T+(0.5, 2)"."""
    steps = []
    position = 0
    text = chain.strip()
    for match in _STEP_PATTERN.finditer(text):
        if text[position:match.start()].strip():
            raise DomainError(f"cannot parse transform chain near {text[position:match.start()]!r}")
        position = match.end()
        token = match.group(0)
        if token.startswith("T+") and match.group(1) is not None:
            args = match.group(1).strip()
            if args.lower() in ("", "auto"):
                steps.append(TransformStep("T+"))
            else:
                try:
                    mu, nu = (float(a) for a in args.split(","))
                except ValueError as e:
                    raise DomainError(f"T+ expects (mu, nu) or (auto), got ({args})") from e
                steps.append(TransformStep("T+", mu, nu))
        else:
            steps.append(TransformStep(token))
    if text[position:].strip():
        raise DomainError(f"cannot parse transform chain near {text[position:]!r}")
    if not steps:
        raise DomainError("empty transform chain")
    return steps


@dataclass
class ChainResult:
    problem: Problem
    history: List[Tuple[str, Tuple[int, int]]] = field(default_factory=list)


def apply_chain(problem: Problem, steps: Sequence[TransformStep], config: Optional[SolverConfig] = None) -> ChainResult:
    """Apply transforms in order; T+(auto) restores the last pair removed by T-."""
    removed: List[Tuple[float, float]] = []
    result = ChainResult(problem, [("input", problem.indices)])
    current = problem
    for index, step in enumerate(steps, start=1):
        try:
            if step.kind == "T-":
                removed.append(first_pair(current, config))
                current = t_minus(current, config)
            elif step.kind == "T-+":
                current = t_minus_plus(current, config)
            elif step.kind == "T+-":
                current = t_plus_minus(current, config)
            else:
                if step.auto:
                    if not removed:
                        raise DomainViolation("T+(auto) needs an earlier T- in the chain")
                    mu, nu = removed.pop()
                else:
                    mu, nu = step.mu, step.nu
                current = t_plus(mu, nu, current, config)
        except DomainError as e:
            raise type(e)(f"step {index} ({step}): {e}") from e
        result.history.append((str(step), current.indices))
    result.problem = current
    return result


def apply_data_chain(data: SpectralData, steps: Sequence[TransformStep]) -> SpectralData:
    removed: List[Tuple[float, float]] = []
    current = data
    for index, step in enumerate(steps, start=1):
        try:
            if step.kind == "T-":
                removed.append((float(current.eigenvalues[0]), float(current.norming[0])))
                current = data_t_minus(current)
            elif step.kind == "T-+":
                current = data_t_minus_plus(current)
            elif step.kind == "T+-":
                current = data_t_plus_minus(current)
            else:
                if step.auto:
                    if not removed:
                        raise DomainViolation("T+(auto) needs an earlier T- in the chain")
                    mu, nu = removed.pop()
                else:
                    mu, nu = step.mu, step.nu
                current = data_t_plus(mu, nu, current)
        except DomainError as e:
            raise type(e)(f"step {index} ({step}): {e}") from e
    return current


def spectral_data_by_reduction(problem: Problem, n_max: int, config: Optional[SolverConfig] = None) -> SpectralData:
    """
    Spectral data computed by reducing the problem towards the Dirichlet
    case with T- and the parity swaps, solving there, and mapping the data
    back with the exact data-side maps.
    """
    M, N = problem.indices
    if (M, N) in ((-1, -1), (-1, 0), (0, -1)) or (M >= 0 and N >= 0 and n_max < 2):
        return SturmLiouvilleSolver(problem, config).spectral_data(n_max)

    if M >= 0 and N >= 0:
        mu, nu = first_pair(problem, config)
        reduced = spectral_data_by_reduction(t_minus(problem, config), n_max - 1, config)
        return data_t_plus(mu, nu, reduced)
    if M == -1:
        reduced = spectral_data_by_reduction(t_plus_minus(problem, config), n_max, config)
        return data_t_minus_plus(reduced)
    reduced = spectral_data_by_reduction(t_minus_plus(problem, config), n_max, config)
    return data_t_plus_minus(reduced)
