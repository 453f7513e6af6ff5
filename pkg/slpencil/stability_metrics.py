"""
Metrics on problems and spectral data, set membership, and empirical
Lipschitz ratios of the direct and inverse spectral maps.
"""

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional, Tuple, Union

import numpy as np
import pandas as pd
from tqdm import tqdm

from .config import InverseConfig, SolverConfig
from .direct_solver import Problem, SpectralData, SturmLiouvilleSolver, signed_sqrt
from .exceptions import ConvergenceError, DegeneratePair, DomainError, IndexMismatch
from .function_space import (
    GridFunction,
    MeanZeroFunction,
    WeightedSequence,
    l2_alpha_norm,
    mean_zero_project,
    resample,
    sobolev_norm,
    uniform_grid,
)
from .hn_rational import RationalHN, rational_set_violations

logger = logging.getLogger(__name__)

DEGENERATE_TOL = 1e-10
UNIFORMITY_FACTOR = 10.0
CSV_COLUMNS = ["pair_id", "d_alpha", "rho_alpha", "ratio", "seed"]


class TruncatedDistance(float):
    """A distance computed over the first n_terms entries of the sequences."""

    n_terms: int

    def __new__(cls, value: float, n_terms: int):
        obj = super().__new__(cls, value)
        obj.n_terms = n_terms
        return obj


@dataclass
class Membership:
    ok: bool
    reasons: List[str] = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.ok


def d_alpha(P1: Problem, P2: Problem, alpha: float) -> float:
    """||sigma1 - sigma2||_alpha + ||c(f1) - c(f2)|| + ||c(F1) - c(F2)||."""
    if P1.indices != P2.indices:
        raise IndexMismatch(f"problem indices differ: {P1.indices} vs {P2.indices}")
    s2 = P2.sigma
    if s2.grid_size != P1.sigma.grid_size:
        s2 = resample(s2, P1.sigma.grid_size)
    difference = GridFunction(P1.sigma.values - s2.values)
    return (
        sobolev_norm(difference, alpha)
        + float(np.linalg.norm(P1.f.coeff_vector() - P2.f.coeff_vector()))
        + float(np.linalg.norm(P1.F.coeff_vector() - P2.F.coeff_vector()))
    )


def rho_alpha(S1: SpectralData, S2: SpectralData, alpha: float, n_max: int = 64) -> TruncatedDistance:
    """||kappa1 - kappa2||_alpha + ||beta1 - beta2||_alpha over n <= n_max."""
    if (S1.M, S1.N) != (S2.M, S2.N):
        raise IndexMismatch(f"data indices differ: ({S1.M}, {S1.N}) vs ({S2.M}, {S2.N})")
    n = min(len(S1), len(S2), n_max)
    value = (
        l2_alpha_norm(WeightedSequence(S1.kappa[:n] - S2.kappa[:n], alpha))
        + l2_alpha_norm(WeightedSequence(S1.beta[:n] - S2.beta[:n], alpha))
    )
    return TruncatedDistance(value, n)


def in_problem_set(
    problem: Problem,
    alpha: float,
    Q: float,
    delta: float,
    config: Optional[SolverConfig] = None,
) -> Membership:
    """Membership in P_{Q,delta}: bounded sigma and boundary functions, lambda_1 >= 1."""
    reasons = []
    norm = sobolev_norm(problem.sigma, alpha)
    if norm > Q:
        reasons.append(f"||sigma||_{alpha} = {norm:.4g} exceeds Q={Q:g}")
    reasons.extend(f"f: {r}" for r in rational_set_violations(problem.f, problem.M, Q, delta))
    reasons.extend(f"F: {r}" for r in rational_set_violations(problem.F, problem.N, Q, delta))
    if not reasons:
        try:
            lam1 = float(SturmLiouvilleSolver(problem, config).eigenvalues(1)[0])
        except ConvergenceError as e:
            reasons.append(f"direct solve failed: {e}")
        else:
            if lam1 < 1:
                reasons.append(f"lambda_1 = {lam1:.6g} below 1")
    return Membership(not reasons, reasons)


def in_data_set(data: SpectralData, alpha: float, R: float, eps: float) -> Membership:
    """Membership in B_{R,eps} over the stored pairs."""
    reasons = []
    if len(data) == 0:
        return Membership(False, ["no spectral pairs"])
    if data.eigenvalues[0] < 1:
        reasons.append(f"lambda_1 = {data.eigenvalues[0]:.6g} below 1")
    gaps = np.diff(signed_sqrt(data.eigenvalues))
    if len(gaps) and gaps.min() < eps:
        reasons.append(f"min sqrt-gap {gaps.min():.4g} below eps={eps:g}")
    kappa_norm = l2_alpha_norm(WeightedSequence(data.kappa, alpha))
    if kappa_norm > R:
        reasons.append(f"||kappa||_{alpha} = {kappa_norm:.4g} exceeds R={R:g}")
    if (1.0 + data.beta).min() < eps:
        reasons.append(f"min(1 + beta_n) = {(1.0 + data.beta).min():.4g} below eps={eps:g}")
    beta_norm = l2_alpha_norm(WeightedSequence(data.beta, alpha))
    if beta_norm > R:
        reasons.append(f"||beta||_{alpha} = {beta_norm:.4g} exceeds R={R:g}")
    return Membership(not reasons, reasons)


def tightest_data_parameters(data: SpectralData, alpha: float) -> Tuple[float, float]:
    """Smallest R and largest eps with data in B_{R,eps} (ignoring lambda_1 >= 1)."""
    R = max(
        l2_alpha_norm(WeightedSequence(data.kappa, alpha)),
        l2_alpha_norm(WeightedSequence(data.beta, alpha)),
    )
    gaps = np.diff(signed_sqrt(data.eigenvalues))
    eps = float(min(gaps.min() if len(gaps) else np.inf, (1.0 + data.beta).min()))
    return float(R), eps


# Sampling


class ProblemSampler:
    """Random members of P_{Q,delta} with fixed indices, by rejection."""

    def __init__(
        self,
        M: int,
        N: int,
        Q: float,
        delta: float,
        alpha: float,
        n_cos: int = 4,
        grid_size: int = 2048,
        solver_config: Optional[SolverConfig] = None,
        max_attempts: int = 500,
    ):
        self.M, self.N = M, N
        self.Q, self.delta, self.alpha = Q, delta, alpha
        self.n_cos = n_cos
        self.grid_size = grid_size
        self.solver_config = solver_config or SolverConfig(grid_size=grid_size)
        self.max_attempts = max_attempts
        self._x = uniform_grid(grid_size)

    def draw_boundary(self, index: int, rng: np.random.Generator) -> RationalHN:
        if index == -1:
            return RationalHN.infinity()
        d, odd = divmod(index, 2)
        Q, delta = self.Q, self.delta
        room = Q - 1.0 - (d - 1) * delta
        if d and room < 0:
            raise DomainError(f"no index-{index} function fits Q={Q:g}, delta={delta:g}")
        offsets = np.sort(rng.uniform(0.0, max(room, 0.0), size=d))
        poles = [(1.0 + offsets[j] + j * delta, rng.uniform(delta, Q)) for j in range(d)]
        h0 = rng.uniform(delta, Q) if odd else 0.0
        return RationalHN(h0=h0, h=rng.uniform(-Q, Q), poles=tuple(poles))

    def draw_sigma(self, rng: np.random.Generator) -> MeanZeroFunction:
        k = np.arange(1, self.n_cos + 1)
        coefficients = rng.normal(size=self.n_cos) / k
        raw = mean_zero_project(coefficients @ np.cos(np.outer(k, self._x)))
        norm = sobolev_norm(raw, self.alpha)
        target = rng.uniform(0.0, 0.8 * self.Q)
        return raw.scaled(target / norm) if norm > 0 else raw

    def _accept(self, problem: Problem) -> bool:
        membership = in_problem_set(problem, self.alpha, self.Q, self.delta, self.solver_config)
        if not membership:
            logger.debug(f"Rejected sample: {'; '.join(membership.reasons)}")
        return membership.ok

    def sample(self, rng: np.random.Generator) -> Problem:
        for _ in range(self.max_attempts):
            problem = Problem(self.draw_sigma(rng), self.draw_boundary(self.M, rng), self.draw_boundary(self.N, rng))
            if self._accept(problem):
                return problem
        raise DomainError(f"no member of P_(Q={self.Q:g}, delta={self.delta:g}) found in {self.max_attempts} draws")

    def _perturb_boundary(self, g: RationalHN, rng: np.random.Generator, scale: float) -> RationalHN:
        if g.is_infinite:
            return g

        def jitter(value: float) -> float:
            return value * (1.0 + scale * rng.uniform(-1.0, 1.0))

        poles = tuple((jitter(hj), jitter(dj)) for hj, dj in g.poles)
        return RationalHN(h0=jitter(g.h0), h=g.h + scale * rng.uniform(-1.0, 1.0), poles=poles)

    def sample_near(self, problem: Problem, rng: np.random.Generator, scale: float) -> Problem:
        """A second member close to `problem`, for local Lipschitz ratios."""
        for _ in range(self.max_attempts):
            offset = self.draw_sigma(rng)
            norm = sobolev_norm(offset, self.alpha)
            if norm > 0:
                offset = offset.scaled(scale * max(sobolev_norm(problem.sigma, self.alpha), 0.1) / norm)
            try:
                candidate = Problem(
                    problem.sigma + offset,
                    self._perturb_boundary(problem.f, rng, scale),
                    self._perturb_boundary(problem.F, rng, scale),
                )
            except DomainError:
                continue
            if self._accept(candidate):
                return candidate
        raise DomainError("no nearby set member found")


class DataSampler:
    """Spectral data in B_(R,eps), drawn as images of sampled problems."""

    def __init__(self, problems: ProblemSampler, R: float, eps: float, n_max: int = 64):
        self.problems = problems
        self.R, self.eps = R, eps
        self.n_max = n_max

    @property
    def solver_config(self) -> SolverConfig:
        return self.problems.solver_config

    def _data(self, problem: Problem) -> Optional[SpectralData]:
        try:
            data = SturmLiouvilleSolver(problem, self.solver_config).spectral_data(self.n_max)
        except ConvergenceError as e:
            logger.debug(f"Rejected sample: {e}")
            return None
        membership = in_data_set(data, self.problems.alpha, self.R, self.eps)
        if not membership:
            logger.debug(f"Rejected data: {'; '.join(membership.reasons)}")
            return None
        return data

    def sample(self, rng: np.random.Generator) -> Tuple[Problem, SpectralData]:
        for _ in range(self.problems.max_attempts):
            problem = self.problems.sample(rng)
            data = self._data(problem)
            if data is not None:
                return problem, data
        raise DomainError(f"no member of B_(R={self.R:g}, eps={self.eps:g}) found")

    def sample_near(self, problem: Problem, rng: np.random.Generator, scale: float) -> Tuple[Problem, SpectralData]:
        for _ in range(self.problems.max_attempts):
            near = self.problems.sample_near(problem, rng, scale)
            data = self._data(near)
            if data is not None:
                return near, data
        raise DomainError("no nearby member of the data set found")


@dataclass
class LipschitzTable:
    rows: pd.DataFrame
    direction: str
    skipped: int = 0

    @property
    def max_ratio(self) -> float:
        return float(self.rows["ratio"].max()) if len(self.rows) else float("nan")

    @property
    def median_ratio(self) -> float:
        return float(self.rows["ratio"].median()) if len(self.rows) else float("nan")

    @property
    def uniform(self) -> bool:
        return bool(len(self.rows) == 0 or self.max_ratio <= UNIFORMITY_FACTOR * self.median_ratio)

    def assert_uniform(self) -> None:
        if not self.uniform:
            raise AssertionError(
                f"max ratio {self.max_ratio:.4g} exceeds {UNIFORMITY_FACTOR:g} x median {self.median_ratio:.4g}"
            )

    def summary(self) -> dict:
        return {
            "direction": self.direction,
            "pairs": int(len(self.rows)),
            "skipped": self.skipped,
            "max_ratio": self.max_ratio,
            "median_ratio": self.median_ratio,
            "uniform": self.uniform,
        }

    def to_csv(self, path) -> None:
        self.rows.to_csv(path, index=False, float_format="%.17g")


def pair_seeds(seed: int, pair_count: int) -> List[int]:
    """One reproducible integer seed per pair, independent of scheduling."""
    children = np.random.SeedSequence(seed).spawn(pair_count)
    return [int(child.generate_state(1)[0]) for child in children]


def _evaluate_pair(args) -> Optional[dict]:
    pair_id, pair_seed, sampler, alpha, direction, n_max, scale, inverse_config = args
    rng = np.random.default_rng(pair_seed)
    solver_config = sampler.solver_config
    if isinstance(sampler, DataSampler):
        P1, S1 = sampler.sample(rng)
        P2, S2 = sampler.sample_near(P1, rng, scale)
    else:
        P1 = sampler.sample(rng)
        P2 = sampler.sample_near(P1, rng, scale)
        S1 = SturmLiouvilleSolver(P1, solver_config).spectral_data(n_max)
        S2 = SturmLiouvilleSolver(P2, solver_config).spectral_data(n_max)

    if direction == "inverse":
        from .inverse_solver import inverse

        P1 = inverse(S1, inverse_config, solver_config)
        P2 = inverse(S2, inverse_config, solver_config)

    d = d_alpha(P1, P2, alpha)
    rho = float(rho_alpha(S1, S2, alpha, n_max))
    if direction == "direct":
        if d < DEGENERATE_TOL:
            raise DegeneratePair(f"pair {pair_id}: d_alpha={d:.3e}")
        ratio = rho / d
    else:
        if rho < DEGENERATE_TOL:
            raise DegeneratePair(f"pair {pair_id}: rho_alpha={rho:.3e}")
        ratio = d / rho
    return {"pair_id": pair_id, "d_alpha": d, "rho_alpha": rho, "ratio": ratio, "seed": pair_seed}


def lipschitz_experiment(
    sampler: Union[ProblemSampler, DataSampler],
    pair_count: int,
    alpha: float,
    direction: str = "direct",
    seed: int = 0,
    n_max: int = 64,
    scale: float = 0.1,
    workers: int = 1,
    inverse_config: Optional[InverseConfig] = None,
) -> LipschitzTable:
    """
    Ratios rho/d ("direct"), or d/rho after inverting the data ("inverse"),
    or d/rho on the sampled problems themselves ("conditional").
    """
    if direction not in ("direct", "inverse", "conditional"):
        raise DomainError(f"unknown direction {direction!r}")
    seeds = pair_seeds(seed, pair_count)
    jobs = [(i, s, sampler, alpha, direction, n_max, scale, inverse_config) for i, s in enumerate(seeds)]

    rows, skipped = [], 0

    def collect(results):
        nonlocal skipped
        for pair_id, outcome in tqdm(results, total=len(jobs), desc=f"{direction} pairs"):
            if isinstance(outcome, Exception):
                skipped += 1
                logger.warning(f"Skipped pair {pair_id}: {outcome}")
            else:
                rows.append(outcome)

    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [(job[0], pool.submit(_evaluate_pair, job)) for job in jobs]
            collect((pair_id, _outcome(future)) for pair_id, future in futures)
    else:
        collect((job[0], _safe(job)) for job in jobs)

    table = LipschitzTable(pd.DataFrame(rows, columns=CSV_COLUMNS).sort_values("pair_id", ignore_index=True), direction, skipped)
    logger.info(
        f"Lipschitz {direction}: {len(table.rows)} pairs, max ratio {table.max_ratio:.4g}, "
        f"median {table.median_ratio:.4g}, skipped {skipped}"
    )
    if not table.uniform:
        logger.warning(f"Ratios are not uniform: max {table.max_ratio:.4g} > {UNIFORMITY_FACTOR:g} x median")
    return table


def _safe(job):
    try:
        return _evaluate_pair(job)
    except (DomainError, ConvergenceError) as e:
        return e


def _outcome(future):
    try:
        return future.result()
    except (DomainError, ConvergenceError) as e:
        return e
