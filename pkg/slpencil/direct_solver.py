"""
Direct spectral solver for L(sigma, f, F).

The equation -(y^[1])' - sigma y^[1] - sigma^2 y = lam y with quasi-derivative
y^[1] = y' - sigma y is integrated as the first-order system

    y'     = sigma y + y^[1]
    y^[1]' = -(sigma^2 + lam) y - sigma y^[1]

by fixed-step classical RK4 on the sigma grid.  Because the system is linear,
each RK4 step is a 2x2 transfer matrix; steps are batched over many spectral
parameters at once and chained by a product tree (endpoint values) or a
prefix scan (full traces).  Results from steps h and h/2 are combined by
Richardson extrapolation.
"""

import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .config import SolverConfig
from .exceptions import (
    CharacterizationViolation,
    DomainError,
    MissedEigenvalue,
    NonFiniteState,
    NonPositive,
    NotAnEigenvalue,
)
from .function_space import GridFunction, MeanZeroFunction
from .hn_rational import PolyFraction, RationalHN

logger = logging.getLogger(__name__)

RESIDUAL_TOL = 1e-6


def signed_sqrt(lam):
    lam = np.asarray(lam, dtype=float)
    return np.sign(lam) * np.sqrt(np.abs(lam))


@dataclass(frozen=True, eq=False)
class Problem:
    """The triple (sigma, f, F)."""

    sigma: MeanZeroFunction
    f: RationalHN
    F: RationalHN

    @property
    def M(self) -> int:
        return self.f.index()

    @property
    def N(self) -> int:
        return self.F.index()

    @property
    def indices(self) -> Tuple[int, int]:
        return self.M, self.N

    @property
    def grid_size(self) -> int:
        return self.sigma.grid_size

    def describe(self) -> str:
        return (
            f"(M, N)=({self.M}, {self.N}), |sigma|_inf={self.sigma.sup_norm():.4g}, "
            f"f={self.f}, F={self.F}"
        )


@dataclass(frozen=True, eq=False)
class SolutionTrace:
    """One solution sampled on the grid, with int_0^x y^2 dt."""

    lam: float
    x: np.ndarray
    y: np.ndarray
    quasi: np.ndarray
    energy: np.ndarray

    @property
    def start(self) -> Tuple[float, float]:
        return float(self.y[0]), float(self.quasi[0])

    @property
    def end(self) -> Tuple[float, float]:
        return float(self.y[-1]), float(self.quasi[-1])

    @property
    def total_energy(self) -> float:
        return float(self.energy[-1])

    def system_residual(self, sigma: GridFunction) -> float:
        """Max deviation of y' from sigma*y + y^[1], by centered differences."""
        dy = np.gradient(self.y, self.x, edge_order=2)
        expected = sigma.values * self.y + self.quasi
        scale = 1.0 + np.max(np.abs(self.y)) + np.max(np.abs(self.quasi))
        return float(np.max(np.abs(dy - expected)) / scale)


@dataclass(frozen=True, eq=False)
class SpectralData:
    """Eigenvalues and norming constants of a problem with indices (M, N)."""

    M: int
    N: int
    eigenvalues: np.ndarray
    norming: np.ndarray

    def __post_init__(self):
        lam = np.asarray(self.eigenvalues, dtype=float)
        gam = np.asarray(self.norming, dtype=float)
        if lam.shape != gam.shape or lam.ndim != 1:
            raise CharacterizationViolation("eigenvalues and norming constants must be 1-d of equal length")
        if not (np.all(np.isfinite(lam)) and np.all(np.isfinite(gam))):
            raise CharacterizationViolation("spectral data must be finite")
        if np.any(np.diff(lam) <= 0):
            bad = int(np.argmax(np.diff(lam) <= 0)) + 1
            raise CharacterizationViolation(f"eigenvalues not strictly increasing at n={bad}")
        if np.any(gam <= 0):
            bad = int(np.argmax(gam <= 0)) + 1
            raise CharacterizationViolation(f"norming constant gamma_{bad} is not positive")
        lam.setflags(write=False)
        gam.setflags(write=False)
        object.__setattr__(self, "eigenvalues", lam)
        object.__setattr__(self, "norming", gam)
        object.__setattr__(self, "M", int(self.M))
        object.__setattr__(self, "N", int(self.N))

    def __len__(self) -> int:
        return len(self.eigenvalues)

    @property
    def n(self) -> np.ndarray:
        return np.arange(1, len(self) + 1)

    @property
    def shift(self) -> float:
        return (self.M + self.N) / 2.0 + 1.0

    @property
    def kappa(self) -> np.ndarray:
        return signed_sqrt(self.eigenvalues) - (self.n - self.shift)

    @property
    def beta(self) -> np.ndarray:
        return 2.0 * self.norming / (np.pi * self.n.astype(float) ** (2 * self.M)) - 1.0

    def head(self, m: int) -> "SpectralData":
        return SpectralData(self.M, self.N, self.eigenvalues[:m], self.norming[:m])

    def pairs(self) -> List[Tuple[float, float]]:
        return list(zip(self.eigenvalues.tolist(), self.norming.tolist()))

    def to_dict(self) -> dict:
        return {
            "M": self.M,
            "N": self.N,
            "pairs": [
                {"n": int(n), "lambda": float(lam), "gamma": float(gam), "kappa": float(k), "beta": float(b)}
                for n, lam, gam, k, b in zip(self.n, self.eigenvalues, self.norming, self.kappa, self.beta)
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SpectralData":
        pairs = sorted(data["pairs"], key=lambda p: p.get("n", 0))
        return cls(
            M=data["M"],
            N=data["N"],
            eigenvalues=np.array([p["lambda"] for p in pairs], dtype=float),
            norming=np.array([p["gamma"] for p in pairs], dtype=float),
        )


def _system_matrices(s: np.ndarray, lam: np.ndarray) -> np.ndarray:
    A = np.empty((len(s), len(lam), 2, 2))
    A[..., 0, 0] = s[:, None]
    A[..., 0, 1] = 1.0
    A[..., 1, 0] = -(s[:, None] ** 2 + lam[None, :])
    A[..., 1, 1] = -s[:, None]
    return A


def _rk4_steps(s0, sm, s1, lam, h):
    """
    RK4 transfer matrices P_k and the first rows of the stage maps.

    The stage values of y at step k are rows[k] @ Y_k, which feeds the
    augmented int y^2 component exactly as RK4 would.
    """
    eye = np.eye(2)
    A0 = _system_matrices(s0, lam)
    Am = _system_matrices(sm, lam)
    A1 = _system_matrices(s1, lam)
    S2 = eye + (h / 2) * A0
    K2 = Am @ S2
    S3 = eye + (h / 2) * K2
    K3 = Am @ S3
    S4 = eye + h * K3
    K4 = A1 @ S4
    P = eye + (h / 6) * (A0 + 2 * K2 + 2 * K3 + K4)
    rows = np.stack([S2[..., 0, :], S3[..., 0, :], S4[..., 0, :]], axis=-2)
    return P, rows


def _chain_product(P: np.ndarray) -> np.ndarray:
    """P[n-1] @ ... @ P[0] by pairwise reduction."""
    while P.shape[0] > 1:
        if P.shape[0] % 2:
            pad = np.broadcast_to(np.eye(2), (1,) + P.shape[1:])
            P = np.concatenate([P, pad])
        P = P[1::2] @ P[0::2]
    return P[0]


def _prefix_products(P: np.ndarray) -> np.ndarray:
    """C[k] = P[k] @ ... @ P[0] by a doubling scan."""
    C = P.copy()
    offset = 1
    while offset < len(C):
        C[offset:] = C[offset:] @ C[:-offset]
        offset *= 2
    return C


class QuasiDerivativeIntegrator:
    """Fixed-step RK4 for the quasi-derivative system over one sigma."""

    def __init__(self, sigma: GridFunction, extrapolate: bool = True, chunk_size: int = 64):
        self.grid_size = sigma.grid_size
        self.h = np.pi / self.grid_size
        self.extrapolate = extrapolate
        self.chunk_size = chunk_size
        # sigma at quarter steps feeds both the h and h/2 passes
        self._s = sigma.interpolant(np.linspace(0.0, np.pi, 4 * self.grid_size + 1))

    def _samples(self, fine: bool, backward: bool):
        s = self._s[::-1] if backward else self._s
        if fine:
            s0, sm, s1, h = s[0:-2:2], s[1::2], s[2::2], self.h / 2
        else:
            s0, sm, s1, h = s[0:-4:4], s[2::4], s[4::4], self.h
        return s0, sm, s1, -h if backward else h

    def _pass_endpoint(self, lam, y0, backward, fine):
        s0, sm, s1, h = self._samples(fine, backward)
        P, _ = _rk4_steps(s0, sm, s1, lam, h)
        return np.einsum("lij,lj->li", _chain_product(P), y0)

    def _pass_trace(self, lam, y0, backward, fine):
        s0, sm, s1, h = self._samples(fine, backward)
        P, rows = _rk4_steps(s0, sm, s1, lam, h)
        C = _prefix_products(P)
        Y = np.concatenate([y0[None], np.einsum("nlij,lj->nli", C, y0)])
        Yk = Y[:-1]
        stages = np.einsum("nlsj,nlj->nls", rows, Yk)
        dI = (abs(h) / 6) * (
            Yk[..., 0] ** 2 + 2 * stages[..., 0] ** 2 + 2 * stages[..., 1] ** 2 + stages[..., 2] ** 2
        )
        I = np.concatenate([np.zeros((1, len(lam))), np.cumsum(dI, axis=0)])
        if fine:
            Y, I = Y[::2], I[::2]
        return Y, I

    def endpoint(self, lam, y0, backward: bool = False, accurate: bool = True) -> np.ndarray:
        """States at the far endpoint for each lam, shape (L, 2)."""
        lam = np.atleast_1d(np.asarray(lam, dtype=float))
        y0 = np.broadcast_to(np.asarray(y0, dtype=float), (len(lam), 2))
        out = np.empty((len(lam), 2))
        for start in range(0, len(lam), self.chunk_size):
            part = slice(start, start + self.chunk_size)
            coarse = self._pass_endpoint(lam[part], y0[part], backward, fine=False)
            if accurate and self.extrapolate:
                fine = self._pass_endpoint(lam[part], y0[part], backward, fine=True)
                out[part] = (16.0 * fine - coarse) / 15.0
            else:
                out[part] = coarse
        if not np.all(np.isfinite(out)):
            raise NonFiniteState(f"integration overflow for lam in [{lam.min():g}, {lam.max():g}]")
        return out

    def trace(self, lam, y0, backward: bool = False) -> Tuple[np.ndarray, np.ndarray]:
        """
        States at every node in ascending x, shape (G+1, L, 2), and
        int_0^x y^2, shape (G+1, L).
        """
        lam = np.atleast_1d(np.asarray(lam, dtype=float))
        y0 = np.broadcast_to(np.asarray(y0, dtype=float), (len(lam), 2))
        Y = np.empty((self.grid_size + 1, len(lam), 2))
        I = np.empty((self.grid_size + 1, len(lam)))
        for start in range(0, len(lam), self.chunk_size):
            part = slice(start, start + self.chunk_size)
            Yc, Ic = self._pass_trace(lam[part], y0[part], backward, fine=False)
            if self.extrapolate:
                Yf, If = self._pass_trace(lam[part], y0[part], backward, fine=True)
                Yc = (16.0 * Yf - Yc) / 15.0
                Ic = (16.0 * If - Ic) / 15.0
            if backward:
                # Ic holds int_x^pi y^2 in descending x
                Yc, Ic = Yc[::-1], Ic[::-1]
                Ic = Ic[0] - Ic
            Y[:, part], I[:, part] = Yc, Ic
        if not (np.all(np.isfinite(Y)) and np.all(np.isfinite(I))):
            raise NonFiniteState(f"integration overflow for lam in [{lam.min():g}, {lam.max():g}]")
        return Y, I

    def solution(self, lam: float, a: float, b: float, backward: bool = False) -> SolutionTrace:
        if a == 0 and b == 0:
            raise DomainError("initial data (a, b) must not both vanish")
        Y, I = self.trace([lam], [a, b], backward=backward)
        return SolutionTrace(
            lam=float(lam),
            x=np.linspace(0.0, np.pi, self.grid_size + 1),
            y=Y[:, 0, 0],
            quasi=Y[:, 0, 1],
            energy=I[:, 0],
        )


class SturmLiouvilleSolver:
    """Direct spectral map for one problem; caches sigma samples and fractions."""

    def __init__(self, problem: Problem, config: Optional[SolverConfig] = None):
        self.problem = problem
        self.config = config or SolverConfig()
        self.integrator = QuasiDerivativeIntegrator(
            problem.sigma,
            extrapolate=self.config.extrapolate,
            chunk_size=self.config.chunk_size,
        )
        self.f_frac: PolyFraction = problem.f.to_fraction()
        self.F_frac: PolyFraction = problem.F.to_fraction()

    # Solutions

    def _phi_initial(self, lam: np.ndarray) -> np.ndarray:
        lam = np.atleast_1d(lam)
        return np.stack(
            [self.f_frac.down_at(lam) * np.ones_like(lam), -self.f_frac.up_at(lam) * np.ones_like(lam)],
            axis=-1,
        )

    def phi(self, lam: float) -> SolutionTrace:
        a, b = self._phi_initial(np.array([float(lam)]))[0]
        return self.integrator.solution(lam, a, b)

    def psi(self, lam: float) -> SolutionTrace:
        lam = float(lam)
        return self.integrator.solution(lam, float(self.F_frac.down_at(lam)), float(self.F_frac.up_at(lam)), backward=True)

    def z(self, lam: float, rho: float) -> SolutionTrace:
        return self.integrator.solution(float(lam), 1.0, -float(rho))

    # Characteristic function

    def char_fn(self, lam, accurate: bool = True):
        lam_arr = np.atleast_1d(np.asarray(lam, dtype=float))
        end = self.integrator.endpoint(lam_arr, self._phi_initial(lam_arr), accurate=accurate)
        chi = self.F_frac.up_at(lam_arr) * end[:, 0] - self.F_frac.down_at(lam_arr) * end[:, 1]
        return float(chi[0]) if np.ndim(lam) == 0 else chi

    def _chi(self, lam: float) -> float:
        return float(self.char_fn(np.array([lam]))[0])

    # Eigenvalues

    def lambda_floor(self) -> float:
        """Lower bound for lambda_1 from sup|sigma| and the boundary values below the first poles."""
        bound = self.problem.sigma.sup_norm()
        extra = 0.0
        refs = [0.0]
        for g in (self.problem.f, self.problem.F):
            if not g.is_infinite:
                # g is increasing below its first pole, so g(ref) caps the Robin coefficient there
                ref = min(0.0, g.first_pole() - 1.0)
                refs.append(ref)
                extra = max(extra, g.evaluate(ref))
        b = bound + extra
        return min(-(b * b + b), min(refs) - 1.0) - 10.0

    def _settled_floor(self, floor: float) -> float:
        """Lower the floor until chi keeps one sign on [2*floor, floor]."""
        for _ in range(6):
            if np.sqrt(-2.0 * floor) * np.pi > 600.0:
                break
            try:
                values = self.char_fn(np.linspace(2.0 * floor, floor, 129), accurate=False)
            except NonFiniteState:
                break
            signs = np.sign(values)
            if np.all(signs == signs[0]) and signs[0] != 0:
                break
            logger.warning(f"Characteristic function changes sign below lam={floor:.4g}; lowering the floor")
            floor *= 2.0
        return floor

    def asymptotic_start(self) -> float:
        """sqrt(lam) above which |kappa_n| stays below the count-check guard."""
        M, N = self.problem.indices
        sup = self.problem.sigma.sup_norm()
        strength = sup + sup * sup
        poles = [0.0]
        for g in (self.problem.f, self.problem.F):
            if g.is_infinite:
                continue
            strength += abs(g.h) + float(np.sum(g.residues))
            if g.h0 > 0:
                strength += 1.0 / g.h0
            poles.extend(g.pole_locations)
        return 4.0 + max(M + N, 0) + 4.0 * strength / np.pi + np.sqrt(max(poles))

    def _scan_grid(self, n_max: int, refine: int) -> np.ndarray:
        M, N = self.problem.indices
        s_top = max(n_max - (M + N) / 2.0, self.asymptotic_start() + 2.0) + 2.0
        s_top += 2.0 * (refine - 1)
        s = np.arange(0.0, s_top + self.config.scan_step, self.config.scan_step / refine)
        floor = self._settled_floor(self.lambda_floor()) * refine
        low = np.arange(floor, 1.0, self.config.lambda_scan_step / refine)
        return np.unique(np.concatenate([low, s * s]))

    def _refine_bracket(self, grid: np.ndarray, lo: int, hi: int) -> float:
        """Brent refinement of a root the coarse scan placed in grid[lo:hi+1]."""
        for widen in range(3):
            a, b = grid[max(lo - widen, 0)], grid[min(hi + widen, len(grid) - 1)]
            fa, fb = self._chi(a), self._chi(b)
            if fa == 0.0:
                return float(a)
            if fb == 0.0:
                return float(b)
            if np.sign(fa) != np.sign(fb):
                return float(brentq(self._chi, a, b, xtol=self.config.root_xtol, maxiter=200))
        raise MissedEigenvalue(f"sign change near lam={grid[lo]:.6g} vanished under refinement")

    def _split_dip(self, a: float, b: float, sign: float) -> List[float]:
        """Roots of a close pair hidden inside a dip of |chi| on [a, b]."""
        found = minimize_scalar(
            lambda lam: sign * self._chi(lam),
            bounds=(a, b),
            method="bounded",
            options={"xatol": self.config.root_xtol * (1.0 + abs(a))},
        )
        bottom = float(found.x)
        if sign * self._chi(bottom) >= 0:
            return []
        logger.debug(f"Split a close eigenvalue pair near lam={bottom:.8g}")
        return [
            float(brentq(self._chi, a, bottom, xtol=self.config.root_xtol, maxiter=200)),
            float(brentq(self._chi, bottom, b, xtol=self.config.root_xtol, maxiter=200)),
        ]

    def _scan(self, n_max: int, refine: int) -> np.ndarray:
        grid = self._scan_grid(n_max, refine)
        values = self.char_fn(grid, accurate=False)
        signs = np.sign(values)
        logger.debug(f"Scanning {len(grid)} points on [{grid[0]:.4g}, {grid[-1]:.4g}]")

        roots = []
        for i in np.flatnonzero(signs == 0):
            roots.append(self._refine_bracket(grid, max(i - 1, 0), min(i + 1, len(grid) - 1)))
        for i in np.flatnonzero(signs[:-1] * signs[1:] < 0):
            roots.append(self._refine_bracket(grid, i, i + 1))

        size = np.abs(values)
        inner = np.arange(1, len(grid) - 1)
        dips = inner[
            (signs[inner - 1] == signs[inner])
            & (signs[inner] == signs[inner + 1])
            & (signs[inner] != 0)
            & (size[inner] < size[inner - 1])
            & (size[inner] <= size[inner + 1])
        ]
        for i in dips:
            roots.extend(self._split_dip(grid[i - 1], grid[i + 1], signs[i]))

        distinct: List[float] = []
        for root in sorted(roots):
            if not distinct or root - distinct[-1] > 1e-9 * (1.0 + abs(root)):
                distinct.append(root)
        return np.array(distinct)

    def _consistent(self, roots: np.ndarray, n_max: int) -> bool:
        """Count check on every root the scan found in the asymptotic range, extras included."""
        if len(roots) < n_max:
            return False
        M, N = self.problem.indices
        n = np.arange(1, len(roots) + 1)
        s = signed_sqrt(roots)
        kappa = s - (n - (M + N) / 2.0 - 1.0)
        checked = s >= self.asymptotic_start()
        if not np.any(checked):
            return False
        return bool(np.all(np.abs(kappa[checked]) < self.config.kappa_guard))

    def _polish(self, guesses: Sequence[float]) -> np.ndarray:
        roots = []
        for g in guesses:
            width = 1e-3 * (1.0 + abs(g))
            for _ in range(12):
                a, b = g - width, g + width
                if np.sign(self._chi(a)) != np.sign(self._chi(b)):
                    break
                width *= 3.0
            else:
                raise MissedEigenvalue(f"no sign change found around guess {g:.6g}")
            roots.append(brentq(self._chi, a, b, xtol=self.config.root_xtol, maxiter=200))
        roots = np.array(roots)
        if np.any(np.diff(roots) <= 0):
            raise MissedEigenvalue("warm-started roots are not strictly increasing")
        return roots

    def eigenvalues(self, n_max: int, guesses: Optional[Sequence[float]] = None) -> np.ndarray:
        """The first n_max zeros of the characteristic function."""
        if n_max < 1:
            raise DomainError("n_max must be at least 1")
        if guesses is not None:
            return self._polish(np.asarray(guesses, dtype=float)[:n_max])

        for refine in (1, 2):
            roots = self._scan(n_max, refine)
            if self._consistent(roots, n_max):
                roots = roots[:n_max]
                limit = min(self.problem.f.first_pole(), self.problem.F.first_pole())
                if roots[0] >= limit:
                    logger.warning(f"lambda_1={roots[0]:.6g} is not below the first pole {limit:.6g}")
                return roots
            logger.warning(
                f"Eigenvalue count check failed ({len(roots)} roots for n_max={n_max}); refining scan"
            )
        raise MissedEigenvalue(
            f"found {len(roots)} eigenvalues inconsistent with the asymptotics for n_max={n_max}"
        )

    # Norming constants

    def _f_term(self, lam: np.ndarray) -> np.ndarray:
        initial = self._phi_initial(lam)
        return boundary_term(self.f_frac, lam, initial[:, 0], -initial[:, 1])

    def _F_term(self, lam: np.ndarray, end: np.ndarray) -> np.ndarray:
        return boundary_term(self.F_frac, lam, end[:, 0], end[:, 1])

    def norming_constants(self, eigenvalues: Sequence[float]) -> np.ndarray:
        lam = np.asarray(eigenvalues, dtype=float)
        Y, I = self.integrator.trace(lam, self._phi_initial(lam))
        gamma = I[-1] + self._f_term(lam) + self._F_term(lam, Y[-1])
        if np.any(gamma <= 0):
            bad = int(np.argmax(gamma <= 0))
            raise NonPositive(f"norming constant {gamma[bad]:.3e} at lam={lam[bad]:.6g}")
        return gamma

    def is_eigenvalue(self, lam: float, tol: float = RESIDUAL_TOL) -> bool:
        end = self.integrator.endpoint([lam], self._phi_initial(np.array([lam])))[0]
        up, down = float(self.F_frac.up_at(lam)), float(self.F_frac.down_at(lam))
        chi = up * end[0] - down * end[1]
        scale = (abs(end[0]) + abs(end[1])) * (abs(up) + abs(down))
        return abs(chi) <= tol * scale

    def norming_constant(self, lam_n: float) -> float:
        if not self.is_eigenvalue(lam_n):
            raise NotAnEigenvalue(f"lam={lam_n:.10g} is not an eigenvalue")
        return float(self.norming_constants([lam_n])[0])

    def spectral_data(self, n_max: int) -> SpectralData:
        lam = self.eigenvalues(n_max)
        gamma = self.norming_constants(lam)
        M, N = self.problem.indices
        logger.debug(f"Solved {n_max} eigenpairs for (M, N)=({M}, {N}); lambda_1={lam[0]:.8g}")
        return SpectralData(M, N, lam, gamma)


# Functional interface


def boundary_term(g: PolyFraction, lam, y, y1):
    """
    g'(lam) y^2 for a boundary pair (y, y1) proportional to (g_down, g_up).

    Uses g' g_down^2 = g_up' g_down - g_up g_down', so the value stays finite
    at poles of g and vanishes for the symbol infinity.
    """
    lam = np.asarray(lam, dtype=float)
    down = g.down_at(lam) * np.ones_like(lam)
    up = g.up_at(lam) * np.ones_like(lam)
    c = (y * down + y1 * up) / (down**2 + up**2)
    return c**2 * g.wronskian_at(lam)



def integrate(
    sigma: GridFunction,
    lam: float,
    x0: float,
    a: float,
    b: float,
    config: Optional[SolverConfig] = None,
) -> SolutionTrace:
    """Solve from x0 in {0, pi} with y(x0)=a, y^[1](x0)=b."""
    if x0 not in (0.0, np.pi):
        raise DomainError(f"x0 must be 0 or pi, got {x0}")
    config = config or SolverConfig()
    integrator = QuasiDerivativeIntegrator(sigma, config.extrapolate, config.chunk_size)
    return integrator.solution(lam, a, b, backward=x0 == np.pi)


def phi(problem: Problem, lam: float, config: Optional[SolverConfig] = None) -> SolutionTrace:
    return SturmLiouvilleSolver(problem, config).phi(lam)


def psi(problem: Problem, lam: float, config: Optional[SolverConfig] = None) -> SolutionTrace:
    return SturmLiouvilleSolver(problem, config).psi(lam)


def z(sigma: GridFunction, lam: float, rho: float, config: Optional[SolverConfig] = None) -> SolutionTrace:
    return integrate(sigma, lam, 0.0, 1.0, -rho, config)


def char_fn(problem: Problem, lam, config: Optional[SolverConfig] = None):
    return SturmLiouvilleSolver(problem, config).char_fn(lam)


def eigenvalues(problem: Problem, n_max: int, config: Optional[SolverConfig] = None) -> np.ndarray:
    return SturmLiouvilleSolver(problem, config).eigenvalues(n_max)


def norming_constant(problem: Problem, lam_n: float, config: Optional[SolverConfig] = None) -> float:
    return SturmLiouvilleSolver(problem, config).norming_constant(lam_n)


def spectral_data(problem: Problem, n_max: int, config: Optional[SolverConfig] = None) -> SpectralData:
    return SturmLiouvilleSolver(problem, config).spectral_data(n_max)


def remainders(data: SpectralData) -> Tuple[np.ndarray, np.ndarray]:
    return data.kappa, data.beta


def complete_finite_data(
    eigenvalues: Sequence[float],
    norming: Sequence[float],
    M: int,
    N: int,
    n_max: int,
) -> SpectralData:
    """Extend m known pairs by the unperturbed asymptotic values up to n_max."""
    lam = np.asarray(eigenvalues, dtype=float)
    gam = np.asarray(norming, dtype=float)
    m = len(lam)
    if len(gam) != m:
        raise CharacterizationViolation("eigenvalues and norming constants differ in length")
    if np.any(np.diff(lam) <= 0) or np.any(gam <= 0):
        raise CharacterizationViolation("finite data must be increasing with positive norming constants")

    n = np.arange(m + 1, max(n_max, m) + 1, dtype=float)
    tail_lam = (n - (M + N) / 2.0 - 1.0) ** 2
    tail_gam = (np.pi / 2.0) * n ** (2 * M)
    return SpectralData(M, N, np.concatenate([lam, tail_lam]), np.concatenate([gam, tail_gam]))
