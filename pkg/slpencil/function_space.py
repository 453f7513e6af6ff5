"""
Grid functions on [0, pi], sine coefficients and weighted norms.

Grid values are the primary representation; sine coefficients

    u_k = (2/pi) * int_0^pi u(x) sin(kx) dx

come from composite Simpson quadrature on the grid.  The W_2^alpha norm of a
function is the l_2^alpha norm of its sine coefficients.
"""

import logging
import re
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Optional, Sequence, Tuple

import numpy as np
import sympy
from scipy.integrate import simpson
from scipy.interpolate import CubicSpline

from .exceptions import AliasRisk, DomainError

logger = logging.getLogger(__name__)

DEFAULT_GRID_SIZE = 2048
DEFAULT_K = 256
MEAN_TOL = 1e-8
TAIL_RTOL = 1e-6
ROUNDOFF = 1e-12

_ALLOWED_NAMES = {"x", "pi", "sin", "cos"}
_EXPRESSION_CHARS = re.compile(r"^[0-9a-z\s\.\+\-\*/\(\)\^]*$")


def uniform_grid(grid_size: int) -> np.ndarray:
    return np.linspace(0.0, np.pi, grid_size + 1)


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Values of a function on x_i = i*pi/G, i = 0..G."""

    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 1 or len(values) < 3 or (len(values) - 1) % 2:
            raise DomainError("grid functions need an even number G >= 2 of intervals")
        if not np.all(np.isfinite(values)):
            raise DomainError("grid values must be finite")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def grid_size(self) -> int:
        return len(self.values) - 1

    @property
    def x(self) -> np.ndarray:
        return uniform_grid(self.grid_size)

    def integral(self) -> float:
        return float(simpson(self.values, x=self.x))

    def mean(self) -> float:
        return self.integral() / np.pi

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values)))

    def w11_norm(self) -> float:
        """L1 norm of u plus L1 norm of u'."""
        du = np.gradient(self.values, self.x, edge_order=2)
        return float(simpson(np.abs(self.values), x=self.x) + simpson(np.abs(du), x=self.x))

    @cached_property
    def interpolant(self) -> CubicSpline:
        return CubicSpline(self.x, self.values)

    def __call__(self, x):
        return self.interpolant(x)

    def sine_coefficients(self, K: int = DEFAULT_K) -> np.ndarray:
        return sine_coefficients(self, K)

    def sobolev_norm(self, alpha: float, K: Optional[int] = None) -> float:
        return sobolev_norm(self, alpha, K)


@dataclass(frozen=True, eq=False)
class MeanZeroFunction(GridFunction):
    """A grid function whose quadrature mean vanishes."""

    def __post_init__(self):
        super().__post_init__()
        total = self.integral()
        if abs(total) > MEAN_TOL * (1.0 + self.sup_norm()):
            raise DomainError(f"function is not mean-zero (integral {total:.3e})")

    @classmethod
    def zero(cls, grid_size: int = DEFAULT_GRID_SIZE) -> "MeanZeroFunction":
        return cls(np.zeros(grid_size + 1))

    @classmethod
    def from_callable(cls, fn: Callable[[np.ndarray], np.ndarray], grid_size: int = DEFAULT_GRID_SIZE) -> "MeanZeroFunction":
        x = uniform_grid(grid_size)
        return mean_zero_project(np.broadcast_to(fn(x), x.shape))

    @classmethod
    def from_expression(cls, expression: str, grid_size: int = DEFAULT_GRID_SIZE) -> "MeanZeroFunction":
        return cls.from_callable(parse_expression(expression), grid_size)

    def __add__(self, other: "MeanZeroFunction") -> "MeanZeroFunction":
        return mean_zero_project(self.values + _on_grid(other, self.grid_size))

    def __sub__(self, other: "MeanZeroFunction") -> "MeanZeroFunction":
        return mean_zero_project(self.values - _on_grid(other, self.grid_size))

    def __neg__(self) -> "MeanZeroFunction":
        return MeanZeroFunction(-self.values)

    def scaled(self, factor: float) -> "MeanZeroFunction":
        return MeanZeroFunction(factor * self.values)


@dataclass(frozen=True)
class WeightedSequence:
    """Finitely many entries v_1..v_n of an l_2^alpha sequence; the tail is zero."""

    entries: Sequence[float]
    alpha: float = 0.0

    def norm(self) -> float:
        return l2_alpha_norm(self)


def _on_grid(u: GridFunction, grid_size: int) -> np.ndarray:
    if u.grid_size == grid_size:
        return u.values
    return resample(u, grid_size).values


def mean_zero_project(values) -> MeanZeroFunction:
    """Subtract the quadrature mean."""
    values = np.asarray(values, dtype=float)
    x = uniform_grid(len(values) - 1)
    return MeanZeroFunction(values - simpson(values, x=x) / np.pi)


def resample(u: GridFunction, grid_size: int) -> GridFunction:
    """Cubic-spline resampling onto a grid with `grid_size` intervals."""
    values = u.interpolant(uniform_grid(grid_size))
    if isinstance(u, MeanZeroFunction):
        return mean_zero_project(values)
    return GridFunction(values)


def sine_coefficients(u: GridFunction, K: int = DEFAULT_K) -> np.ndarray:
    """u_k for k = 1..K."""
    if K > u.grid_size // 4:
        raise AliasRisk(f"K={K} exceeds G/4={u.grid_size // 4} for grid size {u.grid_size}")
    x = u.x
    k = np.arange(1, K + 1)[:, None]
    return (2.0 / np.pi) * simpson(u.values * np.sin(k * x), x=x, axis=-1)


def sobolev_tail_estimate(coefficients: np.ndarray, alpha: float) -> float:
    """
    Power-law estimate of the truncated part of sum k^(2 alpha) u_k^2.

    Fits |u_k| ~ C k^(-p) on the last quarter of coefficients above roundoff
    and integrates the fitted tail from K to infinity.
    """
    K = len(coefficients)
    k = np.arange(1, K + 1)
    window = slice(3 * K // 4, K)
    mags = np.abs(coefficients[window])
    floor = ROUNDOFF * float(np.max(np.abs(coefficients), initial=0.0))
    mask = mags > max(floor, 1e-300)
    if mask.sum() < 4:
        return 0.0
    slope, intercept = np.polyfit(np.log(k[window][mask]), np.log(mags[mask]), 1)
    p = -slope
    exponent = 2 * p - 2 * alpha - 1
    if exponent <= 0:
        return np.inf
    return float(np.sqrt(np.exp(2 * intercept) * K ** (-exponent) / exponent))


def sobolev_norm_with_tail(u: GridFunction, alpha: float, K: Optional[int] = None) -> Tuple[float, float, int]:
    """
    Head norm, tail estimate and the K used.

    Without an explicit K, the truncation starts at DEFAULT_K and doubles up
    to G/4 until the tail estimate falls below TAIL_RTOL of the head.
    """
    if not 0 <= alpha < 0.5:
        raise DomainError(f"alpha must lie in [0, 1/2), got {alpha}")
    limit = u.grid_size // 4
    adaptive = K is None
    K = min(DEFAULT_K, limit) if adaptive else K
    while True:
        coefficients = sine_coefficients(u, K)
        head = l2_alpha_norm(WeightedSequence(coefficients, alpha))
        tail = sobolev_tail_estimate(coefficients, alpha)
        if not adaptive or tail <= TAIL_RTOL * head or K >= limit:
            return head, tail, K
        K = min(2 * K, limit)


def sobolev_norm(u: GridFunction, alpha: float, K: Optional[int] = None) -> float:
    """(sum_k k^(2 alpha) u_k^2)^(1/2) over k <= K."""
    head, tail, K = sobolev_norm_with_tail(u, alpha, K)
    if tail > TAIL_RTOL * head:
        logger.info(f"W2^{alpha} norm {head:.6e} with K={K}, tail estimate {tail:.3e}")
    else:
        logger.debug(f"W2^{alpha} norm {head:.6e} with K={K}, tail estimate {tail:.3e}")
    return head


def l2_alpha_norm(v: WeightedSequence) -> float:
    entries = np.asarray(v.entries, dtype=float)
    n = np.arange(1, len(entries) + 1, dtype=float)
    return float(np.sqrt(np.sum(n ** (2 * v.alpha) * entries**2)))


def parse_expression(expression: str) -> Callable[[np.ndarray], np.ndarray]:
    """
    Compile a closed-form sigma(x) from a small whitelist.

    Only the variable x, the constant pi, sin, cos, numbers and arithmetic
    are accepted.
    """
    text = expression.strip().lower().replace("^", "**")
    if not text or not _EXPRESSION_CHARS.match(text):
        raise DomainError(f"expression contains unsupported characters: {expression!r}")
    names = set(re.findall(r"[a-z]+", text))
    if not names <= _ALLOWED_NAMES:
        raise DomainError(f"expression uses names outside {sorted(_ALLOWED_NAMES)}: {sorted(names - _ALLOWED_NAMES)}")

    x = sympy.Symbol("x", real=True)
    namespace = {"x": x, "pi": sympy.pi, "sin": sympy.sin, "cos": sympy.cos}
    try:
        parsed = sympy.sympify(text, locals=namespace)
    except (sympy.SympifyError, SyntaxError, TypeError) as e:
        raise DomainError(f"cannot parse expression {expression!r}: {e}") from e
    if not parsed.free_symbols <= {x}:
        raise DomainError(f"expression has free symbols {parsed.free_symbols}")

    compiled = sympy.lambdify(x, parsed, "numpy")

    def evaluate(grid: np.ndarray) -> np.ndarray:
        return np.broadcast_to(np.asarray(compiled(grid), dtype=float), grid.shape).copy()

    return evaluate
