"""
Rational Herglotz-Nevanlinna boundary functions.

A finite function has the form

    f(lam) = h0*lam + h + sum_j delta_j / (h_j - lam)

with h0 >= 0, delta_j > 0 and strictly increasing poles h_j.  The symbol
infinity stands for the Dirichlet condition.  Besides the pole/residue form
each function has a polynomial-fraction view f = f_up / f_down and a
coefficient-vector view c(f) used by the problem metric.
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Any, Dict, List, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np
from numpy.polynomial import polynomial as npp

from .exceptions import (
    DivisionRemainder,
    DomainViolation,
    InfinityEvaluation,
    InvalidCoefficients,
    NotHerglotz,
    PoleEvaluation,
)

logger = logging.getLogger(__name__)

POLE_TOL = 1e-12
CASE_TOL = 1e-10
REMAINDER_TOL = 1e-8
IMAG_TOL = 1e-8

ArrayLike = Union[float, np.ndarray]


class Kind(str, Enum):
    FINITE = "finite"
    INFINITY = "infinity"


class ThetaCase(str, Enum):
    """Which branch of the Theta transform applies"""

    EQUAL = "equal"  # tau == f(mu), index drops by one
    GREATER = "greater"  # tau > f(mu), index rises by one


def _fit(coeffs: np.ndarray, length: int) -> np.ndarray:
    """Pad with zeros or cut ascending coefficients to `length`."""
    coeffs = np.asarray(coeffs, dtype=float)
    if len(coeffs) >= length:
        return coeffs[:length].copy()
    return np.concatenate([coeffs, np.zeros(length - len(coeffs))])


class PolyFraction(NamedTuple):
    """f = up / down with ascending-degree coefficient arrays."""

    up: np.ndarray
    down: np.ndarray

    def up_at(self, lam: ArrayLike) -> ArrayLike:
        return npp.polyval(lam, self.up)

    def down_at(self, lam: ArrayLike) -> ArrayLike:
        return npp.polyval(lam, self.down)

    def up_derivative_at(self, lam: ArrayLike) -> ArrayLike:
        return npp.polyval(lam, npp.polyder(self.up)) if len(self.up) > 1 else 0.0 * np.asarray(lam)

    def down_derivative_at(self, lam: ArrayLike) -> ArrayLike:
        return npp.polyval(lam, npp.polyder(self.down)) if len(self.down) > 1 else 0.0 * np.asarray(lam)

    def wronskian_at(self, lam: ArrayLike) -> ArrayLike:
        """up' * down - up * down', which equals f'(lam) * down(lam)**2."""
        return (
            self.up_derivative_at(lam) * self.down_at(lam)
            - self.up_at(lam) * self.down_derivative_at(lam)
        )


@dataclass(frozen=True)
class RationalHN:
    """A rational Herglotz-Nevanlinna function, or the symbol infinity."""

    h0: float = 0.0
    h: float = 0.0
    poles: Tuple[Tuple[float, float], ...] = ()
    kind: Kind = Kind.FINITE

    def __post_init__(self):
        poles = tuple((float(hj), float(dj)) for hj, dj in self.poles)
        object.__setattr__(self, "poles", poles)
        object.__setattr__(self, "h0", float(self.h0))
        object.__setattr__(self, "h", float(self.h))
        object.__setattr__(self, "kind", Kind(self.kind))

        if self.kind is Kind.INFINITY:
            if self.h0 != 0.0 or self.h != 0.0 or poles:
                raise InvalidCoefficients("infinity carries no parameters")
            return
        if not (math.isfinite(self.h0) and math.isfinite(self.h)):
            raise InvalidCoefficients("h0 and h must be finite")
        if self.h0 < 0:
            raise InvalidCoefficients(f"h0 must be nonnegative, got {self.h0}")
        for hj, dj in poles:
            if not (math.isfinite(hj) and math.isfinite(dj)):
                raise InvalidCoefficients("pole parameters must be finite")
            if dj <= 0:
                raise InvalidCoefficients(f"residue at pole {hj} must be positive, got {dj}")
        locations = [hj for hj, _ in poles]
        if any(b <= a for a, b in zip(locations, locations[1:])):
            raise InvalidCoefficients(f"poles must be strictly increasing: {locations}")

    # Constructors

    @classmethod
    def infinity(cls) -> "RationalHN":
        return cls(kind=Kind.INFINITY)

    @classmethod
    def constant(cls, h: float) -> "RationalHN":
        return cls(h=h)

    @classmethod
    def linear(cls, h0: float, h: float = 0.0) -> "RationalHN":
        return cls(h0=h0, h=h)

    # Basic views

    @property
    def is_infinite(self) -> bool:
        return self.kind is Kind.INFINITY

    @property
    def d(self) -> int:
        return len(self.poles)

    @property
    def pole_locations(self) -> np.ndarray:
        return np.array([hj for hj, _ in self.poles], dtype=float)

    @property
    def residues(self) -> np.ndarray:
        return np.array([dj for _, dj in self.poles], dtype=float)

    def index(self) -> int:
        if self.is_infinite:
            return -1
        return 2 * self.d + (1 if self.h0 > 0 else 0)

    def first_pole(self) -> float:
        """h_1 when index >= 2, +inf otherwise."""
        if self.index() >= 2:
            return self.poles[0][0]
        return math.inf

    def _check_evaluable(self, lam: np.ndarray):
        if self.is_infinite:
            raise InfinityEvaluation("cannot evaluate the symbol infinity")
        if self.d:
            hs = self.pole_locations
            close = np.abs(lam[..., None] - hs) < POLE_TOL * (1.0 + np.abs(hs))
            if np.any(close):
                raise PoleEvaluation(f"evaluation at a pole of f (poles {hs.tolist()})")

    def evaluate(self, lam: ArrayLike) -> ArrayLike:
        lam_arr = np.asarray(lam, dtype=float)
        self._check_evaluable(lam_arr)
        value = self.h0 * lam_arr + self.h
        for hj, dj in self.poles:
            value = value + dj / (hj - lam_arr)
        return float(value) if np.ndim(value) == 0 else value

    def derivative_value(self, lam: ArrayLike) -> ArrayLike:
        lam_arr = np.asarray(lam, dtype=float)
        self._check_evaluable(lam_arr)
        value = self.h0 + 0.0 * lam_arr
        for hj, dj in self.poles:
            value = value + dj / (hj - lam_arr) ** 2
        return float(value) if np.ndim(value) == 0 else value

    def to_fraction(self) -> PolyFraction:
        """Polynomial pair with f_down = h0' * prod(h_j - lam)."""
        if self.is_infinite:
            return PolyFraction(np.array([-1.0]), np.array([0.0]))

        d = self.d
        hs = self.pole_locations
        scale = 1.0 / self.h0 if self.h0 > 0 else 1.0

        down = scale * (-1) ** d * npp.polyfromroots(hs) if d else np.array([scale])
        up = npp.polymul([self.h, self.h0], down)
        for j, (_, dj) in enumerate(self.poles):
            others = np.delete(hs, j)
            partial = (-1) ** (d - 1) * npp.polyfromroots(others) if d > 1 else np.array([1.0])
            up = npp.polyadd(up, dj * scale * partial)

        odd = self.h0 > 0
        return PolyFraction(_fit(up, d + 2 if odd else d + 1), _fit(down, d + 1))

    def coeff_vector(self) -> np.ndarray:
        """c(f): free coefficients of f_down then f_up; empty for infinity."""
        if self.is_infinite:
            return np.zeros(0)
        frac = self.to_fraction()
        if self.h0 > 0:
            return np.concatenate([frac.down, frac.up[:-1]])
        return np.concatenate([frac.down[:-1], frac.up])

    # Serialization

    def to_dict(self) -> Union[str, Dict[str, Any]]:
        if self.is_infinite:
            return "infinity"
        return {
            "h0": self.h0,
            "h": self.h,
            "poles": [{"h": hj, "delta": dj} for hj, dj in self.poles],
        }

    @classmethod
    def from_dict(cls, data: Union[str, Dict[str, Any]]) -> "RationalHN":
        if isinstance(data, str):
            if data.strip().lower() in ("infinity", "inf", "dirichlet"):
                return cls.infinity()
            raise InvalidCoefficients(f"unknown boundary function literal: {data!r}")
        if isinstance(data, (int, float)):
            return cls.constant(float(data))
        unknown = set(data) - {"h0", "h", "poles"}
        if unknown:
            raise InvalidCoefficients(f"unknown boundary function keys: {sorted(unknown)}")
        poles = tuple((p["h"], p["delta"]) for p in data.get("poles", []))
        return cls(h0=data.get("h0", 0.0), h=data.get("h", 0.0), poles=poles)

    def __str__(self) -> str:
        if self.is_infinite:
            return "infinity"
        terms = []
        if self.h0:
            terms.append(f"{self.h0:g}*lam")
        terms.append(f"{self.h:g}")
        terms.extend(f"{dj:g}/({hj:g}-lam)" for hj, dj in self.poles)
        return " + ".join(terms)


def from_fraction(up: Sequence[float], down: Sequence[float], M: int) -> RationalHN:
    """Recover the pole/residue form of up/down knowing its index M."""
    if M < -1:
        raise InvalidCoefficients(f"index must be >= -1, got {M}")
    if M == -1:
        return RationalHN.infinity()

    d, odd = divmod(M, 2)
    down = _fit(down, d + 1)
    up = _fit(up, d + 2 if odd else d + 1)
    if down[-1] == 0.0:
        raise InvalidCoefficients("denominator degree is lower than the index requires")

    hs = np.zeros(0)
    if d:
        roots = npp.polyroots(down)
        if np.any(np.abs(np.imag(roots)) > IMAG_TOL * (1.0 + np.abs(roots))):
            raise InvalidCoefficients(f"denominator has complex roots: {roots}")
        hs = np.sort(np.real(roots))
        if np.any(np.diff(hs) <= POLE_TOL * (1.0 + np.abs(hs[1:]))):
            raise InvalidCoefficients(f"denominator has a multiple root: {hs}")

    d_down = npp.polyder(down) if d else np.zeros(1)
    deltas = -npp.polyval(hs, up) / npp.polyval(hs, d_down) if d else np.zeros(0)
    if np.any(deltas <= 0):
        raise InvalidCoefficients(f"recovered residues are not positive: {deltas}")

    h0 = up[d + 1] / down[d] if odd else 0.0
    if odd and h0 <= 0:
        raise InvalidCoefficients(f"recovered h0 is not positive: {h0}")

    # h from the value at a reference point away from the poles
    ref = 0.0
    if d and np.min(np.abs(hs - ref)) < 1e-3:
        ref = hs[0] - 1.0
    value = npp.polyval(ref, up) / npp.polyval(ref, down)
    h = value - h0 * ref - float(np.sum(deltas / (hs - ref)))

    return RationalHN(h0=h0, h=h, poles=tuple(zip(hs.tolist(), deltas.tolist())))


def from_coeff_vector(M: int, c: Sequence[float]) -> RationalHN:
    """Inverse of RationalHN.coeff_vector for index M."""
    c = np.asarray(c, dtype=float)
    if len(c) != M + 1:
        raise InvalidCoefficients(f"index {M} needs {M + 1} coefficients, got {len(c)}")
    if M == -1:
        return RationalHN.infinity()

    d, odd = divmod(M, 2)
    if odd:
        down = c[: d + 1]
        up = np.concatenate([c[d + 1:], [(-1) ** d]])
    else:
        down = np.concatenate([c[:d], [(-1) ** d]])
        up = c[d:]
    return from_fraction(up, down, M)


def theta_transform(
    mu: float,
    tau: float,
    rho: float,
    f: RationalHN,
    case: Optional[ThetaCase] = None,
) -> RationalHN:
    """
    Build f_hat with f_hat(lam) = (mu - lam) / (f(lam) - tau) + rho.

    When tau == f(mu) the index drops by one, when tau > f(mu) it rises by
    one.  The branch is `case` if given, otherwise classified by tolerance.
    """
    if mu >= f.first_pole():
        raise DomainViolation(f"mu={mu} must lie below the first pole {f.first_pole()}")

    if f.is_infinite:
        if case is ThetaCase.EQUAL:
            raise DomainViolation("the index-decreasing branch needs a finite f")
        return RationalHN.constant(rho)

    f_mu = f.evaluate(mu)
    if tau < f_mu - CASE_TOL * (1.0 + abs(tau)):
        raise DomainViolation(f"tau={tau} is below f(mu)={f_mu}")
    if case is None:
        if abs(tau - f_mu) <= CASE_TOL * (1.0 + abs(tau)):
            case = ThetaCase.EQUAL
        else:
            case = ThetaCase.GREATER

    frac = f.to_fraction()
    shift = np.array([-mu + tau * rho, 1.0])  # lam - mu + tau*rho

    try:
        if case is ThetaCase.EQUAL:
            num_up = npp.polysub(rho * frac.up, npp.polymul(shift, frac.down))
            num_down = npp.polysub(frac.up, tau * frac.down)
            scale = (
                (abs(rho) + 1.0) * np.max(np.abs(frac.up))
                + (abs(mu) + abs(tau) * (1.0 + abs(rho)) + 1.0) * np.max(np.abs(frac.down))
            )
            up_hat, rem_up = npp.polydiv(num_up, [-mu, 1.0])
            down_hat, rem_down = npp.polydiv(num_down, [-mu, 1.0])
            remainder = max(np.max(np.abs(rem_up)), np.max(np.abs(rem_down)))
            if remainder > REMAINDER_TOL * scale:
                raise DivisionRemainder(
                    f"division by (lam - {mu}) leaves remainder {remainder:.3e}"
                )
            return from_fraction(up_hat, down_hat, f.index() - 1)

        up_hat = npp.polyadd(-rho * frac.up, npp.polymul(shift, frac.down))
        down_hat = npp.polyadd(-frac.up, tau * frac.down)
        return from_fraction(up_hat, down_hat, f.index() + 1)
    except InvalidCoefficients as e:
        if isinstance(e, NotHerglotz):
            raise
        raise NotHerglotz(f"theta transform left the Herglotz class: {e}") from e


def rational_set_violations(f: RationalHN, M: int, Q: float, delta: float) -> List[str]:
    """Reasons why f is not in R_{M,Q,delta}; empty when it is."""
    if f.index() != M:
        return [f"index {f.index()} differs from {M}"]
    if M == -1:
        return []

    reasons = []
    if abs(f.h) > Q:
        reasons.append(f"|h|={abs(f.h):g} exceeds Q={Q:g}")
    for hj, dj in f.poles:
        if not delta <= dj <= Q:
            reasons.append(f"residue {dj:g} at pole {hj:g} outside [{delta:g}, {Q:g}]")
    if f.d:
        hs = f.pole_locations
        if hs[0] < 1:
            reasons.append(f"first pole {hs[0]:g} below 1")
        for a, b in zip(hs, hs[1:]):
            if a + delta > b:
                reasons.append(f"poles {a:g}, {b:g} closer than {delta:g}")
        if hs[-1] > Q:
            reasons.append(f"last pole {hs[-1]:g} exceeds Q={Q:g}")
    if M % 2 and not delta <= f.h0 <= Q:
        reasons.append(f"h0={f.h0:g} outside [{delta:g}, {Q:g}]")
    return reasons


def in_rational_set(f: RationalHN, M: int, Q: float, delta: float) -> bool:
    return not rational_set_violations(f, M, Q, delta)


def set_parameters(f: RationalHN) -> Optional[Tuple[float, float]]:
    """Smallest Q and largest delta with f in R_{ind f, Q, delta}."""
    if f.is_infinite:
        return 0.0, math.inf
    hs, ds = f.pole_locations, f.residues
    if f.d and hs[0] < 1:
        return None

    upper = [abs(f.h)]
    lower = [math.inf]
    if f.d:
        upper.extend([float(np.max(ds)), float(hs[-1])])
        lower.append(float(np.min(ds)))
        if f.d > 1:
            lower.append(float(np.min(np.diff(hs))))
    if f.h0 > 0:
        upper.append(f.h0)
        lower.append(f.h0)
    return max(upper), min(lower)
