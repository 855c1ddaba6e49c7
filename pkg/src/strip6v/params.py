"""Model parameters and the derived open-ASEP / Askey-Wilson parameterization."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields
from fractions import Fraction
from typing import Any


class ParameterError(ValueError):
    """A parameter set violates a precondition; the message names the constraint."""


@dataclass(frozen=True)
class StripParams:
    """Boundary weights ``a, b, c, d`` and bulk weights ``theta1, theta2``.

    ``a``/``c`` are the injection/ejection probabilities at the left boundary
    and ``d``/``b`` those at the right boundary.  Entries may be floats or
    :class:`fractions.Fraction` (exact mode).
    """
    a: Any
    b: Any
    c: Any
    d: Any
    theta1: Any
    theta2: Any

    def as_dict(self) -> dict:
        return {k: float(v) for k, v in asdict(self).items()}

    def is_rational(self) -> bool:
        return all(isinstance(getattr(self, f.name), (Fraction, int)) for f in fields(self))

    def check_probabilities(self) -> "StripParams":
        for f in fields(self):
            v = getattr(self, f.name)
            if not 0 <= v <= 1:
                raise ParameterError(f"{f.name} must lie in [0, 1], got {float(v)}")
        return self

    def check_ergodic(self) -> "StripParams":
        """All six weights strictly inside (0, 1), which makes every path chain irreducible."""
        for f in fields(self):
            v = getattr(self, f.name)
            if not 0 < v < 1:
                raise ParameterError(f"{f.name} must lie in (0, 1) for an irreducible chain, got {float(v)}")
        return self

    def check_theorem_mode(self, singular_tol: float = 1e-9, max_power: int = 200) -> "StripParams":
        """Ergodicity plus ``theta1 < theta2``, ``b + d < 1`` and non-singularity."""
        self.check_ergodic()
        if not self.theta1 < self.theta2:
            raise ParameterError(
                f"theta1 < theta2 is required (got theta1={float(self.theta1)}, theta2={float(self.theta2)})")
        if not self.b + self.d < 1:
            raise ParameterError(f"b+d must be < 1, got {float(self.b + self.d)}")
        l = singular_power(self, singular_tol, max_power)
        if l is not None:
            raise ParameterError(
                f"singular case: ab/(cd) equals q^{l} (q = theta1/theta2) within {singular_tol}")
        return self

    def swapped(self) -> "StripParams":
        """Particle-hole dual: theta1<->theta2, a<->c, b<->d."""
        return StripParams(self.c, self.d, self.a, self.b, self.theta2, self.theta1)

    def scaled(self, eps) -> "StripParams":
        return StripParams(*(getattr(self, f.name) * eps for f in fields(self)))


def singular_power(p: StripParams, tol: float = 1e-9, max_power: int = 200) -> int | None:
    """Smallest ``l`` with ``|ab/(cd) - q^l| < tol``, or None."""
    if p.c * p.d == 0:
        return None
    ratio = float(p.a) * float(p.b) / (float(p.c) * float(p.d))
    q = float(p.theta1) / float(p.theta2)
    ql = 1.0
    for l in range(max_power + 1):
        if abs(ratio - ql) < tol:
            return l
        ql *= q
        if ql < tol and ratio > 2 * tol:
            break
    return None


def kappa(u, v, q, sign: int = 1) -> float:
    """Root ``kappa_+`` (sign=+1) or ``kappa_-`` of ``u k^2 - (1-q-u+v) k - v = 0``."""
    s = 1 - q - u + v
    disc = math.sqrt(s * s + 4 * u * v)
    if sign > 0:
        # stable form when s < 0
        return (s + disc) / (2 * u) if s >= 0 else 2 * v / (disc - s)
    return (s - disc) / (2 * u) if s <= 0 else -2 * v / (s + disc)


def rates_from_boundary(A, B, C, D, q):
    """Inverse of the kappa parameterization: ``(alpha, beta, gamma, delta)``."""
    alpha = (1 - q) / ((1 + C) * (1 + D))
    gamma = -(1 - q) * C * D / ((1 + C) * (1 + D))
    beta = (1 - q) / ((1 + A) * (1 + B))
    delta = -(1 - q) * A * B / ((1 + A) * (1 + B))
    return alpha, beta, gamma, delta


@dataclass(frozen=True)
class DerivedParams:
    q: Any
    r: Any
    alpha: Any
    beta: Any
    gamma: Any
    delta: Any
    A: float
    B: float
    C: float
    D: float

    @property
    def tilde(self) -> tuple[float, float, float, float]:
        """``(A sqrt r, B sqrt r, C / sqrt r, D / sqrt r)``."""
        sr = math.sqrt(float(self.r))
        return self.A * sr, self.B * sr, self.C / sr, self.D / sr

    @property
    def tilde_A(self):
        return self.tilde[0]

    @property
    def tilde_B(self):
        return self.tilde[1]

    @property
    def tilde_C(self):
        return self.tilde[2]

    @property
    def tilde_D(self):
        return self.tilde[3]

    def rates(self) -> tuple:
        """Open-ASEP rates ``(alpha, beta, gamma, delta, L, R)`` with ``L = q, R = 1``."""
        return (self.alpha, self.beta, self.gamma, self.delta, self.q, 1)

    def as_dict(self) -> dict:
        d = {k: float(v) for k, v in asdict(self).items()}
        d.update(zip(("tilde_A", "tilde_B", "tilde_C", "tilde_D"), self.tilde))
        return d


def asep_rates(p: StripParams) -> tuple:
    """``(q, alpha, beta, gamma, delta)`` of the open ASEP whose tilt is the strip measure."""
    a, b, c, d, t1, t2 = p.a, p.b, p.c, p.d, p.theta1, p.theta2
    q = t1 / t2
    alpha = (1 - t1) * a / t2
    beta = (1 - t2) * b / (t2 * (1 - b - d))
    gamma = (1 - t2) * c / t2
    delta = (1 - t1) * d / (t2 * (1 - b - d))
    return q, alpha, beta, gamma, delta


def derive_params(p: StripParams) -> DerivedParams:
    p.check_theorem_mode()
    q, alpha, beta, gamma, delta = asep_rates(p)
    r = (1 - p.theta2) / (1 - p.theta1)
    qf = float(q)
    A = kappa(float(beta), float(delta), qf, +1)
    B = kappa(float(beta), float(delta), qf, -1)
    C = kappa(float(alpha), float(gamma), qf, +1)
    D = kappa(float(alpha), float(gamma), qf, -1)
    return DerivedParams(q, r, alpha, beta, gamma, delta, A, B, C, D)


def params_from_boundary(A, B, C, D, theta1, theta2) -> StripParams:
    """Strip weights realizing given ``(A, B, C, D)`` at fixed bulk weights.

    Raises :class:`ParameterError` when a resulting weight leaves (0, 1).
    """
    q = theta1 / theta2
    alpha, beta, gamma, delta = rates_from_boundary(A, B, C, D, q)
    a = alpha * theta2 / (1 - theta1)
    c = gamma * theta2 / (1 - theta2)
    kb = beta * theta2 / (1 - theta2)
    kd = delta * theta2 / (1 - theta1)
    s = 1 / (1 + kb + kd)  # s = 1 - b - d
    p = StripParams(a, kb * s, c, kd * s, theta1, theta2)
    p.check_ergodic()
    return p


def technical_distance(dp: DerivedParams, max_power: int = 400) -> float:
    """``min |x - q^{-l}|`` over ``x`` in the absolute tilted parameters.

    Zero means the technical condition behind the large-N density limits fails.
    """
    q = float(dp.q)
    best = math.inf
    for x in map(abs, dp.tilde):
        ql = 1.0
        for _ in range(max_power):
            best = min(best, abs(x - ql))
            if ql > x + 1:
                break
            ql /= q
    return best
