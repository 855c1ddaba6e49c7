"""Askey-Wilson measures, partition functions and large-N density limits.

The continuous part of an Askey-Wilson measure is integrated in the angle
``theta`` (``y = cos theta``) where the ``1/sqrt(1 - y^2)`` factor cancels
and the integrand is smooth on ``[0, pi]``.  Large powers ``g(y)^N`` are
handled in log form: every integrand is divided by ``M^N`` with ``M`` the
largest value of ``g`` on the support, and the scale is returned separately.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .params import (DerivedParams, ParameterError, StripParams, derive_params, params_from_boundary,
                     technical_distance)

_GL_ORDER = 20
_GL_X, _GL_W = np.polynomial.legendre.leggauss(_GL_ORDER)
THRESHOLD_TOL = 1e-9


class QuadratureError(RuntimeError):
    pass


class ShockRegionError(ParameterError):
    """The boundary parameters satisfy ``AC >= 1``; the integral representation does not apply."""


class TechnicalConditionWarning(UserWarning):
    pass


# ------------------------------------------------------------ q-Pochhammer

def qpochhammer(z, q, n: int | float = math.inf, tol: float = 1e-17):
    """``(z; q)_n = prod_{j<n} (1 - z q^j)``; complex ``z`` allowed.

    For ``n = inf`` the product stops once ``|z| q^j / (1 - |q|) < tol``,
    which bounds the relative tail error by about ``tol``.
    """
    if n != math.inf:
        out = 1
        for j in range(int(n)):
            out *= 1 - z * q ** j
        return out
    if not abs(q) < 1:
        raise ParameterError("infinite q-Pochhammer needs |q| < 1")
    out = 1
    zq = z
    aq = abs(q)
    while True:
        out *= 1 - zq
        if abs(zq) / (1 - aq) < tol or zq == 0:
            return out
        zq *= q


def qpoch_multi(zs: Sequence, q, n=math.inf):
    out = 1
    for z in zs:
        out *= qpochhammer(z, q, n)
    return out


def _pairs(a, b, c, d):
    return (a * c, a * d, b * c, b * d)


def check_admissible(a, b, c, d, q) -> None:
    if not -1 < q < 1:
        raise ParameterError(f"q must lie in (-1, 1), got {q}")
    prods = list(_pairs(a, b, c, d))
    prods += [q * x for x in _pairs(a, b, c, d)]
    prods += [a * b * c * d, q * a * b * c * d]
    for x in prods:
        if x >= 1:
            raise ParameterError("inadmissible Askey-Wilson parameters: the products ac, ad, bc, bd, "
                                 "their q-multiples, abcd and qabcd must avoid [1, inf)")


# ------------------------------------------------------------ quadrature

def _gl(f, lo, hi):
    mid, half = (lo + hi) / 2, (hi - lo) / 2
    return half * np.dot(_GL_W, f(mid + half * _GL_X))


def adaptive_panels(f: Callable, lo: float, hi: float, rel_tol: float = 1e-12, initial: int = 16,
                    max_panels: int = 4000) -> list[tuple[float, float]]:
    """Composite Gauss-Legendre panels on ``[lo, hi]`` refined until each agrees with its halves."""
    edges = np.linspace(lo, hi, initial + 1)
    todo = [(a, b, _gl(f, a, b)) for a, b in zip(edges[:-1], edges[1:])]
    scale = abs(sum(v for _, _, v in todo))
    done = []
    while todo:
        a, b, whole = todo.pop()
        m = (a + b) / 2
        left, right = _gl(f, a, m), _gl(f, m, b)
        scale = max(scale, abs(left + right))
        if abs(left + right - whole) <= rel_tol * max(scale, 1e-300) or b - a < 1e-12:
            done.append((a, b))
        else:
            todo += [(a, m, left), (m, b, right)]
        if len(done) + len(todo) > max_panels:
            raise QuadratureError(f"adaptive quadrature exceeded {max_panels} panels")
    return sorted(done)


def fixed_quad(f: Callable, panels: Sequence[tuple[float, float]]) -> float:
    return float(sum(_gl(f, a, b) for a, b in panels))


# ------------------------------------------------------------ measures

@dataclass(frozen=True)
class Atom:
    y: float
    mass: float
    chi: float
    j: int


@dataclass
class AWMeasure:
    """Askey-Wilson probability measure with real parameters ``(a, b, c, d, q)``."""
    a: float
    b: float
    c: float
    d: float
    q: float
    atoms: list[Atom] = field(default_factory=list)
    near_threshold: list[tuple[float, int]] = field(default_factory=list)

    @property
    def params(self) -> tuple:
        return self.a, self.b, self.c, self.d, self.q

    def prefactor(self) -> float:
        a, b, c, d, q = self.params
        num = qpoch_multi([q, a * b, a * c, a * d, b * c, b * d, c * d], q)
        return float(num / (2 * math.pi * qpochhammer(a * b * c * d, q)))

    def log_weight(self, theta: np.ndarray) -> np.ndarray:
        """``log |(e^{2i theta}; q)_inf / prod (chi e^{i theta}; q)_inf|^2``."""
        q = self.q
        cth = np.cos(theta)
        c2 = np.cos(2 * theta)
        out = np.log(2 - 2 * c2)
        qj = q
        while abs(qj) > 1e-18:
            out += np.log1p(-2 * qj * c2 + qj * qj)
            qj *= q
        for chi in (self.a, self.b, self.c, self.d):
            if chi == 0:
                continue
            x = chi
            while abs(x) > 1e-18:
                out -= np.log1p(-2 * x * cth + x * x)
                x *= q
        return out

    def density(self, y) -> np.ndarray:
        """Continuous density on ``[-1, 1]`` (zero outside)."""
        y = np.asarray(y, dtype=float)
        inside = np.abs(y) < 1
        out = np.zeros_like(y)
        th = np.arccos(y[inside])
        out[inside] = self.prefactor() * np.exp(self.log_weight(th)) / np.sqrt(1 - y[inside] ** 2)
        return out

    def theta_integrand(self, func_log: Callable | None = None, shift: float = 0.0) -> Callable:
        """``theta -> density(cos theta) sin theta * exp(func_log(cos theta) - shift)``."""
        pre = self.prefactor()

        def f(theta):
            lw = self.log_weight(theta)
            if func_log is not None:
                lw = lw + func_log(np.cos(theta)) - shift
            return pre * np.exp(lw)
        return f

    def continuous_mass(self, rel_tol: float = 1e-12) -> float:
        f = self.theta_integrand()
        return fixed_quad(f, adaptive_panels(f, 0.0, math.pi, rel_tol))

    def atom_mass(self) -> float:
        return float(sum(at.mass for at in self.atoms))

    def total_mass(self, rel_tol: float = 1e-12) -> float:
        return self.continuous_mass(rel_tol) + self.atom_mass()


def _atom_masses(a, b, c, d, q) -> list[tuple[float, float, int]]:
    """Atoms generated by ``a`` (|a| > 1): ``(y_j, p(y_j), j)``."""
    out = []
    p0 = qpoch_multi([a ** -2, b * c, b * d, c * d], q) / qpoch_multi([b / a, c / a, d / a, a * b * c * d], q)
    p = p0
    j = 0
    while abs(a * q ** j) > 1:
        y = (a * q ** j + 1 / (a * q ** j)) / 2
        out.append((y, p0 if j == 0 else p * (1 - a * a * q ** (2 * j)) / (1 - a * a), j))
        # ratio of the j-th to the (j+1)-th product terms, safe when b, c or d is 0
        k = j
        fac = (1 - a * a * q ** k) / (1 - q ** (k + 1)) * (q / a)
        for x in (b, c, d):
            fac *= (1 - a * x * q ** k) / (x - a * q ** (k + 1))
        p *= fac
        j += 1
        if q == 0:
            break
    return out


def aw_measure(a: float, b: float, c: float, d: float, q: float) -> AWMeasure:
    """Build the measure with its atom list; warns near an atom threshold."""
    a, b, c, d, q = (float(x) for x in (a, b, c, d, q))
    check_admissible(a, b, c, d, q)
    chis = [a, b, c, d]
    atoms: list[Atom] = []
    near: list[tuple[float, int]] = []
    for i, chi in enumerate(chis):
        # flag |chi q^j| within tolerance of 1
        x, j = abs(chi), 0
        while x > 1 - 1e-3 and j < 10_000:
            if abs(x - 1) < THRESHOLD_TOL:
                near.append((chi, j))
            x *= abs(q)
            j += 1
            if q == 0:
                break
        if abs(chi) > 1:
            others = chis[:i] + chis[i + 1:]
            for y, mass, jj in _atom_masses(chi, *others, q):
                atoms.append(Atom(float(y), float(mass), chi, jj))
    if near:
        warnings.warn(f"Askey-Wilson parameter within {THRESHOLD_TOL} of an atom threshold: {near}",
                      TechnicalConditionWarning, stacklevel=2)
    atoms.sort(key=lambda at: -at.y)
    return AWMeasure(a, b, c, d, q, atoms, near)


# ------------------------------------------------------------ expectations

@dataclass(frozen=True)
class PowerExpectation:
    """``E g(Y)^N`` split into parts, all divided by ``exp(log_scale)``."""
    log_scale: float
    continuous: float
    atoms: tuple[float, ...]
    panels: tuple

    @property
    def scaled_total(self) -> float:
        return self.continuous + sum(self.atoms)

    @property
    def log_value(self) -> float:
        return self.log_scale + math.log(self.scaled_total)

    @property
    def value(self) -> float:
        return math.exp(self.log_value)

    @property
    def continuous_share(self) -> float:
        return self.continuous / self.scaled_total

    @property
    def atom_shares(self) -> tuple[float, ...]:
        return tuple(x / self.scaled_total for x in self.atoms)


def power_expectation(measure: AWMeasure, N: int, s: float, rel_tol: float = 1e-12,
                      panels=None) -> PowerExpectation:
    """``E (1 + s + 2 sqrt(s) Y)^N`` with ``Y ~ measure``; ``panels`` reuses a quadrature grid."""
    if not s > 0:
        raise ParameterError("needs r t > 0")
    rs = math.sqrt(s)

    def g(y):
        return 1 + s + 2 * rs * y

    ys = [1.0] + [at.y for at in measure.atoms]
    M = max(abs(g(y)) for y in ys)
    logM = N * math.log(M)
    f = measure.theta_integrand(lambda y: N * np.log(g(y)), shift=logM) if N else measure.theta_integrand()
    if panels is None:
        panels = adaptive_panels(f, 0.0, math.pi, rel_tol)
    cont = fixed_quad(f, panels)
    parts = []
    for at in measure.atoms:
        gy = g(at.y)
        sign = -1.0 if (gy < 0 and N % 2) else 1.0
        parts.append(sign * at.mass * math.exp(N * math.log(abs(gy)) - logM) if gy != 0 else 0.0)
    return PowerExpectation(logM, cont, tuple(parts), tuple(panels))


def aw_expectation(measure: AWMeasure, N: int, r: float, t: float, rel_tol: float = 1e-12) -> float:
    """``E (1 + rt + 2 sqrt(rt) Y)^N``."""
    return power_expectation(measure, N, r * t, rel_tol).value


# ------------------------------------------------------------ partition

def _derived(params) -> DerivedParams:
    return params if isinstance(params, DerivedParams) else derive_params(params)


def _bulk_factor(params: StripParams) -> float:
    q = params.theta1 / params.theta2
    return float((1 - params.theta1) / (params.theta2 * (1 - q)))


def partition_measure(params: StripParams, t: float) -> AWMeasure:
    dp = _derived(params)
    if dp.A * dp.C >= 1:
        raise ShockRegionError(f"AC = {dp.A * dp.C:.6g} >= 1: outside the fan region")
    At, Bt, Ct, Dt = dp.tilde
    st = math.sqrt(t)
    return aw_measure(At * st, Bt * st, Ct / st, Dt / st, float(dp.q))


def log_partition_Z(N: int, t: float, params: StripParams, rel_tol: float = 1e-12,
                    panels=None) -> tuple[float, PowerExpectation]:
    """``log Z_N(t)`` and the underlying expectation (for share diagnostics)."""
    dp = _derived(params)
    nu = partition_measure(params, t)
    ex = power_expectation(nu, N, float(dp.r) * t, rel_tol, panels)
    return N * math.log(_bulk_factor(params)) + ex.log_value, ex


def partition_Z(N: int, t: float, params: StripParams, rel_tol: float = 1e-12) -> float:
    """``Z_N(t) = <W| (Eu + t Du)^N |V>`` through Askey-Wilson quadrature (fan region only)."""
    return math.exp(log_partition_Z(N, t, params, rel_tol)[0])


def _density_aw(N: int, params: StripParams, h: float, rel_tol: float) -> float:
    # one panel grid for all shifted t so quadrature error cancels in the differences
    _, ex = log_partition_Z(N, 1.0, params, rel_tol)
    panels = ex.panels

    def lz(t):
        return log_partition_Z(N, t, params, rel_tol, panels)[0]

    d1 = (lz(1 + h) - lz(1 - h)) / (2 * h)
    d2 = (lz(1 + h / 2) - lz(1 - h / 2)) / h
    return (4 * d2 - d1) / 3 / N


def mean_density(N: int, params: StripParams, method: str = "auto", h: float = 1e-5,
                 rel_tol: float = 1e-13) -> float:
    """Mean particle density ``d/dt log Z_N(t) / N`` at ``t = 1`` on the horizontal path.

    ``method="aw"`` differentiates the Askey-Wilson representation (fan region
    only); ``"mpa"`` propagates the ansatz derivative exactly; ``"auto"`` picks
    ``"aw"`` in the fan region and ``"mpa"`` otherwise.
    """
    dp = _derived(params)
    if method == "auto":
        method = "aw" if dp.A * dp.C < 1 else "mpa"
    if method == "aw":
        return _density_aw(N, params, h, rel_tol)
    if method == "mpa":
        from .mpa import mean_density_mpa
        return mean_density_mpa(N, params, mode="float")
    raise ValueError(f"unknown method {method!r}")


# ------------------------------------------------------------ phases

@dataclass(frozen=True)
class PhaseReport:
    region: str
    phase: str | None
    limit_density: float | None
    A: float
    C: float
    r: float
    candidates: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {"region": self.region, "phase": self.phase, "limit_density": self.limit_density,
                "A": self.A, "C": self.C, "r": self.r, "candidates": self.candidates}


def classify_phase(A: float, C: float, r: float, tol: float = 1e-12) -> PhaseReport:
    """Region and phase from boundary parameters ``A, C`` and the tilt ``r``."""
    sr = math.sqrt(r)
    mc, hd, ld = sr / (1 + sr), A * r / (1 + A * r), r / (r + C)
    if A * C >= 1:
        return PhaseReport("shock", None, None, A, C, r)
    on_a = abs(A - 1 / sr) <= tol * max(1.0, A)
    on_c = abs(C - sr) <= tol * max(1.0, C)
    if on_a or on_c:
        cands = {"maximal-current": mc}
        if on_a:
            cands["high-density"] = hd
        if on_c:
            cands["low-density"] = ld
        vals = list(cands.values())
        limit = vals[0] if max(vals) - min(vals) <= 1e-9 else None
        return PhaseReport("fan", "boundary", limit, A, C, r, cands)
    if A > 1 / sr:
        return PhaseReport("fan", "high-density", hd, A, C, r)
    if C > sr:
        return PhaseReport("fan", "low-density", ld, A, C, r)
    return PhaseReport("fan", "maximal-current", mc, A, C, r)


def phase_limit(params) -> PhaseReport:
    dp = _derived(params)
    return classify_phase(dp.A, dp.C, float(dp.r))


def theta_from_qr(q: float, r: float) -> tuple[float, float]:
    """Bulk weights with ``theta1/theta2 = q`` and ``(1-theta2)/(1-theta1) = r``."""
    theta2 = (1 - r) / (1 - r * q)
    return q * theta2, theta2


def phase_sweep(r: float, grid: tuple[int, int] = (20, 20), a_range=(0.05, 3.0), c_range=(0.05, 3.0),
                q: float = 0.4, B: float = -0.1, D: float = -0.1, n_list: Sequence[int] = ()) -> list[dict]:
    """Phase labels over an ``(A, C)`` grid; densities at ``n_list`` where the point is realizable."""
    theta1, theta2 = theta_from_qr(q, r)
    rows = []
    for A in np.linspace(*a_range, grid[0]):
        for C in np.linspace(*c_range, grid[1]):
            rep = classify_phase(float(A), float(C), r)
            row = {"A": float(A), "C": float(C), "r": r, "region": rep.region, "phase": rep.phase or "",
                   "limit_density": rep.limit_density}
            if n_list:
                try:
                    p = params_from_boundary(float(A), B, float(C), D, theta1, theta2)
                    p.check_theorem_mode()
                    from .mpa import mean_density_mpa
                    for n in n_list:
                        row[f"density_N{n}"] = mean_density_mpa(n, p, mode="float")
                except ParameterError:
                    for n in n_list:
                        row[f"density_N{n}"] = None
            rows.append(row)
    return rows


def write_sweep_csv(fh, rows: list[dict]) -> None:
    if not rows:
        return
    keys = list(rows[0].keys())
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(keys)
    for row in rows:
        w.writerow(["" if row[k] is None else (f"{row[k]:.17g}" if isinstance(row[k], float) else row[k])
                    for k in keys])


def check_technical(params, tol: float = THRESHOLD_TOL) -> float:
    """Distance of the tilted parameters to the set ``{q^-l}``; warns when below ``tol``."""
    dist = technical_distance(_derived(params))
    if dist < tol:
        warnings.warn(f"tilted boundary parameters within {dist:.3g} of q^-l", TechnicalConditionWarning,
                      stacklevel=2)
    return dist
