"""Matrix product ansatz: DEHP-algebra evaluation and stationary measures.

Words are evaluated abstractly: only the relations

    DE - qED = D + E,   <W|(alpha E - gamma D) = <W|,   (beta D - delta E)|V> = |V>,

and ``<W|V> = 1`` are used.  Two independent evaluators are provided.

* ``"normal"``: rewrite the word to the normal form ``sum c[n,m] E^n D^m``
  and evaluate monomials by peeling a trailing ``D`` or a leading ``E``
  against the boundary vectors.
* ``"transfer"``: in the shifted generators ``d = (1-q)D - 1``,
  ``e = (1-q)E - 1`` (which satisfy ``de - q ed = 1 - q``) the row vector
  ``<W| word`` stays in the span of ``<W| d^m``, so a word is a running
  coefficient vector updated letter by letter.  This costs ``O(len^2)`` and
  is what measures and partition functions use.

The six-vertex letters are ``Du = (1-theta2)/theta2 D``,
``Eu = (1-theta1)/theta2 E``, ``Dr = Du + 1`` and ``Er = Eu - 1``.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable, Sequence

import mpmath
import numpy as np

from .lattice import UP, DownRightPath, build_path
from .params import DerivedParams, ParameterError, StripParams, asep_rates

DEFAULT_DPS = 50
MODES = ("float", "mpmath", "exact")


class SingularCaseError(ParameterError):
    """``alpha beta`` is (numerically) ``q^l gamma delta``; the ansatz normalizer may vanish."""


def default_dps() -> int:
    import os
    return int(os.environ.get("STRIP6V_PRECISION", DEFAULT_DPS))


def _converter(mode: str):
    if mode == "float":
        return float
    if mode == "mpmath":
        return lambda x: mpmath.mpf(x) if not isinstance(x, Fraction) else mpmath.mpf(x.numerator) / x.denominator
    if mode == "exact":
        def conv(x):
            if isinstance(x, (Fraction, int)):
                return Fraction(x)
            raise ParameterError("exact mode needs rational (Fraction) parameters")
        return conv
    raise ValueError(f"unknown number mode {mode!r}; choose from {MODES}")


def _rates(params) -> tuple:
    """``(q, alpha, beta, gamma, delta)`` from StripParams, DerivedParams or a tuple."""
    if isinstance(params, StripParams):
        return asep_rates(params)
    if isinstance(params, DerivedParams):
        return params.q, params.alpha, params.beta, params.gamma, params.delta
    return tuple(params)


def check_nonsingular(q, alpha, beta, gamma, delta, rel_tol: float = 1e-12, max_power: int = 10_000) -> None:
    ab = float(alpha) * float(beta)
    gd = float(gamma) * float(delta)
    ql = 1.0
    for l in range(max_power):
        if abs(ab - ql * gd) < rel_tol * ab:
            raise SingularCaseError(f"singular case: alpha*beta = q^{l} * gamma*delta")
        ql *= float(q)
        if ql * gd < rel_tol * ab * 1e-3:
            break


# ------------------------------------------------------------ letter algebra

def letter_coeffs(letter: str, params=None) -> tuple:
    """Letter as ``(x, y, z)`` meaning ``x D + y E + z I``."""
    if letter == "D":
        return (1, 0, 0)
    if letter == "E":
        return (0, 1, 0)
    if letter == "I":
        return (0, 0, 1)
    if not isinstance(params, StripParams):
        raise ParameterError(f"six-vertex letter {letter!r} needs StripParams")
    ku = (1 - params.theta2) / params.theta2
    ke = (1 - params.theta1) / params.theta2
    table = {"Du": (ku, 0, 0), "Eu": (0, ke, 0), "Dr": (ku, 0, 1), "Er": (0, ke, -1)}
    try:
        return table[letter]
    except KeyError:
        raise ValueError(f"unknown letter {letter!r}") from None


def path_letters(path: DownRightPath, tau: Sequence[int]) -> list[str]:
    return [("D" if t else "E") + ("u" if lab == UP else "r") for lab, t in zip(path.labels, tau)]


# --------------------------------------------------------- transfer method

class DEHPTransfer:
    """Row vectors ``<W| word`` stored as coefficients over ``<W| d^m``."""

    def __init__(self, q, alpha, beta, gamma, delta, mode: str = "float", check: bool = True):
        conv = _converter(mode)
        self.mode = mode
        self.q, self.alpha, self.beta, self.gamma, self.delta = map(conv, (q, alpha, beta, gamma, delta))
        if check:
            check_nonsingular(self.q, self.alpha, self.beta, self.gamma, self.delta)
        self.one = conv(1)
        self.zero = conv(0)
        self._qpow = [self.one]
        self._h = [self.one]
        self._conv = conv
        s = 1 - self.q
        self._inv1mq = self.one / s
        self._cw = (s - self.alpha + self.gamma) / self.alpha
        self._gw = self.gamma / self.alpha

    @classmethod
    def from_params(cls, params, mode: str = "float", check: bool = True) -> "DEHPTransfer":
        return cls(*_rates(params), mode=mode, check=check)

    def _arr(self, values):
        return np.array(values, dtype=float if self.mode == "float" else object)

    def qpow(self, n: int):
        while len(self._qpow) < n:
            self._qpow.append(self._qpow[-1] * self.q)
        return self._arr(self._qpow[:n])

    def terminal(self, n: int):
        """``h[m] = <W| d^m |V>`` for ``m < n``."""
        h = self._h
        q, al, be, ga, de = self.q, self.alpha, self.beta, self.gamma, self.delta
        s = 1 - q
        while len(h) < n:
            m = len(h) - 1
            qm = self.qpow(m + 1)[m]
            prev = h[m - 1] if m >= 1 else self.zero
            num = (al * (s - be + de) + de * qm * (s - al + ga)) * h[m] + al * de * (1 - qm) * prev
            h.append(num / (al * be - ga * de * qm))
        return self._arr(h[:n])

    def start(self):
        return self._arr([self.one])

    def times_d(self, v):
        return np.concatenate([self._arr([self.zero]), v])

    def times_e(self, v):
        n = len(v)
        qp = self.qpow(n)
        out = self._arr([self.zero] * (n + 1))
        w = v * qp
        out[:n] += w * self._cw
        out[1:] += w * self._gw
        out[:n - 1] += (v * (1 - qp))[1:]
        return out

    def times(self, v, coeffs):
        """``v (x D + y E + z I)``."""
        x, y, z = coeffs
        n = len(v)
        out = self._arr([self.zero] * (n + 1))
        if x != 0 or y != 0:
            # D = (d + 1)/(1-q), E = (e + 1)/(1-q)
            if x != 0:
                out += self.times_d(v) * (x * self._inv1mq)
            if y != 0:
                out += self.times_e(v) * (y * self._inv1mq)
            out[:n] += v * ((x + y) * self._inv1mq)
        if z != 0:
            out[:n] += v * z
        return out

    def value(self, v):
        return np.dot(v, self.terminal(len(v)))

    def evaluate(self, word: Iterable, params=None):
        v = self.start()
        for letter in word:
            coeffs = letter if isinstance(letter, tuple) else letter_coeffs(letter, params)
            v = self.times(v, coeffs)
        return self.value(v)


# ---------------------------------------------------- normal-form method

class NormalForm(dict):
    """Sparse ``{(n, m): c}`` standing for ``sum c E^n D^m``."""

    def add(self, other: "NormalForm", scale=1) -> "NormalForm":
        out = NormalForm(self)
        for k, c in other.items():
            out[k] = out.get(k, 0) + scale * c
        return out

    def scale(self, s) -> "NormalForm":
        return NormalForm({k: s * c for k, c in self.items()})

    def times_D(self) -> "NormalForm":
        return NormalForm({(n, m + 1): c for (n, m), c in self.items()})


class NormalOrdering:
    """Evaluator by rewriting ``DE -> qED + D + E`` and boundary elimination."""

    def __init__(self, q, alpha, beta, gamma, delta, mode: str = "float", check: bool = True):
        conv = _converter(mode)
        self.q, self.alpha, self.beta, self.gamma, self.delta = map(conv, (q, alpha, beta, gamma, delta))
        if check:
            check_nonsingular(self.q, self.alpha, self.beta, self.gamma, self.delta)
        self.one = conv(1)
        self._dme = {0: NormalForm({(1, 0): self.one})}
        self._f: dict[tuple[int, int], object] = {}

    def d_power_e(self, m: int) -> NormalForm:
        """Normal form of ``D^m E``."""
        while len(self._dme) <= m:
            k = len(self._dme)
            prev = self._dme[k - 1]
            # D^k E = q D^{k-1}E D + D^k + D^{k-1}E
            nf = prev.times_D().scale(self.q).add(NormalForm({(0, k): self.one})).add(prev)
            self._dme[k] = nf
        return self._dme[m]

    def times_E(self, nf: NormalForm) -> NormalForm:
        out = NormalForm()
        for (n, m), c in nf.items():
            for (n2, m2), c2 in self.d_power_e(m).items():
                key = (n + n2, m2)
                out[key] = out.get(key, 0) + c * c2
        return out

    def times(self, nf: NormalForm, coeffs) -> NormalForm:
        x, y, z = coeffs
        out = NormalForm()
        if x != 0:
            out = out.add(nf.times_D(), x)
        if y != 0:
            out = out.add(self.times_E(nf), y)
        if z != 0:
            out = out.add(nf, z)
        return out

    def normal_form(self, word: Iterable, params=None) -> NormalForm:
        nf = NormalForm({(0, 0): self.one})
        for letter in word:
            coeffs = letter if isinstance(letter, tuple) else letter_coeffs(letter, params)
            nf = self.times(nf, coeffs)
        return nf

    def _val(self, nf: NormalForm, shift: int = 0):
        return sum((c * self.monomial(n + shift, m) for (n, m), c in nf.items()), self.one * 0)

    def monomial(self, n: int, m: int):
        """``<W| E^n D^m |V>``."""
        key = (n, m)
        if key in self._f:
            return self._f[key]
        al, be, ga, de = self.alpha, self.beta, self.gamma, self.delta
        if m >= 1:
            # D|V> = (|V> + delta E|V>)/beta applied to the trailing D
            val = (self.monomial(n, m - 1) + de * self._val(self.d_power_e(m - 1), shift=n)) / be
        elif n == 0:
            val = self.one
        else:
            # <W|E = (<W| + gamma <W|D)/alpha applied to the leading E;
            # the term q^{n-1} E^{n-1} D of D E^{n-1} refers back to <W|E^n|V>
            dek = NormalForm({(0, 1): self.one})
            for _ in range(n - 1):
                dek = self.times_E(dek)
            rest = self.one * 0
            self_coef = self.one * 0
            for (a, b), c in dek.items():
                if b == 1:
                    # <W|E^a D|V> = (<W|E^a|V> + delta <W|E^{a+1}|V>)/beta
                    if a + 1 == n:
                        rest += c * self.monomial(a, 0) / be
                        self_coef += c * de / be
                    else:
                        rest += c * self.monomial(a, 1)
                else:
                    rest += c * self.monomial(a, b)
            val = (self.monomial(n - 1, 0) + ga * rest) / (al - ga * self_coef)
        self._f[key] = val
        return val

    def value(self, nf: NormalForm):
        """``<W| nf |V>`` for a normal form built with :meth:`times`."""
        return self._val(nf)

    def evaluate(self, word: Iterable, params=None):
        return self._val(self.normal_form(word, params))


def _evaluator(params, method: str, mode: str):
    rates = _rates(params)
    if method == "transfer":
        return DEHPTransfer(*rates, mode=mode)
    if method == "normal":
        return NormalOrdering(*rates, mode=mode)
    raise ValueError(f"unknown method {method!r}")


def dehp_value(word: Sequence[str], params, method: str = "normal", mode: str = "float",
               dps: int | None = None):
    """``<W| word |V>`` for letters in {D, E, Du, Eu, Dr, Er}.

    ``params`` is StripParams, DerivedParams or ``(q, alpha, beta, gamma, delta)``;
    six-vertex letters need StripParams.
    """
    with mpmath.workdps(dps or default_dps()):
        return _evaluator(params, method, mode).evaluate(word, params)


# ------------------------------------------------------------------ measures

def mpa_weights(path: DownRightPath, params: StripParams, mode: str = "float", cap: int = 12):
    """Unnormalized ansatz weights of all ``2^N`` configurations (little-endian)."""
    N = path.N
    if N > cap:
        raise ValueError(f"N={N} exceeds the enumeration cap {cap}")
    T = DEHPTransfer.from_params(params, mode=mode)
    up = [lab == UP for lab in path.labels]
    ltr = {}
    for u in (True, False):
        for t in (0, 1):
            ltr[(u, t)] = letter_coeffs(("D" if t else "E") + ("u" if u else "r"), params)
    w = [None] * (2 ** N)

    def rec(i, v, idx):
        if i == N:
            w[idx] = T.value(v)
            return
        for t in (0, 1):
            rec(i + 1, T.times(v, ltr[(up[i], t)]), idx | (t << i))

    rec(0, T.start(), 0)
    return np.array(w, dtype=float if mode == "float" else object)


def mpa_measure(path: DownRightPath, params: StripParams, mode: str = "float", dps: int | None = None,
                cap: int = 12) -> np.ndarray:
    """Stationary distribution on ``path`` from the matrix product ansatz."""
    params.check_theorem_mode()
    with mpmath.workdps(dps or default_dps()):
        w = mpa_weights(path, params, mode, cap)
        Z = w.sum()
        # the normalizer may be negative; only a sign change across weights is fatal
        if Z == 0 or any(x * Z < 0 for x in w):
            raise SingularCaseError(f"ansatz weights change sign (sum {float(Z)}); parameters are singular")
        mu = w / Z
    if mode == "mpmath":
        return mu.astype(float)
    return mu


def asep_measure(N: int, params, mode: str = "float") -> np.ndarray:
    """Open-ASEP stationary measure ``<W| prod (E or D) |V>`` normalized."""
    T = _evaluator(params, "transfer", mode)
    w = []
    for idx in range(2 ** N):
        w.append(T.evaluate(["D" if (idx >> i) & 1 else "E" for i in range(N)]))
    w = np.array(w, dtype=float if mode == "float" else object)
    return w / w.sum()


def compatibility_residuals(params: StripParams, prefix: Sequence[str] = (), suffix: Sequence[str] = (),
                            method: str = "normal", mode: str = "float") -> dict:
    """Residuals of the eight local-move relations sandwiched between words.

    Bulk relations are evaluated as ``<W| prefix (lhs - rhs) suffix |V>``,
    left ones as ``<W| (lhs - rhs) suffix |V>`` and right ones as
    ``<W| prefix (lhs - rhs) |V>``.
    """
    ev = _evaluator(params, method, mode)
    p = params

    def val(terms, pre, suf):
        return sum(c * ev.evaluate(list(pre) + list(w) + list(suf), params) for c, w in terms)

    t1, t2, a, b, c, d = p.theta1, p.theta2, p.a, p.b, p.c, p.d
    bulk = {
        "DuDr": ([(1, ["Du", "Dr"]), (-1, ["Dr", "Du"])]),
        "EuEr": ([(1, ["Eu", "Er"]), (-1, ["Er", "Eu"])]),
        "DuEr": ([(1, ["Du", "Er"]), (-(1 - t2), ["Dr", "Eu"]), (-t1, ["Er", "Du"])]),
        "EuDr": ([(1, ["Eu", "Dr"]), (-t2, ["Dr", "Eu"]), (-(1 - t1), ["Er", "Du"])]),
    }
    left = {
        "WDr": [(1, ["Dr"]), (-(1 - c), ["Du"]), (-a, ["Eu"])],
        "WEr": [(1, ["Er"]), (-(1 - a), ["Eu"]), (-c, ["Du"])],
    }
    right = {
        "DuV": [(1, ["Du"]), (-(1 - b), ["Dr"]), (-d, ["Er"])],
        "EuV": [(1, ["Eu"]), (-(1 - d), ["Er"]), (-b, ["Dr"])],
    }
    out = {}
    for k, terms in bulk.items():
        out[k] = val(terms, prefix, suffix)
    for k, terms in left.items():
        out[k] = val(terms, (), suffix)
    for k, terms in right.items():
        out[k] = val(terms, prefix, ())
    return out


# --------------------------------------------------------- partition values

def partition_mpa(N: int, t, params: StripParams, mode: str = "float", dps: int | None = None,
                  derivative: bool = False):
    """``Z_N(t) = <W| (Eu + t Du)^N |V>`` on the horizontal path.

    Floating modes return ``|Z|``.  With ``derivative=True`` returns
    ``(log |Z|, d/dt log Z)``; the row vector
    and its t-derivative are propagated together.  In floating modes both are
    rescaled every step and the scale is carried in log form.
    """
    with mpmath.workdps(dps or default_dps()):
        T = DEHPTransfer.from_params(params, mode=mode)
        conv = T._conv
        ku = conv(letter_coeffs("Du", params)[0])
        ke = conv(letter_coeffs("Eu", params)[1])
        step = (ku * conv(t), ke, 0)
        dstep = (ku, 0, 0)
        log = math.log if mode == "float" else mpmath.log
        v = T.start()
        dv = T._arr([T.zero])
        logscale = 0
        for _ in range(N):
            nv = T.times(v, step)
            if derivative:
                dv = T.times(dv, step) + T.times(v, dstep)
            v = nv
            if mode != "exact":
                s = max(abs(x) for x in v)
                v = v / s
                if derivative:
                    dv = dv / s
                logscale += log(s)
        Z = T.value(v)
        if Z == 0:
            raise SingularCaseError("ansatz normalizer vanishes")
        if mode == "exact":
            return (Z, T.value(dv) / Z) if derivative else Z
        # the ansatz normalizer can be negative; its sign cancels in every ratio
        logZ = log(abs(Z)) + logscale
        if derivative:
            return logZ, T.value(dv) / Z
        return math.exp(logZ) if mode == "float" else mpmath.exp(logZ)


def mean_density_mpa(N: int, params: StripParams, mode: str = "mpmath", dps: int | None = None):
    """``E sum tau_i / N`` on the horizontal path, exactly through the ansatz."""
    params.check_theorem_mode()
    _, dlog = partition_mpa(N, 1, params, mode=mode, dps=dps, derivative=True)
    return dlog / N if mode == "exact" else float(dlog) / N


# ------------------------------------------------------------ special cases

def bernoulli_special(a, b, c, d, theta2) -> tuple:
    """``theta1`` making the product measure stationary, and its two marginals.

    Returns ``(theta1, p_up, p_right)``.
    """
    x_up = a + d - a * b - a * d
    e_right = b + c - b * c - a * b
    x_right = a + d - a * d - c * d
    e_up = b + c - b * c - c * d
    lhs = x_up * e_right
    rhs = x_right * e_up
    if lhs == 0 or rhs == 0:
        raise ParameterError("product-measure condition needs both sides nonzero")
    theta1 = 1 - (1 - theta2) * rhs / lhs
    if not 0 < theta1 < 1:
        raise ParameterError(f"no valid theta1: the product-measure condition gives theta1={float(theta1)}")
    den = a + b + c + d - (a + c) * (b + d)
    return theta1, x_up / den, x_right / den


def product_measure(path: DownRightPath, p_up, p_right) -> np.ndarray:
    """Independent Bernoulli occupations: ``p_up`` on up edges, ``p_right`` on right edges."""
    N = path.N
    probs = [p_up if lab == UP else p_right for lab in path.labels]
    exact = any(isinstance(x, Fraction) for x in (p_up, p_right))
    out = np.empty(2 ** N, dtype=object if exact else float)
    for idx in range(2 ** N):
        w = 1
        for i, p in enumerate(probs):
            w = w * (p if (idx >> i) & 1 else 1 - p)
        out[idx] = w
    return out


def parity_bernoulli(theta1, theta2, N: int, path: DownRightPath | None = None) -> tuple:
    """Stationary measures at ``a = b = c = d = 1``.

    Returns ``(p_up, p_right, even, odd)`` where ``even``/``odd`` are the
    product measure restricted to even/odd particle number and renormalized.
    """
    if (1 - theta1) * (1 - theta2) == 0:
        raise ParameterError("needs theta1 != 1 and theta2 != 1")
    s1, s2 = math.sqrt(1 - theta1), math.sqrt(1 - theta2)
    p_up, p_right = s2 / (s1 + s2), s1 / (s1 + s2)
    path = path or build_path(N)
    mu = product_measure(path, p_up, p_right)
    parity = np.array([bin(i).count("1") % 2 for i in range(2 ** N)])
    even = np.where(parity == 0, mu, 0.0)
    odd = np.where(parity == 1, mu, 0.0)
    return p_up, p_right, even / even.sum(), odd / odd.sum()


def qvolume_measure(N: int, k: int, q) -> np.ndarray:
    """Measure on ``k``-particle states with weight ``q^{-sum of occupied sites}``."""
    if not 0 <= k <= N:
        raise ParameterError(f"particle number k={k} must lie in 0..{N}")
    exact = isinstance(q, Fraction)
    w = np.zeros(2 ** N, dtype=object if exact else float)
    for idx in range(2 ** N):
        if bin(idx).count("1") == k:
            sites = sum(i + 1 for i in range(N) if (idx >> i) & 1)
            w[idx] = (1 / q) ** sites if exact else q ** (-sites)
    return w / w.sum()
