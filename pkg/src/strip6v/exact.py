"""Brute-force finite-state engine.

States of ``{0,1}^N`` are indexed little-endian, ``index = sum_i tau_i 2^i``
with ``tau_0`` the up-left-most edge.  Kernels are row-stochastic, so the
kernel of a move sequence is the left-to-right product of the move kernels.
Every routine accepts floats or :class:`fractions.Fraction` parameters; in
the latter case matrices are object arrays and results are exact.
"""

from __future__ import annotations

import csv
import json
import math
from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .lattice import (BULK, LEFT, DownRightPath, LocalMove,
                      PathError, build_path, decompose_translation, moves_between)
from .params import ParameterError, StripParams, asep_rates

DEFAULT_CAP = 12


class ReducibleChainError(ValueError):
    """The chain has more than one closed class, so its stationary measure is not unique."""

    def __init__(self, n_classes: int):
        super().__init__(f"chain is reducible: {n_classes} closed communicating classes, "
                         "stationary measure not unique")
        self.n_classes = n_classes


# ------------------------------------------------------------- state helpers

def state_index(bits: Sequence[int], base: int = 2) -> int:
    return sum(int(b) * base ** i for i, b in enumerate(bits))


def state_bits(index: int, N: int, base: int = 2) -> tuple[int, ...]:
    out = []
    for _ in range(N):
        index, rem = divmod(index, base)
        out.append(rem)
    return tuple(out)


def popcounts(N: int) -> np.ndarray:
    idx = np.arange(2 ** N)
    return np.array([bin(i).count("1") for i in idx])


def complement_permutation(N: int) -> np.ndarray:
    return (2 ** N - 1) ^ np.arange(2 ** N)


def _is_exact(params) -> bool:
    return isinstance(params, StripParams) and params.is_rational()


def _new(shape, exact):
    return np.zeros(shape, dtype=object) if exact else np.zeros(shape)


def _eye(n, exact):
    if exact:
        m = np.zeros((n, n), dtype=object)
        np.fill_diagonal(m, 1)
        return m
    return np.eye(n)


# ------------------------------------------------------------- local tables

def bulk_table(theta1, theta2, base: int = 2) -> dict:
    """``(left, bottom) -> [((top, right), prob)]``; with colours the larger one is the arrow."""
    table = {}
    for l in range(base):
        for b in range(base):
            if l == b:
                table[(l, b)] = [((l, b), 1)]
            else:
                p_swap = theta2 if l > b else theta1
                table[(l, b)] = [((b, l), p_swap), ((l, b), 1 - p_swap)]
    return table


def boundary_table(inject, eject) -> dict:
    """Single-species boundary vertex: ``x -> [(out, prob)]``."""
    return {(0,): [((1,), inject), ((0,), 1 - inject)],
            (1,): [((0,), eject), ((1,), 1 - eject)]}


def colored_boundary_table(p, pp, e, ep) -> dict:
    """Three-colour boundary vertex with injections ``p <= pp`` and ejections ``e >= ep``."""
    rows = {0: (p, pp), 1: (p, 1 - ep), 2: (1 - e, 1 - ep)}
    table = {}
    for x, (hi, mid) in rows.items():
        table[(x,)] = [((2,), hi), ((1,), mid - hi), ((0,), 1 - mid)]
    return table


def move_table(move: LocalMove, params: StripParams) -> tuple[list[int], dict]:
    p = params
    if move.kind == BULK:
        return [move.position, move.position + 1], bulk_table(p.theta1, p.theta2)
    if move.kind == LEFT:
        return [0], boundary_table(p.a, p.c)
    return [move.position], boundary_table(p.d, p.b)


def colored_move_table(move: LocalMove, params: StripParams, params2: StripParams):
    p, q = params, params2
    if move.kind == BULK:
        return [move.position, move.position + 1], bulk_table(p.theta1, p.theta2, base=3)
    if move.kind == LEFT:
        return [0], colored_boundary_table(p.a, q.a, p.c, q.c)
    return [move.position], colored_boundary_table(p.d, q.d, p.b, q.b)


def apply_table(M: np.ndarray, sites: list[int], table: dict, N: int, base: int = 2) -> np.ndarray:
    """Right-multiply the columns of ``M`` by the local kernel ``table`` on ``sites``."""
    rows = M.shape[0]
    T = M.reshape((rows,) + (base,) * N)
    out = np.zeros_like(T)
    axes = [1 + (N - 1 - i) for i in sites]

    def sl(vals):
        idx = [slice(None)] * (N + 1)
        for ax, v in zip(axes, vals):
            idx[ax] = v
        return tuple(idx)

    for x, outs in table.items():
        src = T[sl(x)]
        for y, prob in outs:
            if prob != 0:
                out[sl(y)] += src * prob
    return out.reshape(M.shape)


# ------------------------------------------------------------------- kernels

def _resolve_moves(path: DownRightPath, target) -> list[LocalMove]:
    if target is None or target == "translation":
        return decompose_translation(path)
    if isinstance(target, DownRightPath):
        return moves_between(path, target)
    return list(target)


def _check_cap(N, cap):
    if N > cap:
        raise ValueError(f"N={N} exceeds the exact-enumeration cap {cap}")


def move_kernel(path_N: int, move: LocalMove, params: StripParams) -> np.ndarray:
    exact = _is_exact(params)
    sites, table = move_table(move, params)
    return apply_table(_eye(2 ** path_N, exact), sites, table, path_N)


def transition_matrix(path: DownRightPath, params: StripParams, target="translation",
                      method: str = "moves", cap: int = DEFAULT_CAP) -> np.ndarray:
    """One-step kernel from ``path`` to ``target``.

    ``target`` is ``"translation"`` (the path moved by (1, 1)), a path weakly
    above ``path``, or an explicit list of local moves.  ``method="moves"``
    composes local-move kernels; ``method="direct"`` enumerates every edge
    assignment of the region between the two paths.
    """
    N = path.N
    _check_cap(N, cap)
    params.check_probabilities()
    if method == "direct":
        if target is None or target == "translation":
            target = path.translate(1)
        elif not isinstance(target, DownRightPath):
            cur = path
            from .lattice import apply_local_move
            for mv in target:
                cur = apply_local_move(cur, mv)
            target = cur
        return direct_kernel(path, target, params)
    if method != "moves":
        raise ValueError(f"unknown method {method!r}")
    moves = _resolve_moves(path, target)
    M = _eye(2 ** N, _is_exact(params))
    for mv in moves:
        sites, table = move_table(mv, params)
        M = apply_table(M, sites, table, N)
    return M


def direct_kernel(path: DownRightPath, target: DownRightPath, params: StripParams) -> np.ndarray:
    """Kernel by sampling every vertex strictly above ``path`` and weakly below ``target``."""
    N = path.N
    if target.N != N:
        raise PathError("paths have different widths")
    hp, hq = path.heights(), target.heights()
    if any(b < a for a, b in zip(hp, hq)):
        raise PathError(f"target {target} is not above {path}")
    verts = []
    for s in range(N + 1):
        for h in range(hp[s] + 2, hq[s] + 1, 2):
            x, y = (h + s) // 2, (h - s) // 2
            verts.append((y, x, s))
    verts.sort()
    p = params
    exact = _is_exact(params)
    K = _new((2 ** N, 2 ** N), exact)
    src_edges = path.outgoing_edges()
    dst_edges = target.outgoing_edges()

    def rec(k, edges, prob, row):
        if prob == 0:
            return
        if k == len(verts):
            col = state_index([edges[e] for e in dst_edges])
            K[row, col] += prob
            return
        y, x, s = verts[k]
        if s == 0:
            inp = edges[((x, y - 1), (x, y))]
            outs = [((x, y), (x + 1, y))]
            law = boundary_table(p.a, p.c)[(inp,)]
        elif s == N:
            inp = edges[((x - 1, y), (x, y))]
            outs = [((x, y), (x, y + 1))]
            law = boundary_table(p.d, p.b)[(inp,)]
        else:
            left = edges[((x - 1, y), (x, y))]
            bottom = edges[((x, y - 1), (x, y))]
            outs = [((x, y), (x, y + 1)), ((x, y), (x + 1, y))]
            law = bulk_table(p.theta1, p.theta2)[(left, bottom)]
        for vals, pr in law:
            nxt = dict(edges)
            for e, v in zip(outs, vals):
                nxt[e] = v
            rec(k + 1, nxt, prob * pr, row)

    for row in range(2 ** N):
        bits = state_bits(row, N)
        rec(0, dict(zip(src_edges, bits)), Fraction(1) if exact else 1.0, row)
    return K


def colored_transition_matrix(path: DownRightPath, params: StripParams, params2: StripParams,
                              target="translation", cap: int = 7) -> np.ndarray:
    """Kernel of the two-colour coupled chain on ``{0,1,2}^N`` (base-3 little-endian)."""
    from .dynamics import check_coupling
    N = path.N
    _check_cap(N, cap)
    check_coupling(params, params2)
    exact = _is_exact(params) and _is_exact(params2)
    M = _eye(3 ** N, exact)
    for mv in _resolve_moves(path, target):
        sites, table = colored_move_table(mv, params, params2)
        M = apply_table(M, sites, table, N, base=3)
    return M


def project_colored(K3: np.ndarray, N: int, threshold: int) -> np.ndarray:
    """Push the colour kernel through ``tau = 1{color >= threshold}``.

    Returns an array of shape ``(3^N, 2^N)``: row ``c`` is the law of the
    projected next state started from colour configuration ``c``.
    """
    proj = np.zeros(3 ** N, dtype=np.int64)
    for c in range(3 ** N):
        proj[c] = state_index([int(v >= threshold) for v in state_bits(c, N, 3)])
    out = np.zeros((3 ** N, 2 ** N), dtype=K3.dtype)
    for c in range(3 ** N):
        out[:, proj[c]] += K3[:, c]
    return out


def colored_projection_error(path: DownRightPath, params: StripParams, params2: StripParams) -> float:
    """Max deviation between projected colour kernels and the single-species kernels."""
    N = path.N
    K3 = colored_transition_matrix(path, params, params2)
    err = 0.0
    for thr, p in ((2, params), (1, params2)):
        K = transition_matrix(path, p)
        P = project_colored(K3, N, thr)
        for c in range(3 ** N):
            s = state_index([int(v >= thr) for v in state_bits(c, N, 3)])
            err = max(err, float(np.max(np.abs(P[c].astype(float) - K[s].astype(float)))))
    return err


# ----------------------------------------------------------- stationary solve

def is_generator(M: np.ndarray, tol: float = 1e-9) -> bool:
    return abs(float(np.sum(M[0]))) < tol


def closed_classes(M: np.ndarray) -> int:
    """Number of closed communicating classes of the chain with transition pattern ``M``."""
    n = M.shape[0]
    A = np.array([[i != j and M[i, j] != 0 for j in range(n)] for i in range(n)]) \
        if M.dtype == object else ((M != 0) & ~np.eye(n, dtype=bool))
    ncomp, labels = connected_components(csr_matrix(A), directed=True, connection="strong")
    closed = np.ones(ncomp, dtype=bool)
    rows, cols = np.nonzero(A)
    leaving = labels[rows] != labels[cols]
    closed[labels[rows[leaving]]] = False
    return int(closed.sum())


def _solve_fraction(A: list[list[Fraction]], b: list[Fraction]) -> list[Fraction]:
    n = len(A)
    M = [row[:] + [bv] for row, bv in zip(A, b)]
    for col in range(n):
        piv = next(r for r in range(col, n) if M[r][col] != 0)
        M[col], M[piv] = M[piv], M[col]
        pv = M[col][col]
        M[col] = [v / pv for v in M[col]]
        for r in range(n):
            if r != col and M[r][col] != 0:
                f = M[r][col]
                M[r] = [vr - f * vc for vr, vc in zip(M[r], M[col])]
    return [M[r][n] for r in range(n)]


def stationary_exact(M: np.ndarray, generator: bool | None = None) -> np.ndarray:
    """Unique stationary distribution of a stochastic kernel or a conservative generator.

    Raises :class:`ReducibleChainError` when more than one closed class exists.
    """
    M = np.asarray(M)
    n = M.shape[0]
    if generator is None:
        generator = is_generator(M)
    k = closed_classes(M)
    if k != 1:
        raise ReducibleChainError(k)
    A = M.T.copy() if generator else M.T - _eye(n, M.dtype == object)
    A[-1, :] = 1
    rhs = [0] * (n - 1) + [1]
    if M.dtype == object:
        sol = _solve_fraction([[Fraction(v) for v in row] for row in A], [Fraction(v) for v in rhs])
        return np.array(sol, dtype=object)
    pi = np.linalg.solve(A.astype(float), np.array(rhs, dtype=float))
    return pi


def stationary_residual(M: np.ndarray, pi: np.ndarray) -> float:
    M = np.asarray(M, dtype=float)
    pi = np.asarray(pi, dtype=float)
    r = pi @ M if is_generator(M) else pi @ M - pi
    return float(np.max(np.abs(r)))


# ---------------------------------------------------------------- generator

def asep_generator(N: int, rates: Sequence) -> np.ndarray:
    """Open-ASEP generator for rates ``(alpha, beta, gamma, delta, L, R)``.

    Particles enter at site 1 at rate alpha and leave it at rate gamma, enter
    at site N at rate delta and leave it at rate beta; they jump right at rate
    R and left at rate L.
    """
    alpha, beta, gamma, delta, L, R = rates
    if not (alpha > 0 and beta > 0 and gamma >= 0 and delta >= 0 and L >= 0 and R >= 0):
        raise ParameterError("ASEP rates need alpha, beta > 0 and gamma, delta, L, R >= 0")
    exact = all(isinstance(x, (Fraction, int)) for x in rates)
    n = 2 ** N
    Q = _new((n, n), exact)

    def add(s, t, rate):
        if rate != 0:
            Q[s, t] += rate
            Q[s, s] -= rate

    for s in range(n):
        tau = state_bits(s, N)
        add(s, s ^ 1, alpha if tau[0] == 0 else gamma)
        add(s, s ^ (1 << (N - 1)), delta if tau[-1] == 0 else beta)
        for i in range(N - 1):
            if tau[i] == 1 and tau[i + 1] == 0:
                add(s, s ^ (3 << i), R)
            elif tau[i] == 0 and tau[i + 1] == 1:
                add(s, s ^ (3 << i), L)
    return Q


# ----------------------------------------------------------- scaling limit

def scaling_limit_check(base_rates: Sequence[float], N: int, eps_list: Sequence[float]) -> dict:
    """Distance between ``(A_eps - I)/eps`` and the ASEP generator.

    ``A_eps`` is the translation kernel of the horizontal path with weights
    ``(a, b, c, d, theta1, theta2) = eps * (alpha, beta, gamma, delta, L, R)``.
    """
    alpha, beta, gamma, delta, L, R = (float(x) for x in base_rates)
    top = max(alpha, beta, gamma, delta, L, R)
    Q = asep_generator(N, (alpha, beta, gamma, delta, L, R)).astype(float)
    path = build_path(N)
    errors = []
    for eps in eps_list:
        if not 0 < eps < 1 / top:
            raise ParameterError(f"eps={eps} infeasible: scaled weights must lie in [0, 1), "
                                 f"need 0 < eps < {1 / top}")
        p = StripParams(eps * alpha, eps * beta, eps * gamma, eps * delta, eps * L, eps * R)
        A = transition_matrix(path, p)
        errors.append(float(np.max(np.abs((A - np.eye(2 ** N)) / eps - Q))))
    ratios = [e0 / e1 if e1 > 0 else math.inf for e0, e1 in zip(errors, errors[1:])]
    orders = [math.log(e0 / e1) / math.log(x0 / x1) if e1 > 0 else math.nan
              for e0, e1, x0, x1 in zip(errors, errors[1:], eps_list, eps_list[1:])]
    return {"N": N, "rates": list(base_rates), "eps": list(eps_list), "errors": errors,
            "ratios": ratios, "orders": orders}


# ------------------------------------------------------------------ tilting

def tilted(pi: np.ndarray, r, N: int) -> np.ndarray:
    w = np.array([r ** int(k) for k in popcounts(N)], dtype=pi.dtype)
    v = w * pi
    return v / v.sum()


def verify_tilting(params: StripParams, N: int, cap: int = DEFAULT_CAP) -> dict:
    """Compare the strip stationary measure with the tilted ASEP stationary measure."""
    params.check_theorem_mode()
    q, alpha, beta, gamma, delta = asep_rates(params)
    r = (1 - params.theta2) / (1 - params.theta1)
    mu = stationary_exact(transition_matrix(build_path(N), params, cap=cap))
    one = Fraction(1) if params.is_rational() else 1.0
    pi = stationary_exact(asep_generator(N, (alpha, beta, gamma, delta, q, one)), generator=True)
    pi_t = tilted(pi, r, N)
    err = float(np.max(np.abs((mu - pi_t).astype(float))))
    return {"N": N, "params": params.as_dict(), "r": float(r), "max_abs_error": err,
            "mu": [float(x) for x in mu], "tilted_pi": [float(x) for x in pi_t]}


def duality_error(path: DownRightPath, params: StripParams) -> float:
    """Max ``|K'(s, s') - K(~s, ~s')|`` for the particle-hole swapped parameters."""
    K = transition_matrix(path, params)
    K2 = transition_matrix(path, params.swapped())
    c = complement_permutation(path.N)
    return float(np.max(np.abs((K2 - K[np.ix_(c, c)]).astype(float))))


# ------------------------------------------------------------------ outputs

def bitstring(index: int, N: int) -> str:
    return "".join(str(b) for b in state_bits(index, N))


def write_distribution_csv(fh, dist: Sequence, N: int) -> None:
    """CSV rows ``state,probability``; the state lists tau_1..tau_N."""
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["state", "probability"])
    for i, p in enumerate(dist):
        w.writerow([bitstring(i, N), f"{float(p):.17g}"])


def _json(obj, indent: int = 0) -> str:
    pad = "  " * (indent + 1)
    if isinstance(obj, bool) or obj is None or isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating, Fraction)):
        x = float(obj)
        return f"{x:.17g}" if math.isfinite(x) else "null"
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_json(v, indent + 1)}" for k, v in sorted(obj.items())]
        return "{\n" + ",\n".join(items) + "\n" + "  " * indent + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        if len(obj) == 0:
            return "[]"
        return "[" + ", ".join(_json(v, indent + 1) for v in obj) + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dump_json(obj, fh) -> None:
    """JSON with every float written to 17 significant digits."""
    fh.write(_json(obj) + "\n")
