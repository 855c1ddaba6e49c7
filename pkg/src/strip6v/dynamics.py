"""Monte Carlo sampling of the six-vertex model on a strip.

One time step of the particle system on a path ``P`` samples every vertex
between ``P`` and ``P + (1, 1)`` in raster order (smaller ``y`` first, then
smaller ``x``).  Randomness is counter based: the uniform used at a vertex
is a hash of ``(seed, replica, step, vertex)``, so trajectories are
reproducible and replicas can be split across workers freely.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import _kernels
from .lattice import BULK, LEFT, DownRightPath, decompose_translation
from .params import ParameterError, StripParams


@dataclass(frozen=True)
class SlabSchedule:
    """Raster-ordered moves of one translation step, in kernel encoding."""
    kinds: np.ndarray
    pos: np.ndarray
    svert: np.ndarray

    @classmethod
    def for_path(cls, path: DownRightPath) -> "SlabSchedule":
        moves = decompose_translation(path)
        kinds = np.array([_kernels.KIND_CODE[m.kind] for m in moves], dtype=np.int8)
        pos = np.array([m.position for m in moves], dtype=np.int64)
        sv = []
        for m in moves:
            sv.append({LEFT: 0, BULK: m.position + 1}.get(m.kind, path.N))
        return cls(kinds, pos, np.array(sv, dtype=np.int64))


def _probs(p: StripParams) -> np.ndarray:
    return np.array([p.a, p.b, p.c, p.d, p.theta1, p.theta2], dtype=np.float64)


def sample_vertex(kind: str, incoming, params: StripParams, rng) -> tuple[int, ...]:
    """Sample the outgoing occupations of one vertex.

    ``incoming`` is ``(bottom, left)`` for a bulk vertex and the single
    incoming occupation for a boundary vertex.  Returns ``(top, right)`` for
    bulk vertices and a 1-tuple for boundary ones.  ``rng`` is a numpy
    ``Generator`` or a float already drawn from U[0, 1).
    """
    u = rng if isinstance(rng, float) else float(rng.random())
    p = params
    if kind == BULK:
        bottom, left = (int(x) for x in incoming)
        keep = (left > bottom and u >= p.theta2) or (bottom > left and u >= p.theta1)
        return (left, bottom) if keep else (bottom, left)
    (x,) = np.atleast_1d(incoming)
    inj, ej = (p.a, p.c) if kind == LEFT else (p.d, p.b)
    if x == 0:
        return (int(u < inj),)
    return (int(u < 1 - ej),)


def _as_states(init, N, replicas):
    if init is None:
        return np.zeros((replicas, N), dtype=np.uint8)
    arr = np.asarray(init, dtype=np.uint8)
    if arr.ndim == 1:
        if arr.shape[0] != N:
            raise ValueError(f"initial configuration has length {arr.shape[0]}, path width is {N}")
        arr = np.broadcast_to(arr, (replicas, N))
    if arr.shape != (replicas, N):
        raise ValueError(f"initial states must have shape {(replicas, N)}, got {arr.shape}")
    return np.ascontiguousarray(arr, dtype=np.uint8).copy()


def evolve(path: DownRightPath, init, params: StripParams, steps: int, seed: int = 0,
           replica: int = 0, backend: str | None = None) -> np.ndarray:
    """Trajectory ``tau(0..steps)`` of a single replica, shape ``(steps+1, N)``."""
    params.check_probabilities()
    sched = SlabSchedule.for_path(path)
    states = _as_states(init, path.N, 1)
    _, traj = _kernels.advance(states, np.array([replica]), 0, steps, sched.kinds, sched.pos,
                               sched.svert, _probs(params), seed, record=True, backend=backend)
    return traj[:, 0, :]


def evolve_ensemble(path: DownRightPath, init, params: StripParams, steps: int, replicas: int,
                    seed: int = 0, step0: int = 0, backend: str | None = None) -> np.ndarray:
    """Final states of ``replicas`` independent copies after ``steps`` steps."""
    params.check_probabilities()
    sched = SlabSchedule.for_path(path)
    states = _as_states(init, path.N, replicas)
    states, _ = _kernels.advance(states, np.arange(replicas), step0, steps, sched.kinds, sched.pos,
                                 sched.svert, _probs(params), seed, backend=backend)
    return states


def empirical_distribution(states: np.ndarray) -> np.ndarray:
    """Histogram of configurations over the little-endian state index."""
    states = np.asarray(states)
    N = states.shape[-1]
    idx = states.astype(np.int64) @ (1 << np.arange(N, dtype=np.int64))
    return np.bincount(idx, minlength=2 ** N) / len(idx)


def occupation_frequencies(path: DownRightPath, init, params: StripParams, steps: int, replicas: int,
                           seed: int = 0, burn_in: int = 0, chunk: int = 256,
                           backend: str | None = None) -> np.ndarray:
    """Time- and replica-averaged histogram of configurations after ``burn_in`` steps."""
    params.check_probabilities()
    sched = SlabSchedule.for_path(path)
    states = _as_states(init, path.N, replicas)
    reps = np.arange(replicas)
    args = (sched.kinds, sched.pos, sched.svert, _probs(params), seed)
    if burn_in:
        _kernels.advance(states, reps, 0, burn_in, *args, backend=backend)
    weights = 1 << np.arange(path.N, dtype=np.int64)
    counts = np.zeros(2 ** path.N, dtype=np.int64)
    done = 0
    while done < steps:
        n = min(chunk, steps - done)
        _, traj = _kernels.advance(states, reps, burn_in + done, n, *args, record=True, backend=backend)
        counts += np.bincount((traj[1:].astype(np.int64) @ weights).ravel(), minlength=2 ** path.N)
        done += n
    return counts / counts.sum()


def check_coupling(params: StripParams, params2: StripParams) -> None:
    """Hypotheses of the attractive coupling; raises ParameterError."""
    p, q = params, params2
    for name, ok in (("a <= a'", p.a <= q.a), ("b >= b'", p.b >= q.b), ("c >= c'", p.c >= q.c),
                     ("d <= d'", p.d <= q.d), ("a'+c < 1", q.a + p.c < 1), ("b+d' < 1", p.b + q.d < 1),
                     ("equal theta1", p.theta1 == q.theta1), ("equal theta2", p.theta2 == q.theta2)):
        if not ok:
            raise ParameterError(f"coupling requires {name}")
    p.check_probabilities()
    q.check_probabilities()


def colored_from_pair(eta1, eta2) -> np.ndarray:
    eta1 = np.asarray(eta1, dtype=np.uint8)
    eta2 = np.asarray(eta2, dtype=np.uint8)
    if np.any(eta1 > eta2):
        raise ParameterError("coupling requires init1 <= init2 pointwise")
    return eta1 + eta2


def marginals(colors) -> tuple[np.ndarray, np.ndarray]:
    """``(eta1, eta2) = (1{color >= 2}, 1{color >= 1})``."""
    colors = np.asarray(colors)
    return (colors >= 2).astype(np.uint8), (colors >= 1).astype(np.uint8)


def _coupled_probs(p: StripParams, p2: StripParams) -> np.ndarray:
    return np.array([p.a, p.b, p.c, p.d, p2.a, p2.b, p2.c, p2.d, p.theta1, p.theta2], dtype=np.float64)


def evolve_coupled(path: DownRightPath, init1, init2, params: StripParams, params2: StripParams,
                   steps: int, seed: int = 0, replicas: int = 1, record: bool = True,
                   backend: str | None = None) -> np.ndarray:
    """Two-colour coupled dynamics.

    Returns colours in {0, 1, 2}: the trajectory ``(steps+1, replicas, N)``
    when ``record`` else the final states ``(replicas, N)``.  The marginal
    ``colors >= 2`` follows ``params`` and ``colors >= 1`` follows
    ``params2``; with the same seed each marginal coincides path by path with
    :func:`evolve_ensemble` run on its own parameters.
    """
    check_coupling(params, params2)
    N = path.N
    i1 = np.zeros(N, np.uint8) if init1 is None else init1
    i2 = np.zeros(N, np.uint8) if init2 is None else init2
    colors = _as_states(colored_from_pair(i1, i2), N, replicas)
    sched = SlabSchedule.for_path(path)
    states, traj = _kernels.advance(colors, np.arange(replicas), 0, steps, sched.kinds, sched.pos,
                                    sched.svert, _coupled_probs(params, params2), seed,
                                    record=record, colored=True, backend=backend)
    return traj if record else states


# ------------------------------------------------------------------ outputs

def write_trajectory_csv(fh, traj: np.ndarray, colored: bool = False) -> None:
    """Long-format CSV: ``step,site,occupation`` (+ ``color`` when colored).

    ``traj`` has shape ``(steps+1, N)``; sites are 1-based.
    """
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["step", "site", "occupation", "color"] if colored else ["step", "site", "occupation"])
    for k, row in enumerate(np.asarray(traj)):
        for i, v in enumerate(row):
            if colored:
                w.writerow([k, i + 1, int(v >= 1), int(v)])
            else:
                w.writerow([k, i + 1, int(v)])


def ordering_violations(traj: np.ndarray) -> int:
    """Number of edges where ``eta1 > eta2``; zero by construction."""
    e1, e2 = marginals(traj)
    return int(np.count_nonzero(e1 > e2))


def empty_init(N: int) -> np.ndarray:
    return np.zeros(N, dtype=np.uint8)


def states_from_bits(bits: Sequence[int]) -> np.ndarray:
    return np.asarray(bits, dtype=np.uint8)
