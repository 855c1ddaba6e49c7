"""Hot sampling loops: numba kernels plus a pure-numpy fallback.

Both backends consume the same counter-based random numbers, so a run is
bit-identical whichever backend executes it.  Set ``STRIP6V_DISABLE_NUMBA=1``
to force the numpy path (numba missing also selects it).

Encoding shared by the kernels: ``kinds`` holds 0 (bulk), 1 (left boundary),
2 (right boundary); ``pos`` the label index a move acts on; ``svert`` the
diagonal index of the sampled vertex, used as the random-stream counter.
"""

from __future__ import annotations

import os

import numpy as np

try:
    import numba
except ImportError:  # pragma: no cover
    numba = None

_DISABLED = os.environ.get("STRIP6V_DISABLE_NUMBA", "").strip().lower() in ("1", "true", "yes", "on")
HAVE_NUMBA = numba is not None
USE_NUMBA = HAVE_NUMBA and not _DISABLED

KIND_CODE = {"bulk": 0, "left": 1, "right": 2}

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_INV53 = 1.0 / 9007199254740992.0


def resolve_backend(backend: str | None) -> str:
    if backend is None:
        return "numba" if USE_NUMBA else "numpy"
    if backend not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {backend!r}")
    if backend == "numba" and not HAVE_NUMBA:
        raise RuntimeError("numba is not installed")
    return backend


# ---------------------------------------------------------------- numpy path

def _mix_np(z):
    z = z + _GOLDEN
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


def uniforms_np(seed, replicas, step, vertex) -> np.ndarray:
    """Counter-based uniforms in [0, 1) keyed by (seed, replica, step, vertex)."""
    h = _mix_np(np.full(np.shape(replicas), seed, dtype=np.uint64))
    h = _mix_np(h ^ np.asarray(replicas, dtype=np.uint64))
    h = _mix_np(h ^ np.uint64(step))
    h = _mix_np(h ^ np.uint64(vertex))
    return (h >> _S11).astype(np.float64) * _INV53


def _advance_single_np(states, replicas, step0, n_steps, kinds, pos, svert, probs, seed, traj):
    a, b, c, d, t1, t2 = probs
    if traj is not None:
        traj[0] = states
    for k in range(n_steps):
        step = step0 + k
        for m in range(len(kinds)):
            u = uniforms_np(seed, replicas, step, svert[m])
            j = pos[m]
            if kinds[m] == 0:
                left = states[:, j].copy()
                bottom = states[:, j + 1].copy()
                keep = ((left > bottom) & (u >= t2)) | ((bottom > left) & (u >= t1))
                states[:, j] = np.where(keep, left, bottom)
                states[:, j + 1] = np.where(keep, bottom, left)
            else:
                inj, ej = (a, c) if kinds[m] == 1 else (d, b)
                x = states[:, j]
                states[:, j] = np.where(x == 0, u < inj, u < 1.0 - ej).astype(np.uint8)
        if traj is not None:
            traj[k + 1] = states
    return states


def _colored_boundary_np(x, u, p, pp, e, ep):
    # p, pp: injection (unprimed <= primed); e, ep: ejection (unprimed >= primed)
    out = np.zeros_like(x)
    hi = np.where(x == 2, 1.0 - e, p)
    mid = np.where(x == 0, pp, 1.0 - ep)
    out[u < mid] = 1
    out[u < hi] = 2
    return out


def _advance_colored_np(states, replicas, step0, n_steps, kinds, pos, svert, probs, seed, traj):
    a, b, c, d, a2, b2, c2, d2, t1, t2 = probs
    if traj is not None:
        traj[0] = states
    for k in range(n_steps):
        step = step0 + k
        for m in range(len(kinds)):
            u = uniforms_np(seed, replicas, step, svert[m])
            j = pos[m]
            if kinds[m] == 0:
                left = states[:, j].copy()
                bottom = states[:, j + 1].copy()
                keep = ((left > bottom) & (u >= t2)) | ((bottom > left) & (u >= t1))
                states[:, j] = np.where(keep, left, bottom)
                states[:, j + 1] = np.where(keep, bottom, left)
            elif kinds[m] == 1:
                states[:, j] = _colored_boundary_np(states[:, j], u, a, a2, c, c2)
            else:
                states[:, j] = _colored_boundary_np(states[:, j], u, d, d2, b, b2)
        if traj is not None:
            traj[k + 1] = states
    return states


# ---------------------------------------------------------------- numba path

if HAVE_NUMBA:
    @numba.njit(cache=True)
    def _mix_nb(z):
        z = z + _GOLDEN
        z = (z ^ (z >> _S30)) * _M1
        z = (z ^ (z >> _S27)) * _M2
        return z ^ (z >> _S31)

    @numba.njit(cache=True)
    def _uniform_nb(seed, replica, step, vertex):
        h = _mix_nb(np.uint64(seed))
        h = _mix_nb(h ^ np.uint64(replica))
        h = _mix_nb(h ^ np.uint64(step))
        h = _mix_nb(h ^ np.uint64(vertex))
        return np.float64(h >> _S11) * _INV53

    @numba.njit(cache=True)
    def _advance_single_nb(states, replicas, step0, n_steps, kinds, pos, svert, probs, seed, traj, record):
        a, b, c, d, t1, t2 = probs[0], probs[1], probs[2], probs[3], probs[4], probs[5]
        R = states.shape[0]
        for r in range(R):
            rep = replicas[r]
            if record:
                traj[0, r, :] = states[r, :]
            for k in range(n_steps):
                step = step0 + k
                for m in range(kinds.shape[0]):
                    u = _uniform_nb(seed, rep, step, svert[m])
                    j = pos[m]
                    if kinds[m] == 0:
                        left = states[r, j]
                        bottom = states[r, j + 1]
                        keep = (left > bottom and u >= t2) or (bottom > left and u >= t1)
                        if not keep:
                            states[r, j] = bottom
                            states[r, j + 1] = left
                    else:
                        if kinds[m] == 1:
                            inj = a
                            ej = c
                        else:
                            inj = d
                            ej = b
                        if states[r, j] == 0:
                            states[r, j] = 1 if u < inj else 0
                        else:
                            states[r, j] = 1 if u < 1.0 - ej else 0
                if record:
                    traj[k + 1, r, :] = states[r, :]
        return states

    @numba.njit(cache=True)
    def _colored_boundary_nb(x, u, p, pp, e, ep):
        if x == 2:
            hi = 1.0 - e
        else:
            hi = p
        if x == 0:
            mid = pp
        else:
            mid = 1.0 - ep
        if u < hi:
            return 2
        if u < mid:
            return 1
        return 0

    @numba.njit(cache=True)
    def _advance_colored_nb(states, replicas, step0, n_steps, kinds, pos, svert, probs, seed, traj, record):
        a, b, c, d = probs[0], probs[1], probs[2], probs[3]
        a2, b2, c2, d2 = probs[4], probs[5], probs[6], probs[7]
        t1, t2 = probs[8], probs[9]
        R = states.shape[0]
        for r in range(R):
            rep = replicas[r]
            if record:
                traj[0, r, :] = states[r, :]
            for k in range(n_steps):
                step = step0 + k
                for m in range(kinds.shape[0]):
                    u = _uniform_nb(seed, rep, step, svert[m])
                    j = pos[m]
                    if kinds[m] == 0:
                        left = states[r, j]
                        bottom = states[r, j + 1]
                        keep = (left > bottom and u >= t2) or (bottom > left and u >= t1)
                        if not keep:
                            states[r, j] = bottom
                            states[r, j + 1] = left
                    elif kinds[m] == 1:
                        states[r, j] = _colored_boundary_nb(states[r, j], u, a, a2, c, c2)
                    else:
                        states[r, j] = _colored_boundary_nb(states[r, j], u, d, d2, b, b2)
                if record:
                    traj[k + 1, r, :] = states[r, :]
        return states


def advance(states, replicas, step0, n_steps, kinds, pos, svert, probs, seed,
            record=False, colored=False, backend=None):
    """Run ``n_steps`` slabs in place on ``states`` (shape ``(R, N)``, uint8).

    Returns ``(states, traj)`` where ``traj`` has shape ``(n_steps+1, R, N)``
    when ``record`` else None.
    """
    backend = resolve_backend(backend)
    R, N = states.shape
    probs = np.asarray(probs, dtype=np.float64)
    kinds = np.asarray(kinds, dtype=np.int8)
    pos = np.asarray(pos, dtype=np.int64)
    svert = np.asarray(svert, dtype=np.int64)
    replicas = np.asarray(replicas, dtype=np.int64)
    seed = int(seed) & 0xFFFFFFFFFFFFFFFF
    if backend == "numba":
        traj = np.zeros((n_steps + 1 if record else 1, R, N), dtype=np.uint8)
        fn = _advance_colored_nb if colored else _advance_single_nb
        fn(states, replicas, np.int64(step0), np.int64(n_steps), kinds, pos, svert, probs,
           np.uint64(seed), traj, record)
        return states, (traj if record else None)
    traj = np.zeros((n_steps + 1, R, N), dtype=np.uint8) if record else None
    fn = _advance_colored_np if colored else _advance_single_np
    fn(states, replicas, step0, n_steps, kinds, pos, svert, probs, seed, traj)
    return states, traj
