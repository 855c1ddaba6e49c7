import numpy as np
from hypothesis import strategies as st

from strip6v.lattice import DownRightPath
from strip6v.params import ParameterError, StripParams, params_from_boundary, singular_power

RUNNING = StripParams(0.5, 0.3, 0.4, 0.2, 0.2, 0.5)


def random_theorem_params(rng: np.random.Generator) -> StripParams:
    """Uniform draw from the theorem-mode region, rejecting near-singular points."""
    while True:
        t1, t2 = np.sort(rng.uniform(0.05, 0.95, 2))
        a, c = rng.uniform(0.05, 0.95, 2)
        b, d = rng.uniform(0.05, 0.9, 2)
        if b + d >= 0.95 or t2 - t1 < 0.05:
            continue
        p = StripParams(float(a), float(b), float(c), float(d), float(t1), float(t2))
        if singular_power(p, 1e-6) is None:
            return p


def random_fan_params(rng: np.random.Generator, technical_gap: float = 1e-2) -> StripParams:
    """Theorem-mode parameters with ``AC < 1`` away from the technical set."""
    from strip6v.params import derive_params, technical_distance
    while True:
        A = rng.uniform(0.1, 2.5)
        C = rng.uniform(0.05, min(2.5, 0.9 / A))
        B, D = rng.uniform(-0.6, -0.02, 2)
        q = rng.uniform(0.1, 0.7)
        r = rng.uniform(0.3, 0.9)
        theta2 = (1 - r) / (1 - r * q)
        try:
            p = params_from_boundary(A, B, C, D, q * theta2, theta2)
            p.check_theorem_mode()
        except ParameterError:
            continue
        if technical_distance(derive_params(p)) > technical_gap:
            return p


def random_path(rng: np.random.Generator, N: int) -> DownRightPath:
    labels = tuple("R" if x else "U" for x in rng.integers(0, 2, N))
    return DownRightPath(N, labels, labels.count("R") + int(rng.integers(0, 3)))


@st.composite
def paths(draw, max_n=6):
    N = draw(st.integers(1, max_n))
    labels = tuple(draw(st.lists(st.sampled_from("UR"), min_size=N, max_size=N)))
    extra = draw(st.integers(0, 3))
    return DownRightPath(N, labels, labels.count("R") + extra)


prob = st.floats(0.02, 0.98)


@st.composite
def strip_params(draw):
    return StripParams(*(draw(prob) for _ in range(6)))


@st.composite
def theorem_params(draw):
    t1 = draw(st.floats(0.05, 0.85))
    t2 = draw(st.floats(t1 + 0.05, 0.95))
    b = draw(st.floats(0.05, 0.85))
    d = draw(st.floats(0.05, 0.9 - b))
    p = StripParams(draw(prob), b, draw(prob), d, t1, t2)
    if singular_power(p, 1e-6) is not None:
        from hypothesis import reject
        reject()
    return p


def close(a, b, tol):
    return abs(float(a) - float(b)) <= tol * max(1.0, abs(float(b)))
