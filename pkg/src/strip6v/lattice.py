"""Strip geometry, down-right paths and the local moves between them.

A down-right path on the strip ``0 <= y <= x <= y + N`` starts on the left
boundary ``x = y`` and ends on the right boundary ``x = y + N``.  It is stored
as its sequence of outgoing-edge labels read from the up-left end:

* ``"U"`` (an up edge) is the outgoing edge of a *right* step,
* ``"R"`` (a right edge) is the outgoing edge of a *down* step,

together with the ``anchor``, the height of the left endpoint ``(anchor, anchor)``.

Vertices of a path are indexed by the diagonal coordinate ``s = x - y`` which
runs over ``0..N``; every step increases ``s`` by one.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

UP = "U"
RIGHT = "R"

BULK = "bulk"
LEFT = "left"
RIGHT_BOUNDARY = "right"
MOVE_KINDS = (BULK, LEFT, RIGHT_BOUNDARY)

_LABEL_ALIASES = {
    "U": UP, "u": UP, "up": UP, "↑": UP,
    "R": RIGHT, "r": RIGHT, "right": RIGHT, "→": RIGHT,
}


class PathError(ValueError):
    """Invalid path or inapplicable local move."""


def _normalize_labels(labels: Iterable[str]) -> tuple[str, ...]:
    out = []
    for lab in labels:
        try:
            out.append(_LABEL_ALIASES[lab])
        except KeyError:
            raise PathError(f"unknown edge label {lab!r}; use 'U' or 'R'") from None
    return tuple(out)


@dataclass(frozen=True)
class DownRightPath:
    N: int
    labels: tuple[str, ...]
    anchor: int = 0

    def __post_init__(self):
        if self.N < 1:
            raise PathError(f"width N must be positive, got {self.N}")
        if len(self.labels) != self.N:
            raise PathError(f"expected {self.N} labels, got {len(self.labels)}")
        for s, (x, y) in enumerate(self.vertices()):
            if not (0 <= y <= x <= y + self.N):
                raise PathError(
                    f"vertex {s} at {(x, y)} leaves the strip 0 <= y <= x <= y+{self.N}; "
                    f"anchor must be at least the number of down steps ({self.labels.count(RIGHT)})")

    def vertices(self) -> list[tuple[int, int]]:
        """Lattice points of the path, from the left to the right boundary."""
        x = y = self.anchor
        pts = [(x, y)]
        for lab in self.labels:
            if lab == UP:
                x += 1
            else:
                y -= 1
            pts.append((x, y))
        return pts

    def outgoing_edges(self) -> list[tuple[tuple[int, int], tuple[int, int]]]:
        """The N outgoing edges ``(tail, head)`` in label order."""
        pts = self.vertices()
        edges = []
        for i, lab in enumerate(self.labels):
            if lab == UP:
                x, y = pts[i + 1]
                edges.append(((x, y), (x, y + 1)))
            else:
                x, y = pts[i]
                edges.append(((x, y), (x + 1, y)))
        return edges

    def heights(self) -> list[int]:
        """``x + y`` along the path; a local move raises one entry by 2."""
        return [x + y for x, y in self.vertices()]

    def area(self) -> float:
        """Area between the path and the horizontal line ``y = 0`` inside the strip.

        Only differences of this quantity are meaningful.
        """
        # interior vertices own a full diagonal cell, the two endpoints a half cell
        h = self.heights()
        return sum(h[1:-1]) / 2 + (h[0] + h[-1]) / 4

    def is_horizontal(self) -> bool:
        return all(lab == UP for lab in self.labels)

    def translate(self, k: int = 1) -> "DownRightPath":
        return DownRightPath(self.N, self.labels, self.anchor + k)

    def literal(self) -> str:
        return "".join(self.labels)

    def __str__(self):
        return f"{self.literal()}@{self.anchor}"


@dataclass(frozen=True)
class LocalMove:
    """A single-vertex upward deformation of a path.

    ``position`` is the zero-based label index the move acts on: for a bulk
    move it is the index ``j`` of the ``R`` label of an ``(R, U)`` corner
    (labels ``j, j+1``); a left move acts on label 0 and a right move on
    label ``N-1``.
    """
    kind: str
    position: int

    def __post_init__(self):
        if self.kind not in MOVE_KINDS:
            raise PathError(f"unknown move kind {self.kind!r}")


def build_path(N: int, labels: Sequence[str] | str | None = None, anchor: int | None = None) -> DownRightPath:
    """Validate and build a path; ``labels=None`` gives the horizontal path.

    ``anchor=None`` picks the lowest admissible anchor.
    """
    labs = (UP,) * N if labels is None else _normalize_labels(labels)
    if anchor is None:
        anchor = labs.count(RIGHT)
    return DownRightPath(N, labs, anchor)


def parse_path(literal: str, anchor: int | None = None) -> DownRightPath:
    """Parse the ``"URU"`` literal syntax used by the CLI."""
    literal = literal.strip()
    if not literal:
        raise PathError("empty path literal")
    return build_path(len(literal), literal, anchor)


def applicable_moves(path: DownRightPath) -> list[LocalMove]:
    moves = []
    labs = path.labels
    if labs[0] == UP:
        moves.append(LocalMove(LEFT, 0))
    for j in range(path.N - 1):
        if labs[j] == RIGHT and labs[j + 1] == UP:
            moves.append(LocalMove(BULK, j))
    if labs[-1] == RIGHT:
        moves.append(LocalMove(RIGHT_BOUNDARY, path.N - 1))
    return moves


def apply_local_move(path: DownRightPath, move: LocalMove) -> DownRightPath:
    labs = list(path.labels)
    anchor = path.anchor
    j = move.position
    if move.kind == LEFT:
        if j != 0 or labs[0] != UP:
            raise PathError("left-boundary move needs the path to start with a right step (label U)")
        labs[0] = RIGHT
        anchor += 1
    elif move.kind == RIGHT_BOUNDARY:
        if j != path.N - 1 or labs[-1] != RIGHT:
            raise PathError("right-boundary move needs the path to end with a down step (label R)")
        labs[-1] = UP
    else:
        if not (0 <= j < path.N - 1) or labs[j] != RIGHT or labs[j + 1] != UP:
            raise PathError(f"no down-then-right corner at position {j} of {path.literal()}")
        labs[j], labs[j + 1] = UP, RIGHT
    return DownRightPath(path.N, tuple(labs), anchor)


def move_vertex(path: DownRightPath, move: LocalMove) -> tuple[int, int]:
    """The vertex sampled by ``move``: the new corner of the moved path."""
    s = {LEFT: 0, RIGHT_BOUNDARY: path.N}.get(move.kind, move.position + 1)
    x, y = path.vertices()[s]
    return x + 1, y + 1


def decompose_translation(path: DownRightPath) -> list[LocalMove]:
    """Local moves taking ``path`` to ``path + (1, 1)``, in raster order.

    Vertex ``s`` of the path is raised to ``(x_s + 1, y_s + 1)``; sorting those
    new vertices by ``(y, x)`` always gives an applicable sequence because a
    vertex only depends on its left and bottom neighbours.
    """
    pts = path.vertices()
    order = sorted(range(path.N + 1), key=lambda s: (pts[s][1], pts[s][0]))
    moves = []
    for s in order:
        if s == 0:
            moves.append(LocalMove(LEFT, 0))
        elif s == path.N:
            moves.append(LocalMove(RIGHT_BOUNDARY, path.N - 1))
        else:
            moves.append(LocalMove(BULK, s - 1))
    # replay to guarantee applicability
    cur = path
    for mv in moves:
        cur = apply_local_move(cur, mv)
    assert cur == path.translate(1)
    return moves


def moves_between(path: DownRightPath, target: DownRightPath) -> list[LocalMove]:
    """Local moves from ``path`` up to a path ``target`` sitting weakly above it."""
    if target.N != path.N:
        raise PathError("paths have different widths")
    h0, h1 = path.heights(), target.heights()
    if any(b < a for a, b in zip(h0, h1)):
        raise PathError(f"target {target} is not above {path}")
    moves = []
    cur = path
    while cur != target:
        hc = cur.heights()
        for mv in applicable_moves(cur):
            s = {LEFT: 0, RIGHT_BOUNDARY: cur.N}.get(mv.kind, mv.position + 1)
            if hc[s] + 2 <= h1[s]:
                break
        else:  # pragma: no cover - unreachable for admissible targets
            raise PathError(f"cannot reach {target} from {path}")
        moves.append(mv)
        cur = apply_local_move(cur, mv)
    return moves


def all_paths(N: int) -> list[DownRightPath]:
    """Every label sequence of width N at its lowest admissible anchor."""
    out = []
    for code in range(2 ** N):
        labs = tuple(RIGHT if (code >> i) & 1 else UP for i in range(N))
        out.append(DownRightPath(N, labs, labs.count(RIGHT)))
    return out
