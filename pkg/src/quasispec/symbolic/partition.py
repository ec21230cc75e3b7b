"""Decomposition of Sturmian factors into blocks s_n and s_(n-1)."""

from __future__ import annotations

from dataclasses import dataclass, field

from ..errors import ConsistencyError, SiteRangeError
from .contfrac import ContinuedFraction
from .sturmian import sturmian_blocks

LONG, SHORT = "s_n", "s_n-1"


@dataclass(frozen=True)
class Run:
    kind: str          # LONG (s_n) or SHORT (s_(n-1))
    start: int         # 1-based position of the first block of the run
    multiplicity: int


@dataclass(frozen=True)
class PartitionView:
    """Runs of full blocks tiling ``w`` between a partial head and tail.

    ``head`` is a proper suffix of a block and ``tail`` a proper prefix of a
    block; both are empty when the window is tiled exactly.
    """

    level: int
    runs: tuple[Run, ...]
    head: str
    tail: str
    block_lengths: dict = field(default_factory=dict, compare=False)

    def interior_runs(self) -> tuple[Run, ...]:
        """Runs bounded on both sides by runs of the other kind."""
        return self.runs[1:-1]

    def blocks(self) -> list[tuple[str, int]]:
        """Flattened ``(kind, start)`` list of every full block."""
        out = []
        for r in self.runs:
            size = self.block_lengths[r.kind]
            out.extend((r.kind, r.start + i * size) for i in range(r.multiplicity))
        return out

    def to_json(self) -> dict:
        return {
            "level": self.level,
            "head": self.head,
            "tail": self.tail,
            "runs": [{"kind": r.kind, "start": r.start, "multiplicity": r.multiplicity}
                     for r in self.runs],
        }


def n_partition(w: str, cf: ContinuedFraction, n: int) -> PartitionView:
    """The n-partition of a Sturmian factor ``w``.

    Blocks ``s_(n-1)`` stand alone; runs of ``s_n`` have multiplicity
    ``a_(n+1)`` or ``a_(n+1) + 1`` (runs touching the window edge may be
    shorter).  The anchor is searched over head lengths ``0 .. q_n - 1``;
    for each anchor a left-to-right parse enforces the run rules, preferring
    ``s_n`` at every step.
    """
    if n < 1:
        raise SiteRangeError("n-partition needs n >= 1")
    if n + 1 > cf.depth:
        raise SiteRangeError(f"need continued fraction depth {n + 1}")
    s = sturmian_blocks(cf, n)
    big, small = s[n], s[n - 1]
    a_next = cf.a(n + 1)
    lengths = {LONG: len(big), SHORT: len(small)}
    if len(w) < len(big):
        raise ConsistencyError("window shorter than one s_n block")

    def tail_ok(rest: str) -> bool:
        return len(rest) < len(big) and (big.startswith(rest) or small.startswith(rest))

    for head_len in range(len(big)):
        head = w[:head_len]
        if head and not (big.endswith(head) or small.endswith(head)):
            continue
        found = _parse(w, head_len, big, small, a_next, tail_ok)
        if found is not None:
            blocks, end = found
            runs = []
            for kind, pos in blocks:
                if runs and runs[-1][0] == kind:
                    runs[-1][2] += 1
                else:
                    runs.append([kind, pos + 1, 1])
            return PartitionView(n, tuple(Run(*r) for r in runs), head, w[end:], lengths)
    raise ConsistencyError(f"word cannot be partitioned into s_{n} / s_{n - 1} blocks; "
                           "it is not a factor of this Sturmian subshift")


def _parse(w, start, big, small, a_next, tail_ok):
    """Feasibility table from the right, then a greedy walk from ``start``.

    A state is ``(kind, run, first)``: the kind and length of the current run
    and whether it is the first run (which may be cut by the window edge).
    """
    size = len(w)
    qb, qs = len(big), len(small)
    states = [(LONG, r, f) for r in range(1, a_next + 2) for f in (True, False)]
    states += [(SHORT, 1, f) for f in (True, False)]

    def moves(pos, kind, run, first):
        if w.startswith(big, pos) and (kind != LONG or run < a_next + 1):
            nrun = run + 1 if kind == LONG else 1
            yield pos + qb, (LONG, nrun, first if kind in (None, LONG) else False)
        if w.startswith(small, pos) and kind != SHORT and (kind != LONG or first or run >= a_next):
            yield pos + qs, (SHORT, 1, kind is None)

    def can_stop(pos):
        return pos == size or (size - pos < qb and tail_ok(w[pos:]))

    feasible = [set() for _ in range(size + 1)]
    for pos in range(size, start - 1, -1):
        stop = can_stop(pos)
        for st in states:
            if stop or any(nst in feasible[npos] for npos, nst in moves(pos, *st)):
                feasible[pos].add(st)

    pos, st = start, (None, 0, True)
    blocks = []
    while True:
        step = next(((npos, nst) for npos, nst in moves(pos, *st) if nst in feasible[npos]), None)
        if step is None:
            return (blocks, pos) if can_stop(pos) else None
        blocks.append((step[1][0], pos))
        pos, st = step
