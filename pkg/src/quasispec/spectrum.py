"""Band sets ``{E : |x_n(E)| <= 2}`` of periodic approximants.

Band edges are located as jumps of a monotone counting function.  For a
period-``q`` potential with block values ``v_1 .. v_q`` let ``N_D(E)`` be the
number of eigenvalues below ``E`` of the Dirichlet matrix on sites
``1 .. q-1`` (one per closed gap) and ``x(E)`` the trace of the monodromy.
The number of band edges below ``E`` is

    2 N_D + 1                         if |x| <= 2   (inside band N_D + 1)
    2 j,  j in {N_D, N_D + 1}          otherwise, picked by sign x = (-1)^(q-j)

so edge ``k`` is the smallest ``E`` where the count reaches ``k``.  Each edge
is bracketed on a uniform grid of ``16 q`` points and bisected to float
resolution.  Traces are evaluated pointwise; no polynomial is ever expanded.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import ResolutionError, SiteRangeError
from .operator import RENORM_EVERY, Coding, Potential
from .symbolic.contfrac import ContinuedFraction
from .symbolic.sturmian import sturmian_block
from .symbolic.words import SubstitutionRule
from .tracemap import SATURATION, compile_trace_map, sturmian_trace_table, substitution_trace_table

GRID_PER_BAND = 16
_PAD = 1e-6


def spectrum_bounds(V: Potential) -> tuple[float, float]:
    """``[-2 + min V, 2 + max V]``, which contains the spectrum."""
    return (-2.0 + V.vmin, 2.0 + V.vmax)


@dataclass(frozen=True, eq=False)
class BandList:
    """Closed bands ``[l_i, r_i]`` sorted by ``l_i``.

    Adjacent bands may share an endpoint (a closed gap); such pairs are listed
    in ``touching`` by the index of the left band.
    """

    intervals: np.ndarray
    level: int
    lam: float
    tol: float
    touching: tuple[int, ...] = ()
    edge_residual: float = 0.0  # max over endpoints of | |x(E)| - 2 |

    def __len__(self):
        return len(self.intervals)

    def __iter__(self):
        return (tuple(map(float, r)) for r in self.intervals)

    @property
    def measure(self) -> float:
        return band_measure(self)

    def contains(self, E) -> np.ndarray:
        E = np.atleast_1d(np.asarray(E, dtype=float))
        l, r = self.intervals[:, 0], self.intervals[:, 1]
        i = np.searchsorted(l, E, side="right") - 1
        ok = i >= 0
        ok[ok] = E[ok] <= r[i[ok]]
        return ok

    def union(self) -> list[tuple[float, float]]:
        return merge_intervals(list(self))

    def to_json(self) -> dict:
        return {
            "level": self.level,
            "lambda": self.lam,
            "tol": self.tol,
            "bands": [[float(l), float(r)] for l, r in self.intervals],
            "measure": self.measure,
            "touching": list(self.touching),
        }

    def to_rows(self) -> list[tuple[float, float]]:
        return [(float(l), float(r)) for l, r in self.intervals]


def band_measure(b) -> float:
    """Total length ``sum (r_i - l_i)``; accepts a BandList or interval pairs."""
    rows = b.intervals if isinstance(b, BandList) else np.asarray(list(b), dtype=float)
    if len(rows) == 0:
        return 0.0
    rows = np.asarray(rows, dtype=float).reshape(-1, 2)
    return float(np.sum(rows[:, 1] - rows[:, 0]))


# --- counting function -----------------------------------------------------

def dirichlet_count(E: np.ndarray, values) -> np.ndarray:
    """Eigenvalues below ``E`` of the tridiagonal matrix with diagonal ``values``
    and unit off-diagonal, by counting negative pivots of ``H - E``."""
    E = np.asarray(E, dtype=float)
    count = np.zeros(E.shape, dtype=np.int64)
    d = None
    tiny = np.finfo(float).tiny ** 0.5
    for v in values:
        d = (v - E) if d is None else (v - E) - 1.0 / d
        d = np.where(d == 0.0, -tiny, d)
        count += d < 0
    return count


def block_trace(E, values) -> np.ndarray:
    """``tr(T(v_q) ... T(v_1))`` with rescaling; magnitude clamped at ``1e150``, sign exact."""
    E = np.atleast_1d(np.asarray(E, dtype=float))
    a, b = np.ones_like(E), np.zeros_like(E)
    c, d = np.zeros_like(E), np.ones_like(E)
    log_scale = np.zeros_like(E)
    for k, v in enumerate(values, start=1):
        e = E - v
        a, b, c, d = e * a - c, e * b - d, a, b
        if k % RENORM_EVERY == 0:
            s = np.maximum(np.maximum(np.abs(a), np.abs(b)), np.maximum(np.abs(c), np.abs(d)))
            a, b, c, d = a / s, b / s, c / s, d / s
            log_scale += np.log(s)
    t = a + d
    with np.errstate(over="ignore", divide="ignore"):
        mag = np.log(np.abs(t)) + log_scale
        return np.sign(t) * np.exp(np.minimum(mag, math.log(SATURATION)))


TraceFn = Callable[[np.ndarray], np.ndarray]


def _edge_count(E, trace: TraceFn, values, q: int):
    x = trace(E)
    nd = dirichlet_count(E, values[:q - 1])
    inside = np.abs(x) <= 2.0
    # in a gap: j in {nd, nd+1} with sign x = (-1)^(q-j)
    parity_ok = np.where(x > 0, (q - nd) % 2 == 0, (q - nd) % 2 == 1)
    j = np.where(parity_ok, nd, nd + 1)
    return np.where(inside, 2 * nd + 1, 2 * j), x


def _bands(trace: TraceFn, values: np.ndarray, lo: float, hi: float, tol: float,
           level: int, lam: float) -> BandList:
    q = len(values)
    grid = np.linspace(lo, hi, GRID_PER_BAND * q + 1)
    counts, _ = _edge_count(grid, trace, values, q)
    if counts[0] != 0 or counts[-1] != 2 * q:
        raise ResolutionError(
            f"edge count at the scan bounds is ({counts[0]}, {counts[-1]}), expected (0, {2 * q}); "
            "trace evaluation lost accuracy, use a finer scan or a lower level")
    counts = np.maximum.accumulate(counts)
    ks = np.arange(1, 2 * q + 1)
    idx = np.searchsorted(counts, ks, side="left")
    a, b = grid[idx - 1].copy(), grid[idx].copy()
    for _ in range(200):
        width = b - a
        open_ = width > 2.0 * np.spacing(np.maximum(np.abs(a), np.abs(b)))
        if not open_.any():
            break
        mid = 0.5 * (a + b)
        cm, _ = _edge_count(mid, trace, values, q)
        up = cm >= ks
        b = np.where(open_ & up, mid, b)
        a = np.where(open_ & ~up, mid, a)
    # report the in-band side of each bracket
    edges = np.where(ks % 2 == 1, b, a)
    left, right = edges[0::2].copy(), edges[1::2].copy()
    if np.any(left - right > tol) or np.any(np.diff(left) < -tol):
        raise ResolutionError("band edges out of order; use a smaller tolerance or lower level")
    # bands narrower than float resolution come back with crossed ends
    crossed = right < left
    left[crossed] = right[crossed] = 0.5 * (left[crossed] + right[crossed])
    touching = []
    for i in range(q - 1):
        gap = left[i + 1] - right[i]
        if gap < tol:
            if gap < 0:
                m = 0.5 * (left[i + 1] + right[i])
                right[i] = left[i + 1] = m
            touching.append(i)
    x_edges = trace(np.concatenate([left, right]))
    residual = float(np.max(np.abs(np.abs(x_edges) - 2.0)))
    return BandList(np.column_stack([left, right]), level, float(lam), float(tol),
                    tuple(touching), residual)


def periodic_bands(block: str, coding: Coding, tol: float = 1e-10, level: int = 0,
                   trace: TraceFn | None = None) -> BandList:
    """Bands of the potential repeating ``block`` with period ``|block|``."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    values = coding.encode(block)
    if trace is None:
        def trace(E):
            return block_trace(E, values)
    lo, hi = -2.0 + values.min() - _PAD, 2.0 + values.max() + _PAD
    return _bands(trace, values, lo, hi, tol, level, coding.coupling)


def _with_fallback(table_fn, values):
    """Wrap a recursion-based trace so saturated energies use the rescaled product."""
    def trace(E):
        E = np.atleast_1d(np.asarray(E, dtype=float))
        x, sat = table_fn(E)
        if sat.any():
            x = x.copy()
            x[sat] = block_trace(E[sat], values)
        return x
    return trace


def approx_bands(lam: float, cf: ContinuedFraction, n: int, tol: float = 1e-10) -> BandList:
    """Bands of the period-``q_n`` approximant built from ``s_n`` (Sturmian coding)."""
    if n > cf.depth:
        raise SiteRangeError(f"level {n} exceeds continued fraction depth {cf.depth}")
    coding = Coding.sturmian(lam)
    block = sturmian_block(cf, n)
    values = coding.encode(block)

    def table(E):
        tab, sat = sturmian_trace_table(E, lam, cf, n)
        return tab[-1], sat >= 0

    return periodic_bands(block, coding, tol, n, _with_fallback(table, values))


def substitution_bands(rule: SubstitutionRule, coding: Coding, n: int,
                       tol: float = 1e-10) -> BandList:
    """Bands of the approximant repeating ``S^n(a)``; the trace map is used when it exists."""
    seed = rule.alphabet.symbols[0]
    block = rule.iterate(seed, n)
    values = coding.encode(block)
    trace = None
    if len(rule.alphabet) == 2:
        compile_trace_map(rule)

        def table(E):
            tab, sat = substitution_trace_table(E, coding, rule, n)
            return tab[-1, 0], sat >= 0

        trace = _with_fallback(table, values)
    return periodic_bands(block, coding, tol, n, trace)


# --- interval sets ----------------------------------------------------------

def merge_intervals(rows) -> list[tuple[float, float]]:
    rows = sorted((float(l), float(r)) for l, r in rows)
    out: list[list[float]] = []
    for l, r in rows:
        if out and l <= out[-1][1]:
            out[-1][1] = max(out[-1][1], r)
        else:
            out.append([l, r])
    return [tuple(x) for x in out]


def intersect_intervals(xs, ys) -> list[tuple[float, float]]:
    """Intersection of two merged interval lists (endpoints kept exactly)."""
    out = []
    i = j = 0
    while i < len(xs) and j < len(ys):
        l = max(xs[i][0], ys[j][0])
        r = min(xs[i][1], ys[j][1])
        if l <= r:
            out.append((l, r))
        if xs[i][1] < ys[j][1]:
            i += 1
        else:
            j += 1
    return out


@dataclass(frozen=True)
class StageSet:
    """Finite-stage brackets of ``limsup`` band sets over levels ``k..n``.

    ``outer`` is the union over levels ``k..n``; ``inner`` is the union over
    ``k+1..n`` intersected with ``outer``.
    """

    k: int
    n: int
    lam: float
    outer: list = field(default_factory=list)
    inner: list = field(default_factory=list)

    @property
    def outer_measure(self) -> float:
        return band_measure(self.outer)

    @property
    def inner_measure(self) -> float:
        return band_measure(self.inner)

    def contains(self, E, which: str = "outer") -> np.ndarray:
        rows = np.asarray(getattr(self, which), dtype=float).reshape(-1, 2)
        E = np.atleast_1d(np.asarray(E, dtype=float))
        i = np.searchsorted(rows[:, 0], E, side="right") - 1
        ok = i >= 0
        ok[ok] = E[ok] <= rows[i[ok], 1]
        return ok

    def to_json(self) -> dict:
        return {
            "k": self.k, "n": self.n, "lambda": self.lam,
            "outer": [list(r) for r in self.outer], "inner": [list(r) for r in self.inner],
            "outer_measure": self.outer_measure, "inner_measure": self.inner_measure,
        }


def nested_spectrum(lam: float, cf: ContinuedFraction, n: int, k: int,
                    tol: float = 1e-10) -> StageSet:
    if not k <= n <= cf.depth:
        raise SiteRangeError("need k <= n <= continued fraction depth")
    per_level = {m: list(approx_bands(lam, cf, m, tol)) for m in range(k, n + 1)}
    outer = merge_intervals([r for m in range(k, n + 1) for r in per_level[m]])
    inner = merge_intervals([r for m in range(k + 1, n + 1) for r in per_level[m]])
    return StageSet(k, n, float(lam), outer, intersect_intervals(outer, inner))
