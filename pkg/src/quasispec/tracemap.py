"""Traces of transfer matrices along hierarchical word recursions.

For the Sturmian blocks ``M_n = M(s_n)`` satisfy ``M_n = M_(n-2) M_(n-1)^(a_n)``.
Powers are reduced with ``M^k = U_(k-1)(t) M - U_(k-2)(t) I`` (``t = tr M``,
``U`` the Chebyshev-type sequence ``U_k = t U_(k-1) - U_(k-2)``), so the
recursion closes on the triple ``(tr M_(n-1), tr M_n, tr M_(n-1) M_n)``.

For two-letter substitutions the step on ``(tr A, tr B, tr AB)`` is derived
once by rewriting image words with

    X X      ->  tr(X) X - I
    tr(MNMO)  =  tr(MN) tr(MO) + tr(NO) - tr(N) tr(O)

and compiled to a numpy evaluator.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
import sympy

from .errors import DomainError, PreconditionError, SiteRangeError, UnsupportedSubstitutionError
from .operator import Coding
from .symbolic.contfrac import ContinuedFraction
from .symbolic.words import SubstitutionRule

SATURATION = 1e150
ESCAPE_RUN = 3


def c_lambda(lam: float) -> float:
    """``C_lambda = 2 + sqrt(8 + lambda^2)``."""
    return 2.0 + math.sqrt(8.0 + lam * lam)


@dataclass(frozen=True, eq=False)
class TraceOrbit:
    """Trace values ``x_n`` for ``n = first_level, first_level + 1, ...``.

    ``saturated`` means the last stored value hit the clamp ``1e150`` and the
    orbit was truncated there; levels up to ``requested`` beyond it were not
    computed.
    """

    values: np.ndarray
    first_level: int
    requested: int
    bound_used: float
    escape_index: int | None = None
    saturated: bool = False

    @property
    def levels(self) -> np.ndarray:
        return np.arange(self.first_level, self.first_level + len(self.values))

    def x(self, n: int) -> float:
        k = n - self.first_level
        if not 0 <= k < len(self.values):
            raise SiteRangeError(f"level {n} not in orbit")
        return float(self.values[k])

    def to_rows(self) -> list[tuple[int, float, bool]]:
        esc = self.escape_index
        return [(int(n), float(v), bool(esc is not None and n >= esc))
                for n, v in zip(self.levels, self.values)]


@dataclass(frozen=True)
class TraceState2:
    """Traces over the enlarged alphabet ``{a, b, ab}``."""

    t_a: float
    t_b: float
    t_ab: float

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.t_a, self.t_b, self.t_ab)


def _clamp(v):
    return np.clip(v, -SATURATION, SATURATION)


def _escape_start(values: np.ndarray, bound: float, first_level: int,
                  requested: int, saturated: bool) -> int | None:
    """Start of the final run of levels above ``bound`` with strictly growing ``|x|``.

    Levels after a saturation point count as part of the run.  ``None`` unless
    the run spans at least three levels.
    """
    a = np.abs(values)
    k = len(a) - 1
    if a[k] <= bound:
        return None
    while k > 0 and a[k - 1] > bound and a[k - 1] < a[k]:
        k -= 1
    last = first_level + len(a) - 1
    span = len(a) - k + (requested - last if saturated else 0)
    return first_level + k if span >= ESCAPE_RUN else None


def _finish_orbit(row: np.ndarray, sat_level: int, first_level: int, requested: int,
                  bound: float) -> TraceOrbit:
    saturated = sat_level >= 0
    vals = row[:sat_level - first_level + 1] if saturated else row
    esc = _escape_start(vals, bound, first_level, requested, saturated)
    return TraceOrbit(np.array(vals, dtype=float), first_level, requested, bound, esc, saturated)


def _power_coeffs(t, k: int):
    """``(U_(k-1)(t), U_(k-2)(t))`` so that ``M^k = U_(k-1) M - U_(k-2) I``."""
    one = np.ones_like(t)
    if k == 0:
        return 0 * one, -one
    u_prev, u = 0 * one, one  # U_-1, U_0
    for _ in range(k - 1):
        u_prev, u = u, t * u - u_prev
    return u, u_prev


def sturmian_trace_table(E, lam: float, cf: ContinuedFraction, N: int):
    """Traces ``x_-1 .. x_N`` for an array of energies.

    Returns ``(table, sat_level)``: ``table`` has shape ``(N + 2, len(E))``;
    ``sat_level[i]`` is the first level whose value was clamped, or ``-2``.
    """
    if N > cf.depth:
        raise SiteRangeError(f"level {N} needs continued fraction depth {N}")
    if N < -1:
        raise SiteRangeError("levels start at -1")
    E = np.atleast_1d(np.asarray(E, dtype=float))
    table = np.empty((N + 2, E.size))
    sat = np.full(E.size, -2, dtype=int)
    t_prev = E - lam          # tr M_-1
    t_cur = E.copy()          # tr M_0
    w = t_prev * t_cur - 2.0  # tr M_-1 M_0
    table[0] = t_prev
    if N >= 0:
        table[1] = t_cur
    with np.errstate(over="ignore", invalid="ignore"):
        for n in range(1, N + 1):
            a = cf.a(n) - 1 if n == 1 else cf.a(n)
            u1, u2 = _power_coeffs(t_cur, a)
            u0 = t_cur * u1 - u2  # U_a
            t_next = u1 * w - u2 * t_prev
            w_next = u0 * w - u1 * t_prev
            # w outgrows t, so a clamped w would silently corrupt later t values
            big = ~((np.abs(t_next) < SATURATION) & (np.abs(w_next) < SATURATION))
            newly = big & (sat < -1)
            sat[newly] = n
            t_prev, t_cur, w = t_cur, _clamp(np.nan_to_num(t_next)), _clamp(np.nan_to_num(w_next))
            table[n + 1] = t_cur
    return table, sat


def sturmian_traces(E: float, lam: float, cf: ContinuedFraction, N: int,
                    bound: float | None = None) -> TraceOrbit:
    """Orbit ``x_-1, ..., x_N`` with ``x_n = tr M_E(s_n)``.

    Escape is judged against ``bound`` (default ``C_lambda``).
    """
    table, sat = sturmian_trace_table(E, lam, cf, N)
    bound = c_lambda(lam) if bound is None else bound
    return _finish_orbit(table[:, 0], int(sat[0]), -1, N, bound)


def fibonacci_step(x, y, z):
    """``x_n = x_(n-1) x_(n-2) - x_(n-3)`` with ``(x, y, z) = (x_(n-1), x_(n-2), x_(n-3))``."""
    return x * y - z


def fibonacci_orbit(seed: tuple[float, float, float], steps: int) -> np.ndarray:
    """``seed = (x_(k-2), x_(k-1), x_k)`` followed by ``steps`` new values."""
    out = list(seed)
    for _ in range(steps):
        out.append(fibonacci_step(out[-1], out[-2], out[-3]))
    return np.array(out, dtype=float)


def fricke_invariant(x_next, x_cur, x_prev):
    """``x_(n+1)^2 + x_n^2 + x_(n-1)^2 - x_(n+1) x_n x_(n-1)``."""
    return x_next ** 2 + x_cur ** 2 + x_prev ** 2 - x_next * x_cur * x_prev


# --- symbolic reduction of cyclic words -------------------------------------

_X, _Y, _Z = sympy.symbols("x y z")
_LETTER_TRACE = {"a": _X, "b": _Y}


def _canonical(word: str) -> str:
    return min(word[i:] + word[:i] for i in range(len(word))) if word else word


def _chebyshev_trace(t, k: int):
    """``tr(X^k)`` from ``t = tr X``: ``2, t, t^2 - 2, ...``."""
    prev, cur = sympy.Integer(2), t
    if k == 0:
        return prev
    for _ in range(k - 1):
        prev, cur = cur, sympy.expand(t * cur - prev)
    return cur


@lru_cache(maxsize=None)
def _reduce(word: str):
    word = _canonical(word)
    n = len(word)
    if n == 0:
        return sympy.Integer(2)
    letters = set(word)
    if len(letters) == 1:
        ch = word[0]
        if ch not in _LETTER_TRACE:
            raise UnsupportedSubstitutionError(f"trace of {ch!r} is outside {{a, b, ab}}", word)
        return _chebyshev_trace(_LETTER_TRACE[ch], n)
    if word in ("ab", "ba"):
        return _Z
    # adjacent repeat (cyclically): rotate to U X X
    for i in range(n):
        if word[i] == word[(i + 1) % n]:
            rot = word[i + 2:] + word[:i] if i + 1 < n else word[1:i]
            x = word[i]
            if x not in _LETTER_TRACE:
                break
            # tr(U X X) = tr(X) tr(U X) - tr(U)
            return sympy.expand(_LETTER_TRACE[x] * _reduce(rot + x) - _reduce(rot))
    # repeated letter at distance: rotate to M N M O
    for i, ch in enumerate(word):
        j = word.find(ch, i + 1)
        if j > i:
            m, nn, o = ch, word[i + 1:j], word[j + 1:] + word[:i]
            if nn and o:
                return sympy.expand(_reduce(m + nn) * _reduce(m + o) + _reduce(nn + o)
                                    - _reduce(nn) * _reduce(o))
    raise UnsupportedSubstitutionError(
        f"trace of cyclic word {word!r} does not reduce over {{a, b, ab}}", word)


def reduce_trace(word: str):
    """Polynomial in ``x = tr A, y = tr B, z = tr AB`` equal to ``tr`` of the matrix word."""
    return _reduce(word.replace("A", "a").replace("B", "b"))


@dataclass(frozen=True, eq=False)
class TraceMap:
    """Compiled step ``(x, y, z) -> (x', y', z')`` for a two-letter substitution."""

    rule: SubstitutionRule
    expressions: tuple
    _fn: object = field(repr=False)

    def __call__(self, x, y, z):
        return self._fn(x, y, z)

    def step(self, s: TraceState2) -> TraceState2:
        return TraceState2(*(float(v) for v in self(*s.as_tuple())))


@lru_cache(maxsize=32)
def compile_trace_map(rule: SubstitutionRule) -> TraceMap:
    """Derive the trace step for ``rule`` over the alphabet ``{a, b}`` (in that order).

    The level-``n`` matrix of a letter is the level-``(n-1)`` product along
    its image read right to left.
    """
    syms = rule.alphabet.symbols
    if len(syms) != 2:
        residue = "".join(syms)
        raise UnsupportedSubstitutionError(
            f"trace step needs a two-letter alphabet, got {len(syms)} letters", residue)
    rename = {syms[0]: "a", syms[1]: "b"}
    ia = "".join(rename[c] for c in rule[syms[0]])
    ib = "".join(rename[c] for c in rule[syms[1]])
    exprs = (reduce_trace(ia[::-1]), reduce_trace(ib[::-1]), reduce_trace((ia + ib)[::-1]))
    fn = sympy.lambdify((_X, _Y, _Z), exprs, modules="numpy")
    return TraceMap(rule, exprs, fn)


def trace_triple_step(rule: SubstitutionRule, s: TraceState2) -> TraceState2:
    """Next-level traces of ``S^n(a), S^n(b), S^n(a) S^n(b)``."""
    return compile_trace_map(rule).step(s)


def seed_state(E, coding: Coding, rule: SubstitutionRule):
    """Level-0 traces ``(E - f(a), E - f(b), (E - f(a))(E - f(b)) - 2)``."""
    a, b = rule.alphabet.symbols
    xa = np.asarray(E, dtype=float) - coding[a]
    xb = np.asarray(E, dtype=float) - coding[b]
    return xa, xb, xa * xb - 2.0


def substitution_trace_table(E, coding: Coding, rule: SubstitutionRule, N: int):
    """Triples for levels ``0..N``: array ``(N + 1, 3, len(E))`` plus saturation levels."""
    tm = compile_trace_map(rule)
    E = np.atleast_1d(np.asarray(E, dtype=float))
    out = np.empty((N + 1, 3, E.size))
    sat = np.full(E.size, -2, dtype=int)
    x, y, z = seed_state(E, coding, rule)
    out[0] = (x, y, z)
    with np.errstate(over="ignore", invalid="ignore"):
        for n in range(1, N + 1):
            nx = [np.broadcast_to(np.asarray(v, dtype=float), E.shape) for v in tm(x, y, z)]
            big = ~np.all([np.abs(v) < SATURATION for v in nx], axis=0)
            sat[big & (sat < -1)] = n
            x, y, z = (_clamp(np.nan_to_num(v)) for v in nx)
            out[n] = (x, y, z)
    return out, sat


def substitution_traces(E: float, coding: Coding, rule: SubstitutionRule, N: int,
                        bound: float = math.inf) -> TraceOrbit:
    """Orbit ``x_n = tr M_E(S^n(a))`` for ``n = 0..N``."""
    table, sat = substitution_trace_table(E, coding, rule, N)
    return _finish_orbit(table[:, 0, 0], int(sat[0]), 0, N, bound)


# --- identity diagnostics --------------------------------------------------

def _check_unimodular(*mats, tol: float = 1e-9):
    for m in mats:
        m = np.asarray(m, dtype=float)
        if m.shape != (2, 2):
            raise DomainError("expected a 2x2 matrix")
        if abs(np.linalg.det(m) - 1.0) > tol * max(1.0, float(np.sum(m * m))):
            raise PreconditionError("matrix is not unimodular")


def trace_identity_check(M, N, O) -> float:
    """``|tr(MNMO) - (tr(MN) tr(MO) + tr(NO) - tr(N) tr(O))|``."""
    _check_unimodular(M, N, O)
    M, N, O = (np.asarray(m, dtype=float) for m in (M, N, O))
    lhs = np.trace(M @ N @ M @ O)
    rhs = (np.trace(M @ N) * np.trace(M @ O) + np.trace(N @ O)
           - np.trace(N) * np.trace(O))
    return float(abs(lhs - rhs))


def square_identity_check(M) -> float:
    """Max-entry residual of ``M^2 - tr(M) M + I``."""
    _check_unimodular(M)
    M = np.asarray(M, dtype=float)
    return float(np.max(np.abs(M @ M - np.trace(M) * M + np.eye(2))))


# --- energy classification -------------------------------------------------

class Status(enum.Enum):
    CERTIFIED_OUT = "certified_out"
    UNDECIDED_IN = "undecided_in"


@dataclass(frozen=True)
class Classification:
    status: Status
    level: int
    bound: float
    soundness: str  # "sturmian" or "subsequence"

    @property
    def out(self) -> bool:
        return self.status is Status.CERTIFIED_OUT


def classify_orbit(orbit: TraceOrbit, soundness: str = "sturmian") -> Classification:
    if orbit.escape_index is not None:
        return Classification(Status.CERTIFIED_OUT, orbit.escape_index, orbit.bound_used, soundness)
    return Classification(Status.UNDECIDED_IN, orbit.requested, orbit.bound_used, soundness)


def classify_energy(E: float, lam: float, cf: ContinuedFraction, N_max: int) -> Classification:
    """``CERTIFIED_OUT(m)`` once ``|x_k| > C_lambda`` and grows for three levels from ``m``.

    A single exceedance already excludes ``E`` from the spectrum; the extra
    growth requirement is a guard against rounding near the threshold.
    """
    return classify_orbit(sturmian_traces(E, lam, cf, N_max))


def classify_energies(E, lam: float, cf: ContinuedFraction, N_max: int) -> np.ndarray:
    """Vectorized :func:`classify_energy`; boolean mask of certified-out energies."""
    table, sat = sturmian_trace_table(E, lam, cf, N_max)
    bound = c_lambda(lam)
    return np.array([_finish_orbit(table[:, i], int(sat[i]), -1, N_max, bound).escape_index
                     is not None for i in range(table.shape[1])])
