"""Potentials, transfer matrices and solutions of the eigenvalue equation

    phi(n+1) + phi(n-1) + V(n) phi(n) = E phi(n)

on integer sites.  Energies are real.  Matrices are 2x2 ``numpy`` arrays;
functions taking an energy also accept an array of energies and then return
a stack of shape ``E.shape + (2, 2)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from .errors import DomainError, PreconditionError, SiteRangeError
from .symbolic.sturmian import circle_map_word

RENORM_EVERY = 32


@dataclass(frozen=True)
class Coding:
    """Symbol -> potential value map."""

    table: tuple[tuple[str, float], ...]
    coupling: float = 1.0

    def __getitem__(self, symbol: str) -> float:
        for s, v in self.table:
            if s == symbol:
                return v
        raise DomainError(f"symbol {symbol!r} has no potential value")

    def as_dict(self) -> dict[str, float]:
        return dict(self.table)

    @property
    def values(self) -> list[float]:
        return [v for _, v in self.table]

    @classmethod
    def sturmian(cls, lam: float) -> "Coding":
        """``f(1) = lambda``, ``f(0) = 0``."""
        return cls((("0", 0.0), ("1", float(lam))), float(lam))

    @classmethod
    def linear(cls, symbols: Iterable[str], lam: float) -> "Coding":
        """Letters mapped to ``0, lambda, 2*lambda, ...`` in alphabet order."""
        return cls(tuple((s, i * float(lam)) for i, s in enumerate(symbols)), float(lam))

    @classmethod
    def from_mapping(cls, mapping: Mapping[str, float], lam: float = 1.0) -> "Coding":
        return cls(tuple((s, float(v)) for s, v in mapping.items()), float(lam))

    @classmethod
    def parse(cls, text: str) -> "Coding":
        """``"a=0,b=4"``."""
        items = {}
        for part in text.split(","):
            if "=" not in part:
                raise DomainError(f"cannot parse coding clause {part!r}")
            k, v = part.split("=", 1)
            items[k.strip()] = float(v)
        return cls.from_mapping(items)

    def encode(self, w: str) -> np.ndarray:
        table = self.as_dict()
        try:
            return np.array([table[s] for s in w], dtype=float)
        except KeyError as exc:
            raise DomainError(f"symbol {exc.args[0]!r} has no potential value") from None


@dataclass(frozen=True, eq=False)
class Potential:
    """A window of potential values; ``values[k]`` sits at site ``first + k``."""

    values: np.ndarray
    first: int = 1

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def last(self) -> int:
        return self.first + len(self.values) - 1

    def __len__(self):
        return len(self.values)

    def __call__(self, n: int) -> float:
        if not self.first <= n <= self.last:
            raise SiteRangeError(f"site {n} outside potential window [{self.first}, {self.last}]")
        return float(self.values[n - self.first])

    def window(self, lo: int, hi: int) -> np.ndarray:
        """Values on sites ``lo..hi`` inclusive."""
        if hi < lo:
            return self.values[:0]
        if lo < self.first or hi > self.last:
            raise SiteRangeError(f"sites [{lo}, {hi}] outside potential window "
                                 f"[{self.first}, {self.last}]")
        return self.values[lo - self.first:hi - self.first + 1]

    def rebase(self, offset: int) -> "Potential":
        """Shift sites so that site ``offset + 1`` becomes site 1."""
        return Potential(self.values, self.first - offset)

    @property
    def vmin(self) -> float:
        return float(self.values.min())

    @property
    def vmax(self) -> float:
        return float(self.values.max())

    @classmethod
    def from_word(cls, w: str, coding: Coding, first: int = 1) -> "Potential":
        return cls(coding.encode(w), first)

    @classmethod
    def constant(cls, value: float, lo: int, hi: int) -> "Potential":
        return cls(np.full(hi - lo + 1, float(value)), lo)

    @classmethod
    def circle_map(cls, alpha, beta, theta, lam: float, lo: int, hi: int) -> "Potential":
        """``lambda * chi_[1-beta,1)(n alpha + theta mod 1)`` on sites ``lo..hi``."""
        w = circle_map_word(alpha, beta, theta, (lo, hi))
        return cls.from_word(w, Coding.sturmian(lam), lo)

    def to_rows(self) -> list[tuple[int, float]]:
        return [(self.first + k, float(v)) for k, v in enumerate(self.values)]


def elementary_matrix(E: float, v: float) -> np.ndarray:
    """``[[E - v, -1], [1, 0]]``."""
    return np.array([[E - v, -1.0], [1.0, 0.0]])


def _chain(E, vs, inverse: bool = False):
    """Entries (a, b, c, d) of T(v_k) ... T(v_1) applied in order of ``vs``.

    With ``inverse`` the factors are the closed-form inverses
    ``[[0, 1], [-1, E - v]]``.  Works for scalar or array ``E``.
    """
    one = np.ones_like(E, dtype=float) if isinstance(E, np.ndarray) else 1.0
    a, b, c, d = one, 0.0 * one, 0.0 * one, one
    if inverse:
        for v in vs:
            e = E - v
            a, b, c, d = c, d, e * c - a, e * d - b
    else:
        for v in vs:
            e = E - v
            a, b, c, d = e * a - c, e * b - d, a, b
    return a, b, c, d


def _pack(a, b, c, d) -> np.ndarray:
    return np.stack([np.stack([a, b], axis=-1), np.stack([c, d], axis=-1)], axis=-2)


def transfer(E, V: Potential, n: int) -> np.ndarray:
    """Transfer matrix ``M_E(n)`` mapping ``Phi(0)`` to ``Phi(n)``.

    ``n >= 1``: ``T(n) ... T(1)``; ``n == 0``: identity; ``n <= -1``:
    ``T(n+1)^-1 ... T(0)^-1``.
    """
    if n >= 1:
        vs = V.window(1, n).tolist()
        return _pack(*_chain(E, vs))
    if n == 0:
        return _pack(*_chain(E, []))
    vs = V.window(n + 1, 0)[::-1].tolist()
    return _pack(*_chain(E, vs, inverse=True))


def word_matrix(E, w: str, coding: Coding) -> np.ndarray:
    """``M_E(w_1 ... w_n) = M_E(w_n) ... M_E(w_1)``."""
    return _pack(*_chain(E, coding.encode(w).tolist()))


@dataclass(frozen=True, eq=False)
class SolutionVector:
    """Solution values ``phi(n)`` on sites ``first .. first + len(values) - 1``."""

    values: np.ndarray
    first: int

    @property
    def last(self) -> int:
        return self.first + len(self.values) - 1

    def phi(self, n: int) -> float:
        if not self.first <= n <= self.last:
            raise SiteRangeError(f"solution not materialized at site {n}")
        return float(self.values[n - self.first])

    def Phi(self, n: int) -> np.ndarray:
        """``(phi(n+1), phi(n))``."""
        return np.array([self.phi(n + 1), self.phi(n)])

    def norms(self) -> tuple[np.ndarray, np.ndarray]:
        """Sites ``n`` and ``||Phi(n)||`` for every ``n`` with both entries materialized."""
        v = self.values
        return np.arange(self.first, self.last), np.hypot(v[1:], v[:-1])

    @classmethod
    def from_values(cls, values, first: int = 0) -> "SolutionVector":
        return cls(np.asarray(values, dtype=float), first)


def solve(E: float, V: Potential, phi0, sites: tuple[int, int]) -> SolutionVector:
    """Solution with ``Phi(0) = phi0 = (phi(1), phi(0))`` for ``Phi(lo) .. Phi(hi)``.

    Needs ``V`` on sites ``lo+1 .. hi``; the result holds ``phi`` on ``lo .. hi+1``.
    """
    lo, hi = sites
    if lo > 0 or hi < 0:
        raise DomainError("site range must contain 0")
    phi1, phi_0 = float(phi0[0]), float(phi0[1])
    if phi1 == 0.0 and phi_0 == 0.0:
        raise PreconditionError("initial vector must be nonzero")
    out = np.empty(hi - lo + 2)
    z = -lo  # index of site 0
    out[z], out[z + 1] = phi_0, phi1
    fwd = V.window(1, hi).tolist()
    prev, cur = phi_0, phi1
    for k, v in enumerate(fwd, start=1):
        prev, cur = cur, (E - v) * cur - prev
        out[z + k + 1] = cur
    bwd = V.window(lo + 1, 0).tolist()
    nxt, cur = phi1, phi_0
    for k, v in enumerate(reversed(bwd)):
        # site -k: phi(-k-1) = (E - V(-k)) phi(-k) - phi(-k+1)
        nxt, cur = cur, (E - v) * cur - nxt
        out[z - k - 1] = cur
    return SolutionVector(out, lo)


def _opnorm(a, b, c, d):
    s = a * a + b * b + c * c + d * d
    det = a * d - b * c
    return np.sqrt(0.5 * (s + np.sqrt(np.maximum(s * s - 4.0 * det * det, 0.0))))


def log_norm_product(E: float, values) -> float:
    """``ln ||T(v_n) ... T(v_1)||`` (spectral norm) with periodic rescaling."""
    a, b, c, d = 1.0, 0.0, 0.0, 1.0
    log_scale = 0.0
    for k, v in enumerate(values, start=1):
        e = E - v
        a, b, c, d = e * a - c, e * b - d, a, b
        if k % RENORM_EVERY == 0:
            s = math.sqrt(a * a + b * b + c * c + d * d)
            a, b, c, d = a / s, b / s, c / s, d / s
            log_scale += math.log(s)
    return log_scale + math.log(float(_opnorm(a, b, c, d)))


def lyapunov_estimate(E: float, V: Potential, n: int, start: int = 0) -> float:
    """``(1/n) ln ||M(n)||`` over sites ``start+1 .. start+n``.

    Uses the spectral norm; the running product is rescaled to unit size
    every 32 steps with the log scale accumulated separately.
    """
    if n < 1:
        raise DomainError("n must be >= 1")
    return log_norm_product(E, V.window(start + 1, start + n).tolist()) / n


def truncated_norm(phi: SolutionVector, L: float) -> float:
    """``(sum_{n=1}^{floor L} |phi(n)|^2 + (L - floor L) |phi(floor L + 1)|^2)^(1/2)``."""
    if L < 1:
        raise SiteRangeError("L must be >= 1")
    m = math.floor(L)
    if phi.first > 1 or phi.last < m + 1:
        raise SiteRangeError(f"solution must be materialized on sites 1..{m + 1}")
    head = phi.values[1 - phi.first:m + 1 - phi.first]
    tail = phi.values[m + 1 - phi.first]
    return math.sqrt(float(np.sum(head * head)) + (L - m) * tail * tail)


def _log_truncated_norms(E: float, V: Potential, phi0, L_grid: np.ndarray) -> np.ndarray:
    """``ln ||phi||_L^2`` on a grid, from a rescaled forward recursion (no overflow)."""
    m_max = int(math.floor(L_grid.max()))
    vs = V.window(1, m_max).tolist()
    phi1, phi_0 = float(phi0[0]), float(phi0[1])
    # values in units of exp(scale)
    logsq = np.empty(m_max + 2)   # ln |phi(n)|^2, n = 0..m_max+1
    logcum = np.empty(m_max + 2)  # ln sum_{k=1}^{n} |phi(k)|^2
    scale = 0.0
    prev, cur = phi_0, phi1
    acc = 0.0
    with np.errstate(divide="ignore"):
        logsq[0] = np.log(phi_0 * phi_0)
        logcum[0] = -np.inf
        for n in range(1, m_max + 2):
            if n > 1:
                prev, cur = cur, (E - vs[n - 2]) * cur - prev
            acc += cur * cur
            logsq[n] = np.log(cur * cur) + 2 * scale
            logcum[n] = np.log(acc) + 2 * scale
            big = max(abs(cur), abs(prev))
            if big > 1e100:
                prev, cur, acc = prev / big, cur / big, acc / (big * big)
                scale += math.log(big)
    floor_l = np.floor(L_grid).astype(int)
    frac = L_grid - floor_l
    with np.errstate(divide="ignore"):
        return np.logaddexp(logcum[floor_l], np.log(frac) + logsq[floor_l + 1])


def canonical_pair(E: float, V: Potential, sites: tuple[int, int]):
    """Solutions with ``phi_1(0) = phi_2(1) = 0``, ``phi_1(1) = phi_2(0) = 1``."""
    return solve(E, V, (1.0, 0.0), sites), solve(E, V, (0.0, 1.0), sites)


def jl_ratio(E: float, V: Potential, alpha: float, L_grid, log: bool = False) -> np.ndarray:
    """``||phi_1||_L^(2-alpha) / ||phi_2||_L^alpha`` for the canonical pair.

    Evaluated in log space; where ``||phi_2||_L`` vanishes (only ``L = 1``,
    since ``phi_2(1) = 0``) the ratio is ``inf`` for ``alpha > 0``.  With
    ``log=True`` the natural log is returned, which stays finite long after
    the ratio itself overflows.
    """
    L = np.atleast_1d(np.asarray(L_grid, dtype=float))
    if (L < 1).any():
        raise SiteRangeError("L must be >= 1")
    l1 = _log_truncated_norms(E, V, (1.0, 0.0), L)
    l2 = _log_truncated_norms(E, V, (0.0, 1.0), L)
    with np.errstate(invalid="ignore", over="ignore"):
        log_ratio = 0.5 * (2.0 - alpha) * l1 - 0.5 * alpha * l2
        if alpha == 0:
            log_ratio = 0.5 * 2.0 * l1
        return log_ratio if log else np.exp(log_ratio)
