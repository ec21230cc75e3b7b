"""Circle-map codings and the hierarchical Sturmian blocks s_n."""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from ..errors import DomainError, SiteRangeError
from .contfrac import ContinuedFraction, QuadraticNumber

# orbit points closer than this (times site magnitude) to an interval endpoint
# are re-decided with exact arithmetic when the parameters are exact
_BOUNDARY_SLACK = 1e-12


def _is_exact(x) -> bool:
    return isinstance(x, (QuadraticNumber, Fraction, int)) and not isinstance(x, bool)


def _as_quadratic(x, d: int) -> QuadraticNumber:
    if isinstance(x, QuadraticNumber):
        return x
    return QuadraticNumber.from_rational(x, d)


def circle_map_word(alpha, beta, theta, sites) -> str:
    """Symbols ``chi_[1-beta, 1)(n*alpha + theta mod 1)`` for ``n`` in ``sites``.

    ``sites`` is a ``(first, last)`` pair (inclusive) or a ``range``.  Exact
    parameters (:class:`QuadraticNumber`, ``Fraction``, ``int``) get exact
    decisions for orbit points that land numerically close to an endpoint.
    """
    if isinstance(sites, range):
        ns = np.arange(sites.start, sites.stop, sites.step, dtype=np.int64)
    else:
        first, last = sites
        ns = np.arange(first, last + 1, dtype=np.int64)
    fa, fb, ft = float(alpha), float(beta), float(theta)
    if not 0 < fa < 1 or not 0 < fb < 1:
        raise DomainError("alpha and beta must lie in (0, 1)")
    if len(ns) == 0:
        return ""
    x = np.mod(ns.astype(np.float64) * fa + ft, 1.0)
    sym = x >= 1.0 - fb
    slack = _BOUNDARY_SLACK * (np.abs(ns) + 1.0) * max(1.0, abs(ft))
    near = (np.abs(x - (1.0 - fb)) < slack) | (x < slack) | (x > 1.0 - slack)
    if near.any() and all(_is_exact(v) for v in (alpha, beta, theta)):
        d = next((v.d for v in (alpha, beta, theta)
                  if isinstance(v, QuadraticNumber) and not v.is_rational), 5)
        qa, qb, qt = (_as_quadratic(v, d) for v in (alpha, beta, theta))
        for i in np.flatnonzero(near):
            y = qa * int(ns[i]) + qt
            frac = y - y.floor()
            sym[i] = (frac - (1 - qb)).sign() >= 0
    return "".join(np.where(sym, "1", "0"))


def sturmian_block(cf: ContinuedFraction, n: int) -> str:
    """The block ``s_n``: ``s_-1 = 1``, ``s_0 = 0``, ``s_1 = s_0^(a_1-1) s_-1``,
    ``s_n = s_(n-1)^(a_n) s_(n-2)``; ``|s_n| = q_n``.
    """
    if n < -1:
        raise SiteRangeError("blocks start at n = -1")
    if n > cf.depth:
        raise SiteRangeError(f"s_{n} needs continued fraction depth {n}, have {cf.depth}")
    prev, cur = "1", "0"
    if n == -1:
        return prev
    if n == 0:
        return cur
    prev, cur = cur, "0" * (cf.a(1) - 1) + "1"
    for k in range(2, n + 1):
        prev, cur = cur, cur * cf.a(k) + prev
    return cur


def sturmian_blocks(cf: ContinuedFraction, n: int) -> dict[int, str]:
    """All blocks ``s_-1 .. s_n`` keyed by level."""
    out = {-1: "1", 0: "0"}
    for k in range(1, n + 1):
        out[k] = (out[0] * (cf.a(1) - 1) + out[-1]) if k == 1 else out[k - 1] * cf.a(k) + out[k - 2]
    return out


def sturmian_prefix(cf: ContinuedFraction, length: int) -> str:
    """First ``length`` symbols of ``c_alpha = lim s_n`` (sites 1..length)."""
    n = next((k for k in range(cf.depth + 1) if cf.q(k) >= length), None)
    if n is None:
        raise SiteRangeError(f"depth {cf.depth} too small for a prefix of length {length}")
    return sturmian_block(cf, max(n, 1))[:length]


def check_block_identity(cf: ContinuedFraction, n: int) -> bool:
    """Exact string test of ``s_n s_(n+1) == s_(n+1) s_(n-1)^(a_n - 1) s_(n-2) s_(n-1)``."""
    if n < 2:
        raise SiteRangeError("identity is stated for n >= 2")
    s = sturmian_blocks(cf, n + 1)
    lhs = s[n] + s[n + 1]
    rhs = s[n + 1] + s[n - 1] * (cf.a(n) - 1) + s[n - 2] + s[n - 1]
    return lhs == rhs


def kaminaga_condition(cf: ContinuedFraction, threshold: int = 4, tail: int | None = None) -> bool:
    """Whether the quotients in the tail reach ``threshold`` (limsup proxy on a finite expansion)."""
    qs = cf.quotients if tail is None else cf.quotients[-tail:]
    return max(qs) >= threshold
