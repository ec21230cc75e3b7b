"""Local repetitions and the solution lower bounds they force.

Two-block: if ``V(j) = V(j + n)`` for ``1 <= j <= n`` then
``M(2n) = tr M(n) M(n) - I`` and every solution obeys
``max(|Phi(n)|, |Phi(2n)|) >= min(1, 1/|tr M(n)|) |Phi(0)| / 2``.

Three-block: if ``V(j - n) = V(j) = V(j + n)`` for ``1 <= j <= n`` then
``max(|Phi(-n)|, |Phi(n)|, |Phi(2n)|) >= |Phi(0)| / 2``.

The bounds are checked on the two basis vectors and 16 scrambled Sobol
directions; the Cayley-Hamilton residual is the algebraic counterpart.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.stats import qmc

from .errors import CertificateError, ConsistencyError, DomainError, PreconditionError, SiteRangeError
from .operator import Potential, transfer
from .symbolic.contfrac import ContinuedFraction
from .symbolic.factors import find_powers, occurrences
from .symbolic.partition import LONG, n_partition

TWO_BLOCK, THREE_BLOCK = "two_block", "three_block"
SQUARE, CUBE = "square", "cube"
SOBOL_DIRECTIONS = 16


class BoundCheck(NamedTuple):
    holds: bool
    attained: float


def check_square(V: Potential, n: int, offset: int = 0) -> bool:
    """``V(offset + j) == V(offset + j + n)`` for ``1 <= j <= n``."""
    if n < 1:
        raise DomainError("n must be >= 1")
    w = V.window(offset + 1, offset + 2 * n)
    return bool(np.array_equal(w[:n], w[n:]))


def check_cube(V: Potential, n: int, offset: int = 0) -> bool:
    """``V(offset + j - n) == V(offset + j) == V(offset + j + n)`` for ``1 <= j <= n``."""
    if n < 1:
        raise DomainError("n must be >= 1")
    w = V.window(offset - n + 1, offset + 2 * n)
    return bool(np.array_equal(w[:n], w[n:2 * n]) and np.array_equal(w[n:2 * n], w[2 * n:]))


def initial_vectors(seed: int = 0) -> np.ndarray:
    """Unit vectors: ``e1``, ``e2`` and 16 scrambled Sobol directions (rows)."""
    u = qmc.Sobol(d=1, scramble=True, seed=seed).random(SOBOL_DIRECTIONS)[:, 0]
    ang = 2.0 * np.pi * u
    return np.vstack([np.eye(2), np.column_stack([np.cos(ang), np.sin(ang)])])


def _min_of_max(mats, vectors) -> float:
    norms = np.stack([np.linalg.norm(vectors @ m.T, axis=1) for m in mats])
    return float(norms.max(axis=0).min())


def two_block_bound(E: float, V: Potential, n: int, C: float, seed: int = 0) -> BoundCheck:
    """Minimum over sampled unit ``Phi(0)`` of ``max(|Phi(n)|, |Phi(2n)|)``, tested against ``1/(2C)``."""
    if C < 1:
        raise DomainError("trace bound C must be >= 1")
    if not check_square(V, n, 0):
        raise CertificateError(f"no square of length {n} at the origin")
    Mn = transfer(E, V, n)
    t = abs(float(np.trace(Mn)))
    if t > C:
        raise PreconditionError(f"|tr M(n)| = {t:.6g} exceeds C = {C:.6g}")
    attained = _min_of_max([Mn, transfer(E, V, 2 * n)], initial_vectors(seed))
    return BoundCheck(attained >= 1.0 / (2.0 * C), attained)


def three_block_bound(E: float, V: Potential, n: int, seed: int = 0) -> BoundCheck:
    """Minimum over sampled unit ``Phi(0)`` of ``max(|Phi(-n)|, |Phi(n)|, |Phi(2n)|)``, against ``1/2``."""
    if not check_cube(V, n, 0):
        raise CertificateError(f"no cube of length {n} centred at the origin")
    mats = [transfer(E, V, -n), transfer(E, V, n), transfer(E, V, 2 * n)]
    attained = _min_of_max(mats, initial_vectors(seed))
    return BoundCheck(attained >= 0.5, attained)


def cayley_hamilton_residual(E: float, V: Potential, n: int) -> tuple[float, float]:
    """``(|M(2n) - tr M(n) M(n) + I|, |M(n)|^2)`` in the spectral norm; needs a square at the origin."""
    if not check_square(V, n, 0):
        raise CertificateError(f"no square of length {n} at the origin")
    Mn = transfer(E, V, n)
    R = transfer(E, V, 2 * n) - np.trace(Mn) * Mn + np.eye(2)
    return float(np.linalg.norm(R, 2)), float(np.linalg.norm(Mn, 2) ** 2)


@dataclass(frozen=True)
class GordonCertificate:
    kind: str                 # TWO_BLOCK or THREE_BLOCK
    scale: int                # n
    offset: int
    trace_bound: float | None
    verified_energies: tuple = ()  # (E, attained)
    level: int | None = None
    failures: tuple = ()      # energies where the bound or its precondition failed

    def __post_init__(self):
        if self.kind == TWO_BLOCK and (self.trace_bound is None or self.trace_bound < 1):
            raise DomainError("two-block certificates need C >= 1")

    @property
    def required(self) -> float:
        return 1.0 / (2.0 * self.trace_bound) if self.kind == TWO_BLOCK else 0.5

    @property
    def holds(self) -> bool:
        return not self.failures and bool(self.verified_energies)

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "level": self.level,
            "scale": self.scale,
            "offset": self.offset,
            "trace_bound": self.trace_bound,
            "required": self.required,
            "holds": self.holds,
            "verified": [{"E": float(e), "attained": float(a)} for e, a in self.verified_energies],
            "failures": [float(e) for e in self.failures],
        }


def certify(V: Potential, kind: str, n: int, offset: int, energies, C: float | None = None,
            level: int | None = None, seed: int = 0) -> GordonCertificate:
    """Check a bound at every energy after moving ``offset`` to the origin."""
    W = V.rebase(offset)
    ok, bad = [], []
    for E in np.atleast_1d(energies):
        try:
            res = (two_block_bound(E, W, n, C, seed) if kind == TWO_BLOCK
                   else three_block_bound(E, W, n, seed))
        except PreconditionError:
            bad.append(float(E))
            continue
        if res.holds:
            ok.append((float(E), res.attained))
        else:
            bad.append(float(E))
    return GordonCertificate(kind, n, offset, C if kind == TWO_BLOCK else None,
                             tuple(ok), level, tuple(bad))


class Scale(NamedTuple):
    level: int
    offset: int
    kind: str


def scan_gordon_scales(w: str, cf: ContinuedFraction, n_max: int) -> list[Scale]:
    """Squares and centred cubes of ``s_n`` read off the n-partitions of ``w``.

    Offsets are in site coordinates of ``w`` (symbol ``w[j-1]`` at site
    ``j``): a square at offset ``o`` occupies ``o+1 .. o+2q_n``; a cube at
    offset ``o`` occupies ``o-q_n+1 .. o+2q_n``.
    """
    out = []
    for n in range(1, n_max + 1):
        if n + 1 > cf.depth or len(w) < 2 * cf.q(n):
            break
        try:
            view = n_partition(w, cf, n)
        except ConsistencyError:
            continue
        q = view.block_lengths[LONG]
        for r in view.runs:
            if r.kind != LONG:
                continue
            if r.multiplicity >= 2:
                out.append(Scale(n, r.start - 1, SQUARE))
            if r.multiplicity >= 3:
                out.append(Scale(n, r.start - 1 + q, CUBE))
    return out


def scan_repetitions(w: str, lengths) -> list[Scale]:
    """Squares and centred cubes of every base length in ``lengths`` (by direct search)."""
    out = []
    for L in lengths:
        for pos, _ in find_powers(w, 2, L):
            out.append(Scale(L, pos - 1, SQUARE))
        for pos, _ in find_powers(w, 3, L):
            out.append(Scale(L, pos - 1 + L, CUBE))
    return out


class FrequencyBound(NamedTuple):
    value: float
    absent: bool


def _is_primitive(v: str) -> bool:
    return (v + v).find(v, 1) == len(v)


def frequency_lower_bound(w: str, v: str, k: int) -> FrequencyBound:
    """``|v| * freq(w, v^k)``, the lower bound on the measure of the Gordon-favourable set.

    ``v`` must be primitive (not itself a power); otherwise overlapping
    occurrences make the product exceed the measure it bounds.
    """
    if k not in (3, 4):
        raise DomainError("k must be 3 or 4")
    if not v or not _is_primitive(v):
        raise DomainError(f"{v!r} is not a primitive word")
    p = v * k
    if len(p) > len(w):
        raise SiteRangeError("v^k is longer than the window")
    hits = occurrences(w, p)
    if hits == 0:
        return FrequencyBound(0.0, True)
    return FrequencyBound(len(v) * hits / (len(w) - len(p) + 1), False)

