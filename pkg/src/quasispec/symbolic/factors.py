"""Factor statistics: complexity, frequencies, powers and palindromes.

Positions returned by :func:`find_powers` and :func:`find_palindromes` are
1-based, matching site numbering of potentials built from a word
(symbol ``w[j-1]`` sits at site ``j``).
"""

from __future__ import annotations

import re
from collections import Counter

import numpy as np


class FactorIndex:
    """Suffix automaton of a word.

    Built once in O(|w|); each non-initial state stands for the factors with
    lengths ``len(link)+1 .. len(state)``, which makes every complexity value
    up to ``n_max`` a single pass over the states.
    """

    def __init__(self, w: str):
        self.size = len(w)
        length = [0]
        link = [-1]
        trans: list[dict] = [{}]
        last = 0
        for ch in w:
            cur = len(length)
            length.append(length[last] + 1)
            link.append(0)
            trans.append({})
            p = last
            while p != -1 and ch not in trans[p]:
                trans[p][ch] = cur
                p = link[p]
            if p != -1:
                q = trans[p][ch]
                if length[p] + 1 == length[q]:
                    link[cur] = q
                else:
                    clone = len(length)
                    length.append(length[p] + 1)
                    link.append(link[q])
                    trans.append(dict(trans[q]))
                    while p != -1 and trans[p].get(ch) == q:
                        trans[p][ch] = clone
                        p = link[p]
                    link[q] = clone
                    link[cur] = clone
            last = cur
        self.length = length
        self.link = link
        self.trans = trans

    @property
    def states(self) -> int:
        return len(self.length)

    def __contains__(self, v: str) -> bool:
        state = 0
        for ch in v:
            state = self.trans[state].get(ch)
            if state is None:
                return False
        return True

    def complexity(self, n_max: int) -> list[int]:
        """``[p(1), ..., p(n_max)]``."""
        diff = np.zeros(n_max + 2, dtype=np.int64)
        for v in range(1, self.states):
            lo = self.length[self.link[v]] + 1
            hi = min(self.length[v], n_max)
            if lo <= hi:
                diff[lo] += 1
                diff[hi + 1] -= 1
        return np.cumsum(diff)[1:n_max + 1].tolist()

    def factors(self, n: int) -> set[str]:
        out = set()
        stack = [(0, "")]
        while stack:
            state, prefix = stack.pop()
            if len(prefix) == n:
                out.add(prefix)
                continue
            for ch, nxt in self.trans[state].items():
                stack.append((nxt, prefix + ch))
        return out


def factor_set(w: str, n: int) -> set[str]:
    """Set of length-``n`` factors of ``w``; empty when ``n > |w|``."""
    if n <= 0:
        raise ValueError("factor length must be positive")
    if n > len(w):
        return set()
    return FactorIndex(w).factors(n)


def complexity(w: str, n_max: int, index: FactorIndex | None = None) -> list[int]:
    """Complexity values ``p_w(1..n_max)``.

    The infinite word is unknown here: the caller must pass a prefix long
    enough that every factor of length ``<= n_max`` already occurs (a prefix
    of length ``20 * n_max`` is the suggested default).
    """
    if n_max > len(w):
        raise ValueError("n_max exceeds word length")
    return (index or FactorIndex(w)).complexity(n_max)


def occurrences(w: str, v: str) -> int:
    """Number of (overlapping) occurrences of ``v`` in ``w``."""
    if not v:
        return len(w) + 1
    if len(v) == 1:
        return w.count(v)
    return sum(1 for _ in re.finditer(f"(?={re.escape(v)})", w))


def frequency(w: str, v: str) -> float:
    """``#_v(w) / (|w| - |v| + 1)`` counting overlapping occurrences."""
    if len(v) > len(w):
        raise ValueError("|v| exceeds |w|")
    return occurrences(w, v) / (len(w) - len(v) + 1)


def factor_counts(w: str, n: int) -> Counter:
    return Counter(w[i:i + n] for i in range(len(w) - n + 1))


def _codes(w: str) -> np.ndarray:
    return np.frombuffer(w.encode("utf-32-le"), dtype=np.uint32)


def find_powers(w: str, k: int, length: int) -> list[tuple[int, str]]:
    """All ``(position, v)`` with ``w[position..] = v^k`` and ``|v| = length``."""
    if k < 2 or length < 1:
        raise ValueError("need k >= 2 and length >= 1")
    span = k * length
    if span > len(w):
        return []
    a = _codes(w)
    eq = a[:-length] == a[length:]
    window = (k - 1) * length
    bad = np.concatenate(([0], np.cumsum(~eq)))
    starts = len(w) - span + 1
    ok = (bad[window:window + starts] - bad[:starts]) == 0
    return [(int(i) + 1, w[i:i + length]) for i in np.flatnonzero(ok)]


def find_palindromes(w: str, n: int) -> list[int]:
    """Positions of palindromic factors of length ``n``."""
    if n < 1 or n > len(w):
        return []
    a = _codes(w)
    starts = len(w) - n + 1
    ok = np.ones(starts, dtype=bool)
    for j in range(n // 2):
        ok &= a[j:j + starts] == a[n - 1 - j:n - 1 - j + starts]
    return (np.flatnonzero(ok) + 1).tolist()
