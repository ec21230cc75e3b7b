"""Substitution rules and their fixed points.

Words are plain ``str`` over single-character symbols.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

from ..errors import DomainError, PreconditionError

Word = str


@dataclass(frozen=True)
class Alphabet:
    symbols: tuple[str, ...]

    def __post_init__(self):
        if not 2 <= len(self.symbols) <= 8:
            raise DomainError("alphabet size must be between 2 and 8")
        if len(set(self.symbols)) != len(self.symbols):
            raise DomainError("alphabet symbols must be distinct")
        if any(len(s) != 1 for s in self.symbols):
            raise DomainError("symbols are single characters")

    def __contains__(self, s) -> bool:
        return s in self.symbols

    def __iter__(self):
        return iter(self.symbols)

    def __len__(self):
        return len(self.symbols)

    def index(self, s: str) -> int:
        return self.symbols.index(s)


@dataclass(frozen=True)
class SubstitutionRule:
    """A letter-to-word map, extended morphically to words."""

    alphabet: Alphabet
    images: tuple[tuple[str, Word], ...]

    def __post_init__(self):
        keys = [k for k, _ in self.images]
        if sorted(keys) != sorted(self.alphabet.symbols):
            raise DomainError("every alphabet symbol needs exactly one image")
        for k, img in self.images:
            if not img:
                raise DomainError(f"image of {k!r} is empty")
            bad = set(img) - set(self.alphabet.symbols)
            if bad:
                raise DomainError(f"image of {k!r} uses symbols {sorted(bad)} outside the alphabet")

    @classmethod
    def from_mapping(cls, images: Mapping[str, Word], alphabet=None) -> "SubstitutionRule":
        symbols = tuple(alphabet) if alphabet is not None else tuple(sorted(images))
        return cls(Alphabet(symbols), tuple((s, images[s]) for s in symbols))

    @classmethod
    def parse(cls, text: str) -> "SubstitutionRule":
        """Parse ``"a->ab,b->a"`` (``:`` or ``=`` also accepted as arrows)."""
        images = {}
        for part in text.split(","):
            for arrow in ("->", ":", "="):
                if arrow in part:
                    k, v = part.split(arrow, 1)
                    images[k.strip()] = v.strip()
                    break
            else:
                raise DomainError(f"cannot parse substitution clause {part!r}")
        return cls.from_mapping(images)

    def __getitem__(self, symbol: str) -> Word:
        for k, img in self.images:
            if k == symbol:
                return img
        raise DomainError(f"symbol {symbol!r} outside alphabet {self.alphabet.symbols}")

    def __call__(self, w: Word) -> Word:
        return apply_substitution(self, w)

    def iterate(self, w: Word, times: int) -> Word:
        for _ in range(times):
            w = apply_substitution(self, w)
        return w


BUILTIN_RULES = {
    "fibonacci": SubstitutionRule.from_mapping({"a": "ab", "b": "a"}),
    "period-doubling": SubstitutionRule.from_mapping({"a": "ab", "b": "aa"}),
    "binary-non-pisot": SubstitutionRule.from_mapping({"a": "ab", "b": "aaa"}),
    "thue-morse": SubstitutionRule.from_mapping({"a": "ab", "b": "ba"}),
    "rudin-shapiro": SubstitutionRule.from_mapping({"a": "ab", "b": "ac", "c": "db", "d": "dc"}),
}


def apply_substitution(rule: SubstitutionRule, w: Word) -> Word:
    table = dict(rule.images)
    try:
        return "".join(table[s] for s in w)
    except KeyError as exc:
        raise DomainError(f"symbol {exc.args[0]!r} outside alphabet {rule.alphabet.symbols}") from None


def fixed_point_prefix(rule: SubstitutionRule, seed: str, min_length: int) -> Word:
    """Prefix of ``lim S^n(seed)`` of length at least ``min_length``.

    The returned word is ``S^k(seed)`` for the smallest ``k`` that is long
    enough, so calls with different ``min_length`` agree on common prefixes.
    """
    image = rule[seed]
    if image[0] != seed:
        raise PreconditionError(
            f"S({seed}) = {image!r} does not start with {seed!r}; pass a suitable power of S")
    w = seed
    stalled = 0
    while len(w) < min_length:
        nxt = apply_substitution(rule, w)
        stalled = stalled + 1 if len(nxt) == len(w) else 0
        if stalled > len(rule.alphabet):
            raise PreconditionError(f"|S^n({seed})| does not grow; no infinite fixed point")
        w = nxt
    return w
