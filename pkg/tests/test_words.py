from __future__ import annotations

import pytest
from hypothesis import given, strategies as st

from quasispec.errors import DomainError, PreconditionError
from quasispec.symbolic.words import (
    BUILTIN_RULES, Alphabet, SubstitutionRule, apply_substitution, fixed_point_prefix,
)

FIB = BUILTIN_RULES["fibonacci"]


def test_fibonacci_images():
    assert apply_substitution(FIB, "a") == "ab"
    assert apply_substitution(FIB, "") == ""
    assert apply_substitution(FIB, "abaab") == "abaababa"


def test_unknown_symbol():
    with pytest.raises(DomainError):
        apply_substitution(FIB, "abc")


@pytest.mark.parametrize("name, length, expected", [
    ("fibonacci", 5, "abaab"),
    ("period-doubling", 4, "abaa"),
    ("thue-morse", 8, "abbabaab"),
])
def test_fixed_point_prefix(name, length, expected):
    assert fixed_point_prefix(BUILTIN_RULES[name], "a", length)[:length] == expected


def test_fixed_point_prefixes_agree():
    short = fixed_point_prefix(FIB, "a", 50)
    long = fixed_point_prefix(FIB, "a", 5000)
    assert long.startswith(short)


def test_not_self_prolongable():
    with pytest.raises(PreconditionError):
        fixed_point_prefix(FIB, "b", 10)
    with pytest.raises(PreconditionError):
        fixed_point_prefix(SubstitutionRule.parse("a->a,b->b"), "a", 10)


def test_rudin_shapiro_table():
    rs = BUILTIN_RULES["rudin-shapiro"]
    assert [rs[s] for s in "abcd"] == ["ab", "ac", "db", "dc"]
    assert rs.iterate("a", 2) == "abac"


def test_parse_and_alphabet_checks():
    r = SubstitutionRule.parse("a->ab, b->a")
    assert r == FIB
    with pytest.raises(DomainError):
        Alphabet(("a",))
    with pytest.raises(DomainError):
        Alphabet(("a", "a"))
    with pytest.raises(DomainError):
        SubstitutionRule.from_mapping({"a": "ac", "b": "a"})
    with pytest.raises(DomainError):
        SubstitutionRule.from_mapping({"a": "", "b": "a"})


words = st.text(alphabet="ab", max_size=30)


@given(words, words)
def test_morphism(u, v):
    for rule in (FIB, BUILTIN_RULES["thue-morse"], BUILTIN_RULES["binary-non-pisot"]):
        assert rule(u + v) == rule(u) + rule(v)
        assert len(rule(u)) == sum(len(rule[c]) for c in u)
