from __future__ import annotations

from fractions import Fraction

import pytest

from quasispec.errors import SiteRangeError
from quasispec.symbolic.contfrac import GOLDEN, continued_fraction
from quasispec.symbolic.factors import frequency
from quasispec.symbolic.sturmian import (
    check_block_identity, circle_map_word, kaminaga_condition, sturmian_block, sturmian_prefix,
)

GOLD = continued_fraction("golden", 30)


def test_circle_map_golden_first_sites():
    assert circle_map_word(GOLDEN, GOLDEN, 0, (1, 5)) == "10110"


def test_circle_map_site_zero_is_zero():
    assert circle_map_word(GOLDEN, GOLDEN, 0, (0, 0)) == "0"
    assert circle_map_word(GOLDEN, Fraction(9, 10), 0, (0, 0)) == "0"


def test_circle_map_boundary_exact():
    # theta puts the orbit point of site 1 exactly on 1 - beta: symbol 1
    theta = 1 - GOLDEN - GOLDEN + 1  # 1 - beta - alpha (mod 1)
    assert circle_map_word(GOLDEN, GOLDEN, theta, (1, 1)) == "1"


def test_blocks():
    assert sturmian_block(GOLD, 4) == "10110"
    assert sturmian_block(GOLD, 1) == "1"
    assert sturmian_block(GOLD, -1) == "1"
    assert sturmian_block(GOLD, 0) == "0"
    with pytest.raises(SiteRangeError):
        sturmian_block(continued_fraction("golden", 3), 4)


@pytest.mark.parametrize("spec", ["golden", "cf:(1,2)"])
def test_circle_map_matches_blocks(spec):
    cf = continued_fraction(spec, 14)
    for n in range(1, 13):
        assert circle_map_word(cf.value, cf.value, 0, (1, cf.q(n))) == sturmian_block(cf, n)


def test_circle_map_thirteen_sites_is_s6():
    assert circle_map_word(GOLDEN, GOLDEN, 0, (1, 13)) == sturmian_block(GOLD, 6)


@pytest.mark.parametrize("spec", ["golden", "cf:(1,2)", "cf:(3)", "silver"])
def test_block_lengths(spec):
    cf = continued_fraction(spec, 30)
    for n in range(1, 30):
        if cf.q(n) > 10 ** 6:
            break
        assert len(sturmian_block(cf, n)) == cf.q(n)


def test_block_identity_examples():
    assert check_block_identity(GOLD, 2)
    assert check_block_identity(continued_fraction([2, 3, 2, 4, 1], 5), 3)
    for n in range(2, 16):
        assert check_block_identity(GOLD, n)


def test_prefix_frequency_of_one():
    w = sturmian_prefix(GOLD, 10 ** 5)
    assert abs(frequency(w, "1") - float(GOLDEN)) < 1e-3


def test_kaminaga_digit_check():
    assert not kaminaga_condition(GOLD)
    assert kaminaga_condition(continued_fraction("cf:(1,4)", 20))
