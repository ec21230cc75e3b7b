from __future__ import annotations

import pytest

from quasispec.errors import ConsistencyError
from quasispec.symbolic.contfrac import continued_fraction
from quasispec.symbolic.partition import LONG, SHORT, n_partition
from quasispec.symbolic.sturmian import circle_map_word, sturmian_block, sturmian_prefix

GOLD = continued_fraction("golden", 30)


def _rebuild(view, blocks):
    body = "".join(blocks[k] for k, _ in view.blocks())
    return view.head + body + view.tail


def test_s5_into_level3_blocks():
    w = sturmian_block(GOLD, 5)
    view = n_partition(w, GOLD, 3)
    kinds = [k for k, _ in view.blocks()]
    assert kinds == [LONG, SHORT, LONG]
    assert view.head == view.tail == ""


def test_golden_run_multiplicities():
    w = sturmian_prefix(GOLD, 10 ** 4)
    view = n_partition(w, GOLD, 4)
    assert {r.multiplicity for r in view.interior_runs() if r.kind == LONG} <= {1, 2}
    assert all(r.multiplicity == 1 for r in view.runs if r.kind == SHORT)


def test_not_a_factor():
    with pytest.raises(ConsistencyError):
        n_partition("111", GOLD, 1)


@pytest.mark.parametrize("spec, n", [("golden", 3), ("golden", 6), ("cf:(3)", 2), ("cf:(3)", 3),
                                     ("cf:(1,2)", 4)])
@pytest.mark.parametrize("shift", [0, 1, 7, 40])
def test_round_trip_and_run_rules(spec, n, shift):
    cf = continued_fraction(spec, 20)
    a_next = cf.a(n + 1)
    w = circle_map_word(cf.value, cf.value, 0, (1 + shift, 3000 + shift))
    view = n_partition(w, cf, n)
    blocks = {LONG: sturmian_block(cf, n), SHORT: sturmian_block(cf, n - 1)}
    assert _rebuild(view, blocks) == w
    for r in view.interior_runs():
        if r.kind == LONG:
            assert r.multiplicity in (a_next, a_next + 1)
        else:
            assert r.multiplicity == 1
    starts = [s for _, s in view.blocks()]
    assert starts[0] == len(view.head) + 1
