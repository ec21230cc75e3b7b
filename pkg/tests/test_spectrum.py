from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from quasispec.errors import SiteRangeError
from quasispec.operator import Coding, Potential
from quasispec.spectrum import (
    BandList, approx_bands, band_measure, block_trace, dirichlet_count, intersect_intervals,
    merge_intervals, nested_spectrum, periodic_bands, spectrum_bounds, substitution_bands,
)
from quasispec.symbolic.contfrac import continued_fraction
from quasispec.symbolic.sturmian import sturmian_block
from quasispec.symbolic.words import BUILTIN_RULES
from quasispec.tracemap import sturmian_traces

GOLD = continued_fraction("golden", 30)


def floquet_edges(values):
    """Sorted periodic and antiperiodic eigenvalues: the band edges, by dense diagonalization."""
    q = len(values)
    out = []
    for phase in (1.0, -1.0):
        H = np.diag(np.asarray(values, dtype=float)).astype(complex)
        for j in range(q - 1):
            H[j, j + 1] += 1
            H[j + 1, j] += 1
        H[q - 1, 0] += phase
        H[0, q - 1] += phase
        out.extend(np.linalg.eigvalsh(H))
    return np.sort(out)


def test_spectrum_bounds():
    V = Potential.from_word("0110", Coding.sturmian(3.0))
    assert spectrum_bounds(V) == (-2.0, 5.0)


def test_single_site_period():
    bands = periodic_bands("1", Coding.sturmian(1.5))
    assert len(bands) == 1
    assert np.allclose(bands.intervals[0], [-0.5, 3.5], atol=1e-12)


def test_free_case_fills_interval():
    bands = periodic_bands("00000", Coding.sturmian(1.0))
    assert len(bands) == 5
    assert bands.union()[0][0] == pytest.approx(-2, abs=1e-8)
    assert len(merge_intervals([(l, r + 1e-7) for l, r in bands])) == 1
    assert bands.measure == pytest.approx(4, abs=1e-7)
    assert set(bands.touching) == {0, 1, 2, 3}


@pytest.mark.parametrize("lam", [0.5, 1.0, 3.0])
@pytest.mark.parametrize("n", [1, 2, 4, 6, 8])
@pytest.mark.parametrize("spec", ["golden", "silver", "cf:(1,2)"])
def test_approximant_edges_match_floquet(spec, n, lam):
    cf = continued_fraction(spec, 12)
    block = sturmian_block(cf, n)
    values = Coding.sturmian(lam).encode(block)
    bands = approx_bands(lam, cf, n)
    assert len(bands) == cf.q(n)
    assert np.allclose(bands.intervals.ravel(), floquet_edges(values), atol=1e-8)


@pytest.mark.parametrize("name", ["fibonacci", "period-doubling", "thue-morse", "rudin-shapiro",
                                  "binary-non-pisot"])
def test_substitution_edges_match_floquet(name):
    rule = BUILTIN_RULES[name]
    coding = Coding.linear(rule.alphabet.symbols, 1.2)
    for n in range(1, 6):
        block = rule.iterate(rule.alphabet.symbols[0], n)
        if len(block) > 400:
            break
        bands = substitution_bands(rule, coding, n)
        assert np.allclose(bands.intervals.ravel(), floquet_edges(coding.encode(block)), atol=1e-8)


def test_membership_by_trace():
    lam, n = 2.0, 7
    bands = approx_bands(lam, GOLD, n)
    values = Coding.sturmian(lam).encode(sturmian_block(GOLD, n))
    mids = bands.intervals.mean(axis=1)
    assert np.all(np.abs(block_trace(mids, values)) <= 2)
    assert bands.contains(mids).all()
    rows = bands.intervals
    gaps = 0.5 * (rows[:-1, 1] + rows[1:, 0])
    open_gap = rows[1:, 0] - rows[:-1, 1] > 1e-6
    assert np.all(np.abs(block_trace(gaps[open_gap], values)) > 2)
    assert not bands.contains(gaps[open_gap]).any()


def test_edge_residual_small():
    bands = approx_bands(1.0, GOLD, 10, tol=1e-10)
    assert bands.edge_residual < 1e-8


def test_certified_escape_excludes_band():
    lam, N = 1.0, 12
    bands = approx_bands(lam, GOLD, N)
    for E in np.linspace(-2.5, 3.5, 301):
        orbit = sturmian_traces(E, lam, GOLD, N)
        if orbit.escape_index is not None and orbit.escape_index <= N:
            assert not bands.contains(E)[0]


@settings(max_examples=20)
@given(st.floats(0.2, 4.0), st.integers(2, 9))
def test_band_measure_decreases_two_levels(lam, n):
    m0 = approx_bands(lam, GOLD, n).measure
    m2 = approx_bands(lam, GOLD, n + 3).measure
    assert m2 < m0


def test_band_list_helpers():
    b = BandList(np.array([[0.0, 1.0], [2.0, 2.5]]), 1, 1.0, 1e-10)
    assert band_measure(b) == 1.5
    assert band_measure([(0, 1), (3, 5)]) == 3.0
    assert b.contains([0.5, 1.5, 2.5]).tolist() == [True, False, True]
    assert b.to_json()["bands"] == [[0.0, 1.0], [2.0, 2.5]]


def test_interval_helpers():
    assert merge_intervals([(2, 3), (0, 1), (0.5, 2)]) == [(0, 3)]
    assert intersect_intervals([(0, 2), (3, 5)], [(1, 4)]) == [(1, 2), (3, 4)]


def test_dirichlet_count_matches_eigenvalues():
    vals = np.array([0.3, -1.0, 2.0, 0.0, 0.7])
    H = np.diag(vals) + np.diag(np.ones(4), 1) + np.diag(np.ones(4), -1)
    ev = np.linalg.eigvalsh(H)
    E = np.linspace(-4, 5, 101)
    assert np.array_equal(dirichlet_count(E, vals), (ev[None, :] < E[:, None]).sum(axis=1))


def test_nested_stage_sets():
    st_ = nested_spectrum(1.0, GOLD, 8, 4)
    assert st_.inner_measure <= st_.outer_measure
    assert np.all(st_.contains(np.array(st_.inner).mean(axis=1)))
    finer = nested_spectrum(1.0, GOLD, 8, 5)
    assert finer.outer_measure <= st_.outer_measure + 1e-12
    with pytest.raises(SiteRangeError):
        nested_spectrum(1.0, GOLD, 3, 4)
