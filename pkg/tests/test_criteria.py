"""Criterion calculus against brute-force oracles and closed forms."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from inner_circle.catalog import (
    blaschke2_constant,
    blaschke2_ratio,
    rotation,
    sparse_blocks,
    squaring,
)
from inner_circle.criteria import (
    CriterionParams,
    classify,
    density_count,
    ergodic_double_sum,
    necessary_sum,
    sufficient_sum,
    tail_product,
    weyl_sum,
    window_product,
)
from inner_circle.sequence_engine import DerivativeLedger, build_ledger, make_sequence


def brute_double_sum(d, ell, length):
    """O(N^2) oracle: Re((1/N^2) sum_{m<n} (P_n/P_m)^l) from raw derivatives."""
    prefix = np.concatenate([[1.0 + 0.0j], np.cumprod(np.asarray(d, dtype=complex))])
    total = 0.0 + 0.0j
    for m in range(1, length):
        for n in range(m + 1, length + 1):
            if prefix[m] == 0.0:
                # a zero inside (0, m] kills P_m; the window ratio restarts
                prod = 1.0 + 0.0j
                for k in range(m + 1, n + 1):
                    prod *= d[k - 1]
                total += prod**ell
            else:
                total += (prefix[n] / prefix[m]) ** ell
    return total.real / length**2


unit_derivs = st.one_of(
    st.just(0.0 + 0.0j),
    st.builds(
        lambda r, t: r * np.exp(1j * t),
        st.floats(min_value=0.05, max_value=1.0),
        st.floats(min_value=0.0, max_value=6.28),
    ),
)


@settings(max_examples=40, deadline=None)
@given(st.lists(unit_derivs, min_size=2, max_size=30), st.integers(1, 4))
def test_double_sum_matches_brute_force(ds, ell):
    led = DerivativeLedger(ds)
    n = led.length
    got = ergodic_double_sum(led, ell, n)
    want = brute_double_sum(ds, ell, n)
    assert abs(got - want) < 1e-9


def test_double_sum_brute_force_on_families():
    for spec in (blaschke2_ratio(), rotation(0.3), squaring(), blaschke2_constant(0.7)):
        seq = make_sequence(spec)
        led = build_ledger(seq, 300)
        for ell in (1, 2, 3):
            assert abs(
                ergodic_double_sum(led, ell, 300)
                - brute_double_sum(led.derivatives, ell, 300)
            ) < 1e-9


def test_double_sum_riemann_limit():
    # blaschke2_ratio: S_N(1) -> int_0^1 int_0^y (x/y) dx dy = 1/4
    led = build_ledger(make_sequence(blaschke2_ratio()), 20_000)
    assert abs(ergodic_double_sum(led, 1, 20_000) - 0.25) < 0.01


def test_sufficient_sum_matches_direct():
    led = build_ledger(make_sequence(blaschke2_ratio()), 100)
    # (1/N) sum_{m=1}^{N-1} (m+1)/(N+1)
    want = sum((m + 1) / 101.0 for m in range(1, 100)) / 100.0
    assert abs(sufficient_sum(led, 1, 100) - want) < 1e-12


def test_necessary_sum_harmonic_closed_form():
    n = 1000
    led = build_ledger(make_sequence(blaschke2_ratio()), n)
    want = sum(1.0 / (k + 1) for k in range(1, n + 1)) / n
    assert abs(necessary_sum(led, 0, 1, n) - want) < 1e-12
    # from m: (1/N) sum_{n>m} (m+1)/(n+1)
    want3 = sum(4.0 / (k + 1) for k in range(4, n + 1)) / n
    assert abs(necessary_sum(led, 3, 1, n) - want3) < 1e-12


def test_tail_product_closed_form():
    n = 1000
    led = build_ledger(make_sequence(blaschke2_ratio()), n)
    # telescoping: prod_{k=k0}^{N} k/(k+1) = k0/(N+1)
    k0 = math.floor(n * 0.5)
    assert abs(tail_product(led, 0.5, n) - k0 / (n + 1.0)) < 1e-12
    with pytest.raises(ValueError):
        tail_product(led, 1.5, n)


def test_tail_product_rejects_complex_derivatives():
    led = build_ledger(make_sequence(rotation(0.3)), 100)
    with pytest.raises(ValueError):
        tail_product(led, 0.5, 100)


def test_tail_product_zero_barrier():
    led = DerivativeLedger([0.5] * 50 + [0.0] + [0.5] * 49)
    assert tail_product(led, 0.75, 100) == 0.0


def test_window_product_geometric():
    led = build_ledger(make_sequence(blaschke2_constant(0.5)), 200)
    # M+1 factors of 1/2
    assert window_product(led, 10, 200) == pytest.approx(0.5**11, rel=1e-12)
    with pytest.raises(ValueError):
        window_product(led, 200, 200)


def test_weyl_sum_rotation_closed_form():
    alpha = 0.123456
    n = 500
    led = build_ledger(make_sequence(rotation(alpha)), n)
    for ell in (1, 2, 3):
        x = math.pi * ell * alpha
        want = abs(math.sin(n * x) / (n * math.sin(x)))
        assert abs(weyl_sum(led, ell, n) - want) < 1e-10


def test_weyl_sum_rational_rotation_peaks_at_denominator():
    led = build_ledger(make_sequence(rotation(2.0 / 7.0)), 700)
    assert weyl_sum(led, 7, 700) == pytest.approx(1.0, abs=1e-12)
    assert weyl_sum(led, 3, 700) < 0.01


def test_density_count():
    led = DerivativeLedger([0.1, 0.9, 0.4, 0.5, 0.95])
    assert density_count(led, 0.5, 1, 5) == 3
    assert density_count(led, 0.5, 2, 5) == 2
    with pytest.raises(ValueError):
        density_count(led, 0.5, 5, 5)


def test_classify_requires_minimum_length():
    led = DerivativeLedger([0.5] * 50)
    with pytest.raises(ValueError):
        classify(led)


def test_classify_reports_evidence_and_citations():
    led = build_ledger(make_sequence(blaschke2_constant(0.5)), 2000)
    report = classify(led)
    assert report.verdict == "mixing"
    assert report.contracting == "contracting"
    conditions = {e.condition for e in report.evidence}
    assert {"double_sum", "sufficient_sum", "tail_product", "window_product"} <= conditions
    assert report.theorem_citations
    d = report.to_dict()
    assert d["verdict"] == "mixing" and d["evidence"]


def test_classify_not_ergodic_beats_mixing_routes():
    # sparse small derivatives force window products down, but an irrational
    # rotation block structure is absent: the alternating family mixes
    led = build_ledger(make_sequence(sparse_blocks()), 4000)
    report = classify(led)
    assert report.verdict == "mixing"


def test_classify_params_validation():
    with pytest.raises(ValueError):
        CriterionParams(ell_max=0)
    with pytest.raises(ValueError):
        CriterionParams(eps=1.5)
    with pytest.raises(ValueError):
        CriterionParams(tolerance=0.0)


def test_classify_undecided_when_nothing_fires():
    # |d_n| = exp(-6/n): double sums settle near 1/14, between the vanishing
    # tolerance and the non-vanishing floor; the small constant twist keeps
    # the sequence off the positive-derivative branch, and the decay is too
    # slow for any window or density bound, so no route is decisive
    n = np.arange(1, 2001)
    d = np.exp(-6.0 / n) * np.exp(1e-4j)
    report = classify(DerivativeLedger(d))
    assert report.verdict == "undecided"
    assert report.contracting == "contracting"
