"""Ledger correctness against direct products, plus family plumbing."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from inner_circle.catalog import blaschke2_constant, blaschke2_ratio, rotation, squaring
from inner_circle.sequence_engine import (
    DerivativeLedger,
    FamilySpec,
    build_ledger,
    contracting_heuristic,
    make_sequence,
    orbit,
)

# derivative values: moduli in [0, 1], occasional exact zeros
unit_disk_derivs = st.one_of(
    st.just(0.0 + 0.0j),
    st.builds(
        lambda r, t: r * np.exp(1j * t),
        st.floats(min_value=0.01, max_value=1.0),
        st.floats(min_value=0.0, max_value=6.28),
    ),
)


def test_family_spec_round_trip():
    spec = FamilySpec("rotation", {"alpha": 0.25}, seed=7)
    assert FamilySpec.from_dict(spec.to_dict()) == spec


def test_family_spec_validation():
    with pytest.raises(ValueError):
        FamilySpec("", {})
    with pytest.raises(ValueError):
        FamilySpec("rotation", {}, seed=-1)
    with pytest.raises(ValueError):
        make_sequence(FamilySpec("no_such_family", {}))


def test_sequence_indices_are_one_based():
    seq = make_sequence(rotation(0.25))
    with pytest.raises(ValueError):
        seq.map_at(0)


def test_ledger_matches_direct_products():
    rng = np.random.default_rng(3)
    d = 0.999 * rng.random(200) * np.exp(2j * np.pi * rng.random(200))
    led = DerivativeLedger(d)
    prefix = np.cumprod(d)
    for n in (1, 7, 50, 200):
        assert abs(led.window_derivative(0, n) - prefix[n - 1]) < 1e-12
    for m, n in ((3, 9), (10, 157), (198, 200)):
        want = prefix[n - 1] / prefix[m - 1]
        assert abs(led.window_derivative(m, n) - want) < 1e-10 * abs(want) + 1e-13


@settings(max_examples=50)
@given(st.lists(unit_disk_derivs, min_size=2, max_size=40))
def test_window_derivative_property(ds):
    led = DerivativeLedger(ds)
    n = led.length
    # direct product oracle over the window
    m = n // 2
    direct = 1.0 + 0.0j
    for k in range(m + 1, n + 1):
        direct *= ds[k - 1]
    assert abs(led.window_derivative(m, n) - direct) <= 1e-9 * (1.0 + abs(direct))


@settings(max_examples=50)
@given(st.lists(unit_disk_derivs, min_size=3, max_size=40))
def test_window_derivative_composes(ds):
    led = DerivativeLedger(ds)
    n = led.length
    m, p = n // 3, 2 * n // 3
    if not m < p < n:
        return
    lhs = led.window_derivative(m, p) * led.window_derivative(p, n)
    rhs = led.window_derivative(m, n)
    assert abs(lhs - rhs) < 1e-10 * (1.0 + abs(rhs))


def test_zero_barrier_semantics():
    led = DerivativeLedger([0.5, 0.0, 0.5, 0.25])
    assert led.has_zero(0, 4) and led.has_zero(1, 2)
    assert not led.has_zero(2, 4)
    assert led.window_derivative(0, 3) == 0.0
    assert led.window_derivative(2, 4) == pytest.approx(0.125, rel=1e-14)
    assert led.window_log_modulus(0, 2) == -math.inf
    assert led.log_modulus_prefix[1] == math.log(0.5)
    assert led.log_modulus_prefix[2] == -math.inf
    with pytest.raises(ValueError):
        from inner_circle.criteria import weyl_sum

        weyl_sum(led, 1, 4)


def test_window_modulus_grid_matches_scalar():
    rng = np.random.default_rng(9)
    d = rng.random(50)
    d[13] = 0.0
    led = DerivativeLedger(d)
    ms = np.array([0, 5, 13, 20])
    ns = np.array([50, 40, 30, 21])
    grid = led.window_modulus_grid(ms, ns)
    for i in range(4):
        assert abs(grid[i] - abs(led.window_derivative(ms[i], ns[i]))) < 1e-12


def test_ledger_validation():
    with pytest.raises(ValueError):
        DerivativeLedger([])
    with pytest.raises(ValueError):
        DerivativeLedger([2.0])
    with pytest.raises(ValueError):
        DerivativeLedger([np.nan])


def test_ledger_underflow_regime():
    # 10^5 moduli of 0.99: direct product underflows to 0, log-space does not
    led = DerivativeLedger(np.full(100_000, 0.99))
    got = led.window_log_modulus(0, 100_000)
    assert math.isclose(got, 100_000 * math.log(0.99), rel_tol=1e-10)
    assert led.window_derivative(99_998, 100_000) == pytest.approx(0.99**2)


def test_build_ledger_from_family():
    seq = make_sequence(blaschke2_ratio())
    led = build_ledger(seq, 10)
    # telescoping product of k/(k+1)
    assert abs(led.window_derivative(0, 10) - 1.0 / 11.0) < 1e-14


def test_orbit_contracts_for_blaschke_ratio():
    seq = make_sequence(blaschke2_ratio())
    pts = orbit(seq, 0.5, 50)
    assert len(pts) == 50
    assert abs(pts[-1]) < abs(pts[0])
    with pytest.raises(ValueError):
        orbit(seq, 1.2, 5)


def test_contracting_heuristic_verdicts():
    ratio = contracting_heuristic(build_ledger(make_sequence(blaschke2_ratio()), 5000))
    assert ratio.verdict == "contracting"
    rot = contracting_heuristic(build_ledger(make_sequence(rotation(0.3)), 5000))
    assert rot.verdict == "not_contracting"
    sq = contracting_heuristic(build_ledger(make_sequence(squaring()), 5000))
    assert sq.verdict == "contracting"
    const = contracting_heuristic(build_ledger(make_sequence(blaschke2_constant(0.5)), 5000))
    assert const.verdict == "contracting"
    geo = contracting_heuristic(
        build_ledger(make_sequence(FamilySpec("blaschke2_geometric", {"r": 0.5})), 5000)
    )
    assert geo.verdict == "not_contracting"
