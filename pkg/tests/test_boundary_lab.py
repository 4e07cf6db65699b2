"""Monte Carlo machinery: reproducibility, oracles and identities."""

import math

import numpy as np
import pytest
from scipy import stats

from inner_circle.boundary_lab import (
    KS_CRITICAL_01,
    CircleEnsemble,
    ergodic_average_norm,
    ergodic_average_norms,
    fourier_inner_product,
    ks_uniformity,
    lowner_check,
    mixing_correlation,
    push_ensemble,
    recurrence_experiment,
    sample_harmonic,
    sample_uniform,
)
from inner_circle.catalog import (
    GOLDEN_TURNS,
    blaschke2_constant,
    blaschke2_ratio,
    rotation,
    squaring,
)
from inner_circle.criteria import ergodic_double_sum
from inner_circle.disk_algebra import Arc, InnerMap, TWO_PI, harmonic_measure_arc
from inner_circle.sequence_engine import build_ledger, make_sequence


def test_sample_uniform_reproducible():
    a = sample_uniform(1000, seed=42)
    b = sample_uniform(1000, seed=42)
    assert np.array_equal(a.angles, b.angles)
    c = sample_uniform(1000, seed=43)
    assert not np.array_equal(a.angles, c.angles)
    with pytest.raises(ValueError):
        sample_uniform(0, seed=1)


def test_ks_statistic_matches_scipy():
    ens = sample_uniform(5000, seed=7)
    got = ks_uniformity(ens)
    want = stats.kstest(ens.angles / TWO_PI, "uniform").statistic
    assert abs(got - want) < 1e-12


def test_ks_statistic_rejects_clustered_sample():
    clustered = CircleEnsemble(
        angles=0.1 * sample_uniform(5000, seed=1).angles, seed=1, provenance="test"
    )
    assert ks_uniformity(clustered) > 10 * KS_CRITICAL_01 / math.sqrt(5000)
    with pytest.raises(ValueError):
        ks_uniformity(CircleEnsemble(np.zeros(10), 0, "tiny"))


def test_push_ensemble_reproducible_and_uniform():
    seq = make_sequence(blaschke2_constant(0.5))
    ens = sample_uniform(20_000, seed=3)
    snaps = push_ensemble(seq, ens, 20)
    snaps2 = push_ensemble(seq, ens, 20)
    assert len(snaps) == 20
    for a, b in zip(snaps, snaps2):
        assert np.array_equal(a.angles, b.angles)
    # measure preservation: every pushed snapshot stays uniform
    crit = KS_CRITICAL_01 / math.sqrt(20_000)
    assert max(ks_uniformity(s) for s in snaps) <= crit


def test_sample_harmonic_matches_quadrature():
    z = 0.4 + 0.3j
    ens = sample_harmonic(z, 200_000, seed=5)
    arc = Arc(start=0.5, end=2.5)
    frac = np.count_nonzero(arc.contains(ens.angles)) / ens.size
    assert abs(frac - harmonic_measure_arc(z, arc)) < 5e-3


def test_ergodic_average_norm_rotation_closed_form():
    # for a rotation the averaged exponential is a geometric sum with
    # |.|^2 = (sin(N pi l a) / (N sin(pi l a)))^2, identical for every point
    alpha = GOLDEN_TURNS
    seq = make_sequence(rotation(alpha))
    n = 50
    got = ergodic_average_norm(seq, 1, n, 2000, seed=2)
    x = math.pi * alpha
    want = (math.sin(n * x) / (n * math.sin(x))) ** 2
    assert abs(got - want) < 1e-6


def test_ergodic_average_norms_match_ledger_identity():
    for spec in (blaschke2_ratio(), squaring(), blaschke2_constant(0.5)):
        seq = make_sequence(spec)
        n, s = 200, 50_000
        led = build_ledger(seq, n)
        norms = ergodic_average_norms(seq, [1, 2, 3], n, s, seed=0)
        for ell in (1, 2, 3):
            exact = 1.0 / n + 2.0 * ergodic_double_sum(led, ell, n)
            assert abs(norms[ell] - exact) <= 5.0 / math.sqrt(s)


def test_ergodic_average_norms_validation():
    seq = make_sequence(squaring())
    with pytest.raises(ValueError):
        ergodic_average_norms(seq, [], 10, 100, seed=0)
    with pytest.raises(ValueError):
        ergodic_average_norms(seq, [0], 10, 100, seed=0)


def test_mixing_correlation_half_rotation_alternates():
    # rotation by half a turn maps the upper half circle onto the lower one
    seq = make_sequence(rotation(0.5))
    half = Arc(start=0.0, end=math.pi)
    odd = mixing_correlation(seq, half, half, 1, 100_000, seed=4)
    even = mixing_correlation(seq, half, half, 2, 100_000, seed=4)
    assert odd.value == 0.0
    assert abs(even.value - 0.5) < 0.01
    assert odd.target == pytest.approx(0.25)


def test_mixing_correlation_contracting_family():
    seq = make_sequence(blaschke2_constant(0.5))
    half = Arc(start=0.0, end=math.pi)
    est = mixing_correlation(seq, half, half, 100, 200_000, seed=4)
    assert abs(est.value - est.target) <= 5.0 * est.mc_error


def test_lowner_check_within_mc_error():
    maps = [
        InnerMap(rotation=0.9),
        InnerMap(factors=(0.5,)),
        InnerMap(rotation=2.0, factors=(0.3 + 0.4j, -0.2)),
    ]
    arc = Arc(start=0.3, end=2.1)
    for i, m in enumerate(maps):
        direct, pulled = lowner_check(m, 0.2 - 0.1j, arc, 100_000, seed=i)
        bound = 5.0 * math.sqrt(max(direct * (1.0 - direct), 1e-12) / 100_000)
        assert abs(direct - pulled) <= bound
    with pytest.raises(ValueError):
        lowner_check(maps[0], 1.0, arc, 1000, seed=0)


def test_fourier_inner_product_equals_window_derivative_power():
    seq = make_sequence(blaschke2_constant(0.5))
    led = build_ledger(seq, 8)
    for m, n, ell in ((0, 3, 1), (2, 5, 2), (1, 4, 3)):
        got = fourier_inner_product(seq, m, n, ell)
        want = led.window_derivative(m, n) ** ell
        assert abs(got - want) < 1e-10


def test_fourier_inner_product_zero_for_squaring():
    seq = make_sequence(squaring())
    assert abs(fourier_inner_product(seq, 0, 3, 2)) < 1e-12


def test_fourier_inner_product_degree_cap():
    seq = make_sequence(squaring())
    with pytest.raises(ValueError, match="degree"):
        fourier_inner_product(seq, 0, 20, 1)
    with pytest.raises(ValueError):
        fourier_inner_product(seq, 3, 3, 1)
    with pytest.raises(ValueError):
        fourier_inner_product(seq, 0, 3, 0)


def test_recurrence_rotation_visits_proportionally():
    seq = make_sequence(rotation(GOLDEN_TURNS))
    arc = Arc(start=0.0, end=TWO_PI * 0.1)
    summary = recurrence_experiment(seq, arc, steps=2000, size=200, seed=0)
    # equidistributed orbits visit the arc in proportion to its length
    assert abs(summary.mean_visit_fraction - 0.1) < 0.02
    assert summary.fraction_with_returns[0] == 1.0
    assert summary.coverage == 1.0


def test_recurrence_contracting_family_rarely_returns():
    seq = make_sequence(blaschke2_ratio())
    arc = Arc(start=0.0, end=TWO_PI * 0.05)
    summary = recurrence_experiment(seq, arc, steps=500, size=500, seed=1)
    assert summary.mean_visit_fraction < 0.5
    assert summary.steps == 500
