"""Monte Carlo and quadrature checks of the boundary dynamics.

The flagship cross-validation ties the sampled world to the exact derivative
calculus: for the ergodic averages of a trigonometric monomial,

    || (1/N) sum_n e_l o G_n ||_2^2  =  1/N + 2 * S_N(l),

where the right-hand side is computed from the ledger alone.  Everything
here is reproducible bit-for-bit: ensembles come from a counter-based
(Philox) generator keyed by the seed, and all reductions run in fixed index
order.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .disk_algebra import (
    Arc,
    InnerMap,
    TWO_PI,
    boundary_eval_angles,
    boundary_step,
    eval_map,
    harmonic_measure_arc,
    mobius_to_point_angles,
)
from .sequence_engine import InnerSequence

#: asymptotic Kolmogorov-Smirnov critical constant at the 0.01 level
KS_CRITICAL_01 = 1.63

#: quadrature guard: total oscillation l * prod(deg) of the integrand
MAX_TOTAL_DEGREE = 1 << 16
MAX_GRID = 1 << 20


#: amplitude (radians) of the per-step orbit dither, ~60 ulps of 2*pi
DITHER_SCALE = 2.0**-46

#: second Philox key word separating dither streams from sampling streams
_DITHER_STREAM = 0xD17BE5


def _rng(seed) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=seed))


def _push_iter(seq: InnerSequence, z: np.ndarray, steps: int, seed: int, dither: bool = True):
    """Yield (n, G_n(points)) for n = 1..steps, in complex representation.

    A deterministic angular dither at the ulp scale is injected after every
    step.  Expanding boundary maps consume about one mantissa bit per step,
    so around step 53 any pure double-precision orbit is an artifact of its
    finite initial entropy (for the angle-doubling map it collapses towards
    a lattice); re-injecting sub-resolution noise keeps the ensemble
    statistics faithful while staying bitwise reproducible per seed.
    """
    rng = _rng([seed, _DITHER_STREAM])
    for n in range(1, steps + 1):
        z = boundary_step(seq.map_at(n), z)
        if dither:
            eps = (rng.random(z.size) - 0.5) * DITHER_SCALE
            z = z * (1.0 + 1j * eps)
        yield n, z


@dataclass(frozen=True)
class CircleEnsemble:
    """A finite sample of circle points with its RNG provenance."""

    angles: np.ndarray
    seed: int
    provenance: str

    def __post_init__(self) -> None:
        if self.angles.size < 1:
            raise ValueError("ensemble must contain at least one point")

    @property
    def size(self) -> int:
        return int(self.angles.size)


@dataclass(frozen=True)
class MixingEstimate:
    n: int
    value: float  # estimate of m(A intersect G_n^{-1}(B))
    mc_error: float
    target: float  # m(A) * m(B)


def sample_uniform(size: int, seed: int) -> CircleEnsemble:
    """i.i.d. uniform circle points; bitwise reproducible per seed."""
    if size < 1:
        raise ValueError("ensemble size must be >= 1")
    angles = _rng(seed).random(size) * TWO_PI
    return CircleEnsemble(angles=angles, seed=seed, provenance="uniform")


def sample_harmonic(z: complex, size: int, seed: int) -> CircleEnsemble:
    """Harmonic-measure sample at z: Möbius pushforward of a uniform sample."""
    base = sample_uniform(size, seed)
    angles = mobius_to_point_angles(z, base.angles)
    return CircleEnsemble(angles=angles, seed=seed, provenance=f"harmonic({z})")


def push_ensemble(
    seq: InnerSequence, ens: CircleEnsemble, steps: int
) -> list[CircleEnsemble]:
    """Snapshots [G_1(ens), ..., G_N(ens)], each one map application deep."""
    out = []
    z = np.exp(1j * ens.angles)
    for n, z in _push_iter(seq, z, steps, ens.seed):
        out.append(
            CircleEnsemble(
                angles=np.mod(np.angle(z), TWO_PI),
                seed=ens.seed,
                provenance=f"pushed({n})",
            )
        )
    return out


def ks_uniformity(ens: CircleEnsemble) -> float:
    """Kolmogorov-Smirnov statistic of angles/2*pi against uniform [0, 1)."""
    if ens.size < 100:
        raise ValueError("KS statistic needs at least 100 points")
    u = np.sort(ens.angles / TWO_PI)
    n = u.size
    grid = np.arange(n, dtype=float)
    d_plus = ((grid + 1.0) / n - u).max()
    d_minus = (u - grid / n).max()
    return float(max(d_plus, d_minus))


def ergodic_average_norms(
    seq: InnerSequence, ells, steps: int, size: int, seed: int
) -> dict:
    """MC estimates of ||(1/N) sum_n e_l o G_n||_2^2 for several frequencies l.

    One boundary push is shared by all frequencies; powers of the pushed
    points are accumulated per point, per frequency.
    """
    ells = sorted(set(int(l) for l in ells))
    if not ells or ells[0] < 1:
        raise ValueError("frequencies must be integers >= 1")
    z0 = np.exp(1j * sample_uniform(size, seed).angles)
    acc = {l: np.zeros(size, dtype=complex) for l in ells}
    top = ells[-1]
    for _, z in _push_iter(seq, z0, steps, seed):
        p = np.ones(size, dtype=complex)
        for l in range(1, top + 1):
            p = p * z
            if l in acc:
                acc[l] += p
    return {
        l: float(np.mean(np.abs(acc[l] / steps) ** 2)) for l in ells
    }


def ergodic_average_norm(
    seq: InnerSequence, ell: int, steps: int, size: int, seed: int
) -> float:
    return ergodic_average_norms(seq, [ell], steps, size, seed)[ell]


def mixing_correlation(
    seq: InnerSequence, arc_a: Arc, arc_b: Arc, n: int, size: int, seed: int
) -> MixingEstimate:
    """Estimate of m(A intersect G_n^{-1}(B)) against the product target.

    Only the points starting in A are pushed; the others cannot contribute.
    """
    ens = sample_uniform(size, seed)
    in_a = arc_a.contains(ens.angles)
    z = np.exp(1j * ens.angles[in_a])
    for _, z in _push_iter(seq, z, n, seed):
        pass
    hits = int(np.count_nonzero(arc_b.contains(np.mod(np.angle(z), TWO_PI))))
    target = arc_a.length * arc_b.length
    mc_error = math.sqrt((target * (1.0 - target) + 1.0 / size) / size)
    return MixingEstimate(n=n, value=hits / size, mc_error=mc_error, target=target)


def lowner_check(
    map_: InnerMap, z: complex, arc: Arc, size: int, seed: int
) -> tuple[float, float]:
    """(direct, pulled) masses of an arc: quadrature at g(z) vs MC pullback at z.

    Harmonic measure at z of the preimage of the arc equals harmonic measure
    at g(z) of the arc itself; the pullback side is sampled.
    """
    z = complex(z)
    if abs(z) >= 1.0:
        raise ValueError("base point must lie in the open disk")
    direct = harmonic_measure_arc(eval_map(map_, z), arc)
    samples = sample_harmonic(z, size, seed)
    pushed = boundary_eval_angles(map_, samples.angles)
    pulled = float(np.count_nonzero(arc.contains(pushed))) / size
    return direct, pulled


#: interior radius for Fourier coefficient extraction
_COEFF_RADIUS = 0.5


def _interior_step(m: InnerMap, z: np.ndarray) -> np.ndarray:
    """Apply one map to interior points (no circle renormalisation)."""
    w = z if m.rotation == 0.0 else cmath.exp(1j * m.rotation) * z
    for a in m.factors:
        w = w * ((z + a) / (1.0 + np.conj(a) * z))
    return w


def fourier_inner_product(
    seq: InnerSequence, m: int, n: int, ell: int, grid: int = 64
) -> complex:
    """l-th Fourier coefficient of (G_m^n)^l, by uniform-grid quadrature.

    The coefficient is extracted on the circle of radius 1/2: there the
    integrand (G/z)^l is analytic across the whole disk and bounded by 1
    (Schwarz lemma), so a K-point uniform grid aliases only Taylor orders
    >= K and its error is below 2^-K.  On the unit circle the very same
    integrand oscillates essentially without bound as factor moduli
    approach 1, and no affordable grid resolves it.  The grid is doubled
    until successive values agree to 1e-9.  Equals the l-th power of the
    window derivative whenever the degree cap admits the computation.
    """
    if not 0 <= m < n:
        raise ValueError("need 0 <= m < n")
    if ell < 1:
        raise ValueError("frequency l must be >= 1")
    maps = [seq.map_at(k) for k in range(m + 1, n + 1)]
    total_degree = ell
    for g in maps:
        total_degree *= g.degree
    if total_degree > MAX_TOTAL_DEGREE:
        raise ValueError(
            f"composition oscillates at degree {total_degree}, above the cap "
            f"{MAX_TOTAL_DEGREE}; the exact derivative calculus still covers it"
        )

    def quad(k: int) -> complex:
        z = _COEFF_RADIUS * np.exp(1j * TWO_PI * np.arange(k) / k)
        w = z
        for g in maps:
            w = _interior_step(g, w)
        return complex(np.mean((w / z) ** ell))

    k = max(16, grid)
    prev = quad(k)
    while k <= MAX_GRID // 2:
        k *= 2
        cur = quad(k)
        if abs(cur - prev) < 1e-9:
            return cur
        prev = cur
    return prev


@dataclass(frozen=True)
class RecurrenceSummary:
    """Return statistics of boundary orbits started inside an arc.

    ``coverage`` is the mean fraction of a 64-arc partition visited per
    orbit; no pass threshold is attached, it is a covering statistic only.
    """

    visit_counts: np.ndarray
    steps: int
    mean_visit_fraction: float
    median_visit_fraction: float
    fraction_with_returns: tuple  # entry r-1: fraction of points with >= r returns
    coverage: float


def recurrence_experiment(
    seq: InnerSequence,
    arc: Arc,
    steps: int,
    size: int,
    seed: int,
    max_returns: int = 10,
) -> RecurrenceSummary:
    """Count orbit visits G_n(xi) in ``arc`` for uniform starting points in it."""
    rng = _rng(seed)
    angles = np.mod(arc.start + rng.random(size) * arc.span, TWO_PI)
    z = np.exp(1j * angles)
    counts = np.zeros(size, dtype=np.int64)
    cells = np.zeros((size, 64), dtype=bool)
    for _, z in _push_iter(seq, z, steps, seed):
        theta = np.mod(np.angle(z), TWO_PI)
        counts += arc.contains(theta)
        cells[np.arange(size), (theta / TWO_PI * 64).astype(int) % 64] = True
    fractions = counts / steps
    with_r = tuple(
        float(np.count_nonzero(counts >= r)) / size for r in range(1, max_returns + 1)
    )
    return RecurrenceSummary(
        visit_counts=counts,
        steps=steps,
        mean_visit_fraction=float(fractions.mean()),
        median_visit_fraction=float(np.median(fractions)),
        fraction_with_returns=with_r,
        coverage=float(cells.mean(axis=1).mean()),
    )
