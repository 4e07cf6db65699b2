"""Named sequence families with their expected verdicts.

Families are a closed enumeration rather than a formula DSL, so every
FamilySpec serialises and the regression suite can audit each expected
verdict.  Expected verdicts are metadata only: they are never fed to the
classifier.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .disk_algebra import InnerMap, TWO_PI
from .sequence_engine import FamilySpec, register_family

GOLDEN_TURNS = (math.sqrt(5.0) - 1.0) / 2.0


def _param(spec: FamilySpec, name: str, default=None, lo=None, hi=None):
    if name not in spec.params:
        if default is None:
            raise ValueError(f"family {spec.kind!r} requires parameter {name!r}")
        return default
    v = spec.params[name]
    if lo is not None and not (lo < v < hi):
        raise ValueError(f"parameter {name!r} of {spec.kind!r} must lie in ({lo}, {hi})")
    return v


# ---------------------------------------------------------------------------
# family builders


@register_family("rotation")
def _build_rotation(spec: FamilySpec):
    alpha = float(_param(spec, "alpha", 0.0, -1e-9, 1.0))
    g = InnerMap(rotation=TWO_PI * alpha)
    return lambda n: g


@register_family("blaschke2_ratio")
def _build_blaschke2_ratio(spec: FamilySpec):
    # degree-2 products with a_n = n/(n+1): contracting but not ergodic
    return lambda n: InnerMap(factors=(n / (n + 1.0),))


@register_family("blaschke2_constant")
def _build_blaschke2_constant(spec: FamilySpec):
    a = float(_param(spec, "a", None, 0.0, 1.0))
    g = InnerMap(factors=(a,))
    return lambda n: g


@register_family("squaring")
def _build_squaring(spec: FamilySpec):
    g = InnerMap(factors=(0.0,))
    return lambda n: g


# 1 - r^n rounds to 1.0 for large n; factors must stay strictly inside the disk
_BELOW_ONE = math.nextafter(1.0, 0.0)


@register_family("blaschke2_geometric")
def _build_blaschke2_geometric(spec: FamilySpec):
    # a_n = 1 - r^n: the gaps 1 - a_n are summable, so not contracting
    r = float(_param(spec, "r", 0.5, 0.0, 1.0))
    return lambda n: InnerMap(factors=(min(1.0 - r**n, _BELOW_ONE),))


@register_family("converging_arg")
def _build_converging_arg(spec: FamilySpec):
    # non-contracting moduli 1 - r^n, derivative arguments -> 2*pi*alpha
    alpha = float(_param(spec, "alpha", 0.0, -0.5, 1.0))
    r = float(_param(spec, "r", 0.5, 0.0, 1.0))
    theta = TWO_PI * alpha
    return lambda n: InnerMap(
        rotation=theta + r**n, factors=(min(1.0 - r**n, _BELOW_ONE),)
    )


@register_family("random_rotation_blaschke")
def _build_random_rotation(spec: FamilySpec):
    """Multiplies each map of a base family by an independent random rotation."""
    base_kind = spec.params.get("base_kind", "blaschke2_geometric")
    if base_kind == spec.kind:
        raise ValueError("random rotations cannot wrap themselves")
    base_params = spec.params.get("base_params", {})
    distribution = spec.params.get("distribution", "uniform")
    from .sequence_engine import make_sequence

    base = make_sequence(FamilySpec(kind=base_kind, params=base_params, seed=spec.seed))
    rng = np.random.Generator(np.random.Philox(key=spec.seed))
    angles: list[float] = []

    if distribution == "uniform":
        def draw(k: int) -> float:
            return TWO_PI * rng.random()
    elif distribution == "atomic":
        atoms = [TWO_PI * float(t) for t in spec.params.get("atoms", [0.0])]
        def draw(k: int) -> float:
            return atoms[rng.integers(len(atoms))]
    else:
        raise ValueError(f"unknown distribution {distribution!r}")

    def map_at(n: int) -> InnerMap:
        while len(angles) < n:  # drawn in index order, cached: pure per index
            angles.append(draw(len(angles) + 1))
        g = base.map_at(n)
        return InnerMap(rotation=g.rotation + angles[n - 1], factors=g.factors)

    return map_at


@register_family("sparse_blocks")
def _build_sparse_blocks(spec: FamilySpec):
    # |g'(0)| = a_low on low_per_period indices out of every period
    period = int(_param(spec, "period", 2))
    low = int(_param(spec, "low_per_period", 1))
    if not 1 <= low <= period:
        raise ValueError("need 1 <= low_per_period <= period")
    a_low = float(_param(spec, "a_low", 0.3, 0.0, 1.0))
    a_high = float(_param(spec, "a_high", 0.95, 0.0, 1.0))
    g_low = InnerMap(factors=(a_low,))
    g_high = InnerMap(factors=(a_high,))
    return lambda n: g_low if (n - 1) % period < low else g_high


# ---------------------------------------------------------------------------
# catalog entries (regression metadata)


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    spec: FamilySpec
    expected: str  # ergodic | mixing | not_ergodic | contracting_not_ergodic | open
    citation: str


def rotation(alpha: float, seed: int = 0) -> FamilySpec:
    return FamilySpec("rotation", {"alpha": float(alpha)}, seed)


def blaschke2_ratio(seed: int = 0) -> FamilySpec:
    return FamilySpec("blaschke2_ratio", {}, seed)


def blaschke2_constant(a: float, seed: int = 0) -> FamilySpec:
    return FamilySpec("blaschke2_constant", {"a": float(a)}, seed)


def squaring(seed: int = 0) -> FamilySpec:
    return FamilySpec("squaring", {}, seed)


def random_rotation_blaschke(
    base_kind: str = "blaschke2_geometric",
    base_params: dict | None = None,
    distribution: str = "uniform",
    atoms: list | None = None,
    seed: int = 0,
) -> FamilySpec:
    params = {
        "base_kind": base_kind,
        "base_params": dict(base_params or {}),
        "distribution": distribution,
    }
    if atoms is not None:
        params["atoms"] = list(atoms)
    return FamilySpec("random_rotation_blaschke", params, seed)


def converging_arg(alpha: float, r: float = 0.5, seed: int = 0) -> FamilySpec:
    return FamilySpec("converging_arg", {"alpha": float(alpha), "r": float(r)}, seed)


def sparse_blocks(
    a_low: float = 0.3,
    a_high: float = 0.95,
    period: int = 2,
    low_per_period: int = 1,
    seed: int = 0,
) -> FamilySpec:
    return FamilySpec(
        "sparse_blocks",
        {
            "a_low": float(a_low),
            "a_high": float(a_high),
            "period": int(period),
            "low_per_period": int(low_per_period),
        },
        seed,
    )


def entries() -> list:
    """The regression catalog: every expected verdict is re-derived by classify."""
    return [
        CatalogEntry(
            "rotation_golden",
            rotation(GOLDEN_TURNS),
            "ergodic",
            "irrational rotations of the circle are ergodic",
        ),
        CatalogEntry(
            "rotation_third",
            rotation(1.0 / 3.0),
            "not_ergodic",
            "rational rotations fail equidistribution at the denominator frequency",
        ),
        CatalogEntry(
            "blaschke2_ratio",
            blaschke2_ratio(),
            "contracting_not_ergodic",
            "slowly growing tail products keep the double sum away from zero",
        ),
        CatalogEntry(
            "blaschke2_constant_half",
            blaschke2_constant(0.5),
            "mixing",
            "geometric window products meet the mixing bound",
        ),
        CatalogEntry(
            "squaring",
            squaring(),
            "mixing",
            "autonomous non-rotation inner maps are exact, hence mixing",
        ),
        CatalogEntry(
            "random_rotation_uniform",
            random_rotation_blaschke(seed=71),
            "ergodic",
            "i.i.d. non-atomic rotation arguments equidistribute almost surely",
        ),
        CatalogEntry(
            "converging_arg_golden",
            converging_arg(GOLDEN_TURNS),
            "ergodic",
            "derivative arguments converging to an irrational angle equidistribute",
        ),
        CatalogEntry(
            "sparse_blocks_alternating",
            sparse_blocks(),
            "mixing",
            "a dense set of small derivatives forces the window products down",
        ),
    ]


def listing() -> list:
    """Human-oriented rows for the CLI ``list-families`` subcommand."""
    return [
        {
            "name": e.name,
            "kind": e.spec.kind,
            "params": dict(e.spec.params),
            "seed": e.spec.seed,
            "expected": e.expected,
            "citation": e.citation,
        }
        for e in entries()
    ]
