"""Sequence generation and the derivative ledger.

Every ergodicity criterion in :mod:`inner_circle.criteria` is a function of
the window derivatives

    D(m, n) = (g_n o ... o g_{m+1})'(0) = P_n / P_m,   P_n = prod_{k<=n} g_k'(0),

so the ledger stores the prefix products P_n once, in log-modulus /
unwrapped-argument form.  Direct products of ~10^6 moduli near 1 underflow;
log-space keeps full relative precision.  Zero derivatives are tracked by a
prefix count of zeros ("barriers") instead of -inf arithmetic: D(m, n) is
exactly 0 whenever a zero lies in (m, n].
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np

from .disk_algebra import InnerMap, derivative_at_origin, eval_map


@dataclass(frozen=True)
class FamilySpec:
    """Parametric description of a sequence family.

    ``kind`` must name a registered catalog family; ``params`` are validated
    by the family builder.  ``seed`` only matters for random families.
    """

    kind: str
    params: Mapping = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self) -> None:
        if not isinstance(self.kind, str) or not self.kind:
            raise ValueError("family kind must be a non-empty string")
        object.__setattr__(self, "params", dict(self.params))
        seed = int(self.seed)
        if not 0 <= seed < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")
        object.__setattr__(self, "seed", seed)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "params": dict(self.params), "seed": self.seed}

    @classmethod
    def from_dict(cls, d: Mapping) -> "FamilySpec":
        return cls(kind=d["kind"], params=d.get("params", {}), seed=d.get("seed", 0))


@dataclass(frozen=True)
class InnerSequence:
    """Deterministic generator n -> g_n (1-based); same index, same map."""

    spec: FamilySpec
    map_fn: Callable[[int], InnerMap]

    def map_at(self, n: int) -> InnerMap:
        if n < 1:
            raise ValueError("sequence indices are 1-based")
        return self.map_fn(n)


# kind -> builder(spec) -> (n -> InnerMap); populated by inner_circle.catalog
_FAMILY_BUILDERS: dict[str, Callable[[FamilySpec], Callable[[int], InnerMap]]] = {}


def register_family(kind: str):
    """Decorator registering a family builder under ``kind``."""

    def deco(builder):
        _FAMILY_BUILDERS[kind] = builder
        return builder

    return deco


def make_sequence(spec: FamilySpec) -> InnerSequence:
    """Instantiate the generator for a family spec."""
    from . import catalog  # noqa: F401  (ensures builders are registered)

    try:
        builder = _FAMILY_BUILDERS[spec.kind]
    except KeyError:
        known = ", ".join(sorted(_FAMILY_BUILDERS))
        raise ValueError(f"unknown family kind {spec.kind!r} (known: {known})") from None
    return InnerSequence(spec=spec, map_fn=builder(spec))


class DerivativeLedger:
    """Log-space prefix products of g_k'(0), 1-based, immutable.

    Attributes
    ----------
    log_modulus_prefix : ndarray, shape (N+1,)
        log |P_n| with P_0 = 1; -inf from the first zero derivative on.
        Non-increasing, since every |g'(0)| <= 1.
    argument_prefix : ndarray, shape (N+1,)
        Accumulated arg P_n, never reduced mod 2*pi, so argument differences
        between indices are exact before reduction.  Zero derivatives
        contribute nothing; consumers must check :meth:`has_zero` first.
    """

    def __init__(self, derivatives) -> None:
        d = np.asarray(derivatives, dtype=complex)
        if d.ndim != 1 or d.size < 1:
            raise ValueError("need a non-empty 1-d array of derivatives")
        if not np.all(np.isfinite(d)):
            raise ValueError("derivatives must be finite")
        mod = np.abs(d)
        if np.any(mod > 1.0 + 1e-12):
            raise ValueError("derivative moduli must not exceed 1")
        np.minimum(mod, 1.0, out=mod)
        zero = mod == 0.0

        self._d = np.concatenate([[1.0 + 0.0j], d])
        self._zero_prefix = np.concatenate([[0], np.cumsum(zero)])
        # finite accumulators: zero entries contribute 0, guarded by the counts
        logmod = np.where(zero, 0.0, np.log(np.where(zero, 1.0, mod)))
        self._log_prefix = np.concatenate([[0.0], np.cumsum(logmod)])
        args = np.where(zero, 0.0, np.angle(d))
        self.argument_prefix = np.concatenate([[0.0], np.cumsum(args)])
        self.log_modulus_prefix = np.where(
            self._zero_prefix > 0, -np.inf, self._log_prefix
        )

    @classmethod
    def from_sequence(cls, seq: InnerSequence, length: int) -> "DerivativeLedger":
        if length < 1:
            raise ValueError("ledger length must be >= 1")
        return cls([derivative_at_origin(seq.map_at(n)) for n in range(1, length + 1)])

    @property
    def length(self) -> int:
        return self._d.size - 1

    def derivative(self, n: int) -> complex:
        """g_n'(0), 1-based."""
        if not 1 <= n <= self.length:
            raise IndexError(f"index {n} outside [1, {self.length}]")
        return complex(self._d[n])

    @property
    def derivatives(self) -> np.ndarray:
        """All g_n'(0), n = 1..N (copy)."""
        return self._d[1:].copy()

    def _check_window(self, m: int, n: int) -> None:
        if not (0 <= m < n <= self.length):
            raise IndexError(f"need 0 <= m < n <= {self.length}, got ({m}, {n})")

    def has_zero(self, m: int, n: int) -> bool:
        """True when some g_k'(0) = 0 with m < k <= n."""
        self._check_window(m, n)
        return bool(self._zero_prefix[n] > self._zero_prefix[m])

    def window_derivative(self, m: int, n: int) -> complex:
        """D(m, n) = P_n / P_m via log-space subtraction; exact 0 across a barrier."""
        self._check_window(m, n)
        if self._zero_prefix[n] > self._zero_prefix[m]:
            return 0.0j
        return cmath.exp(
            (self._log_prefix[n] - self._log_prefix[m])
            + 1j * (self.argument_prefix[n] - self.argument_prefix[m])
        )

    def window_log_modulus(self, m: int, n: int) -> float:
        """log |D(m, n)|; -inf across a zero barrier."""
        self._check_window(m, n)
        if self._zero_prefix[n] > self._zero_prefix[m]:
            return -math.inf
        return float(self._log_prefix[n] - self._log_prefix[m])

    def window_modulus_grid(self, ms: np.ndarray, ns: np.ndarray) -> np.ndarray:
        """|D(m, n)| on a broadcastable grid of index arrays (vectorised)."""
        ms = np.asarray(ms, dtype=int)
        ns = np.asarray(ns, dtype=int)
        out = np.exp(self._log_prefix[ns] - self._log_prefix[ms])
        return np.where(self._zero_prefix[ns] > self._zero_prefix[ms], 0.0, out)


def build_ledger(seq: InnerSequence, length: int) -> DerivativeLedger:
    """Ledger of the first ``length`` derivatives; O(N) time and memory."""
    return DerivativeLedger.from_sequence(seq, length)


def orbit(seq: InnerSequence, z0: complex, length: int) -> list:
    """Interior orbit [G_1(z0), ..., G_N(z0)], computed incrementally."""
    z0 = complex(z0)
    if abs(z0) >= 1.0:
        raise ValueError("orbit start must lie in the open disk")
    points = []
    z = z0
    for n in range(1, length + 1):
        z = eval_map(seq.map_at(n), z)
        points.append(z)
    return points


@dataclass(frozen=True)
class ContractionVerdict:
    """Finite-data evidence about divergence of sum(1 - |g_n'(0)|).

    Divergence of a series is not decidable from finitely many terms, so the
    verdict is a heuristic and ``undecided`` is a legitimate outcome; the
    partial-sum trace is always attached.
    """

    verdict: str  # contracting | not_contracting | undecided
    partial_sums: tuple  # sum(1 - |d_k|) at N/4, N/2, N
    log_modulus_end: float  # log |P_N|


def contracting_heuristic(
    ledger: DerivativeLedger, tolerance: float = 1e-2, tail_tolerance: float = 1e-8
) -> ContractionVerdict:
    """Classify the sequence as contracting / not contracting / undecided.

    ``not_contracting`` when the partial sums of 1 - |g_k'(0)| have
    numerically converged (tail increment below ``tail_tolerance``);
    ``contracting`` when |P_N| has fallen below ``tolerance`` and the partial
    sums are still growing.
    """
    n = ledger.length
    if n < 10:
        raise ValueError("need a ledger of length >= 10")
    gaps = 1.0 - np.abs(ledger.derivatives)
    cum = np.cumsum(gaps)
    trace = (float(cum[n // 4 - 1]), float(cum[n // 2 - 1]), float(cum[-1]))
    log_end = float(ledger.log_modulus_prefix[n])

    tail = trace[2] - trace[1]
    if tail < tail_tolerance:
        return ContractionVerdict("not_contracting", trace, log_end)
    if log_end < math.log(tolerance) and trace[2] > trace[1] > trace[0]:
        return ContractionVerdict("contracting", trace, log_end)
    return ContractionVerdict("undecided", trace, log_end)
