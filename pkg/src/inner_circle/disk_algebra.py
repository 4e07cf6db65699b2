"""Möbius transforms, finite Blaschke products and harmonic measure.

Maps are of the form

    g(z) = e^{i rho} * z * prod_k (z + a_k) / (1 + conj(a_k) z),   |a_k| < 1,

so every map fixes the origin and its boundary restriction is defined at
every point of the circle.  Points of the circle are represented by their
angle in [0, 2*pi); boundary evaluation works in angle coordinates (with a
renormalisation to the circle after each arithmetic step when arrays of
points are pushed), so orbits never drift off the circle.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * math.pi

#: absolute slack admitted when checking |z| <= 1 on interior evaluation
MODULUS_TOL = 1e-12


def _require_finite(z: complex, name: str) -> None:
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise ValueError(f"{name} must have finite components, got {z!r}")


def canonical_angle(theta: float) -> float:
    """Reduce an angle to the canonical range [0, 2*pi)."""
    theta = math.fmod(theta, TWO_PI)
    if theta < 0.0:
        theta += TWO_PI
    if theta >= TWO_PI:  # tiny negatives round up to exactly 2*pi
        theta = 0.0
    return theta


@dataclass(frozen=True)
class Arc:
    """Half-open circular arc [start, end), traversed counterclockwise.

    ``start == end + 2*pi*k`` with ``k != 0`` denotes the full circle.
    Half-open endpoints make finite partitions of the circle exact.
    """

    start: float
    end: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.start) and math.isfinite(self.end)):
            raise ValueError("arc endpoints must be finite")
        if self.length == 0.0:
            raise ValueError("degenerate arc (zero length)")

    @property
    def length(self) -> float:
        """Normalised length in (0, 1]."""
        span = math.fmod(self.end - self.start, TWO_PI)
        if span < 0.0:
            span += TWO_PI
        if span == 0.0 and self.end != self.start:
            return 1.0
        return span / TWO_PI

    @property
    def span(self) -> float:
        """Length in radians, in (0, 2*pi]."""
        return self.length * TWO_PI

    def contains(self, theta):
        """Membership test; accepts a scalar angle or an ndarray of angles."""
        rel = np.mod(np.asarray(theta) - self.start, TWO_PI)
        return rel < self.span


@dataclass(frozen=True)
class InnerMap:
    """A finite Blaschke product fixing the origin (or a pure rotation).

    ``rotation`` is the angle of the unimodular prefactor; ``factors`` holds
    the Möbius parameters a_k with |a_k| < 1.  An empty factor tuple gives a
    rotation; one zero factor gives the squaring map z -> z^2 (up to the
    prefactor).
    """

    rotation: float = 0.0
    factors: tuple = ()

    def __post_init__(self) -> None:
        if not math.isfinite(self.rotation):
            raise ValueError("rotation angle must be finite")
        object.__setattr__(self, "rotation", canonical_angle(self.rotation))
        factors = tuple(complex(a) for a in self.factors)
        for a in factors:
            _require_finite(a, "Blaschke factor")
            if abs(a) >= 1.0:
                raise ValueError(f"Blaschke factor must satisfy |a| < 1, got {a!r}")
        object.__setattr__(self, "factors", factors)

    @property
    def degree(self) -> int:
        return 1 + len(self.factors)

    @property
    def is_rotation(self) -> bool:
        return not self.factors


def derivative_at_origin(m: InnerMap) -> complex:
    """g'(0) = e^{i rho} * prod_k a_k (exact product formula)."""
    d = cmath.exp(1j * m.rotation)
    for a in m.factors:
        d *= a
    return d


def eval_map(m: InnerMap, z: complex) -> complex:
    """Evaluate g(z) for |z| <= 1."""
    z = complex(z)
    _require_finite(z, "z")
    if abs(z) > 1.0 + MODULUS_TOL:
        raise ValueError(f"point lies outside the closed disk: |z| = {abs(z)}")
    w = cmath.exp(1j * m.rotation) * z
    for a in m.factors:
        w *= (z + a) / (1.0 + a.conjugate() * z)
    return w


def boundary_eval(m: InnerMap, theta: float) -> float:
    """Angle of g(e^{i theta}); exact unit modulus by construction.

    Each Möbius factor maps the circle to itself, so only its argument is
    accumulated; the result never leaves the circle regardless of orbit
    length.
    """
    theta = float(theta)
    if not math.isfinite(theta):
        raise ValueError("angle must be finite")
    out = m.rotation + theta
    if m.factors:
        xi = cmath.exp(1j * theta)
        for a in m.factors:
            if a == 0:
                out += theta
            else:
                out += cmath.phase((xi + a) / (1.0 + a.conjugate() * xi))
    return canonical_angle(out)


def boundary_eval_angles(m: InnerMap, thetas: np.ndarray) -> np.ndarray:
    """Vectorised :func:`boundary_eval` over an array of angles."""
    thetas = np.asarray(thetas, dtype=float)
    out = m.rotation + thetas
    if m.factors:
        xi = None
        for a in m.factors:
            if a == 0:
                out = out + thetas
            else:
                if xi is None:
                    xi = np.exp(1j * thetas)
                out = out + np.angle((xi + a) / (1.0 + np.conj(a) * xi))
    return np.mod(out, TWO_PI)


def boundary_step(m: InnerMap, z: np.ndarray) -> np.ndarray:
    """One boundary step on unit complex points, renormalised to the circle.

    Equivalent to :func:`boundary_eval_angles` but stays in the complex
    representation; the division by |w| after the arithmetic prevents any
    modulus drift over long orbits.
    """
    if m.factors:
        w = z if m.rotation == 0.0 else cmath.exp(1j * m.rotation) * z
        for a in m.factors:
            if a == 0:
                w = w * z
            else:
                w = w * ((z + a) / (1.0 + np.conj(a) * z))
        return w / np.abs(w)
    if m.rotation == 0.0:
        return z
    return cmath.exp(1j * m.rotation) * z


def mobius_to_point(z0: complex, theta: float) -> float:
    """Angle of tau_{z0}(e^{i theta}) with tau_{z0}(w) = (w + z0)/(1 + conj(z0) w).

    tau_{z0} is the disk automorphism sending 0 to z0; it pushes the uniform
    measure on the circle forward to harmonic measure at z0.
    """
    z0 = complex(z0)
    _require_finite(z0, "z0")
    if abs(z0) >= 1.0:
        raise ValueError(f"base point must lie in the open disk, got |z0| = {abs(z0)}")
    w = cmath.exp(1j * float(theta))
    return canonical_angle(cmath.phase((w + z0) / (1.0 + z0.conjugate() * w)))


def mobius_to_point_angles(z0: complex, thetas: np.ndarray) -> np.ndarray:
    """Vectorised :func:`mobius_to_point`."""
    z0 = complex(z0)
    if abs(z0) >= 1.0:
        raise ValueError(f"base point must lie in the open disk, got |z0| = {abs(z0)}")
    w = np.exp(1j * np.asarray(thetas, dtype=float))
    return np.mod(np.angle((w + z0) / (1.0 + np.conj(z0) * w)), TWO_PI)


def poisson_kernel(z: complex, theta) -> np.ndarray:
    """Density of harmonic measure at z against d(theta)/(2*pi)."""
    xi = np.exp(1j * np.asarray(theta, dtype=float))
    return (1.0 - abs(z) ** 2) / np.abs(xi - z) ** 2


def harmonic_measure_arc(
    z: complex, arc: Arc, tol: float = 1e-10, max_panels: int = 1 << 22
) -> float:
    """Harmonic measure of ``arc`` seen from ``z``, by adaptive quadrature.

    Composite Simpson panels are doubled until the value settles within
    ``tol``.  At z = 0 this reduces exactly to the normalised arc length.
    """
    z = complex(z)
    _require_finite(z, "z")
    if abs(z) >= 1.0:
        raise ValueError(f"base point must lie in the open disk, got |z| = {abs(z)}")
    if z == 0:
        return arc.length
    a, b = arc.start, arc.start + arc.span

    def integral(panels: int) -> float:
        theta = np.linspace(a, b, 2 * panels + 1)
        f = poisson_kernel(z, theta)
        h = (b - a) / (2 * panels)
        return (h / 3.0) * (f[0] + f[-1] + 4.0 * f[1::2].sum() + 2.0 * f[2:-1:2].sum())

    panels = 8
    prev = integral(panels)
    while panels < max_panels:
        panels *= 2
        cur = integral(panels)
        if abs(cur - prev) < tol * TWO_PI:
            return cur / TWO_PI
        prev = cur
    return prev / TWO_PI
