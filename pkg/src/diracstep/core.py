"""Dispersion, spinor bases, mode classification and currents.

Units are natural (c = hbar = 1) and the rest mass ``m`` is the only scale.
The Hamiltonian in a region of constant potential ``V`` is

    H = sigma_x p + sigma_z m + V,

so a plane wave ``s exp(i q z)`` with local kinetic energy ``eps = E - V``
satisfies ``[[m, q], [q, -m]] s = eps s``.  Every spinor built here obeys
that relation, with complex ``q = +-i kappa`` for evanescent modes.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np


class PhysicsError(ValueError):
    """Raised when no physical state exists for the requested parameters."""


class DomainError(PhysicsError):
    """Raised when an argument lies outside the domain of a formula."""


class NoStatesError(PhysicsError):
    """Raised inside the true mass gap, where no wave function exists."""


class NumericalError(ArithmeticError):
    """Raised when a numerical procedure fails (overflow guard, singular solve, quadrature)."""


@dataclass(frozen=True)
class PhysParams:
    m: float
    V: float = 0.0

    def __post_init__(self) -> None:
        if not self.m >= 0.0:
            raise DomainError(f"mass must be non-negative, got {self.m!r}")


class ModeKind(enum.Enum):
    PROPAGATING_POSITIVE = "propagating+"
    PROPAGATING_NEGATIVE = "propagating-"
    EVANESCENT_PLUS = "evanescent+"
    EVANESCENT_MINUS = "evanescent-"
    FORBIDDEN = "forbidden"

    @property
    def is_propagating(self) -> bool:
        return self in (ModeKind.PROPAGATING_POSITIVE, ModeKind.PROPAGATING_NEGATIVE)

    @property
    def is_evanescent(self) -> bool:
        return self in (ModeKind.EVANESCENT_PLUS, ModeKind.EVANESCENT_MINUS)


@dataclass(frozen=True)
class SegmentMode:
    """Solution type at energy ``energy`` in a region of potential ``potential``.

    ``wavenumber`` is ``k`` for propagating modes and ``kappa`` for evanescent
    ones; ``spinor_ratio`` is the matching ``u_k`` or ``w_kappa``.
    """

    kind: ModeKind
    wavenumber: float
    spinor_ratio: float
    energy: float
    potential: float

    @property
    def eps(self) -> float:
        return self.energy - self.potential


@dataclass(frozen=True)
class Spinor2:
    upper: complex
    lower: complex

    @property
    def norm2(self) -> float:
        return abs(self.upper) ** 2 + abs(self.lower) ** 2

    def as_array(self) -> np.ndarray:
        return np.array([self.upper, self.lower], dtype=complex)


class BandCase(enum.Enum):
    """Structural band tags for a step of height ``V0 >= 0`` at the origin.

    The tag records which wave types meet at the step.  ``FULL_REFLECT_UPPER``
    and ``FULL_REFLECT_LOWER`` put a positive- or negative-energy evanescent
    wave on the right; the ``EVAN_LEFT_TRAVEL_RIGHT`` pair puts one on the left.
    """

    ABOVE_STEP = "above-step"
    FULL_REFLECT_UPPER = "full-reflect-upper"
    FULL_REFLECT_LOWER = "full-reflect-lower"
    KLEIN_TRANSMITTING = "klein-transmitting"
    GAP_NO_STATES = "gap-no-states"
    EVAN_LEFT_TRAVEL_RIGHT_PLUS = "evan-left-travel-right+"
    EVAN_LEFT_TRAVEL_RIGHT_MINUS = "evan-left-travel-right-"
    FULLY_NEGATIVE = "fully-negative"

    @property
    def carries_current(self) -> bool:
        """True when both sides of the step carry a travelling wave."""
        return self in (BandCase.ABOVE_STEP, BandCase.KLEIN_TRANSMITTING, BandCase.FULLY_NEGATIVE)

    @property
    def full_reflection(self) -> bool:
        return self in (
            BandCase.FULL_REFLECT_UPPER,
            BandCase.FULL_REFLECT_LOWER,
            BandCase.EVAN_LEFT_TRAVEL_RIGHT_PLUS,
            BandCase.EVAN_LEFT_TRAVEL_RIGHT_MINUS,
        )

    @property
    def incident_from_left(self) -> bool:
        return self not in (
            BandCase.EVAN_LEFT_TRAVEL_RIGHT_PLUS,
            BandCase.EVAN_LEFT_TRAVEL_RIGHT_MINUS,
            BandCase.GAP_NO_STATES,
        )


def u_of_k(k: float, m: float) -> float:
    """Spinor ratio ``k / (m + sqrt(m^2 + k^2))`` of a propagating mode."""
    if k < 0:
        raise DomainError(f"u_of_k expects a magnitude k >= 0, got {k!r}")
    if m < 0:
        raise DomainError(f"mass must be non-negative, got {m!r}")
    if k == 0.0 and m == 0.0:
        raise DomainError("u_of_k is undefined for k = m = 0")
    return k / (m + math.hypot(m, k))


def w_of_kappa(kappa: float, m: float) -> float:
    """Spinor ratio ``kappa / (m + sqrt(m^2 - kappa^2))`` of an evanescent mode."""
    if kappa < 0:
        raise DomainError(f"w_of_kappa expects kappa >= 0, got {kappa!r}")
    if kappa > m:
        raise DomainError(f"no evanescent state for kappa={kappa!r} > m={m!r}")
    if m == 0.0:
        raise DomainError("evanescent modes need m > 0")
    # (m - kappa)(m + kappa) keeps precision near the gap centre
    return kappa / (m + math.sqrt((m - kappa) * (m + kappa)))


def current_of_u(u: float) -> float:
    """Probability current ``2u / (1 + u^2)`` of a unit-normalised spinor."""
    return 2.0 * u / (1.0 + u * u)


def classify_mode(E: float, p: PhysParams) -> SegmentMode:
    """Classify the solutions of energy ``E`` in a region of potential ``p.V``.

    Band edges ``|E - V| = m`` count as propagating with ``k = 0``.
    """
    m = p.m
    eps = E - p.V
    if abs(eps) >= m:
        # (|eps| - m)(|eps| + m) avoids cancellation close to the band edge
        a = abs(eps)
        k = math.sqrt((a - m) * (a + m))
        kind = ModeKind.PROPAGATING_POSITIVE if eps > 0 or (eps == 0 and m == 0) else ModeKind.PROPAGATING_NEGATIVE
        if m == 0.0 and k == 0.0:
            ratio = 1.0
        else:
            ratio = u_of_k(k, m)
        return SegmentMode(kind, k, ratio, E, p.V)
    kappa = math.sqrt((m - eps) * (m + eps))
    kind = ModeKind.EVANESCENT_PLUS if eps >= 0 else ModeKind.EVANESCENT_MINUS
    return SegmentMode(kind, kappa, w_of_kappa(kappa, m), E, p.V)


def make_spinor(mode: SegmentMode, direction: int = 1) -> Spinor2:
    """Unnormalised column spinor of ``mode``.

    ``direction=+1`` selects the wave carrying current towards ``+z`` (or
    decaying towards ``+z``); ``direction=-1`` the opposite one.  The matching
    spatial factor is ``exp(1j * wavevector(mode, direction) * z)``.
    """
    if direction not in (1, -1):
        raise ValueError(f"direction must be +1 or -1, got {direction!r}")
    x = mode.spinor_ratio
    kind = mode.kind
    if kind is ModeKind.PROPAGATING_POSITIVE:
        return Spinor2(1.0 + 0j, complex(direction * x))
    if kind is ModeKind.PROPAGATING_NEGATIVE:
        return Spinor2(complex(direction * x), 1.0 + 0j)
    if kind is ModeKind.EVANESCENT_PLUS:
        return Spinor2(1.0 + 0j, direction * 1j * x)
    if kind is ModeKind.EVANESCENT_MINUS:
        return Spinor2(-direction * 1j * x, 1.0 + 0j)
    raise PhysicsError("a forbidden mode has no spinor")


def wavevector(mode: SegmentMode, direction: int = 1) -> complex:
    """Complex ``q`` of the spatial factor ``exp(i q z)`` paired with :func:`make_spinor`."""
    if direction not in (1, -1):
        raise ValueError(f"direction must be +1 or -1, got {direction!r}")
    k = mode.wavenumber
    kind = mode.kind
    if kind is ModeKind.PROPAGATING_POSITIVE:
        return complex(direction * k)
    if kind is ModeKind.PROPAGATING_NEGATIVE:
        # negative-energy group velocity is opposite to the momentum
        return complex(-direction * k)
    if kind.is_evanescent:
        return direction * 1j * k
    raise PhysicsError("a forbidden mode has no wavevector")


def spinor_current(s: Spinor2) -> float:
    """Current ``psi^dagger sigma_x psi`` of an unnormalised spinor."""
    return 2.0 * (s.upper.conjugate() * s.lower).real


def classify_band(E: float, V0: float, m: float) -> BandCase:
    """Band tag for energy ``E`` at a step ``0 -> V0``.

    The tag follows from the mode type on each side, so both the small-step
    (``V0 < 2m``) and large-step tabulations come out of the same rule.
    """
    if V0 < 0:
        raise DomainError(f"step height must be non-negative, got {V0!r}")
    if not m > 0:
        raise DomainError(f"classify_band needs m > 0, got {m!r}")
    left = classify_mode(E, PhysParams(m, 0.0)).kind
    right = classify_mode(E, PhysParams(m, V0)).kind
    K = ModeKind
    if left is K.PROPAGATING_POSITIVE:
        if right is K.PROPAGATING_POSITIVE:
            return BandCase.ABOVE_STEP
        if right is K.EVANESCENT_PLUS:
            return BandCase.FULL_REFLECT_UPPER
        if right is K.EVANESCENT_MINUS:
            return BandCase.FULL_REFLECT_LOWER
        return BandCase.KLEIN_TRANSMITTING
    if left.is_evanescent:
        if right.is_evanescent:
            return BandCase.GAP_NO_STATES
        if left is K.EVANESCENT_PLUS:
            return BandCase.EVAN_LEFT_TRAVEL_RIGHT_PLUS
        return BandCase.EVAN_LEFT_TRAVEL_RIGHT_MINUS
    return BandCase.FULLY_NEGATIVE
