"""Exact scattering off a single potential step ``0 -> V0`` at ``z = 0``.

Closed-form amplitudes cover every band; :func:`match_oracle` solves the
continuity condition numerically from the spinor basis and is the
independent check on them.

Conventions: ``f`` multiplies the reflected wave and ``g`` the transmitted
(or evanescent) one, with the spinors of :func:`diracstep.core.make_spinor`.
Bands with a travelling wave only on the right (``EVAN_LEFT_TRAVEL_RIGHT_*``)
are fed from the right: there ``f`` is the phase of the wave reflected back
into the right lead and ``g`` the left evanescent coupling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import (
    BandCase,
    DomainError,
    NoStatesError,
    NumericalError,
    PhysParams,
    SegmentMode,
    classify_band,
    classify_mode,
    make_spinor,
    u_of_k,
    wavevector,
)


@dataclass(frozen=True)
class ScatteringResult:
    f: complex
    g: complex
    R: float
    T: float
    band: BandCase | None
    k_left: float
    k_right: float

    @property
    def phase(self) -> float:
        """``arg f``; the only meaning given to the full-reflection phase."""
        return math.atan2(self.f.imag, self.f.real)


@dataclass(frozen=True)
class MatchedState:
    """Coefficients of a matched step eigenstate.

    ``left_coeffs`` and ``right_coeffs`` are ``(forward, backward)`` weights on
    ``make_spinor(mode, +1)`` and ``make_spinor(mode, -1)`` of each side.
    """

    left_coeffs: tuple[complex, complex]
    right_coeffs: tuple[complex, complex]
    energy: float
    band: BandCase
    left_mode: SegmentMode
    right_mode: SegmentMode


def kprime_above(E: float, V0: float, m: float) -> float:
    """Right-side wavenumber when both sides carry positive energy.

    Solves ``sqrt(m^2 + k^2) = V0 + sqrt(m^2 + k'^2)`` with ``E = sqrt(m^2 + k^2)``.
    """
    eps = E - V0
    if eps < m:
        raise DomainError(f"E={E!r} is below the upper band edge V0+m={V0 + m!r}")
    return math.sqrt((eps - m) * (eps + m))


def kprime_klein(E: float, V0: float, m: float) -> float:
    """Right-side wavenumber of the pulled-up negative-energy wave, ``m <= E <= V0 - m``."""
    if V0 < 2 * m:
        raise DomainError(f"the Klein band needs V0 >= 2m, got V0={V0!r}, m={m!r}")
    if not m <= E <= V0 - m:
        raise DomainError(f"E={E!r} outside the Klein band [{m!r}, {V0 - m!r}]")
    a = V0 - E
    return math.sqrt((a - m) * (a + m))


def _k_of_energy(E: float, m: float) -> float:
    a = abs(E)
    return math.sqrt((a - m) * (a + m))


def _above_step(E: float, V0: float, m: float, band: BandCase) -> ScatteringResult:
    k = _k_of_energy(E, m)
    kp = kprime_above(E, V0, m)
    u = u_of_k(k, m)
    up = u_of_k(kp, m)
    if u == up:
        # includes u = u' = 0, the trivial step V0 = 0 at its band edge
        return ScatteringResult(0j, 1 + 0j, 0.0, 1.0, band, k, kp)
    f = (u - up) / (u + up)
    g = 2 * u / (u + up)
    R = f * f
    T = 4 * u * up / (u + up) ** 2
    return ScatteringResult(complex(f), complex(g), R, T, band, k, kp)


def _klein(E: float, V0: float, m: float) -> ScatteringResult:
    k = _k_of_energy(E, m)
    kp = kprime_klein(E, V0, m)
    u = u_of_k(k, m)
    up = u_of_k(kp, m)
    uu = u * up
    f = (uu - 1) / (uu + 1)
    g = 2 * u / (uu + 1)
    R = f * f
    T = 4 * uu / (uu + 1) ** 2
    return ScatteringResult(complex(f), complex(g), R, T, BandCase.KLEIN_TRANSMITTING, k, kp)


def _full_reflection(E: float, V0: float, m: float, band: BandCase) -> ScatteringResult:
    left = classify_mode(E, PhysParams(m, 0.0))
    right = classify_mode(E, PhysParams(m, V0))
    if band is BandCase.FULL_REFLECT_UPPER:
        u, w = left.spinor_ratio, right.spinor_ratio
        f = (u - 1j * w) / (u + 1j * w)
        g = 2 * u / (u + 1j * w)
    elif band is BandCase.FULL_REFLECT_LOWER:
        u, w = left.spinor_ratio, right.spinor_ratio
        f = -(1 + 1j * w * u) / (1 - 1j * w * u)
        g = 2 * u / (1 - 1j * w * u)
    elif band is BandCase.EVAN_LEFT_TRAVEL_RIGHT_PLUS:
        w, up = left.spinor_ratio, right.spinor_ratio
        f = -(1 - 1j * w * up) / (1 + 1j * w * up)
        g = -2 * up / (1 + 1j * w * up)
    else:
        w, up = left.spinor_ratio, right.spinor_ratio
        f = (up + 1j * w) / (up - 1j * w)
        g = 2 * up / (up - 1j * w)
    return ScatteringResult(complex(f), complex(g), 1.0, 0.0, band, left.wavenumber, right.wavenumber)


def step_scatter(E: float, V0: float, m: float) -> ScatteringResult:
    """Reflection and transmission amplitudes for a step of height ``V0``.

    Raises :class:`NoStatesError` inside the true mass gap.
    """
    if not m > 0:
        raise DomainError(f"step_scatter needs m > 0 (see diracstep.massless), got {m!r}")
    band = classify_band(E, V0, m)
    if band is BandCase.ABOVE_STEP:
        return _above_step(E, V0, m, band)
    if band is BandCase.KLEIN_TRANSMITTING:
        return _klein(E, V0, m)
    if band is BandCase.FULLY_NEGATIVE:
        # mirror E -> -E, V0 -> -V0 maps the negative-energy band onto the positive one
        return _above_step(-E, -V0, m, band)
    if band is BandCase.GAP_NO_STATES:
        raise NoStatesError(f"no states at E={E!r}: true mass gap [{V0 - m!r}, {m!r}]")
    return _full_reflection(E, V0, m, band)


def _column(mode: SegmentMode, direction: int) -> np.ndarray:
    return make_spinor(mode, direction).as_array()


def match_oracle(E: float, V0: float, m: float) -> MatchedState:
    """Solve continuity at ``z = 0`` as a plain 2x2 linear system.

    Uses only the spinor basis, never the closed forms.  Unit amplitude is
    put on the incoming wave, which comes from the right in the bands with an
    evanescent left side.
    """
    band = classify_band(E, V0, m)
    if band is BandCase.GAP_NO_STATES:
        raise NoStatesError(f"no states at E={E!r}: true mass gap [{V0 - m!r}, {m!r}]")
    left = classify_mode(E, PhysParams(m, 0.0))
    right = classify_mode(E, PhysParams(m, V0))
    if band.incident_from_left:
        # incident + f * reflected = g * outgoing
        A = np.column_stack([_column(left, -1), -_column(right, 1)])
        b = -_column(left, 1)
    else:
        # g * left-decaying = incident + f * reflected, incident from the right
        A = np.column_stack([_column(right, 1), -_column(left, -1)])
        b = -_column(right, -1)
    if abs(np.linalg.det(A)) < 1e-300:
        raise NumericalError(f"singular matching system at E={E!r} (band edge with coincident spinors)")
    f, g = np.linalg.solve(A, b)
    if band.incident_from_left:
        return MatchedState((1 + 0j, complex(f)), (complex(g), 0j), E, band, left, right)
    return MatchedState((0j, complex(g)), (complex(f), 1 + 0j), E, band, left, right)


def oracle_amplitudes(state: MatchedState) -> tuple[complex, complex]:
    """``(f, g)`` of a matched state in the same convention as :func:`step_scatter`."""
    if state.band.incident_from_left:
        return state.left_coeffs[1], state.right_coeffs[0]
    return state.right_coeffs[0], state.left_coeffs[1]


def reconstruct_wavefunction(state: MatchedState, z: np.ndarray) -> np.ndarray:
    """Evaluate the matched eigenstate on ``z``; returns an ``(len(z), 2)`` complex array.

    Points with ``z < 0`` use the left solution, the rest the right one.
    """
    z = np.asarray(z, dtype=float)
    out = np.empty(z.shape + (2,), dtype=complex)
    for side, coeffs, mask in (
        (state.left_mode, state.left_coeffs, z < 0),
        (state.right_mode, state.right_coeffs, z >= 0),
    ):
        zz = z[mask]
        psi = np.zeros(zz.shape + (2,), dtype=complex)
        for c, direction in zip(coeffs, (1, -1)):
            if c == 0:
                continue
            q = wavevector(side, direction)
            psi += c * np.exp(1j * q * zz)[:, None] * _column(side, direction)[None, :]
        out[mask] = psi
    return out


def evaluate_side(state: MatchedState, side: str, z: float) -> np.ndarray:
    """Evaluate one side's solution at ``z`` regardless of the sign of ``z``."""
    mode, coeffs = (state.left_mode, state.left_coeffs) if side == "left" else (state.right_mode, state.right_coeffs)
    psi = np.zeros(2, dtype=complex)
    for c, direction in zip(coeffs, (1, -1)):
        psi += c * np.exp(1j * wavevector(mode, direction) * z) * _column(mode, direction)
    return psi


def klein_product(E: float, V0: float, m: float) -> float:
    """``u_k * u'_k`` inside the Klein band; ``R = 0`` would need this to reach 1."""
    k = _k_of_energy(E, m)
    return u_of_k(k, m) * u_of_k(kprime_klein(E, V0, m), m)


def find_klein_transparency(V0: float, m: float, tol: float = 1e-12) -> float | None:
    """Bisection for a root of ``u u' - 1`` on the Klein band.

    Returns ``None`` when ``u u' - 1`` has no sign change on the band.  For
    ``m > 0`` both ratios are below one, so no root exists; the product
    peaks at the band centre ``E = V0 / 2``.
    """
    if V0 < 2 * m:
        return None
    lo, hi = m, V0 - m
    mid = 0.5 * (lo + hi)
    h = lambda e: klein_product(e, V0, m) - 1.0
    # the product is unimodal with its peak at V0/2; bracket on the rising half
    if h(mid) < 0:
        return None
    if h(lo) == 0:
        return lo
    a, b = lo, mid
    while b - a > tol:
        c = 0.5 * (a + b)
        if h(c) < 0:
            a = c
        else:
            b = c
    return 0.5 * (a + b)


def max_klein_transmission(V0: float, m: float) -> tuple[float, float]:
    """Energy and reflection coefficient at the Klein-band transmission peak ``E = V0 / 2``."""
    if V0 < 2 * m:
        raise DomainError("no Klein band for V0 < 2m")
    E = 0.5 * V0
    return E, step_scatter(E, V0, m).R
