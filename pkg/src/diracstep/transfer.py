"""Transfer matrices for arbitrary piecewise-constant profiles.

Amplitudes in each region are ``(forward, backward)`` weights on a mode basis
referenced to the left edge of the region.  Positive-energy and ``eps >= 0``
evanescent modes use columns ``(1, x)`` and ``(1, -x)``; negative-energy and
``eps < 0`` evanescent modes use ``(x, 1)`` and ``(x, -1)``.  Here ``x`` is
``u``, ``i w`` or ``-i w``.  With that basis every interface is half a
discontinuity matrix ``d(a, b)`` whose entries are 1, ``x``, ``y`` or their
ratios, and every region is a propagation matrix ``P(alpha)``.

The negative-family backward column is minus the one returned by
:func:`diracstep.core.make_spinor`; reflection amplitudes are converted back to
that public convention on the way out.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .core import (
    DomainError,
    ModeKind,
    NumericalError,
    PhysParams,
    SegmentMode,
    classify_mode,
    make_spinor,
    wavevector,
)
from .step import ScatteringResult

# |Re alpha| above this overflows products of a few matrices in double precision
STABILITY_CAP = 300.0


class OverflowGuardError(NumericalError):
    """A propagation exponent exceeds :data:`STABILITY_CAP`."""


class EvanescentLeadError(DomainError):
    """A lead carries no travelling wave at the requested energy."""


@dataclass(frozen=True)
class PotentialProfile:
    """Finite segments ``(width, V)`` between two semi-infinite leads."""

    left_lead_v: float
    segments: tuple[tuple[float, float], ...] = field(default_factory=tuple)
    right_lead_v: float = 0.0

    def __post_init__(self) -> None:
        segs = tuple((float(w), float(v)) for w, v in self.segments)
        for i, (w, v) in enumerate(segs):
            if not w > 0 or not math.isfinite(w):
                raise DomainError(f"segment {i}: width must be positive and finite, got {w!r}")
            if not math.isfinite(v):
                raise DomainError(f"segment {i}: potential must be finite, got {v!r}")
        object.__setattr__(self, "segments", segs)

    @property
    def potentials(self) -> list[float]:
        return [self.left_lead_v, *(v for _, v in self.segments), self.right_lead_v]

    @property
    def interfaces(self) -> list[float]:
        """Interface positions with the first one at ``z = 0``."""
        z = [0.0]
        for w, _ in self.segments:
            z.append(z[-1] + w)
        return z

    def reversed(self) -> "PotentialProfile":
        """Mirror image ``z -> -z``; scattering from the right of the original."""
        return PotentialProfile(self.right_lead_v, tuple(reversed(self.segments)), self.left_lead_v)


@dataclass(frozen=True)
class BarrierSpec:
    V0: float
    a: float

    def __post_init__(self) -> None:
        if not self.a > 0:
            raise DomainError(f"barrier width must be positive, got {self.a!r}")

    def profile(self) -> PotentialProfile:
        return PotentialProfile(0.0, ((self.a, self.V0),), 0.0)


def disc_matrix(a: complex, b: complex) -> np.ndarray:
    """Discontinuity matrix ``[[a + b, a - b], [a - b, a + b]]``; ``det = 4ab``."""
    return np.array([[a + b, a - b], [a - b, a + b]], dtype=complex)


def prop_matrix(alpha: complex) -> np.ndarray:
    """Propagation matrix ``diag(exp(alpha), exp(-alpha))``."""
    if abs(alpha.real) > STABILITY_CAP:
        raise OverflowGuardError(f"|Re alpha| = {abs(alpha.real):.3g} exceeds the stability cap {STABILITY_CAP}")
    return np.array([[np.exp(alpha), 0], [0, np.exp(-alpha)]], dtype=complex)


def _negative_family(mode: SegmentMode) -> bool:
    return mode.kind in (ModeKind.PROPAGATING_NEGATIVE, ModeKind.EVANESCENT_MINUS)


def mode_parameter(mode: SegmentMode) -> complex:
    """Basis parameter ``x`` of a region: ``u``, ``i w`` (eps >= 0) or ``-i w`` (eps < 0)."""
    kind = mode.kind
    if kind.is_propagating:
        return complex(mode.spinor_ratio)
    if kind is ModeKind.EVANESCENT_PLUS:
        return 1j * mode.spinor_ratio
    if kind is ModeKind.EVANESCENT_MINUS:
        return -1j * mode.spinor_ratio
    raise DomainError("forbidden mode")


def basis_matrix(mode: SegmentMode) -> np.ndarray:
    """Columns are the forward and backward spinors of the internal basis."""
    x = mode_parameter(mode)
    if _negative_family(mode):
        return np.array([[x, x], [1, -1]], dtype=complex)
    return np.array([[1, 1], [x, -x]], dtype=complex)


def interface_matrix(left: SegmentMode, right: SegmentMode) -> np.ndarray:
    """Amplitude map across a potential jump, ``c_right = M c_left``."""
    x = mode_parameter(left)
    y = mode_parameter(right)
    if y == 0:
        raise NumericalError("right-hand mode sits exactly on a band edge; the basis is degenerate")
    nl, nr = _negative_family(left), _negative_family(right)
    if not nl and not nr:
        return 0.5 * disc_matrix(1, x / y)
    if nl and nr:
        return 0.5 * disc_matrix(x / y, 1)
    if not nl and nr:
        return 0.5 * disc_matrix(1 / y, x)
    return 0.5 * disc_matrix(x, 1 / y)


def segment_exponent(mode: SegmentMode, width: float) -> complex:
    """``alpha = i q_forward w``: ``+-i k w`` when propagating, ``-kappa w`` when evanescent."""
    return 1j * wavevector(mode, 1) * width


def _spinor_propagator(eps: float, m: float, width: float) -> np.ndarray:
    """``exp(K w)`` with ``K = i [[0, eps + m], [eps - m, 0]]``; regular at band edges."""
    k2 = (eps - m) * (eps + m)
    K = 1j * np.array([[0, eps + m], [eps - m, 0]], dtype=complex)
    if k2 >= 0:
        k = math.sqrt(k2)
        c = math.cos(k * width)
        s = width * np.sinc(k * width / math.pi)
    else:
        kappa = math.sqrt(-k2)
        c = math.cosh(kappa * width)
        s = math.sinh(kappa * width) / kappa
    return c * np.eye(2, dtype=complex) + s * K


def profile_modes(profile: PotentialProfile, E: float, m: float) -> list[SegmentMode]:
    return [classify_mode(E, PhysParams(m, v)) for v in profile.potentials]


def profile_matrices(profile: PotentialProfile, E: float, m: float) -> list[np.ndarray]:
    """Factors of the transfer matrix in application order (left lead first)."""
    modes = profile_modes(profile, E, m)
    for side, mode in (("left", modes[0]), ("right", modes[-1])):
        if not mode.kind.is_propagating:
            raise EvanescentLeadError(f"{side} lead is evanescent at E={E!r} (V={mode.potential!r})")
        if mode.wavenumber == 0.0:
            raise EvanescentLeadError(f"{side} lead sits on a band edge at E={E!r} and carries no current")
    factors: list[np.ndarray] = []
    n_seg = len(profile.segments)
    prev = modes[0]
    i = 1
    while i <= n_seg:
        mode = modes[i]
        if mode_parameter(mode) == 0:
            # band-edge segments: carry the spinor itself through them
            S = np.eye(2, dtype=complex)
            while i <= n_seg and mode_parameter(modes[i]) == 0:
                S = _spinor_propagator(modes[i].eps, m, profile.segments[i - 1][0]) @ S
                i += 1
            nxt = modes[i]
            factors.append(np.linalg.solve(basis_matrix(nxt), S @ basis_matrix(prev)))
            if i > n_seg:
                return factors
        else:
            nxt = mode
            factors.append(interface_matrix(prev, mode))
        factors.append(prop_matrix(segment_exponent(nxt, profile.segments[i - 1][0])))
        prev = nxt
        i += 1
    factors.append(interface_matrix(prev, modes[-1]))
    return factors


def chain(factors: Sequence[np.ndarray]) -> np.ndarray:
    """Left-multiply ``factors`` in application order."""
    out = np.eye(2, dtype=complex)
    for F in factors:
        out = F @ out
    return out


def compose_profile(profile: PotentialProfile, E: float, m: float) -> np.ndarray:
    """Total transfer matrix from the left-lead to the right-lead amplitudes."""
    return chain(profile_matrices(profile, E, m))


def _lead_current_ratio(left: SegmentMode, right: SegmentMode) -> float:
    # forward spinors (1, u) and (u, 1) both carry current 2u
    return right.spinor_ratio / left.spinor_ratio


def amplitudes_from_transfer(
    M: np.ndarray, left: SegmentMode, det: complex | None = None
) -> tuple[complex, complex]:
    """``(f, g)`` for unit incidence from the left and nothing incoming from the right.

    ``det`` should be the product of the factor determinants when available;
    ``g = det / M[1, 1]`` then avoids the cancellation in ``M00 + M01 f``
    behind thick barriers.
    """
    f = -M[1, 0] / M[1, 1]
    if det is None:
        det = M[0, 0] * M[1, 1] - M[0, 1] * M[1, 0]
    g = det / M[1, 1]
    if _negative_family(left):
        f = -f
    return complex(f), complex(g)


def profile_scatter_transfer(profile: PotentialProfile, E: float, m: float) -> ScatteringResult:
    modes = profile_modes(profile, E, m)
    factors = profile_matrices(profile, E, m)
    det = complex(np.prod([np.linalg.det(F) for F in factors]))
    f, g = amplitudes_from_transfer(chain(factors), modes[0], det)
    return _result(f, g, modes[0], modes[-1])


def _result(f: complex, g: complex, left: SegmentMode, right: SegmentMode) -> ScatteringResult:
    R = abs(f) ** 2
    T = abs(g) ** 2 * _lead_current_ratio(left, right)
    return ScatteringResult(f, g, R, T, None, left.wavenumber, right.wavenumber)


def solve_profile_direct(profile: PotentialProfile, E: float, m: float) -> tuple[complex, complex, np.ndarray]:
    """Brute-force continuity solve over all interfaces at once.

    Region ``j`` holds ``A_j s_f exp(i q (z - z_j)) + B_j s_b exp(-i q (z - z_{j+1}))``
    with the :func:`make_spinor` basis, so every exponential that appears has
    modulus at most one and deep barriers cannot overflow.  A segment sitting
    exactly on a band edge uses the two linear solutions instead.  Unknowns are
    ``f, A_1, B_1, ..., A_N, B_N, g``.  Returns ``(f, g, coefficients)``.
    """
    modes = profile_modes(profile, E, m)
    for side, mode in (("left", modes[0]), ("right", modes[-1])):
        if not mode.kind.is_propagating or mode.wavenumber == 0.0:
            raise EvanescentLeadError(f"{side} lead carries no travelling wave at E={E!r}")
    n_seg = len(profile.segments)
    widths = [w for w, _ in profile.segments]
    n_unk = 2 * n_seg + 2
    A = np.zeros((n_unk, n_unk), dtype=complex)
    rhs = np.zeros(n_unk, dtype=complex)

    def cols(j: int, at_right_edge: bool) -> tuple[int | None, np.ndarray, int | None, np.ndarray]:
        # (column index, vector) for the forward and backward pieces of region j
        mode = modes[j]
        sf = make_spinor(mode, 1).as_array()
        sb = make_spinor(mode, -1).as_array()
        q = wavevector(mode, 1)
        if j == 0:
            return None, sf, 0, sb
        if j == n_seg + 1:
            return n_unk - 1, sf, None, sb
        w = widths[j - 1]
        if mode.wavenumber == 0.0 and mode.kind.is_propagating:
            # band edge: K^2 = 0, so the solutions are (I + K (z - z_j)) c, linear in z
            eps = mode.eps
            K = 1j * np.array([[0, eps + m], [eps - m, 0]], dtype=complex)
            grow = np.eye(2, dtype=complex) + (K * w if at_right_edge else 0)
            return 2 * j - 1, grow[:, 0], 2 * j, grow[:, 1]
        ef = np.exp(1j * q * w) if at_right_edge else 1.0
        eb = 1.0 if at_right_edge else np.exp(1j * q * w)
        return 2 * j - 1, sf * ef, 2 * j, sb * eb

    for i in range(n_seg + 1):
        rows = slice(2 * i, 2 * i + 2)
        lf, lvf, lb, lvb = cols(i, True)
        rf, rvf, rb, rvb = cols(i + 1, False)
        if lf is None:
            rhs[rows] -= lvf
        else:
            A[rows, lf] += lvf
        A[rows, lb] += lvb
        A[rows, rf] -= rvf
        if rb is not None:
            A[rows, rb] -= rvb
    try:
        x = np.linalg.solve(A, rhs)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"singular continuity system at E={E!r}: {exc}") from exc
    return complex(x[0]), complex(x[-1]), x


def profile_scatter_direct(profile: PotentialProfile, E: float, m: float) -> ScatteringResult:
    modes = profile_modes(profile, E, m)
    f, g, _ = solve_profile_direct(profile, E, m)
    return _result(f, g, modes[0], modes[-1])


def profile_scatter(profile: PotentialProfile, E: float, m: float, method: str = "auto") -> ScatteringResult:
    """Scatter off ``profile``.

    ``method`` is ``"transfer"``, ``"direct"`` or ``"auto"``; the last uses
    transfer matrices and falls back to the scaled direct solve when a
    segment exponent exceeds the stability cap.
    """
    if method == "transfer":
        return profile_scatter_transfer(profile, E, m)
    if method == "direct":
        return profile_scatter_direct(profile, E, m)
    if method != "auto":
        raise ValueError(f"unknown method {method!r}")
    try:
        return profile_scatter_transfer(profile, E, m)
    except OverflowGuardError:
        return profile_scatter_direct(profile, E, m)


def barrier_scatter(spec: BarrierSpec, E: float, m: float) -> ScatteringResult:
    """Square barrier of height ``spec.V0`` and width ``spec.a`` between zero-potential leads."""
    if not E > m:
        raise DomainError(f"barrier_scatter needs a propagating incident wave, E > m; got E={E!r}")
    return profile_scatter(spec.profile(), E, m)


def ramsauer_momenta(spec: BarrierSpec, m: float, k_max: float) -> list[tuple[int, float, str]]:
    """Incident momenta where the interior phase ``k' a`` is a nonzero multiple of pi.

    Each entry is ``(n, k, branch)`` with ``branch`` ``"above"`` for an interior
    positive-energy wave and ``"klein"`` for a pulled-up negative-energy one.
    Sorted by ``k``.
    """
    out: list[tuple[int, float, str]] = []
    V0, a = spec.V0, spec.a
    n = 1
    while True:
        kp = n * math.pi / a
        eint = math.hypot(m, kp)
        added = False
        for E, branch in ((V0 + eint, "above"), (V0 - eint, "klein")):
            if E > m:
                k = math.sqrt((E - m) * (E + m))
                if k <= k_max:
                    out.append((n, k, branch))
                    added = True
        if not added and V0 + eint > math.hypot(m, k_max):
            break
        n += 1
    out.sort(key=lambda t: t[1])
    return out
