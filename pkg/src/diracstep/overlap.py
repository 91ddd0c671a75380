"""Overlap between free negative-energy states and step eigenstates.

If the step were switched on suddenly, the squared overlap summed over free
negative-energy states and positive-energy step eigenstates counts the
states pulled up out of the lower continuum.  Thermodynamic-limit results
are per unit length.  The finite-box routines use a box of half-length ``L``
(regions ``(-L, 0)`` and ``(0, L)``) with momenta ``k = 2 pi n / L``.  They
exist to check the limits: Kronecker structure, extensivity and the ``1/L``
decay of overlaps between evanescent pieces.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .core import (
    BandCase,
    DomainError,
    NumericalError,
    PhysParams,
    classify_band,
    classify_mode,
    u_of_k,
)
from .step import kprime_klein, step_scatter


@dataclass(frozen=True)
class OverlapReport:
    n2_per_l: float
    n3_per_l: float
    intuitive_per_l: float
    total_per_l: float
    V0: float
    m: float
    n3_error: float = 0.0


@dataclass(frozen=True)
class FiniteLConfig:
    """Box half-length ``L`` (units of ``1/m``), grid cutoff ``|n| <= n_max`` and quadrature tolerance."""

    L: float = 2000.0
    n_max: int = 100_000
    tol: float = 1e-10

    def __post_init__(self) -> None:
        if not self.L > 0:
            raise DomainError(f"box length must be positive, got {self.L!r}")
        if self.n_max < 1:
            raise DomainError(f"n_max must be at least 1, got {self.n_max!r}")

    @property
    def dk(self) -> float:
        return 2 * math.pi / self.L

    def grid_index(self, k: float, atol: float = 1e-9) -> int:
        """Integer ``n`` with ``k = 2 pi n / L``; raises for off-grid momenta."""
        x = k / self.dk
        n = round(x)
        if abs(x - n) > atol * max(1.0, abs(x)):
            raise DomainError(f"k={k!r} is not on the grid 2*pi*n/L for L={self.L!r}")
        return int(n)

    def momentum(self, n: int | np.ndarray) -> float | np.ndarray:
        return 2 * math.pi * n / self.L


def _k_plus(V0: float, m: float) -> float:
    return math.sqrt(V0 * (V0 + 2 * m))


def _k_minus(V0: float, m: float) -> float:
    return math.sqrt(V0 * (V0 - 2 * m)) if V0 > 2 * m else 0.0


def intuitive_estimate(V0: float, m: float) -> float:
    """Density-of-states count of levels lifted above ``-m``, per unit length."""
    if V0 < 0:
        raise DomainError(f"V0 must be non-negative, got {V0!r}")
    return _k_plus(V0, m) / (2 * math.pi)


def n2_per_length(V0: float, m: float) -> float:
    """Contribution of the standing waves matched to a left evanescent tail."""
    if V0 < 0:
        raise DomainError(f"V0 must be non-negative, got {V0!r}")
    return (_k_plus(V0, m) - _k_minus(V0, m)) / (4 * math.pi)


def klein_ratio(k: float, V0: float, m: float) -> float:
    """``u'`` of the pulled-up negative-energy wave for incident momentum ``k``."""
    E = math.hypot(m, k)
    a = V0 - E
    return math.sqrt(max(a - m, 0.0) / (a + m))


def n3_integrand(k: float, V0: float, m: float) -> float:
    """Squared matrix element of a Klein-band state, as a function of incident ``k``."""
    u = u_of_k(k, m)
    up = klein_ratio(k, V0, m)
    u2, up2 = u * u, up * up
    return 2 * u2 * (1 + up2) / (u2 * up2 * (3 + u2) + (1 + 3 * u2))


def n3_integrand_array(k: np.ndarray, V0: float, m: float) -> np.ndarray:
    k = np.asarray(k, dtype=float)
    E = np.hypot(m, k)
    u = k / (m + E)
    a = V0 - E
    up2 = np.clip(a - m, 0.0, None) / (a + m)
    u2 = u * u
    return 2 * u2 * (1 + up2) / (u2 * up2 * (3 + u2) + (1 + 3 * u2))


def n3_per_length_with_error(V0: float, m: float, tol: float = 1e-10) -> tuple[float, float]:
    """``(value, error estimate)`` of the Klein-band contribution per unit length."""
    if V0 < 0:
        raise DomainError(f"V0 must be non-negative, got {V0!r}")
    kmax = _k_minus(V0, m)
    if kmax == 0.0:
        return 0.0, 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            val, err = integrate.quad(n3_integrand, 0.0, kmax, args=(V0, m), epsabs=tol, epsrel=0.0, limit=500)
        except integrate.IntegrationWarning as exc:
            raise NumericalError(f"n3 quadrature did not converge for V0={V0!r}: {exc}") from exc
    return val / (2 * math.pi), err / (2 * math.pi)


def n3_per_length(V0: float, m: float, tol: float = 1e-10) -> float:
    """Klein-band contribution per unit length; zero for ``V0 <= 2m``."""
    return n3_per_length_with_error(V0, m, tol)[0]


def overlap_report(V0: float, m: float, tol: float = 1e-10) -> OverlapReport:
    n2 = n2_per_length(V0, m)
    n3, err = n3_per_length_with_error(V0, m, tol)
    return OverlapReport(n2, n3, intuitive_estimate(V0, m), n2 + n3, V0, m, err)


# --- finite box -----------------------------------------------------------


def free_negative_spinor(k: float, m: float) -> np.ndarray:
    """Spinor of the free negative-energy plane wave ``exp(i k z)``, any sign of ``k``."""
    u = u_of_k(abs(k), m) if (k != 0 or m != 0) else 0.0
    return np.array([-math.copysign(u, k) if k != 0 else 0.0, 1.0], dtype=complex)


def _rect_points(L: float, *indices: int) -> np.ndarray:
    # rectangle rule on [0, L) is exact for exp(2 pi i j z / L) with |j| < n
    n = 2 * sum(abs(i) for i in indices) + 16
    return np.arange(n) * (L / n)


def box_inner_product(k1: float, k2: float, cfg: FiniteLConfig, s1=None, s2=None) -> complex:
    """``int_0^L conj(s1 e^{i k1 z}) . s2 e^{i k2 z} dz / L`` by an explicit discrete sum.

    With unit spinors (the default) this is the box Kronecker delta.
    """
    n1, n2 = cfg.grid_index(k1), cfg.grid_index(k2)
    z = _rect_points(cfg.L, n1, n2)
    a = np.array([1.0, 0.0]) if s1 is None else np.asarray(s1)
    b = np.array([1.0, 0.0]) if s2 is None else np.asarray(s2)
    spin = np.vdot(a, b)
    return complex(spin * np.mean(np.exp(1j * (k2 - k1) * z)))


def kronecker_closed_form(k1: float, k2: float, L: float) -> complex:
    """``(exp(i (k1 - k2) L) - 1) / (i (k1 - k2) L)``, equal to 1 at ``k1 = k2``."""
    d = (k1 - k2) * L
    if d == 0:
        return 1.0 + 0j
    return (np.exp(1j * d) - 1) / (1j * d)


def case2_energy(kp: float, V0: float, m: float) -> float:
    """Energy of the right-side standing wave with momentum ``k'``, checked against its band."""
    E = V0 - math.hypot(m, kp)
    band = classify_band(E, V0, m)
    if band not in (BandCase.EVAN_LEFT_TRAVEL_RIGHT_PLUS, BandCase.EVAN_LEFT_TRAVEL_RIGHT_MINUS):
        raise DomainError(f"k'={kp!r} gives E={E!r} outside the evanescent-left band ({band.value})")
    return E


def finite_l_matrix_element_case2(k_free: float, kp: float, cfg: FiniteLConfig, V0: float, m: float) -> complex:
    """``<n_{k''} | Psi_2(k')>`` from explicit inner products on the right interval.

    The free state is normalised on ``(-L, L)``.  The left evanescent tail and
    the ``1/L`` normalisation correction are dropped, as in the thermodynamic
    limit.  The reflection phase comes from :func:`diracstep.step.step_scatter`.
    """
    if kp <= 0:
        raise DomainError(f"standing waves are labelled by k' > 0, got {kp!r}")
    E = case2_energy(kp, V0, m)
    phase = step_scatter(E, V0, m).f
    up = u_of_k(kp, m)
    s_free = free_negative_spinor(k_free, m)
    s_in = np.array([-up, 1.0])  # n_{k'}: incoming from the right
    s_out = np.array([up, 1.0])  # n_{-k'}
    L = cfg.L
    # each inner product below is (1/L) int_0^L
    overlap = box_inner_product(k_free, kp, cfg, s_free, s_in) + phase * box_inner_product(k_free, -kp, cfg, s_free, s_out)
    norm_free = math.sqrt(2 * L * np.vdot(s_free, s_free).real)
    norm_state = math.sqrt(2 * L * (1 + up * up))
    return complex(L * overlap / (norm_free * norm_state))


def case2_closed_form(k_free: float, kp: float, cfg: FiniteLConfig, V0: float, m: float) -> complex:
    """``(Delta_{k'',k'} + e^{i phi} Delta_{k'',-k'}) / 2``."""
    E = case2_energy(kp, V0, m)
    phase = step_scatter(E, V0, m).f
    return 0.5 * (kronecker_closed_form(k_free, kp, cfg.L) + phase * kronecker_closed_form(k_free, -kp, cfg.L))


def _grid_count(cfg: FiniteLConfig, k_lo: float, k_hi: float, include_zero: bool = False) -> np.ndarray:
    n_lo = max(1 if not include_zero else 0, math.ceil(k_lo / cfg.dk - 1e-12))
    n_hi = math.floor(k_hi / cfg.dk + 1e-12)
    return np.arange(n_lo, n_hi + 1)


def n2_finite_sum(V0: float, m: float, cfg: FiniteLConfig) -> float:
    """Finite-box ``N_2 / L``: each on-grid standing wave contributes ``1/4 + 1/4``.

    Only ``k'' = +-k'`` survive the sum over free states, which the
    matrix-element tests confirm with explicit inner products.
    """
    n = _grid_count(cfg, _k_minus(V0, m), _k_plus(V0, m))
    return 0.5 * len(n) / cfg.L


def n3_finite_sum(V0: float, m: float, cfg: FiniteLConfig) -> float:
    """Finite-box ``N_3 / L`` built from the step amplitudes and spinor norms.

    For each on-grid incident momentum in the Klein band the squared overlap
    equals the share of the normalised state's weight on the right, where it
    is a single negative-energy plane wave.
    """
    if V0 <= 2 * m:
        return 0.0
    total = 0.0
    for n in _grid_count(cfg, 0.0, _k_minus(V0, m)):
        k = cfg.momentum(int(n))
        E = math.hypot(m, k)
        if E > V0 - m:
            continue
        res = step_scatter(E, V0, m)
        u = u_of_k(k, m)
        up = u_of_k(kprime_klein(E, V0, m), m)
        left = (1 + u * u) * (1 + abs(res.f) ** 2)
        right = abs(res.g) ** 2 * (1 + up * up)
        total += right / (left + right)
    return total / cfg.L


# --- evanescent (case 1) states --------------------------------------------


@dataclass(frozen=True)
class Case1State:
    """Full-reflection state: standing wave on the left, ``exp(-kappa z)`` on the right."""

    k: float
    u: float
    kappa: float
    w: float
    f: complex
    g: complex


def case1_state(k: float, V0: float, m: float) -> Case1State:
    E = math.hypot(m, k)
    res = step_scatter(E, V0, m)
    if res.band is not BandCase.FULL_REFLECT_UPPER:
        raise DomainError(f"k={k!r} (E={E!r}) is not in the upper evanescent band [max(V0, m), V0 + m]")
    right = classify_mode(E, PhysParams(m, V0))
    return Case1State(k, u_of_k(k, m), right.wavenumber, right.spinor_ratio, res.f, res.g)


def _exp_integral(q: np.ndarray | complex, a: float, b: float) -> np.ndarray | complex:
    """``int_a^b exp(q z) dz`` for complex ``q``, stable near ``q = 0``."""
    q = np.asarray(q, dtype=complex)
    small = np.abs(q * (b - a)) < 1e-8
    safe = np.where(small, 1.0, q)
    full = (np.exp(safe * b) - np.exp(safe * a)) / safe
    approx = (b - a) * (1 + 0.5 * q * (a + b))
    out = np.where(small, approx, full)
    return out if out.ndim else complex(out)


def _case1_norm2(st: Case1State, L: float) -> float:
    # left: |(1, u) e^{ikz} + f (1, -u) e^{-ikz}|^2 over (-L, 0)
    u, f = st.u, st.f
    diag = (1 + u * u) * (1 + abs(f) ** 2) * L
    cross = 2 * (f * (1 - u * u) * _exp_integral(-2j * st.k, -L, 0.0)).real
    right = abs(st.g) ** 2 * (1 + st.w**2) * (-math.expm1(-2 * st.kappa * L)) / (2 * st.kappa)
    return diag + cross + right


def case1_matrix_elements(k: float, k_free: np.ndarray, cfg: FiniteLConfig, V0: float, m: float) -> np.ndarray:
    """``<n_{k''} | Psi_1(k)>`` for an array of free momenta, by exact piecewise integration."""
    cfg.grid_index(k)
    kf = np.asarray(k_free, dtype=float)
    st = case1_state(k, V0, m)
    L = cfg.L
    E = np.hypot(m, kf)
    uf = np.where(kf == 0, 0.0, kf / (m + E))
    # conj of the free spinor (-u'', 1); all components real
    a0, a1 = -uf, np.ones_like(uf)
    left = (a0 + a1 * st.u) * _exp_integral(1j * (st.k - kf), -L, 0.0) + st.f * (a0 - a1 * st.u) * _exp_integral(
        -1j * (st.k + kf), -L, 0.0
    )
    right = st.g * (a0 + a1 * 1j * st.w) * _exp_integral(-st.kappa - 1j * kf, 0.0, L)
    norm_free = np.sqrt(2 * L * (1 + uf * uf))
    return (left + right) / (norm_free * math.sqrt(_case1_norm2(st, L)))


def case1_band(V0: float, m: float) -> tuple[float, float]:
    """Energy window ``[max(V0, m), V0 + m]`` of the upper evanescent states."""
    return max(V0, m), V0 + m


def evanescent_overlap_scaling(cfg: FiniteLConfig, V0: float, m: float, E: float) -> float:
    """Finite-box ``N_1``: overlaps of all upper evanescent states up to energy ``E``.

    Sums ``|<n_{k''}|Psi_1(k)>|^2`` over on-grid ``k`` with energy in
    ``[max(V0, m), E]`` and all free momenta ``|n''| <= cfg.n_max``.  The
    result stays bounded as ``L`` grows, unlike the extensive contributions.
    """
    lo, hi = case1_band(V0, m)
    if not lo <= E <= hi:
        raise DomainError(f"E={E!r} outside the upper evanescent band [{lo!r}, {hi!r}]")
    k_lo = math.sqrt(max(lo * lo - m * m, 0.0))
    k_hi = math.sqrt(E * E - m * m)
    ks = [cfg.momentum(int(n)) for n in _grid_count(cfg, k_lo, k_hi)]
    ks = [k for k in ks if lo < math.hypot(m, k) < hi]
    n_free = np.arange(-cfg.n_max, cfg.n_max + 1)
    k_free = cfg.momentum(n_free)
    total = 0.0
    for k in ks:
        total += float(np.sum(np.abs(case1_matrix_elements(k, k_free, cfg, V0, m)) ** 2))
    return total


def case1_overlap_parts(k1: float, k2: float, cfg: FiniteLConfig, V0: float, m: float) -> tuple[complex, complex]:
    """Unnormalised ``<Psi_{k1} | Psi_{k2}>`` split into left- and right-interval pieces."""
    s1, s2 = case1_state(k1, V0, m), case1_state(k2, V0, m)
    L = cfg.L
    u1, u2 = s1.u, s2.u
    # left: conj[(1,u1)e^{ik1z} + f1 (1,-u1)e^{-ik1z}] . [(1,u2)e^{ik2z} + f2 (1,-u2)e^{-ik2z}]
    f1c = s1.f.conjugate()
    left = (
        (1 + u1 * u2) * _exp_integral(1j * (k2 - k1), -L, 0.0)
        + s2.f * (1 - u1 * u2) * _exp_integral(-1j * (k1 + k2), -L, 0.0)
        + f1c * (1 - u1 * u2) * _exp_integral(1j * (k1 + k2), -L, 0.0)
        + f1c * s2.f * (1 + u1 * u2) * _exp_integral(1j * (k1 - k2), -L, 0.0)
    )
    right = s1.g.conjugate() * s2.g * (1 + s1.w * s2.w) * _exp_integral(-(s1.kappa + s2.kappa), 0.0, L)
    return complex(left), complex(right)


def case1_orthogonality_decay(k1: float, k2: float, cfg: FiniteLConfig, V0: float, m: float) -> float:
    """``|<Psi_{k1}|Psi_{k2}>|`` for normalised upper evanescent states; decays like ``1/L``."""
    cfg.grid_index(k1)
    cfg.grid_index(k2)
    if k1 == k2:
        left, right = case1_overlap_parts(k1, k2, cfg, V0, m)
        st = case1_state(k1, V0, m)
        return abs(left + right) / _case1_norm2(st, cfg.L)
    if math.isclose(abs(k1), abs(k2), rel_tol=0, abs_tol=1e-15):
        raise DomainError("distinct states of equal energy are not covered; need E(k1) != E(k2)")
    left, right = case1_overlap_parts(k1, k2, cfg, V0, m)
    n1 = _case1_norm2(case1_state(k1, V0, m), cfg.L)
    n2 = _case1_norm2(case1_state(k2, V0, m), cfg.L)
    return abs(left + right) / math.sqrt(n1 * n2)


# --- exact diagonalisation ---------------------------------------------------


def box_diagonalization_overlap(V0: float, m: float, L: float, k_cut: float, threshold: float | None = None) -> float:
    """Brute-force ``N / L`` from diagonalising the step Hamiltonian in a plane-wave box.

    The periodic box is ``[-L, L)`` with the potential ``V0`` on ``(0, L)``
    and momenta ``k = pi n / L`` up to ``|k| <= k_cut``.  The potential's
    matrix elements are exact Fourier integrals.  Returns the weight of all
    free negative-energy states on eigenstates above ``threshold``, divided
    by ``L``.  The default threshold sits just above ``-m`` so that a state
    lying exactly on ``-m`` is not counted because of rounding.  Costs one dense ``eigh`` of size
    ``~4 k_cut L / pi``.
    """
    if not (L > 0 and k_cut > 0):
        raise DomainError("box length and momentum cutoff must be positive")
    thr = -m + 1e-9 * max(m, 1.0) if threshold is None else threshold
    n_max = int(math.ceil(k_cut * L / math.pi))
    n = np.arange(-n_max, n_max + 1)
    k = math.pi * n / L
    d = n[:, None] - n[None, :]
    # <k_a|V|k_b> = (1/2L) int_0^L V0 exp(i (k_b - k_a) z) dz
    with np.errstate(divide="ignore", invalid="ignore"):
        vm = V0 * (1 - (-1.0) ** np.abs(d)) / (2j * np.pi * np.where(d == 0, 1, d))
    vm = np.where(d == 0, V0 / 2, vm)
    size = len(n)
    H = np.zeros((2 * size, 2 * size), dtype=complex)
    eye = np.eye(size)
    H[0::2, 0::2] = vm + m * eye
    H[1::2, 1::2] = vm - m * eye
    H[0::2, 1::2] = np.diag(k)
    H[1::2, 0::2] = np.diag(k)
    energies, vecs = np.linalg.eigh(H)
    chi = np.stack([-k, np.hypot(m, k) + m], axis=1)
    chi /= np.linalg.norm(chi, axis=1)[:, None]
    amp = chi[:, 0, None] * vecs[0::2] + chi[:, 1, None] * vecs[1::2]
    weight = np.sum(np.abs(amp) ** 2, axis=0)
    return float(weight[energies > thr].sum() / L)
