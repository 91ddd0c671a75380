"""Zero-mass Dirac particles and the one-dimensional graphene band contrast.

With ``m = 0`` the Hamiltonian is ``sigma_x p + V`` and its eigenspinors do
not depend on ``k`` at all.  This is a separate code path: the massive
formulas degenerate (no gap, ``u = 1`` identically) and are not reused.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .step import ScatteringResult


class Branch(enum.Enum):
    PLUS = 1
    MINUS = -1


@dataclass(frozen=True)
class MasslessState:
    """Plane wave ``spinor * exp(i k z)`` with energy ``V + k`` (PLUS) or ``V - k`` (MINUS)."""

    branch: Branch
    k: float
    V: float = 0.0

    @property
    def energy(self) -> float:
        return self.V + self.branch.value * self.k

    @property
    def spinor(self) -> np.ndarray:
        s = 1 / math.sqrt(2)
        return np.array([s, self.branch.value * s], dtype=complex)

    def hamiltonian(self) -> np.ndarray:
        return np.array([[self.V, self.k], [self.k, self.V]], dtype=complex)


def massless_current(s: MasslessState) -> float:
    """``psi^dagger sigma_x psi``: exactly +1 or -1, whatever the momentum."""
    # unnormalised (1, +-1) keeps the ratio exact
    a, b = 1.0, float(s.branch.value)
    return 2 * a * b / (a * a + b * b)


def massless_step_scatter(E: float, V0: float) -> ScatteringResult:
    """A massless particle crosses any step without reflection.

    Continuity of the ``(1, 1)`` spinor gives ``1 + f = g`` and ``1 - f = g``,
    hence ``f = 0`` and ``g = 1``.  The momenta are ``k = E`` and ``k' = E - V0``.
    """
    return ScatteringResult(0j, 1 + 0j, 0.0, 1.0, None, float(E), float(E - V0))


class Model(enum.Enum):
    MASSLESS_DIRAC = "massless-dirac"
    GRAPHENE_BAND = "graphene-band"


@dataclass(frozen=True)
class BandComparisonRow:
    """One (energy sign, current sign) combination that a model allows.

    ``current_sign`` is ``+1``, ``-1``, or ``0`` when both signs occur.
    """

    model: Model
    energy_sign: int
    current_sign: int
    momentum_sign: int


def band_comparison(v: float = 1.0) -> list[BandComparisonRow]:
    """Sign structure of energy and current in the two pictures.

    Graphene near a Dirac point has ``eps = +-v|k|`` and group velocity
    ``+-v sign(k)``, so each energy sign carries both current signs.  The
    massless Dirac rows use ``k > 0`` on a zero potential, where the current
    sign follows the energy sign.
    """
    rows: list[BandComparisonRow] = []
    for branch in Branch:
        st = MasslessState(branch, 1.0)
        energy_sign = int(math.copysign(1, st.energy))
        rows.append(BandComparisonRow(Model.MASSLESS_DIRAC, energy_sign, round(massless_current(st)), 1))
    for e_sign in (1, -1):
        for k_sign in (1, -1):
            velocity = e_sign * v * k_sign
            rows.append(BandComparisonRow(Model.GRAPHENE_BAND, e_sign, int(math.copysign(1, velocity)), k_sign))
    return rows
