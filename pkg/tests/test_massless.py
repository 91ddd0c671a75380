import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from diracstep.core import current_of_u, u_of_k
from diracstep.massless import (
    Branch,
    MasslessState,
    Model,
    band_comparison,
    massless_current,
    massless_step_scatter,
)
from diracstep.step import step_scatter


@pytest.mark.parametrize("branch, k, J", [(Branch.PLUS, 5.0, 1.0), (Branch.MINUS, 5.0, -1.0), (Branch.PLUS, 0.0, 1.0)])
def test_current(branch, k, J):
    assert massless_current(MasslessState(branch, k)) == J


@given(st.sampled_from(list(Branch)), st.floats(-100, 100), st.floats(-100, 100))
def test_states_are_eigenstates(branch, k, V):
    s = MasslessState(branch, k, V)
    assert s.energy - V == pytest.approx(branch.value * k, abs=4e-16 * max(abs(k), abs(V)))
    H = s.hamiltonian()
    assert np.allclose(H @ s.spinor, s.energy * s.spinor, atol=1e-12 * max(1, abs(k), abs(V)))
    assert massless_current(s) == branch.value


@given(st.floats(-1e3, 1e3), st.floats(-1e3, 1e3))
def test_step_is_transparent(E, V0):
    res = massless_step_scatter(E, V0)
    assert res.f == 0 and res.g == 1 and res.R == 0 and res.T == 1
    assert res.k_left - res.k_right == pytest.approx(V0)


def test_continuity_solve_gives_no_reflection():
    f, g = np.linalg.solve(np.array([[1.0, -1.0], [-1.0, -1.0]]), np.array([-1.0, -1.0]))
    assert (f, g) == (0.0, 1.0)


def test_zero_step_keeps_momentum():
    res = massless_step_scatter(2.5, 0.0)
    assert res.k_left == res.k_right


@pytest.mark.parametrize("E, V0", [(1.0, 0.5), (1.0, 3.0), (5.0, 2.0)])
def test_massive_solver_converges(E, V0):
    assert step_scatter(E, V0, 1e-9).R < 1e-6


def test_massless_limit_of_spinor_ratio():
    assert u_of_k(1.0, 1e-12) == pytest.approx(1.0, abs=1e-11)
    assert current_of_u(u_of_k(1.0, 1e-12)) == pytest.approx(1.0, abs=1e-12)


def test_band_comparison_table():
    rows = band_comparison()
    dirac = [r for r in rows if r.model is Model.MASSLESS_DIRAC]
    graphene = [r for r in rows if r.model is Model.GRAPHENE_BAND]
    assert len(dirac) == 2 and len(graphene) == 4
    assert {(r.energy_sign, r.current_sign) for r in dirac} == {(1, 1), (-1, -1)}
    for e in (1, -1):
        assert {r.current_sign for r in graphene if r.energy_sign == e} == {1, -1}
