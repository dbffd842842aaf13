import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from relcommit.states import (
    StateFamily,
    bb84_family,
    bloch_family,
    cross_mixture,
    diagonalize_mixture,
    lambda1_of,
    lambda_table,
)

angles = st.floats(0, 2 * math.pi, allow_nan=False)


def unit(theta, phi):
    return np.array([math.cos(theta / 2), np.exp(1j * phi) * math.sin(theta / 2)])


def test_bb84_threshold():
    fam = bb84_family()
    assert fam.overlap_t == pytest.approx(1 / math.sqrt(2), abs=1e-15)
    assert lambda1_of(fam) == pytest.approx(0.5 * (1 - 1 / math.sqrt(2)), abs=1e-15)


def test_bloch_family_reduces_to_bb84():
    # equal up to a global phase per state
    got, want = bloch_family(0, math.pi / 2), bb84_family()
    for theta in (0, 1):
        for x in (0, 1):
            assert abs(np.vdot(got.state(x, theta), want.state(x, theta))) == pytest.approx(1)


def test_identical_bases_have_no_threshold():
    assert lambda1_of(bloch_family(0.3, 0.3)) == pytest.approx(0, abs=1e-12)


def test_family_rejects_non_orthogonal_basis():
    s = np.array(bb84_family().states)
    s[1, 1] = s[1, 0]
    with pytest.raises(ValueError, match="orthogonal"):
        StateFamily(s)


def test_family_rejects_unnormalised():
    s = np.array(bb84_family().states) * 1.01
    with pytest.raises(ValueError, match="normalised"):
        StateFamily(s)


def test_family_is_read_only():
    with pytest.raises(ValueError):
        bb84_family().states[0, 0, 0] = 2


@given(angles, angles)
def test_bloch_families_resolve_identity(a0, a1):
    assert bloch_family(a0, a1).resolution_residual() < 1e-12


def test_diagonalize_identical_states():
    spectrum = diagonalize_mixture([1, 0], [1, 0])
    assert (spectrum.lambda_plus, spectrum.lambda_minus) == (1.0, 0.0)
    assert abs(np.vdot(spectrum.e_plus, spectrum.e_minus)) < 1e-12


def test_diagonalize_orthogonal_states():
    spectrum = diagonalize_mixture([1, 0], [0, 1])
    assert spectrum.lambda_plus == spectrum.lambda_minus == 0.5


def test_diagonalize_rejects_unnormalised():
    with pytest.raises(ValueError):
        diagonalize_mixture([1, 1], [1, 0])


@given(angles, angles, angles, angles)
def test_closed_form_eigenpairs_match_dense_solver(t0, p0, t1, p1):
    psi0, psi1 = unit(t0, p0), unit(t1, p1)
    rho = 0.5 * (np.outer(psi0, psi0.conj()) + np.outer(psi1, psi1.conj()))
    spectrum = diagonalize_mixture(psi0, psi1)
    for lam, vec in ((spectrum.lambda_plus, spectrum.e_plus), (spectrum.lambda_minus, spectrum.e_minus)):
        assert np.linalg.norm(vec) == pytest.approx(1, abs=1e-9)
        assert np.allclose(rho @ vec, lam * vec, atol=1e-9)
    assert np.allclose(sorted(np.linalg.eigvalsh(rho)), [spectrum.lambda_minus, spectrum.lambda_plus], atol=1e-12)


def test_lambda_table_columns_are_spectra():
    table = lambda_table(bb84_family())
    assert table.sum(axis=0) == pytest.approx([1, 1])
    lam1 = lambda1_of(bb84_family())
    assert sorted(table[:, 0]) == pytest.approx([lam1, 1 - lam1])


def test_cross_mixture_has_unit_trace():
    fam = bb84_family()
    for b in (0, 1):
        for c in (0, 1):
            assert np.trace(cross_mixture(fam, b, c)).real == pytest.approx(1)
