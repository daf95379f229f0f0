import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from liouvspec.fock import (
    FockSpace,
    annihilation,
    creation,
    is_hermitian,
    kerr_energies,
    kerr_hamiltonian,
    number,
)


def test_annihilation_two_level():
    a = annihilation(FockSpace(1))
    np.testing.assert_array_equal(a, [[0, 1], [0, 0]])


def test_annihilation_matrix_element():
    a = annihilation(FockSpace(2))
    assert a[1, 2] == pytest.approx(1.41421356, abs=1e-8)


@pytest.mark.parametrize("n_max", [1, 2, 7, 15])
def test_vacuum_is_annihilated(n_max):
    space = FockSpace(n_max)
    vac = np.zeros(space.dim)
    vac[0] = 1.0
    assert np.all(annihilation(space) @ vac == 0)


def test_number_diagonal():
    np.testing.assert_array_equal(np.diag(number(FockSpace(3))).real, [0, 1, 2, 3])


@given(st.integers(min_value=1, max_value=30))
def test_ladder_identities(n_max):
    space = FockSpace(n_max)
    a, ad = annihilation(space), creation(space)
    assert np.array_equal(ad, a.conj().T)
    np.testing.assert_allclose(ad @ a, number(space), atol=1e-12)
    comm = a @ ad - ad @ a
    np.testing.assert_allclose(np.diag(comm)[:-1], 1.0, atol=1e-12)
    assert comm[n_max, n_max] == pytest.approx(-n_max)
    np.testing.assert_allclose(comm - np.diag(np.diag(comm)), 0.0, atol=1e-12)


def test_kerr_energy_values():
    space = FockSpace(5)
    h = kerr_hamiltonian(space, 0.0, 2.0)
    assert h[3, 3].real == pytest.approx(9.0)
    assert kerr_hamiltonian(space, 0.0, 7.3)[0, 0] == 0


@given(
    st.floats(-5, 5, allow_nan=False),
    st.floats(-50, 50, allow_nan=False),
    st.integers(1, 20),
)
def test_kerr_level_spacing(omega0, u, n_max):
    e = kerr_energies(FockSpace(n_max), omega0, u)
    n = np.arange(n_max)
    np.testing.assert_allclose(np.diff(e), omega0 + u / 2 + u * n, rtol=1e-12, atol=1e-10)


def test_kerr_commutes_with_number():
    space = FockSpace(9)
    h = kerr_hamiltonian(space, 0.3, 4.0)
    n = number(space)
    assert np.array_equal(h @ n, n @ h)
    assert is_hermitian(h)


def test_space_validation():
    with pytest.raises(ValueError):
        FockSpace(0)
    assert FockSpace(15).dim == 16
    with pytest.raises(ValueError):
        FockSpace(3).check(np.eye(3))
