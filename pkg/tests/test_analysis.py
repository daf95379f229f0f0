import csv

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from liouvspec.analysis import (
    PhaseDiagram,
    classical_steady_state,
    detect_inversion,
    detect_ndos,
    ndos_at,
    phase_diagram,
    rate_matrix,
    spectral_function_for,
    threshold_uc,
    write_phase_csv,
    write_threshold_csv,
)
from liouvspec.errors import DegenerateSteadyStateError, InversionUndefinedError
from liouvspec.fock import FockSpace, kerr_energies
from liouvspec.lindblad import VdpParams


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 30), st.floats(0.05, 10), st.floats(0.1, 5))
def test_oracle_is_a_distribution(n_max, r, gamma):
    p = classical_steady_state(n_max, r, gamma).p
    assert p.min() >= 0
    assert p.sum() == pytest.approx(1.0, abs=1e-12)
    assert np.abs(rate_matrix(n_max, r, gamma) @ p).max() < 1e-10 * max(1.0, r) * n_max**2


def test_rate_matrix_conserves_probability():
    w = rate_matrix(10, 2.0)
    np.testing.assert_allclose(w.sum(axis=0), 0.0, atol=1e-12)


def test_oracle_rejects_zero_pump():
    with pytest.raises(DegenerateSteadyStateError):
        classical_steady_state(10, 0.0)


def test_oracle_population_shapes():
    assert np.all(np.diff(classical_steady_state(15, 0.5).p) < 0)
    assert np.argmax(classical_steady_state(15, 6.0).p) > 0


def test_detect_inversion_examples():
    assert not detect_inversion(classical_steady_state(15, 0.5).p)
    assert detect_inversion(classical_steady_state(15, 6.0).p)
    assert not detect_inversion(classical_steady_state(15, 0.99).p)
    assert detect_inversion(classical_steady_state(15, 1.01).p)
    assert not detect_inversion(np.full(8, 1 / 8))


def test_inversion_undefined_for_degenerate_levels():
    space = FockSpace(5)
    p = classical_steady_state(5, 2.0).p
    with pytest.raises(InversionUndefinedError):
        detect_inversion(p, kerr_energies(space, 0.0, 0.0))
    assert detect_inversion(p, kerr_energies(space, 0.0, 3.0))


def test_detect_ndos_synthetic():
    omega = np.linspace(-5, 5, 1001)
    a = np.exp(-omega**2)
    a[(omega > 1) & (omega < 2)] = -0.1
    res = detect_ndos(a, omega)
    assert res and res.interval[0] > 1 and res.interval[1] < 2
    assert res.min_value == pytest.approx(-0.1)
    # negativity at omega < 0 is equilibrium-allowed
    b = np.exp(-omega**2)
    b[omega < -1] = -0.1
    assert not detect_ndos(b, omega)


def test_detect_ndos_grid_warnings():
    omega = np.linspace(0, 10, 11)
    with pytest.warns(UserWarning):
        detect_ndos(np.ones(11), omega, u=5.0, n_max=15)


@pytest.mark.parametrize(
    "r,u,expected",
    [(0.5, 0.0, False), (0.5, 3.0, False), (0.5, 10.0, False), (0.5, 100.0, False),
     (6.0, 20.0, True), (0.94, 15.0, True), (6.0, 0.0, False)],
)
def test_exact_ndos_examples(r, u, expected):
    assert ndos_at(VdpParams(u=u, r=r)) is expected


@pytest.mark.parametrize("r,u", [(6.0, 20.0), (0.94, 15.0), (0.5, 10.0), (2.0, 5.0)])
def test_ndos_flag_grid_independent(r, u):
    params = VdpParams(u=u, r=r)
    assert ndos_at(params, points=4001) == ndos_at(params, points=8001)


def test_lifetime_route_uses_oracle_populations():
    params = VdpParams(u=15.0, r=0.94)
    omega, a = spectral_function_for(params, "lifetime")
    assert not detect_ndos(a, omega)
    with pytest.raises(ValueError):
        spectral_function_for(params, "guess")


def test_threshold_exact_below_unity_lifetime_none():
    uc = threshold_uc(0.94, "exact")
    assert uc is not None and 3.5 < uc < 4.5
    assert threshold_uc(0.94, "lifetime") is None


@pytest.mark.parametrize("r", [1.5, 6.0])
def test_threshold_exact_below_lifetime(r):
    exact = threshold_uc(r, "exact")
    life = threshold_uc(r, "lifetime")
    assert exact is not None and life is not None
    assert exact <= life
    below = VdpParams(u=exact * 0.99, r=r)
    above = VdpParams(u=exact * 1.001, r=r)
    assert not ndos_at(below) and ndos_at(above)


def test_threshold_none_without_onset():
    assert threshold_uc(0.5, "exact") is None


def test_phase_diagram_small_grid_deterministic(tmp_path):
    r_grid = [0.5, 0.94, 6.0]
    u_grid = [0.5, 15.0, 100.0]
    serial = phase_diagram(r_grid, u_grid, workers=1, points=2001, thresholds=False)
    parallel = phase_diagram(r_grid, u_grid, workers=2, points=2001, thresholds=False)
    assert np.array_equal(serial.ndos_exact, parallel.ndos_exact)
    assert np.array_equal(serial.ndos_lifetime, parallel.ndos_lifetime)
    assert serial.errors == {}
    assert serial.inversion.tolist() == [False, False, True]
    assert serial.ndos_exact[1, 1] and not serial.ndos_lifetime[1, 1]
    assert not serial.ndos_exact[0].any()

    p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
    write_phase_csv(serial, p1)
    write_phase_csv(parallel, p2)
    assert p1.read_bytes() == p2.read_bytes()
    rows = list(csv.reader(open(p1)))
    assert rows[0] == ["r", "u_over_gamma", "inversion", "ndos_exact", "ndos_lifetime"]
    assert len(rows) == 1 + 9
    # inversion depends on r only
    by_r = {}
    for row in rows[1:]:
        by_r.setdefault(row[0], set()).add(row[2])
    assert all(len(v) == 1 for v in by_r.values())


def test_u_zero_column_has_no_ndos():
    diagram = phase_diagram([0.3, 1.0, 3.0, 8.0], [0.0], points=2001, thresholds=False)
    assert not diagram.ndos_exact.any()
    # the lifetime form is a degenerate-level approximation at U=0; with strong
    # inversion its mixed-sign Lorentzians, all centred at 0, dip below zero
    assert diagram.ndos_lifetime[:2].sum() == 0


def test_threshold_csv_blanks(tmp_path):
    diagram = PhaseDiagram(
        np.array([0.5, 6.0]), np.array([1.0]), np.array([False, True]),
        np.zeros((2, 1), bool), np.zeros((2, 1), bool), [None, 0.96], [None, 5.9], {},
    )
    path = tmp_path / "t.csv"
    write_threshold_csv(diagram, path)
    rows = list(csv.reader(open(path)))
    assert rows[0] == ["r", "u_c_exact", "u_c_lifetime"]
    assert rows[1][1:] == ["", ""]
    assert float(rows[2][1]) == 0.96
