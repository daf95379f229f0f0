import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_operator
from liouvspec.errors import SymmetryViolationError
from liouvspec.fock import FockSpace, annihilation, kerr_hamiltonian, number
from liouvspec.lindblad import (
    LindbladModel,
    VdpParams,
    adjoint_liouvillian,
    block_decompose,
    build_vdp,
    charge_superoperator,
    charges,
    liouvillian,
    unvec,
    vec,
)


def elementwise_rhs(model, x):
    """Lindblad right-hand side from explicit index sums, no matrix products."""
    d = model.dim
    h = model.hamiltonian
    out = np.zeros((d, d), dtype=complex)
    for i in range(d):
        for j in range(d):
            acc = 0.0
            for k in range(d):
                acc += -1j * (h[i, k] * x[k, j] - x[i, k] * h[k, j])
            for op, rate in model.jumps:
                for k in range(d):
                    for m in range(d):
                        acc += rate * op[i, k] * x[k, m] * np.conj(op[j, m])
                    ldl_ik = sum(np.conj(op[q, i]) * op[q, k] for q in range(d))
                    ldl_kj = sum(np.conj(op[q, k]) * op[q, j] for q in range(d))
                    acc -= 0.5 * rate * (ldl_ik * x[k, j] + x[i, k] * ldl_kj)
            out[i, j] = acc
    return out


def apply(superop, x):
    return unvec(superop @ vec(x), x.shape[0])


def test_vec_convention():
    rng = np.random.default_rng(0)
    a, x, b = (random_operator(rng, 4) for _ in range(3))
    np.testing.assert_allclose(vec(a @ x @ b), np.kron(b.T, a) @ vec(x), atol=1e-12)
    assert vec(np.array([[1, 2], [3, 4]])).tolist() == [1, 3, 2, 4]


def test_build_vdp_rates():
    model = build_vdp(VdpParams(u=3.0, r=6.0, gamma=1.0, n_max=5))
    (pump, pump_rate), (loss, loss_rate) = model.jumps
    assert pump_rate == 6.0 and loss_rate == 1.0
    a = annihilation(model.space)
    np.testing.assert_array_equal(pump, a.conj().T)
    np.testing.assert_array_equal(loss, a @ a)
    assert build_vdp(VdpParams(r=0.0, n_max=3)).jumps[0][1] == 0.0


def test_build_vdp_u_zero_hamiltonian():
    model = build_vdp(VdpParams(omega0=0.7, u=0.0, n_max=6))
    np.testing.assert_allclose(model.hamiltonian, 0.7 * number(model.space))


def test_rejects_bad_rates():
    with pytest.raises(ValueError):
        VdpParams(gamma=0.0)
    with pytest.raises(ValueError):
        VdpParams(gamma=-1.0)
    space = FockSpace(2)
    with pytest.raises(ValueError):
        LindbladModel(space, np.zeros((3, 3)), ((annihilation(space), -1.0),))


@pytest.mark.parametrize("u", [0.0, 2.5, 100.0])
def test_vacuum_only_pumps(u):
    params = VdpParams(u=u, r=0.8, gamma=1.3, n_max=6)
    model = build_vdp(params)
    space = model.space
    out = apply(liouvillian(model), space.projector(0, 0))
    expected = 0.8 * 1.3 * (space.projector(1, 1) - space.projector(0, 0))
    np.testing.assert_allclose(out, expected, atol=1e-12)


def test_matches_elementwise_oracle():
    rng = np.random.default_rng(4)
    model = build_vdp(VdpParams(omega0=0.4, u=2.0, r=1.7, gamma=0.9, n_max=4))
    x = random_operator(rng, model.dim, hermitian=True)
    np.testing.assert_allclose(apply(liouvillian(model), x), elementwise_rhs(model, x), atol=1e-12)


def test_adjoint_is_conjugate_transpose(rng):
    model = build_vdp(VdpParams(u=3.0, r=2.0, n_max=6))
    lmat = liouvillian(model)
    ladj = adjoint_liouvillian(model)
    np.testing.assert_allclose(ladj, lmat.conj().T, atol=1e-12)
    d = model.dim
    for _ in range(20):
        a, b = random_operator(rng, d), random_operator(rng, d)
        lhs = np.trace(a.conj().T @ apply(lmat, b))
        rhs = np.trace(apply(ladj, a).conj().T @ b)
        assert abs(lhs - rhs) < 1e-11 * max(1.0, abs(lhs))


def test_adjoint_annihilates_identity():
    model = build_vdp(VdpParams(u=5.0, r=6.0, n_max=15))
    ident = np.eye(model.dim)
    assert np.abs(apply(adjoint_liouvillian(model), ident)).max() < 1e-12


def test_closed_generator_is_antihermitian():
    space = FockSpace(6)
    model = LindbladModel(space, kerr_hamiltonian(space, 0.0, 1.5), ())
    np.testing.assert_allclose(adjoint_liouvillian(model), -liouvillian(model), atol=1e-14)


vdp_params = st.builds(
    VdpParams,
    omega0=st.floats(-2, 2),
    u=st.floats(0, 50),
    gamma=st.floats(0.1, 3),
    r=st.floats(0, 8),
    n_max=st.integers(1, 8),
)


@settings(max_examples=40, deadline=None)
@given(vdp_params, st.integers(0, 2**32 - 1))
def test_hermiticity_and_trace_preservation(params, seed):
    rng = np.random.default_rng(seed)
    model = build_vdp(params)
    lmat = liouvillian(model)
    x = random_operator(rng, model.dim, hermitian=True)
    y = apply(lmat, x)
    scale = max(1.0, np.abs(lmat).max() * np.abs(x).max())
    assert np.abs(y - y.conj().T).max() < 1e-12 * scale
    assert abs(np.trace(apply(lmat, random_operator(rng, model.dim)))) < 1e-12 * scale * model.dim


@settings(max_examples=25, deadline=None)
@given(vdp_params)
def test_commutes_with_charge(params):
    model = build_vdp(params)
    lmat = liouvillian(model)
    kmat = charge_superoperator(model.space)
    assert np.abs(lmat @ kmat - kmat @ lmat).max() < 1e-12 * max(1.0, np.abs(lmat).max())


def test_charge_superoperator_is_commutator():
    space = FockSpace(5)
    rng = np.random.default_rng(1)
    x = random_operator(rng, space.dim)
    n = number(space)
    np.testing.assert_allclose(apply(charge_superoperator(space), x), n @ x - x @ n, atol=1e-12)
    q = charges(space)
    assert q[3 + space.dim * 1] == 2


def test_block_sizes_and_reassembly():
    model = build_vdp(VdpParams(u=20.0, r=6.0, n_max=15))
    lmat = liouvillian(model)
    blocks = block_decompose(lmat, model.space)
    sizes = {blk.k: blk.indices.size for blk in blocks}
    assert sizes[1] == 15
    assert sum(sizes.values()) == 256
    assert all(sizes[k] == 16 - abs(k) for k in sizes)
    assembled = blocks.assemble()
    np.testing.assert_array_equal(assembled, lmat)
    q = blocks.charge_of_basis
    assert np.abs(lmat[q[:, None] != q[None, :]]).max() < 1e-12


def test_block_maps_charge_sector_into_itself():
    model = build_vdp(VdpParams(u=2.0, r=1.0, n_max=6))
    lmat = liouvillian(model)
    q = charges(model.space)
    for k in range(-6, 7):
        x = np.zeros(model.dim**2, dtype=complex)
        x[q == k] = 1.0 + 0.5j
        y = lmat @ x
        assert np.abs(y[q != k]).max(initial=0.0) == 0.0


def test_symmetry_violation_detected():
    space = FockSpace(4)
    a = annihilation(space)
    h = kerr_hamiltonian(space, 0.0, 1.0) + 0.3 * (a + a.conj().T)
    model = LindbladModel(space, h, ((a, 1.0),))
    with pytest.raises(SymmetryViolationError):
        block_decompose(liouvillian(model), space)
