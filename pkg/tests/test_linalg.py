import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from eacomm.linalg import (
    DensityState,
    InvariantError,
    KrausChannel,
    Povm,
    bloch_of,
    commutator,
    inv_sqrt_psd,
    is_psd,
    is_unitary,
    kron,
    maximally_entangled,
    observable_povm,
    partial_trace,
    phi_plus,
    povm_element_from_bloch,
    random_channel,
    random_mixed_state,
    random_povm,
    random_projective,
    random_pure_state,
    random_unitary,
)

seeds = st.integers(0, 2**32 - 1)
dims = st.integers(2, 4)


@settings(max_examples=40, deadline=None)
@given(seeds, dims, st.integers(2, 5))
def test_random_povm_is_complete_and_psd(seed, d, n):
    povm = random_povm(d, n, np.random.default_rng(seed))
    total = sum(povm.elements)
    assert np.allclose(total, np.eye(d), atol=1e-10)
    assert all(is_psd(e) for e in povm.elements)


@settings(max_examples=40, deadline=None)
@given(seeds, dims)
def test_random_projective_elements_are_orthogonal_projectors(seed, d):
    povm = random_projective(d, d, np.random.default_rng(seed))
    assert povm.is_projective()
    for i, a in enumerate(povm.elements):
        for b in povm.elements[i + 1:]:
            assert np.abs(a @ b).max() < 1e-10


@settings(max_examples=40, deadline=None)
@given(seeds, dims)
def test_random_states_are_density_matrices(seed, d):
    rng = np.random.default_rng(seed)
    for s in (random_pure_state(d, rng), random_mixed_state(d, rng)):
        assert abs(np.trace(s.matrix) - 1) < 1e-12
        assert is_psd(s.matrix)
        assert np.allclose(s.matrix, s.matrix.conj().T)


@settings(max_examples=30, deadline=None)
@given(seeds, dims)
def test_random_unitary_and_channel(seed, d):
    rng = np.random.default_rng(seed)
    assert is_unitary(random_unitary(d, rng))
    ch = random_channel(d, d, rng, n_kraus=3)
    tp = sum(k.conj().T @ k for k in ch.kraus_ops)
    assert np.allclose(tp, np.eye(d), atol=1e-10)


def test_maximally_entangled_marginals_are_mixed():
    for d in (2, 3):
        rho = maximally_entangled(d)
        for keep in ([0], [1]):
            red = partial_trace(rho, keep)
            red = red.matrix if isinstance(red, DensityState) else red
            assert np.allclose(red, np.eye(d) / d)
    assert np.allclose(phi_plus().matrix, maximally_entangled(2).matrix)


def test_partial_trace_of_product():
    rng = np.random.default_rng(1)
    a, b = random_mixed_state(2, rng).matrix, random_mixed_state(3, rng).matrix
    rho = DensityState(np.kron(a, b), (2, 3))
    ra = partial_trace(rho, [0])
    rb = partial_trace(rho, [1])
    ra = ra.matrix if isinstance(ra, DensityState) else ra
    rb = rb.matrix if isinstance(rb, DensityState) else rb
    assert np.allclose(ra, a) and np.allclose(rb, b)


def test_invalid_objects_raise():
    with pytest.raises(InvariantError):
        Povm((np.eye(2), np.eye(2)))
    with pytest.raises(InvariantError):
        Povm((np.diag([1.5, 0.0]), np.diag([-0.5, 1.0])))
    with pytest.raises(InvariantError):
        DensityState(np.diag([0.7, 0.7]))
    with pytest.raises(InvariantError):
        KrausChannel((np.eye(2), np.eye(2)))


def test_invariant_error_reports_violation():
    with pytest.raises(InvariantError) as info:
        Povm((np.diag([1.0, 0.0]), np.diag([0.0, 0.5])))
    assert info.value.violation == pytest.approx(0.5)


@settings(max_examples=50, deadline=None)
@given(st.floats(0.05, 2.0), st.floats(-1, 1), st.floats(-1, 1), st.floats(-1, 1))
def test_bloch_round_trip(w, a, b, c):
    v = np.array([a, b, c])
    v *= w / max(1.0, np.sqrt(3))  # keep |v| <= w
    e = povm_element_from_bloch(w, v)
    w2, v2 = bloch_of(e)
    assert w2 == pytest.approx(w, abs=1e-12)
    assert np.allclose(v2, v, atol=1e-12)


def test_bloch_element_rejects_non_psd():
    with pytest.raises(InvariantError):
        povm_element_from_bloch(0.5, [0.0, 0.0, 1.0])


def test_observable_povm_projects_onto_eigenspaces():
    povm = observable_povm([0, 0, 1])
    assert np.allclose(povm.elements[0], np.diag([1, 0]))
    assert np.allclose(povm.elements[1], np.diag([0, 1]))


@settings(max_examples=30, deadline=None)
@given(seeds, dims)
def test_inv_sqrt_psd(seed, d):
    rng = np.random.default_rng(seed)
    g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    s = g @ g.conj().T + 0.1 * np.eye(d)
    r = inv_sqrt_psd(s)
    assert np.allclose(r @ s @ r, np.eye(d), atol=1e-9)


def test_kron_and_commutator():
    x = np.array([[0, 1], [1, 0]])
    z = np.diag([1, -1])
    assert np.allclose(kron(x, z, x), np.kron(np.kron(x, z), x))
    assert np.allclose(commutator(x, z), x @ z - z @ x)
    assert np.abs(commutator(x, x)).max() == 0
