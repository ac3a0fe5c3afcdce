import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.spatial.transform import Rotation

from radpair.model import (
    GAMMA_E,
    HYPERFINE,
    LOCAL_FIELD,
    FieldVector,
    ModelError,
    ModelSpec,
    build_hyperfine_hamiltonian,
    build_local_field_hamiltonian,
    hyperfine_preset_spec,
    initial_state,
    local_field_preset_spec,
    preset,
    raw_hyperfine_hamiltonian,
)
from radpair.observables import negativity
from radpair.spin import SINGLET, embed, partial_trace, pauli

ZERO = np.zeros((3, 3))
EL = ("e1", "e2")


def test_gamma_constant():
    assert GAMMA_E == pytest.approx(17.588, rel=1e-3)


def test_presets():
    a1, a2 = preset("A_default")
    np.testing.assert_array_equal(a1, np.diag([10, 10, 0]))
    np.testing.assert_array_equal(a2, np.diag([5, 5, 5]))
    b1, b2 = preset("A_b")
    np.testing.assert_array_equal(b1, np.diag([10, 10, 4]))
    expected = 5 * np.eye(3)
    expected[0, 1] = 5
    np.testing.assert_array_equal(b2, expected)
    c1, c2 = preset("A_c")
    assert np.count_nonzero(c1) + np.count_nonzero(c2) == 2
    assert c1[2, 2] == 4 and c2[0, 1] == 5
    with pytest.raises(ModelError):
        preset("A_z")


def test_field_vector_geometry():
    np.testing.assert_allclose(FieldVector(0.5, 90, 0).cartesian(), [0.5, 0, 0], atol=1e-16)
    np.testing.assert_allclose(FieldVector(2, 90, 90).cartesian(), [0, 2, 0], atol=1e-15)
    np.testing.assert_allclose(FieldVector(1, 0, 0).cartesian(), [0, 0, 1])
    for bad in ({"B0": -1}, {"theta": 181}, {"phi": 360}):
        with pytest.raises(ModelError):
            FieldVector(**bad)


def test_model_spec_validation():
    with pytest.raises(ModelError):
        ModelSpec(gamma=-1)
    with pytest.raises(ModelError):
        ModelSpec(k_S=-0.1)
    with pytest.raises(ModelError):
        ModelSpec(kind="dipolar")
    spec = hyperfine_preset_spec("A_b")
    assert ModelSpec.from_dict(spec.to_dict()) == spec


def test_zero_hyperfine_hamiltonian():
    spec = ModelSpec(kind=HYPERFINE, external=FieldVector(0, 0, 0), tensors=(ZERO, ZERO))
    np.testing.assert_array_equal(build_hyperfine_hamiltonian(spec), np.zeros((16, 16)))


def test_pure_zeeman_spectrum():
    spec = ModelSpec(kind=HYPERFINE, external=FieldVector(0.5, 0, 0), tensors=(ZERO, ZERO))
    h = build_hyperfine_hamiltonian(spec)
    assert np.count_nonzero(h - np.diag(np.diag(h))) == 0
    w = np.sort(np.linalg.eigvalsh(h))
    g = spec.gamma * 0.5
    # S1z + S2z has eigenvalues +1, 0, 0, -1, each times 4 nuclear states
    np.testing.assert_allclose(w, np.repeat([-g, 0, 0, g], 4), atol=1e-12)


def test_default_preset_hamiltonian():
    spec = hyperfine_preset_spec("A_default", external=FieldVector(0.5, 68, 0))
    h = build_hyperfine_hamiltonian(spec)
    assert h.shape == (16, 16)
    assert np.max(np.abs(h - h.conj().T)) <= 1e-12
    assert abs(np.trace(h)) <= 1e-12


@pytest.mark.parametrize("name", ["A_default", "A_b", "A_c"])
def test_raw_hamiltonian_is_hermitian(name):
    spec = hyperfine_preset_spec(name, external=FieldVector(0.5, 40, 30))
    raw = raw_hyperfine_hamiltonian(spec)
    assert np.max(np.abs(raw - raw.conj().T)) <= 1e-12
    _, defect = build_hyperfine_hamiltonian(spec, return_defect=True)
    assert defect <= 1e-12


def test_local_field_hamiltonian():
    spec = ModelSpec(kind=LOCAL_FIELD, external=FieldVector(0, 0, 0),
                     local_fields=((0, 0, 4), (0, 5, 0)))
    expected = spec.gamma * (4 * embed(pauli("z") / 2, 0, EL) + 5 * embed(pauli("y") / 2, 1, EL))
    np.testing.assert_allclose(build_local_field_hamiltonian(spec), expected, atol=1e-13)

    zero = ModelSpec(kind=LOCAL_FIELD, external=FieldVector(0, 0, 0), local_fields=((0, 0, 0),) * 2)
    np.testing.assert_array_equal(build_local_field_hamiltonian(zero), np.zeros((4, 4)))

    xfield = ModelSpec(kind=LOCAL_FIELD, external=FieldVector(0.5, 90, 0), local_fields=((0, 0, 0),) * 2)
    sx = embed(pauli("x") / 2, 0, EL) + embed(pauli("x") / 2, 1, EL)
    np.testing.assert_allclose(build_local_field_hamiltonian(xfield), spec.gamma * 0.5 * sx, atol=1e-13)


def test_wrong_kind_rejected():
    with pytest.raises(ModelError):
        build_hyperfine_hamiltonian(local_field_preset_spec())
    with pytest.raises(ModelError):
        build_local_field_hamiltonian(hyperfine_preset_spec())


def test_initial_states():
    rho = initial_state(HYPERFINE)
    assert rho.trace() == pytest.approx(1)
    reduced = partial_trace(rho, EL)
    np.testing.assert_allclose(reduced.op, np.outer(SINGLET, SINGLET), atol=1e-15)
    assert negativity(reduced) == pytest.approx(0.5, abs=1e-12)
    np.testing.assert_allclose(initial_state(LOCAL_FIELD).op, np.outer(SINGLET, SINGLET))


def _rotated_spectra(rot, spec_kind, b0, theta, phi, a1, a2, b1, b2):
    ext = FieldVector(b0, theta, phi)
    bvec = rot.apply(ext.cartesian())
    r = rot.as_matrix()
    b0r = np.linalg.norm(bvec)
    th = np.degrees(np.arccos(np.clip(bvec[2] / b0r, -1, 1)))
    ph = np.degrees(np.arctan2(bvec[1], bvec[0])) % 360
    if spec_kind == HYPERFINE:
        s0 = ModelSpec(kind=HYPERFINE, external=ext, tensors=(a1, a2))
        s1 = ModelSpec(kind=HYPERFINE, external=FieldVector(b0r, th, ph % 360),
                       tensors=(r @ a1 @ r.T, r @ a2 @ r.T))
        h0, h1 = build_hyperfine_hamiltonian(s0), build_hyperfine_hamiltonian(s1)
    else:
        s0 = ModelSpec(kind=LOCAL_FIELD, external=ext, local_fields=(b1, b2))
        s1 = ModelSpec(kind=LOCAL_FIELD, external=FieldVector(b0r, th, ph % 360),
                       local_fields=(r @ np.asarray(b1), r @ np.asarray(b2)))
        h0, h1 = build_local_field_hamiltonian(s0), build_local_field_hamiltonian(s1)
    return np.linalg.eigvalsh(h0), np.linalg.eigvalsh(h1)


@settings(max_examples=25, deadline=None)
@given(
    seed=st.integers(0, 2**31 - 1),
    kind=st.sampled_from([HYPERFINE, LOCAL_FIELD]),
    theta=st.floats(0, 180),
    phi=st.floats(0, 359.9),
)
def test_rotation_leaves_spectrum_unchanged(seed, kind, theta, phi):
    rng = np.random.default_rng(seed)
    rot = Rotation.random(random_state=seed)
    a1, a2 = rng.normal(scale=5, size=(2, 3, 3))
    b1, b2 = rng.normal(scale=4, size=(2, 3))
    w0, w1 = _rotated_spectra(rot, kind, 0.5, theta, phi, a1, a2, b1, b2)
    np.testing.assert_allclose(w0, w1, atol=1e-9)
