import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from radpair.spin import (
    HYPERFINE_LAYOUT,
    SINGLET,
    DensityMatrix,
    LayoutError,
    embed,
    partial_trace,
    partial_transpose,
    pauli,
    singlet_triplet_projectors,
    trace_norm,
)

from conftest import random_density, random_unitary


def test_pauli_definitions():
    np.testing.assert_array_equal(pauli("z"), np.diag([1, -1]))
    np.testing.assert_array_equal(pauli("x") @ pauli("x"), np.eye(2))
    comm = pauli("x") @ pauli("y") - pauli("y") @ pauli("x")
    np.testing.assert_array_equal(comm, 2j * pauli("z"))
    with pytest.raises(ValueError):
        pauli("w")


def test_embed():
    layout = ("e1", "e2")
    np.testing.assert_array_equal(embed(pauli("z"), 0, layout), np.kron(pauli("z"), np.eye(2)))
    for site in range(4):
        np.testing.assert_array_equal(embed(np.eye(2), site, HYPERFINE_LAYOUT), np.eye(16))
    assert np.trace(embed(pauli("x"), 2, HYPERFINE_LAYOUT)) == 0
    with pytest.raises(LayoutError):
        embed(pauli("x"), 4, HYPERFINE_LAYOUT)


def test_projectors():
    q_s, q_t = singlet_triplet_projectors(HYPERFINE_LAYOUT)
    assert np.max(np.abs(q_s @ q_s - q_s)) <= 1e-14
    assert np.max(np.abs(q_s + q_t - np.eye(16))) <= 1e-14
    assert np.max(np.abs(q_s @ q_t)) <= 1e-14
    assert np.trace(q_s).real == pytest.approx(4)
    for q in (q_s, q_t):
        assert np.max(np.abs(q - q.conj().T)) <= 1e-14


def test_rank1_triplet_variant_is_not_a_projector():
    _, q = singlet_triplet_projectors(("e1", "e2"), triplet="rank1")
    assert np.trace(q).real == pytest.approx(3)
    assert np.linalg.matrix_rank(q) == 1
    assert not np.allclose(q @ q, q)


def _partial_trace_oracle(op, n, keep):
    # explicit index sum over traced factors
    d = 2 ** len(keep)
    out = np.zeros((d, d), dtype=complex)
    traced = [i for i in range(n) if i not in keep]
    for ket in itertools.product((0, 1), repeat=n):
        for bra in itertools.product((0, 1), repeat=n):
            if any(ket[i] != bra[i] for i in traced):
                continue
            r = int("".join(str(ket[i]) for i in keep), 2)
            c = int("".join(str(bra[i]) for i in keep), 2)
            out[r, c] += op[int("".join(map(str, ket)), 2), int("".join(map(str, bra)), 2)]
    return out


@pytest.mark.parametrize("keep", [("e1",), ("e2",), ("e1", "e2"), ("e2", "n2"), ("n1",)])
def test_partial_trace_matches_index_sum(rng, keep):
    rho = DensityMatrix(random_density(16, rng), HYPERFINE_LAYOUT)
    idx = [HYPERFINE_LAYOUT.index(s) for s in keep]
    got = partial_trace(rho, keep)
    np.testing.assert_allclose(got.op, _partial_trace_oracle(rho.op, 4, idx), atol=1e-13)
    assert got.trace() == pytest.approx(rho.trace(), abs=1e-13)


def test_partial_trace_product_left_inverse(rng):
    for _ in range(100):
        a, b = random_density(4, rng), random_density(4, rng)
        rho = DensityMatrix(np.kron(a, b), HYPERFINE_LAYOUT)
        assert np.max(np.abs(partial_trace(rho, ("e1", "e2")).op - a)) <= 1e-12
        assert np.max(np.abs(partial_trace(rho, ("n1", "n2")).op - b)) <= 1e-12


def test_partial_trace_of_initial_singlet():
    q_s, _ = singlet_triplet_projectors(HYPERFINE_LAYOUT)
    reduced = partial_trace(DensityMatrix(q_s / 4, HYPERFINE_LAYOUT), ("e1", "e2"))
    np.testing.assert_allclose(reduced.op, np.outer(SINGLET, SINGLET), atol=1e-15)


def test_partial_trace_errors(rng):
    rho = DensityMatrix(random_density(4, rng), ("e1", "e2"))
    with pytest.raises(LayoutError):
        partial_trace(rho, ())


def _pt_oracle(op, which):
    out = np.zeros((4, 4), dtype=complex)
    for a, b, c, d in itertools.product((0, 1), repeat=4):
        if which == "first":
            out[2 * c + b, 2 * a + d] = op[2 * a + b, 2 * c + d]
        else:
            out[2 * a + d, 2 * c + b] = op[2 * a + b, 2 * c + d]
    return out


@pytest.mark.parametrize("which", ["first", "second"])
def test_partial_transpose_against_index_oracle(rng, which):
    rho = random_density(4, rng)
    pt = partial_transpose(rho, which)
    np.testing.assert_allclose(pt, _pt_oracle(rho, which), atol=0)
    np.testing.assert_allclose(pt, pt.conj().T, atol=1e-15)
    assert np.trace(pt) == pytest.approx(np.trace(rho))
    np.testing.assert_allclose(partial_transpose(pt, which), rho, atol=0)


def test_partial_transpose_known_values():
    np.testing.assert_allclose(partial_transpose(np.eye(4) / 4), np.eye(4) / 4)
    singlet = np.outer(SINGLET, SINGLET)
    # spectrum from diagonalising the 4x4 by hand
    np.testing.assert_allclose(np.linalg.eigvalsh(partial_transpose(singlet)), [-0.5, 0.5, 0.5, 0.5], atol=1e-15)
    with pytest.raises(ValueError):
        partial_transpose(np.eye(2))


def test_trace_norm_values(rng):
    assert trace_norm(np.eye(4)) == pytest.approx(4)
    assert trace_norm(partial_transpose(np.outer(SINGLET, SINGLET))) == pytest.approx(2)
    for dim in (2, 4, 16):
        assert trace_norm(random_density(dim, rng)) == pytest.approx(1, abs=1e-12)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**31 - 1), dim=st.sampled_from([2, 4, 16]))
def test_trace_norm_unitary_invariance(seed, dim):
    rng = np.random.default_rng(seed)
    m = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    u, v = random_unitary(dim, seed), random_unitary(dim, seed + 1)
    assert abs(trace_norm(u @ m @ v) - trace_norm(m)) <= 1e-10 * max(1.0, trace_norm(m))


def test_density_matrix_layout_check():
    with pytest.raises(LayoutError):
        DensityMatrix(np.eye(4), HYPERFINE_LAYOUT)
