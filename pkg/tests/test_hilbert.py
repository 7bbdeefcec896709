from __future__ import annotations

import math

import numpy as np
import pytest

from hdql import hilbert as hb
from hdql.hilbert import Subspace

from oracles import frob, gram_schmidt, meet_projector, projector_of, sum_projector

S2 = 1 / math.sqrt(2)
K0, K1 = hb.ket("0"), hb.ket("1")


def sp(*vs):
    return hb.span([np.asarray(v, dtype=complex) for v in vs])


def test_ket_is_big_endian():
    assert np.array_equal(hb.ket("10"), np.array([0, 0, 1, 0]))
    assert hb.ket("011").size == 8 and hb.ket("011")[3] == 1
    with pytest.raises(ValueError):
        hb.ket("012")


def test_vector_equality_is_not_up_to_phase():
    assert hb.vectors_equal(K0, K0 + 1e-12)
    assert not hb.vectors_equal(K0, -K0)
    assert not hb.vectors_equal(K0, 1j * K0)


class TestSpan:
    def test_empty_span_is_zero(self):
        s = hb.span([], 2)
        assert s.rank == 0 and s.is_zero()
        with pytest.raises(ValueError):
            hb.span([])

    def test_collinear_inputs(self):
        s = sp(K0, 2 * K0)
        assert s.rank == 1
        assert frob(s.projector, np.diag([1, 0])) <= 1e-12

    def test_bell_projector(self):
        bell = hb.ket("00") + hb.ket("11")
        expected = projector_of([bell], 4)  # Gram-Schmidt oracle
        frozen = 0.5 * np.array([[1, 0, 0, 1], [0, 0, 0, 0], [0, 0, 0, 0], [1, 0, 0, 1]])
        assert frob(expected, frozen) <= 1e-12
        assert frob(sp(bell).projector, frozen) <= 1e-12

    def test_dimension_mismatch(self):
        with pytest.raises(hb.DimensionError):
            hb.span([K0, hb.ket("00")])

    def test_rank_bounded(self):
        rng = np.random.default_rng(1)
        vs = [hb.random_unit_vector(rng, 3) for _ in range(7)]
        assert sp(*vs).rank == 3


class TestOrthocomplement:
    def test_basis_complement(self):
        assert hb.subspaces_equal(hb.orthocomplement(sp(K0)), sp(K1))

    def test_zero_and_full(self):
        assert hb.orthocomplement(Subspace.zero(3)).is_full()
        assert hb.orthocomplement(Subspace.full(3)).is_zero()

    def test_involution_random(self):
        rng = np.random.default_rng(2)
        for _ in range(200):
            n = int(rng.integers(1, 6))
            s = hb.random_subspace(rng, n)
            back = hb.orthocomplement(hb.orthocomplement(s))
            assert frob(back.projector, s.projector) <= 1e-8
            assert hb.orthocomplement(s).rank == n - s.rank


class TestMeet:
    def test_orthogonal_lines(self):
        assert hb.meet(sp(K0), sp(K1)).is_zero()

    def test_full_is_identity(self):
        rng = np.random.default_rng(3)
        s = hb.random_subspace(rng, 4, 2)
        assert hb.subspaces_equal(hb.meet(s, Subspace.full(4)), s)
        assert hb.subspaces_equal(hb.meet(Subspace.full(4), s), s)

    def test_whole_plane_with_line(self):
        plane = sp(K0 + K1, K0 - K1)
        oracle = meet_projector(plane.projector, sp(K0).projector)
        assert frob(oracle, np.diag([1, 0])) <= 1e-9
        assert frob(hb.meet(plane, sp(K0)).projector, oracle) <= 1e-9

    def test_random_against_null_space_oracle(self):
        rng = np.random.default_rng(4)
        for _ in range(100):
            n = int(rng.integers(2, 6))
            s, t = hb.random_subspace(rng, n), hb.random_subspace(rng, n)
            # force some overlap now and then
            if rng.random() < 0.5 and s.rank and t.rank:
                shared = s.basis[:, 0]
                t = hb.span(list(t.vectors()) + [shared])
            m = hb.meet(s, t)
            assert frob(m.projector, meet_projector(s.projector, t.projector)) <= 1e-8
            assert m.rank <= min(s.rank, t.rank)

    def test_dimension_mismatch(self):
        with pytest.raises(hb.DimensionError):
            hb.meet(sp(K0), Subspace.full(4))


class TestDirectSum:
    def test_two_basis_lines(self):
        s = hb.direct_sum(sp(hb.ket("00")), sp(hb.ket("11")))
        assert s.rank == 2
        assert hb.subspaces_equal(s, sp(hb.ket("00"), hb.ket("11")))

    def test_complement_fills_space(self):
        rng = np.random.default_rng(5)
        for _ in range(50):
            s = hb.random_subspace(rng, 5)
            assert hb.direct_sum(s, hb.orthocomplement(s)).is_full()

    def test_zero_is_unit(self):
        rng = np.random.default_rng(6)
        t = hb.random_subspace(rng, 4, 2)
        assert hb.subspaces_equal(hb.direct_sum(Subspace.zero(4), t), t)

    def test_equals_span_of_bases(self):
        rng = np.random.default_rng(7)
        for _ in range(100):
            n = int(rng.integers(2, 7))
            s, t = hb.random_subspace(rng, n), hb.random_subspace(rng, n)
            d = hb.direct_sum(s, t)
            assert frob(d.projector, sum_projector(s.basis, t.basis)) <= 1e-8
            assert d.rank <= s.rank + t.rank


class TestSasaki:
    def test_orthogonal(self):
        assert hb.subspaces_equal(hb.sasaki_hook(sp(K0), sp(K1)), sp(K1))

    def test_full_target(self):
        rng = np.random.default_rng(8)
        s = hb.random_subspace(rng, 3, 1)
        assert hb.sasaki_hook(s, Subspace.full(3)).is_full()

    def test_equals_preimage(self):
        rng = np.random.default_rng(9)
        for _ in range(100):
            n = int(rng.integers(2, 6))
            s, t = hb.random_subspace(rng, n), hb.random_subspace(rng, n)
            assert hb.subspaces_equal(hb.sasaki_hook(s, t), hb.preimage_of_projection(s, t), 1e-8)


class TestProjection:
    def test_project_line(self):
        w = (K0 + K1) * S2
        assert hb.vectors_equal(hb.project(sp(K0), w), K0 * S2)

    def test_full_is_identity(self):
        w = np.array([1, 2j, -3], dtype=complex)
        assert hb.vectors_equal(hb.project(Subspace.full(3), w), w)

    def test_decomposition(self):
        rng = np.random.default_rng(10)
        for _ in range(100):
            n = int(rng.integers(1, 6))
            s = hb.random_subspace(rng, n)
            w = hb.random_unit_vector(rng, n)
            w1, w2 = hb.project(s, w), hb.project(hb.orthocomplement(s), w)
            assert hb.vectors_equal(w1 + w2, w, 1e-10)
            assert hb.contains(s, w1, 1e-9) and hb.contains(hb.orthocomplement(s), w2, 1e-9)

    def test_image_of_line(self):
        img = hb.image_of_projection(sp(K0), sp(K0 + K1))
        assert hb.subspaces_equal(img, sp(K0))
        assert hb.image_of_projection(sp(K0), Subspace.zero(2)).is_zero()

    def test_image_against_projected_basis(self):
        rng = np.random.default_rng(11)
        for _ in range(100):
            n = int(rng.integers(2, 6))
            s, t = hb.random_subspace(rng, n), hb.random_subspace(rng, n)
            oracle = projector_of([s.projector @ b for b in t.vectors()], n)
            assert frob(hb.image_of_projection(s, t).projector, oracle) <= 1e-8

    def test_preimage_examples(self):
        assert hb.preimage_of_projection(sp(K0), sp(K0)).is_full()
        assert hb.subspaces_equal(hb.preimage_of_projection(sp(K0), Subspace.zero(2)), sp(K1))

    def test_preimage_membership_pointwise(self):
        rng = np.random.default_rng(12)
        agree = 0
        for k in range(500):
            n = int(rng.integers(2, 5))
            s, t = hb.random_subspace(rng, n), hb.random_subspace(rng, n)
            pre = hb.preimage_of_projection(s, t)
            if k % 2:
                w = hb.random_unit_vector(rng, n)
            else:
                # draw from the preimage itself so that "inside" is exercised too
                c = rng.normal(size=pre.rank) + 1j * rng.normal(size=pre.rank)
                w = pre.basis @ c if pre.rank else np.zeros(n, dtype=complex)
            ps = s.basis @ (s.basis.conj().T @ w)
            inside = np.linalg.norm(t.projector @ ps - ps) <= 1e-8 * max(1, np.linalg.norm(ps))
            assert hb.contains(pre, w, 1e-8) == inside
            agree += 1
        assert agree == 500


class TestContains:
    def test_origin_everywhere(self):
        rng = np.random.default_rng(13)
        for _ in range(20):
            s = hb.random_subspace(rng, 4)
            assert hb.contains(s, hb.zero_vector(4))

    def test_examples(self):
        bell = hb.ket("00") + hb.ket("11")
        assert not hb.contains(sp(K0), K1)
        assert hb.contains(sp(bell), 3 * bell)


class TestUnitary:
    def test_examples(self):
        h = np.array([[1, 1], [1, -1]]) * S2
        cnot = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]])
        assert hb.is_unitary(h.astype(complex))
        assert hb.is_unitary(cnot.astype(complex))
        assert not hb.is_unitary(np.diag([1, 0]).astype(complex))

    def test_apply_unitary_maps_basis(self):
        rng = np.random.default_rng(14)
        u = hb.random_unitary(rng, 4)
        s = hb.random_subspace(rng, 4, 2)
        image = hb.apply_unitary(u, s)
        assert frob(image.projector, u @ s.projector @ u.conj().T) <= 1e-9


class TestMeasure:
    def test_half_probability(self):
        w = (K0 + K1) * S2
        assert hb.probability(sp(K0), w) == pytest.approx(0.5, abs=1e-12)
        assert hb.vectors_equal(hb.measure(sp(K0), w), K0)

    def test_orthogonal_is_undefined(self):
        assert hb.measure(sp(K0), K1) is None

    def test_unit_norm_and_membership(self):
        rng = np.random.default_rng(15)
        for _ in range(100):
            n = int(rng.integers(1, 6))
            x = hb.random_subspace(rng, n)
            w = 3.0 * hb.random_unit_vector(rng, n)
            out = hb.measure(x, w)
            if out is None:
                assert x.rank == 0
                continue
            assert abs(np.linalg.norm(out) - 1) <= 1e-9
            assert hb.contains(x, out, 1e-9)

    def test_teleport_branch_00(self):
        rng = np.random.default_rng(16)
        h = np.array([[1, 1], [1, -1]], dtype=complex) * S2
        cnot = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)
        for _ in range(20):
            a, b = hb.random_unit_vector(rng, 2)
            w = np.array([a, b])
            state = np.kron(w, (hb.ket("00") + hb.ket("11")) * S2)
            state = np.kron(h, np.eye(4)) @ (np.kron(cnot, np.eye(2)) @ state)
            q00 = sp(hb.ket("000"), hb.ket("001"))
            assert hb.vectors_equal(hb.measure(q00, state), np.kron(hb.ket("00"), w), 1e-9)


def test_gram_schmidt_oracle_agrees_with_span():
    rng = np.random.default_rng(17)
    for _ in range(30):
        n = int(rng.integers(1, 6))
        vs = [hb.random_unit_vector(rng, n) for _ in range(int(rng.integers(1, n + 1)))]
        q = gram_schmidt(vs)
        assert frob(q @ q.conj().T, sp(*vs).projector) <= 1e-9


def test_kron_all():
    assert np.array_equal(hb.kron_all([K1, K0]), hb.ket("10"))
    with pytest.raises(ValueError):
        hb.kron_all([])
