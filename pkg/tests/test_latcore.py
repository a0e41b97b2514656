import math

import numpy as np
import pytest

from divlat.errors import ArithmeticOverflow, InvalidInput
from divlat.latcore import (build_spec, det_scaled, disc_gamma, encode, kron_pattern,
                            lattice_coords, log_det_scaled, membership, parity_identity_ok,
                            reduce_bits, spec_from_descriptor)
from divlat.ldpc import SparseBinaryMatrix, gen_regular
from divlat.numfield import prime_above_2, trivial_field


def test_toy_discriminant_and_determinant(spec_q10_toy):
    # d_K^N 4^(N-k) = 40^4 * 4^3
    assert disc_gamma(spec_q10_toy) == 163_840_000
    assert det_scaled(spec_q10_toy) == pytest.approx(2 ** 8 * math.sqrt(163_840_000), rel=1e-12)
    assert det_scaled(spec_q10_toy) == pytest.approx(3_276_800, rel=1e-12)
    assert abs(np.linalg.det(spec_q10_toy.M_C)) ** 2 == pytest.approx(163_840_000, rel=1e-9)


def test_encode_toy(spec_q10_toy):
    pt = encode(spec_q10_toy, [1], np.zeros(8, dtype=int))
    assert pt.c.tolist() == [1, 0, 1, 1]
    np.testing.assert_allclose(pt.x, [1, 1, 0, 0, 1, 1, 1, 1])


def test_membership_examples(spec_q10_toy, q10):
    pt = encode(spec_q10_toy, [1], np.zeros(8, dtype=int))
    assert membership(spec_q10_toy, pt.x)
    off = pt.x.copy()
    off[0] += 0.5
    assert not membership(spec_q10_toy, off)
    bad = np.concatenate([q10.embed([1, 0]), np.zeros(6)])  # reduces to c = (1,0,0,0)
    assert not membership(spec_q10_toy, bad)
    assert reduce_bits(spec_q10_toy, pt.x).tolist() == [1, 0, 1, 1]
    assert lattice_coords(spec_q10_toy, off) is None


def test_encoded_points_are_members(spec_cubic_100, rng):
    msg = rng.integers(0, 2, (5, spec_cubic_100.k))
    z = rng.integers(-3, 4, (5, spec_cubic_100.dim))
    pts = encode(spec_cubic_100, msg, z)
    for x, c in zip(pts.x, pts.c):
        assert membership(spec_cubic_100, x)
        assert reduce_bits(spec_cubic_100, x).tolist() == c.tolist()


def test_generator_rows_are_members(spec_cubic_toy, spec_q10_100):
    assert parity_identity_ok(spec_cubic_toy)
    assert parity_identity_ok(spec_q10_100)


def test_kron_pattern_layout(h_toy):
    hl = kron_pattern(h_toy, 2)
    np.testing.assert_array_equal(hl.to_dense(), np.kron(h_toy.to_dense(), np.eye(2, dtype=np.uint8)))


def test_trivial_field_is_binary_construction_a(h_toy):
    spec = build_spec(trivial_field(), None, h_toy)
    np.testing.assert_array_equal(spec.M_C, [[1, 0, 1, 1], [0, 2, 0, 0], [0, 0, 2, 0], [0, 0, 0, 2]])
    assert disc_gamma(spec) == 4 ** 3


def test_spec_hash_stable(q10, h_toy, spec_q10_toy):
    again = build_spec(q10, prime_above_2(q10), h_toy)
    assert again.spec_hash() == spec_q10_toy.spec_hash()
    other = build_spec(q10, prime_above_2(q10), gen_regular(12, 2, 4, seed=0))
    assert other.spec_hash() != spec_q10_toy.spec_hash()


def test_spec_from_descriptor():
    spec = spec_from_descriptor({"kind": "quadratic", "m": 10}, {"dense": [[1, 0, 1, 0], [0, 1, 1, 1], [1, 0, 0, 1]]})
    assert disc_gamma(spec) == 163_840_000


def test_disc_overflow_cap(q10):
    spec = build_spec(q10, None, gen_regular(120, 3, 6, seed=0))
    with pytest.raises(ArithmeticOverflow):
        disc_gamma(spec)
    assert math.isfinite(log_det_scaled(spec))


def test_encode_validation(spec_q10_toy):
    with pytest.raises(InvalidInput):
        encode(spec_q10_toy, [1, 0], np.zeros(8, dtype=int))
    with pytest.raises(InvalidInput):
        lattice_coords(spec_q10_toy, np.zeros(7))


def test_rank_deficient_code_dimension(q10):
    h = SparseBinaryMatrix.from_dense([[1, 1, 0, 0], [0, 1, 1, 0], [1, 0, 1, 0]])
    spec = build_spec(q10, None, h)
    assert spec.k == 2
    assert abs(np.linalg.det(spec.M_C)) ** 2 == pytest.approx(disc_gamma(spec), rel=1e-9)
