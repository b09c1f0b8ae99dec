import itertools

import numpy as np
import pytest

from mpstream.galois import GF, GF256, carryless_mul, is_irreducible
from oracles import log_antilog_tables, table_mul

EXP, LOG = log_antilog_tables()


def test_add_is_xor():
    assert GF256.add(0x57, 0x83) == 0xD4
    for a in range(256):
        assert GF256.add(a, a) == 0
        assert GF256.add(a, 0) == a


def test_mul_matches_log_antilog_table_exhaustively():
    for a, b in itertools.product(range(256), repeat=2):
        assert GF256.mul(a, b) == table_mul(a, b, EXP, LOG)


def test_mul_identity_and_zero():
    for a in range(256):
        assert GF256.mul(a, 1) == a
        assert GF256.mul(a, 0) == 0


def test_inverse_exhaustive():
    for a in range(1, 256):
        inv = GF256.inv(a)
        assert GF256.mul(a, inv) == 1
        assert GF256.inv(inv) == a
    assert GF256.inv(1) == 1


def test_inverse_of_zero_raises():
    with pytest.raises(ZeroDivisionError):
        GF256.inv(0)
    with pytest.raises(ZeroDivisionError):
        GF256.div(3, 0)


def test_div_undoes_mul():
    for a in range(256):
        for b in range(1, 256, 7):
            assert GF256.div(GF256.mul(a, b), b) == a


def test_field_axioms_on_sampled_triples():
    rng = np.random.default_rng(0)
    triples = rng.integers(0, 256, size=(10_000, 3))
    f = GF256
    for a, b, c in triples.tolist():
        assert f.mul(a, f.add(b, c)) == f.add(f.mul(a, b), f.mul(a, c))
        assert f.mul(f.mul(a, b), c) == f.mul(a, f.mul(b, c))
        assert f.mul(a, b) == f.mul(b, a)


def test_elements_out_of_range_rejected():
    with pytest.raises(ValueError):
        GF256.mul(256, 1)
    with pytest.raises(ValueError):
        GF256.add(-1, 1)


def test_carryless_mul_agrees_with_table():
    for a in range(0, 256, 5):
        for b in range(0, 256, 3):
            assert carryless_mul(a, b, 0x11D) == GF256.mul(a, b)


def test_default_polynomials_are_irreducible():
    for m in range(1, 9):
        f = GF(m)
        assert is_irreducible(f.poly)
        assert f.q == 1 << m
    assert not is_irreducible(0b101)  # x^2 + 1 = (x + 1)^2


def test_small_fields_are_fields():
    for m in (1, 2, 3, 4):
        f = GF(m)
        for a in range(1, f.q):
            assert f.mul(a, f.inv(a)) == 1
        for a, b, c in itertools.product(range(f.q), repeat=3):
            assert f.mul(a, f.add(b, c)) == f.add(f.mul(a, b), f.mul(a, c))


def test_reducible_polynomial_rejected():
    with pytest.raises(ValueError):
        GF(8, poly=0x100)


def test_vec_axpy():
    src = np.arange(256, dtype=np.uint8)
    tgt = np.zeros(256, dtype=np.uint8)
    GF256.vec_axpy(tgt, src, 0)
    assert not tgt.any()
    GF256.vec_axpy(tgt, src, 1)
    assert np.array_equal(tgt, src)
    tgt = np.full(256, 0x5A, dtype=np.uint8)
    GF256.vec_axpy(tgt, src, 0x1D)
    expected = [0x5A ^ table_mul(0x1D, int(s), EXP, LOG) for s in src]
    assert tgt.tolist() == expected


def test_vec_axpy_length_mismatch():
    with pytest.raises(ValueError):
        GF256.vec_axpy(np.zeros(3, np.uint8), np.zeros(4, np.uint8), 2)


def test_scale_matches_scalar_mul():
    v = np.arange(256, dtype=np.uint8)
    assert GF256.scale(v, 0x8E).tolist() == [GF256.mul(0x8E, int(x)) for x in v]


@pytest.mark.parametrize("order", [2, 4, 16, 256])
def test_subfields_closed(order):
    elems = set(GF256.subfield(order).tolist())
    assert len(elems) == order
    assert {0, 1} <= elems
    for a in elems:
        for b in elems:
            assert GF256.mul(a, b) in elems
            assert GF256.add(a, b) in elems


@pytest.mark.parametrize("order", [3, 8, 32, 512])
def test_missing_subfields_rejected(order):
    with pytest.raises(ValueError):
        GF256.subfield(order)


def test_tables_read_only():
    with pytest.raises(ValueError):
        GF256.mul_table[2, 3] = 0
