import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nbldpc_relay.gf import (
    DEFAULT_POLY_M8,
    GaloisField,
    NonPrimitivePolynomial,
    ZeroInverse,
    field_build,
)
from oracles import polymul_mod, polyinv_mod

GF8 = field_build(3, 0b1011)  # x^3 + x + 1
GF4 = field_build(2, 0b111)
GF256 = field_build(8)


def test_gf8_generator_powers_match_reference_list():
    # alpha = (0,1,0), alpha^3 = (1,1,0), alpha^4 = (0,1,1),
    # alpha^5 = (1,1,1), alpha^6 = (1,0,1) for x^3 + x + 1
    assert GF8.pow_alpha(1) == 0b010
    assert GF8.pow_alpha(3) == 0b011
    assert GF8.pow_alpha(4) == 0b110
    assert GF8.pow_alpha(5) == 0b111
    assert GF8.pow_alpha(6) == 0b101
    assert GF8.sym_to_bits(GF8.pow_alpha(3)) == (1, 1, 0)
    assert GF8.sym_to_bits(GF8.pow_alpha(4)) == (0, 1, 1)


def test_gf4_alpha_squared_is_alpha_plus_one():
    assert GF4.pow_alpha(2) == 0b11


def test_reducible_poly_rejected():
    # x^3 + x^2 + x + 1 = (x + 1)(x^2 + 1) is reducible
    with pytest.raises(NonPrimitivePolynomial):
        field_build(3, 0b1111)


def test_non_primitive_irreducible_poly_rejected():
    # x^4 + x^3 + x^2 + x + 1 is irreducible but its root has order 5, not 15
    with pytest.raises(NonPrimitivePolynomial):
        field_build(4, 0b11111)


def test_degree_mismatch_rejected():
    with pytest.raises(ValueError):
        field_build(3, 0b10011)
    with pytest.raises(ValueError):
        field_build(17, None)


def test_add_axioms():
    for a in range(8):
        assert GF8.add(a, a) == 0
        assert GF8.add(a, 0) == a
    # alpha + 1 = alpha^3 in GF(8)
    assert GF8.add(0b010, 0b001) == GF8.pow_alpha(3)


def test_mul_identity_and_specific_products():
    for a in range(8):
        assert GF8.mul(a, 1) == a
        assert GF8.mul(a, 0) == 0
    # alpha^5 * alpha^6 = alpha^(11 mod 7) = alpha^4
    assert GF8.mul(GF8.pow_alpha(5), GF8.pow_alpha(6)) == GF8.pow_alpha(4)


def test_inverse():
    assert GF8.inv(1) == 1
    for field in (GF4, GF8, GF256):
        for a in range(1, field.order):
            assert field.mul(a, field.inv(a)) == 1
        with pytest.raises(ZeroInverse):
            field.inv(0)


@pytest.mark.parametrize("m,poly", [(2, 0b111), (3, 0b1011), (4, 0b10011)])
def test_mul_matches_polynomial_oracle_exhaustively(m, poly):
    field = field_build(m, poly)
    for a in range(field.order):
        for b in range(field.order):
            assert field.mul(a, b) == polymul_mod(a, b, poly, m)


def test_mul_matches_polynomial_oracle_random_gf256():
    rng = np.random.default_rng(7)
    a = rng.integers(0, 256, size=100_000)
    b = rng.integers(0, 256, size=100_000)
    got = GF256.mul_vec(a, b)
    want = np.array(
        [polymul_mod(int(x), int(y), GF256.poly, 8) for x, y in zip(a, b)]
    )
    assert np.array_equal(got, want)


def test_inv_matches_oracle_small_fields():
    for field in (GF4, GF8):
        for a in range(1, field.order):
            assert field.inv(a) == polyinv_mod(a, field.poly, field.m)


@pytest.mark.parametrize("field", [GF4, GF8, field_build(4)])
def test_distributivity_exhaustive(field):
    q = field.order
    for a, b, c in itertools.product(range(q), repeat=3):
        assert field.mul(a, b ^ c) == field.mul(a, b) ^ field.mul(a, c)


def test_distributivity_random_gf256():
    rng = np.random.default_rng(11)
    a, b, c = rng.integers(0, 256, size=(3, 100_000))
    lhs = GF256.mul_vec(a, b ^ c)
    rhs = GF256.mul_vec(a, b) ^ GF256.mul_vec(a, c)
    assert np.array_equal(lhs, rhs)


def test_exp_log_mutually_inverse():
    for field in (GF4, GF8, GF256):
        nonzero = np.arange(1, field.order)
        assert np.array_equal(field.exp_table[field.log_table[nonzero]], nonzero)
        assert len(set(field.exp_table.tolist())) == field.order - 1
        assert np.array_equal(
            np.sort(field.exp_table), np.arange(1, field.order)
        )


def test_bit_map_reference_values():
    assert GF8.sym_to_bits(0) == (0, 0, 0)
    assert GF8.sym_to_bits(1) == (1, 0, 0)
    assert GF256.sym_to_bits(1) == (1, 0, 0, 0, 0, 0, 0, 0)


@pytest.mark.parametrize("field", [GF4, GF8, GF256])
def test_bit_map_round_trip(field):
    for s in range(field.order):
        assert field.bits_to_sym(field.sym_to_bits(s)) == s
    syms = np.arange(field.order)
    assert np.array_equal(field.bits_to_syms(field.syms_to_bits(syms)), syms)


def test_bit_length_mismatch():
    with pytest.raises(ValueError):
        GF8.bits_to_sym((1, 0))
    with pytest.raises(ValueError):
        GF8.sym_to_bits(8)


@given(st.integers(0, 255), st.integers(0, 255), st.integers(0, 255))
@settings(max_examples=200, deadline=None)
def test_gf256_ring_axioms(a, b, c):
    assert GF256.mul(a, b) == GF256.mul(b, a)
    assert GF256.mul(a, GF256.mul(b, c)) == GF256.mul(GF256.mul(a, b), c)
    assert GF256.mul(a, b ^ c) == GF256.mul(a, b) ^ GF256.mul(a, c)


def test_mul_vec_broadcasting_and_zeros():
    a = np.array([0, 1, 7, 0])
    b = np.array([5, 0, 7, 0])
    out = GF8.mul_vec(a, b)
    assert out[0] == 0 and out[1] == 0 and out[3] == 0
    assert out[2] == GF8.mul(7, 7)
    assert np.array_equal(GF8.scale_indices(1), np.arange(8))


def test_default_gf256_poly():
    assert GF256.poly == DEFAULT_POLY_M8
    assert GF256.order == 256
    assert isinstance(GF256, GaloisField)
