"""Arithmetic over GF(2^m) with log/antilog tables and the m-bit symbol map.

Symbols are integers in [0, 2^m).  The integer's bit i is the coefficient
of x^i in the polynomial representation, so bit index 1 of the bit tuple
(the first entry) is the constant term:  1 = (1,0,...,0).
"""

from __future__ import annotations

import numpy as np


class NonPrimitivePolynomial(ValueError):
    """Raised when the requested modulus does not generate the full field."""


class ZeroInverse(ZeroDivisionError):
    """Raised on inversion of the zero symbol."""


#: x^8 + x^4 + x^3 + x^2 + 1, the default degree-8 modulus.
DEFAULT_POLY_M8 = 0x11D

#: One primitive polynomial per supported extension degree (bit masks).
PRIMITIVE_POLYS = {
    2: 0b111,
    3: 0b1011,
    4: 0b10011,
    5: 0b100101,
    6: 0b1000011,
    7: 0b10001001,
    8: DEFAULT_POLY_M8,
    10: 0b10000001001,
    12: 0b1000001010011,
    16: 0b10001000000001011,
}


class GaloisField:
    """GF(2^m) fixed by a primitive polynomial.

    Immutable after construction; all operations are pure, so one instance
    can be shared freely across workers.
    """

    def __init__(self, m: int, poly: int | None = None):
        if not 2 <= m <= 16:
            raise ValueError(f"extension degree m={m} outside [2, 16]")
        if poly is None:
            poly = PRIMITIVE_POLYS[m]
        if poly >> m != 1:
            raise ValueError(f"poly {poly:#x} does not have degree {m}")
        self.m = m
        self.poly = poly
        self.order = 1 << m

        exp = np.zeros(self.order - 1, dtype=np.int64)
        value = 1
        for i in range(self.order - 1):
            exp[i] = value
            value <<= 1
            if value & self.order:
                value ^= poly
        if len(set(exp.tolist())) != self.order - 1 or value != 1:
            raise NonPrimitivePolynomial(
                f"poly {poly:#x} is not primitive for m={m}: powers of the "
                "generator repeat before reaching the full cycle"
            )
        log = np.zeros(self.order, dtype=np.int64)
        log[exp] = np.arange(self.order - 1)
        self.exp_table = exp
        self.log_table = log  # log_table[0] is meaningless; 0 has no log
        # bit decomposition of every symbol, row s -> (s_1, ..., s_m)
        self.bits_table = (
            (np.arange(self.order)[:, None] >> np.arange(m)[None, :]) & 1
        ).astype(np.uint8)

    def __repr__(self):
        return f"GaloisField(m={self.m}, poly={self.poly:#x})"

    def __eq__(self, other):
        return (
            isinstance(other, GaloisField)
            and self.m == other.m
            and self.poly == other.poly
        )

    def __hash__(self):
        return hash((self.m, self.poly))

    # -- scalar operations -------------------------------------------------

    def add(self, a: int, b: int) -> int:
        return a ^ b

    def mul(self, a: int, b: int) -> int:
        if a == 0 or b == 0:
            return 0
        idx = (self.log_table[a] + self.log_table[b]) % (self.order - 1)
        return int(self.exp_table[idx])

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroInverse("0 has no multiplicative inverse")
        return int(self.exp_table[(self.order - 1 - self.log_table[a]) % (self.order - 1)])

    def pow_alpha(self, e: int) -> int:
        """The symbol alpha^e for the field's generator alpha."""
        return int(self.exp_table[e % (self.order - 1)])

    # -- vectorised operations ----------------------------------------------

    def mul_vec(self, a, b):
        """Elementwise product of two symbol arrays (broadcasting allowed)."""
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        nz = (a != 0) & (b != 0)
        out = np.zeros(np.broadcast_shapes(a.shape, b.shape), dtype=np.int64)
        la = self.log_table[np.where(a != 0, a, 1)]
        lb = self.log_table[np.where(b != 0, b, 1)]
        prod = self.exp_table[(la + lb) % (self.order - 1)]
        np.copyto(out, prod, where=nz)
        return out

    def matvec(self, mat, vec):
        """Matrix-vector product over the field: out_i = XOR_j mat[i,j]*vec[j]."""
        prods = self.mul_vec(mat, np.asarray(vec)[None, :])
        return np.bitwise_xor.reduce(prods, axis=1)

    def scale_indices(self, h: int):
        """Index map x -> h*x over all symbols, as an int array of length 2^m."""
        return self.mul_vec(h, np.arange(self.order))

    # -- bit representation ---------------------------------------------------

    def sym_to_bits(self, s: int) -> tuple[int, ...]:
        if not 0 <= s < self.order:
            raise ValueError(f"symbol {s} outside field of order {self.order}")
        return tuple(int(b) for b in self.bits_table[s])

    def bits_to_sym(self, bits) -> int:
        bits = list(bits)
        if len(bits) != self.m:
            raise ValueError(f"expected {self.m} bits, got {len(bits)}")
        return int(sum((int(b) & 1) << i for i, b in enumerate(bits)))

    def syms_to_bits(self, syms) -> np.ndarray:
        """Flat bit sequence of a symbol array (m bits per symbol, LSB first)."""
        syms = np.asarray(syms, dtype=np.int64)
        return self.bits_table[syms].reshape(syms.shape[:-1] + (-1,)) \
            if syms.ndim > 1 else self.bits_table[syms].reshape(-1)

    def bits_to_syms(self, bits) -> np.ndarray:
        bits = np.asarray(bits, dtype=np.int64).reshape(-1, self.m)
        return (bits << np.arange(self.m)[None, :]).sum(axis=1)


def field_build(m: int, poly: int | None = None) -> GaloisField:
    """Build GF(2^m) for a primitive modulus, validating primitivity."""
    return GaloisField(m, poly)
