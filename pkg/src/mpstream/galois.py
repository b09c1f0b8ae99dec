"""Arithmetic over binary extension fields GF(2**m), m <= 8.

Elements are plain ints in ``[0, q)``.  Byte payloads are numpy ``uint8``
arrays and are combined with :meth:`GF.vec_axpy`.
"""
from __future__ import annotations

import numpy as np

# Low-weight irreducible polynomials; 0x11D is the usual RLNC / Reed-Solomon choice.
DEFAULT_POLYS = {
    1: 0b11,
    2: 0b111,
    3: 0b1011,
    4: 0b10011,
    5: 0b100101,
    6: 0b1000011,
    7: 0b10001001,
    8: 0x11D,
}


def _degree(poly: int) -> int:
    return poly.bit_length() - 1


def _poly_mod(a: int, b: int) -> int:
    db = _degree(b)
    while a and _degree(a) >= db:
        a ^= b << (_degree(a) - db)
    return a


def is_irreducible(poly: int) -> bool:
    """Trial division by every binary polynomial of degree 1..deg/2."""
    deg = _degree(poly)
    if deg < 1:
        return False
    for divisor in range(2, 1 << (deg // 2 + 1)):
        if _poly_mod(poly, divisor) == 0:
            return False
    return True


def carryless_mul(a: int, b: int, poly: int) -> int:
    """Shift-and-add product of ``a`` and ``b`` reduced modulo ``poly``."""
    deg = _degree(poly)
    top = 1 << deg
    result = 0
    while b:
        if b & 1:
            result ^= a
        b >>= 1
        a <<= 1
        if a & top:
            a ^= poly
    return result


class GF:
    """The field GF(2**m) with immutable lookup tables.

    >>> f = GF(8)
    >>> f.mul(0x57, f.inv(0x57))
    1
    """

    def __init__(self, m: int = 8, poly: int | None = None):
        if not 1 <= m <= 8:
            raise ValueError(f"only GF(2**m) with 1 <= m <= 8 is supported, got m={m}")
        poly = DEFAULT_POLYS[m] if poly is None else poly
        if _degree(poly) != m:
            raise ValueError(f"reduction polynomial {poly:#x} does not have degree {m}")
        if not is_irreducible(poly):
            raise ValueError(f"reduction polynomial {poly:#x} is reducible")
        self.m = m
        self.q = 1 << m
        self.poly = poly

        q = self.q
        mul = np.zeros((q, q), dtype=np.uint8)
        for a in range(q):
            for b in range(a, q):
                mul[a, b] = mul[b, a] = carryless_mul(a, b, poly)
        inv = np.zeros(q, dtype=np.uint8)
        for a in range(1, q):
            inv[a] = int(np.flatnonzero(mul[a] == 1)[0])
        mul.setflags(write=False)
        inv.setflags(write=False)
        self.mul_table = mul
        self.inv_table = inv
        # Python-int views for scalar code paths; indexing numpy per element is slow.
        self._mul = [list(map(int, row)) for row in mul]
        self._inv = list(map(int, inv))

    def __repr__(self) -> str:
        return f"GF(2**{self.m}, poly={self.poly:#x})"

    def __eq__(self, other) -> bool:
        return isinstance(other, GF) and (self.m, self.poly) == (other.m, other.poly)

    def __hash__(self) -> int:
        return hash((self.m, self.poly))

    def __reduce__(self):
        return (GF, (self.m, self.poly))

    def _check(self, *values: int) -> None:
        for v in values:
            if not 0 <= v < self.q:
                raise ValueError(f"{v} is not an element of GF({self.q})")

    def add(self, a: int, b: int) -> int:
        self._check(a, b)
        return a ^ b

    sub = add

    def mul(self, a: int, b: int) -> int:
        self._check(a, b)
        return self._mul[a][b]

    def inv(self, a: int) -> int:
        self._check(a)
        if a == 0:
            raise ZeroDivisionError("0 has no multiplicative inverse")
        return self._inv[a]

    def div(self, a: int, b: int) -> int:
        return self.mul(a, self.inv(b))

    def scale(self, vec: np.ndarray, coeff: int) -> np.ndarray:
        """Return ``coeff * vec`` as a new array."""
        return self.mul_table[coeff][vec]

    def vec_axpy(self, target: np.ndarray, source: np.ndarray, coeff: int) -> np.ndarray:
        """``target += coeff * source`` element-wise, in place; returns ``target``."""
        if len(target) != len(source):
            raise ValueError(f"length mismatch: {len(target)} != {len(source)}")
        self._check(coeff)
        if coeff == 0:
            return target
        if coeff == 1:
            target ^= source
        else:
            target ^= self.mul_table[coeff][source]
        return target

    def subfield(self, order: int) -> np.ndarray:
        """Sorted elements of the subfield of the given order (``x**order == x``)."""
        k = order.bit_length() - 1
        if order < 2 or order != 1 << k or self.m % k:
            raise ValueError(f"GF({self.q}) has no subfield of order {order}")
        elems = []
        for x in range(self.q):
            y = x
            for _ in range(k):
                y = self._mul[y][y]
            if y == x:
                elems.append(x)
        return np.array(elems, dtype=np.uint8)


GF256 = GF(8)
