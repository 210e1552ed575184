"""Tower arithmetic F_2 < F_q < F_{q^2}, q = 2^m.

Elements of F_{q^2} are plain integers ``lo | hi << m`` meaning ``lo + hi*beta``
where ``beta^2 + beta + nu = 0`` and ``lo``, ``hi`` are F_q elements written as
bitmasks in the polynomial basis of ``fq_poly``. Subfield elements are exactly
the integers below ``2^m``.

Scalar arguments go through Python lists; numpy arrays go through the
vectorized log/antilog path. Addition is XOR in both cases.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field

import numpy as np

DEFAULT_POLYS = {
    2: 0b111,
    3: 0b1011,
    4: 0b10011,
    5: 0b100101,
    6: 0b1000011,
    7: 0b10000011,
    8: 0b100011101,
    9: 0b1000010001,
    10: 0b10000001001,
}

MIN_M = 2
MAX_M = 10


class FieldError(ValueError):
    pass


def clmul(a: int, b: int) -> int:
    r = 0
    while b:
        if b & 1:
            r ^= a
        a <<= 1
        b >>= 1
    return r


def poly_mod(a: int, p: int) -> int:
    dp = p.bit_length()
    while a.bit_length() >= dp:
        a ^= p << (a.bit_length() - dp)
    return a


def is_irreducible(p: int) -> bool:
    """Trial division by every polynomial of degree <= deg(p)/2."""
    d = p.bit_length() - 1
    if d < 1:
        return False
    for g in range(2, 1 << (d // 2 + 1)):
        if poly_mod(p, g) == 0:
            return False
    return True


def _prime_factors(n: int) -> list[int]:
    out = []
    k = 2
    while k * k <= n:
        if n % k == 0:
            out.append(k)
            while n % k == 0:
                n //= k
        k += 1
    if n > 1:
        out.append(n)
    return out


def _find_generator(order: int, mul, one: int, candidates) -> int:
    """First candidate whose multiplicative order is exactly ``order``."""
    factors = _prime_factors(order)

    def power(a, e):
        r = one
        while e:
            if e & 1:
                r = mul(r, a)
            a = mul(a, a)
            e >>= 1
        return r

    for g in candidates:
        if g and all(power(g, order // p) != one for p in factors):
            return g
    raise FieldError("no generator found")


@dataclass(frozen=True, eq=False)
class FieldCtx:
    """Immutable arithmetic context for the tower F_q < F_{q^2}."""

    m: int
    fq_poly: int
    nu: int
    q: int = field(init=False)
    size: int = field(init=False)
    order: int = field(init=False)

    def __post_init__(self):
        m = self.m
        set_ = object.__setattr__
        set_(self, "q", 1 << m)
        set_(self, "size", 1 << (2 * m))
        set_(self, "order", (1 << (2 * m)) - 1)
        q = self.q

        fq_mul = lambda a, b: poly_mod(clmul(a, b), self.fq_poly)
        gq = _find_generator(q - 1, fq_mul, 1, range(2, q)) if q > 2 else 1
        exp_q = [0] * (2 * (q - 1))
        log_q = [0] * q
        v = 1
        for i in range(q - 1):
            exp_q[i] = exp_q[i + q - 1] = v
            log_q[v] = i
            v = fq_mul(v, gq)
        if v != 1 or len(set(exp_q[: q - 1])) != q - 1:
            raise FieldError("F_q generator order check failed")
        set_(self, "_exp_q", exp_q)
        set_(self, "_log_q", log_q)

        tr = [0] * q
        for x in range(q):
            s, y = 0, x
            for _ in range(m):
                s ^= y
                y = self._fq_mul(y, y)
            if s not in (0, 1):
                raise FieldError("trace left the prime field")
            tr[x] = s
        set_(self, "_trace_q", tr)
        if tr[self.nu] != 1:
            raise FieldError(f"Tr_m(nu) must be 1, got nu={self.nu}")

        gen = _find_generator(self.order, self._tower_mul, 1, range(2, self.size))
        n = self.order
        exp = [0] * (2 * n)
        log = [0] * self.size
        v = 1
        for i in range(n):
            exp[i] = exp[i + n] = v
            log[v] = i
            v = self._tower_mul(v, gen)
        if v != 1:
            raise FieldError("F_{q^2} generator order check failed")
        set_(self, "generator", gen)
        set_(self, "_exp", exp)
        set_(self, "_log", log)
        set_(self, "exp_arr", np.array(exp, dtype=np.int64))
        set_(self, "log_arr", np.array(log, dtype=np.int64))
        set_(self, "trace_arr", np.array(tr, dtype=np.int64))

    # -- internal F_q / tower multiplication used only while building tables
    def _fq_mul(self, a: int, b: int) -> int:
        if a == 0 or b == 0:
            return 0
        return self._exp_q[self._log_q[a] + self._log_q[b]]

    def _tower_mul(self, a: int, b: int) -> int:
        m, mask = self.m, self.q - 1
        a0, a1 = a & mask, a >> m
        b0, b1 = b & mask, b >> m
        hh = self._fq_mul(a1, b1)
        lo = self._fq_mul(a0, b0) ^ self._fq_mul(hh, self.nu)
        hi = self._fq_mul(a0, b1) ^ self._fq_mul(a1, b0) ^ hh
        return lo | (hi << m)

    # -- encoding helpers
    def elem(self, lo: int, hi: int = 0) -> int:
        return lo | (hi << self.m)

    def lo(self, z):
        return z & (self.q - 1)

    def hi(self, z):
        return z >> self.m

    @property
    def beta(self) -> int:
        return 1 << self.m

    def to_json(self) -> dict:
        return {"m": self.m, "fq_poly": self.fq_poly, "nu": self.nu}

    def elements(self) -> np.ndarray:
        return np.arange(self.size, dtype=np.int64)

    def subfield_elements(self) -> np.ndarray:
        return np.arange(self.q, dtype=np.int64)

    # -- arithmetic; each accepts ints or numpy int arrays
    @staticmethod
    def add(a, b):
        return a ^ b

    def mul(self, a, b):
        if isinstance(a, np.ndarray) or isinstance(b, np.ndarray):
            a = np.asarray(a, dtype=np.int64)
            b = np.asarray(b, dtype=np.int64)
            r = self.exp_arr[self.log_arr[a] + self.log_arr[b]]
            return np.where((a == 0) | (b == 0), 0, r)
        if a == 0 or b == 0:
            return 0
        return self._exp[self._log[a] + self._log[b]]

    def inv(self, a):
        if isinstance(a, np.ndarray):
            if np.any(a == 0):
                raise ZeroDivisionError("inverse of zero")
            return self.exp_arr[self.order - self.log_arr[a]]
        if a == 0:
            raise ZeroDivisionError("inverse of zero")
        return self._exp[self.order - self._log[a]]

    def div(self, a, b):
        return self.mul(a, self.inv(b))

    def pow(self, a, e: int):
        n = self.order
        if isinstance(a, np.ndarray):
            a = np.asarray(a, dtype=np.int64)
            if e == 0:
                return np.ones_like(a)
            r = self.exp_arr[(self.log_arr[a] * (e % n)) % n]
            if e < 0:
                if np.any(a == 0):
                    raise ZeroDivisionError("negative power of zero")
                return r
            return np.where(a == 0, 0, r)
        if e == 0:
            return 1
        if a == 0:
            if e < 0:
                raise ZeroDivisionError("negative power of zero")
            return 0
        return self._exp[(self._log[a] * e) % n]

    def sqrt(self, a):
        """Inverse Frobenius on F_{q^2}; maps F_q to itself."""
        return self.pow(a, 1 << (2 * self.m - 1))

    def frobenius(self, a, j: int = 1):
        return self.pow(a, 1 << (j % (2 * self.m)))

    def frobenius_q(self, z):
        # beta^q = beta + 1
        return z ^ (z >> self.m)

    conj = frobenius_q

    def log(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("log of zero")
        return self._log[a]

    # -- subfield, norm, unit circle
    def in_subfield(self, z):
        return (z >> self.m) == 0

    def norm(self, z):
        return self.mul(z, self.frobenius_q(z))

    def in_U(self, z):
        return self.norm(z) == 1

    def unit_circle(self) -> list[int]:
        """All q+1 elements of norm one, as powers of generator^(q-1)."""
        g = self._exp[self.q - 1]
        return sorted(self.pow(g, i) for i in range(self.q + 1))

    def trace_m(self, x):
        if isinstance(x, np.ndarray):
            if np.any(x >> self.m):
                raise FieldError("trace_m argument not in F_q")
            return self.trace_arr[x]
        if x >> self.m:
            raise FieldError("trace_m argument not in F_q")
        return self._trace_q[x]

    def polar_decompose(self, z: int) -> tuple[int, int]:
        """Unique z = x*y with x in F_q^*, y in U."""
        if z == 0:
            raise FieldError("polar decomposition of zero")
        x = self.sqrt(self.norm(z))
        return x, self.div(z, x)

    def solve_artin_schreier(self, c: int) -> int | None:
        """A root w in F_q of w^2 + w = c, or None when Tr_m(c) = 1."""
        if self.trace_m(c):
            return None
        if self.m % 2:
            # half-trace
            w, y = 0, c
            for i in range(self.m):
                if i % 2 == 0:
                    w ^= y
                y = self.mul(y, y)
            return w
        for w in range(self.q):
            if self.mul(w, w) ^ w == c:
                return w
        raise FieldError("Artin-Schreier search failed despite zero trace")

    def solve_quadratic_in_U(self, A: int, B: int, C: int) -> list[int]:
        """All z in U minus {1} with A z^2 + B z + C = 0."""
        if A == 0 and B == 0 and C == 0:
            raise FieldError("all-zero quadratic")
        out = []
        for z in self.unit_circle():
            if z != 1 and self.mul(A, self.mul(z, z)) ^ self.mul(B, z) ^ C == 0:
                out.append(z)
        return out

    def lift_q_minus_1(self, y: int) -> int:
        """Some c with c^(q-1) = y; y must lie on the unit circle."""
        if not self.in_U(y):
            raise FieldError("lift_q_minus_1 needs an element of U")
        k = self._log[y]
        # y = g^k with (q-1) | k since U = <g^(q-1)>
        return self._exp[k // (self.q - 1)]

    def primitive_cube_root(self) -> int:
        """Smaller-encoded root of w^2 + w + 1 in F_q (m even)."""
        if self.m % 2:
            raise FieldError("F_q has no primitive cube root of unity for odd m")
        return min(w for w in range(2, self.q) if self.mul(w, w) ^ w == 1)


@functools.lru_cache(maxsize=None)
def make_field(m: int, fq_poly: int | None = None, nu: int | None = None) -> FieldCtx:
    if not MIN_M <= m <= MAX_M:
        raise FieldError(f"m must lie in [{MIN_M}, {MAX_M}], got {m}")
    if fq_poly is None:
        fq_poly = DEFAULT_POLYS[m]
    if fq_poly.bit_length() - 1 != m:
        raise FieldError(f"fq_poly must have degree {m}")
    if not is_irreducible(fq_poly):
        raise FieldError(f"fq_poly {fq_poly:#x} is reducible")
    if nu is None:
        # smallest encoding with Tr_m = 1, found with plain polynomial arithmetic
        for cand in range(1, 1 << m):
            s, y = 0, cand
            for _ in range(m):
                s ^= y
                y = poly_mod(clmul(y, y), fq_poly)
            if s == 1:
                nu = cand
                break
    if not 0 <= nu < (1 << m):
        raise FieldError("nu must be an element of F_q")
    return FieldCtx(m, fq_poly, nu)


def parse_element(text: str) -> int:
    """Decimal or 0x-prefixed hex integer encoding."""
    return int(text, 0)
