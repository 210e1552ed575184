"""Brute-force differential oracle on raw truth tables.

Tables are arrays of integer encodings indexed by integer encodings, so field
addition is XOR. Nothing here looks at theta constants or Gamma sets; the
Kim-type table is built from generic exponentiation of each monomial.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numba
import numpy as np

from kimgold.gf2field import FieldCtx


@dataclass(frozen=True, eq=False)
class FunctionTable:
    n: int
    values: np.ndarray

    def __post_init__(self):
        vals = np.ascontiguousarray(self.values, dtype=np.int64)
        if vals.shape != (1 << self.n,):
            raise ValueError(f"table must have length 2^{self.n}")
        if vals.min() < 0 or vals.max() >= (1 << self.n):
            raise ValueError("table entry out of range")
        object.__setattr__(self, "values", vals)

    def __eq__(self, other):
        return (
            isinstance(other, FunctionTable)
            and self.n == other.n
            and np.array_equal(self.values, other.values)
        )

    def __len__(self):
        return len(self.values)

    # -- I/O
    def to_bytes(self) -> bytes:
        return self.values.astype("<u4").tobytes()

    @classmethod
    def from_bytes(cls, data: bytes) -> FunctionTable:
        vals = np.frombuffer(data, dtype="<u4").astype(np.int64)
        n = len(vals).bit_length() - 1
        if len(vals) != 1 << n:
            raise ValueError("binary table length is not a power of two")
        return cls(n, vals)

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["x", "f(x)"])
            for x, y in enumerate(self.values.tolist()):
                w.writerow([x, y])

    @classmethod
    def read_csv(cls, path) -> FunctionTable:
        pairs = {}
        with open(path, newline="") as fh:
            for row in csv.reader(fh):
                try:
                    x, y = int(row[0], 0), int(row[1], 0)
                except (ValueError, IndexError):
                    continue  # header or blank line
                pairs[x] = y
        size = len(pairs)
        n = size.bit_length() - 1
        if size != 1 << n or sorted(pairs) != list(range(size)):
            raise ValueError("CSV table must list every x in 0..2^n-1 exactly once")
        return cls(n, np.array([pairs[x] for x in range(size)], dtype=np.int64))

    @classmethod
    def load(cls, path) -> FunctionTable:
        path = Path(path)
        if path.suffix.lower() == ".csv":
            return cls.read_csv(path)
        return cls.from_bytes(path.read_bytes())


def table_of_terms(ctx: FieldCtx, terms: dict[int, int]) -> FunctionTable:
    """Table of sum(coeff * x^exp) over F_{q^2}."""
    xs = ctx.elements()
    out = np.zeros_like(xs)
    for e, c in terms.items():
        if c:
            out ^= ctx.mul(c, ctx.pow(xs, e))
    return FunctionTable(2 * ctx.m, out)


def table_of_exponent(ctx: FieldCtx, e: int) -> FunctionTable:
    return table_of_terms(ctx, {e: 1})


def table_of_kim(ctx: FieldCtx, k) -> FunctionTable:
    q = ctx.q
    terms = {3 * q: 1}
    for e, c in ((2 * q + 1, k.a1), (q + 2, k.a2), (3, k.a3)):
        terms[e] = terms.get(e, 0) ^ c
    return table_of_terms(ctx, terms)


def ddt_row(t: FunctionTable, a: int) -> np.ndarray:
    """counts[b] = #{x : f(x^a) ^ f(x) = b}."""
    if a == 0:
        raise ValueError("ddt_row needs a nonzero difference")
    xs = np.arange(len(t), dtype=np.int64)
    d = t.values[xs ^ a] ^ t.values
    return np.bincount(d, minlength=len(t))


def ddt(t: FunctionTable) -> np.ndarray:
    """Full difference distribution table; row 0 included for indexing."""
    size = len(t)
    out = np.zeros((size, size), dtype=np.int32)
    out[0, 0] = size
    for a in range(1, size):
        out[a] = ddt_row(t, a)
    return out


@numba.njit(cache=True)
def _uniformity(vals, early_exit):
    size = vals.shape[0]
    counts = np.zeros(size, dtype=np.int32)
    best = 0
    for a in range(1, size):
        for x in range(size):
            counts[vals[x ^ a] ^ vals[x]] += 1
        for x in range(size):
            b = vals[x ^ a] ^ vals[x]
            c = counts[b]
            if c > best:
                best = c
            counts[b] = 0
        if early_exit and best > 2:
            return best
    return best


@numba.njit(cache=True)
def _is_apn(vals, stamp):
    # x and x^a hit the same b, so APN means one hit per b among pair representatives
    size = vals.shape[0]
    stamp[:] = 0
    for a in range(1, size):
        hb = a
        while hb & (hb - 1):
            hb &= hb - 1
        for x in range(size):
            if x & hb:
                continue
            b = vals[x ^ a] ^ vals[x]
            if stamp[b] == a:
                return False
            stamp[b] = a
    return True


@numba.njit(cache=True)
def _batch_apn(tables):
    out = np.zeros(tables.shape[0], dtype=np.bool_)
    stamp = np.zeros(tables.shape[1], dtype=np.int64)
    for i in range(tables.shape[0]):
        out[i] = _is_apn(tables[i], stamp)
    return out


def differential_uniformity(t: FunctionTable) -> int:
    return int(_uniformity(t.values, False))


def is_apn_bruteforce(t: FunctionTable) -> bool:
    return bool(_is_apn(t.values, np.zeros(len(t), dtype=np.int64)))


def batch_is_apn(tables: np.ndarray) -> np.ndarray:
    """APN flag per row of a (count, 2^n) array of truth tables."""
    return _batch_apn(np.ascontiguousarray(tables, dtype=np.int64))


def kim_tables(ctx: FieldCtx, a1, a2, a3) -> np.ndarray:
    """Truth tables for many Kim-type coefficient triples at once."""
    xs = ctx.elements()
    q = ctx.q
    mono = [ctx.pow(xs, e) for e in (3 * q, 2 * q + 1, q + 2, 3)]
    a1, a2, a3 = (np.asarray(a, dtype=np.int64)[:, None] for a in (a1, a2, a3))
    return (
        mono[0][None, :]
        ^ ctx.mul(a1, mono[1][None, :])
        ^ ctx.mul(a2, mono[2][None, :])
        ^ ctx.mul(a3, mono[3][None, :])
    )


def kim_function_apn_units(ctx: FieldCtx) -> list[int]:
    """Primitive u making x^3 + x^10 + u x^24 APN on F_{2^6} (ctx.m == 3)."""
    if ctx.m != 3:
        raise ValueError("the Kim function lives on F_64 (m = 3)")
    found = []
    for u in range(2, ctx.size):
        if math.gcd(ctx.log(u), ctx.order) != 1:
            continue
        if is_apn_bruteforce(table_of_terms(ctx, {3: 1, 10: 1, 24: u})):
            found.append(u)
    return found
