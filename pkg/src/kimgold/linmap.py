"""F_2-linear maps of F_{q^2} stored as linearized polynomials sum c_i x^(2^i)."""

from __future__ import annotations

import functools
from dataclasses import dataclass, field

import numpy as np

from kimgold import ddt
from kimgold.gf2field import FieldCtx, FieldError


class SingularMapError(FieldError):
    pass


# -- bit-row linear algebra over F_2

def gf2_rank(rows: list[int], n_cols: int) -> int:
    work = list(rows)
    rank = 0
    for col in range(n_cols):
        pivot = next((r for r in range(rank, len(work)) if (work[r] >> col) & 1), None)
        if pivot is None:
            continue
        work[rank], work[pivot] = work[pivot], work[rank]
        for r in range(len(work)):
            if r != rank and (work[r] >> col) & 1:
                work[r] ^= work[rank]
        rank += 1
    return rank


def gf2_inverse(rows: list[int], n: int) -> list[int]:
    """Inverse of an n x n bit matrix; row i is an int whose bit j is entry (i, j)."""
    work = [(r, 1 << i) for i, r in enumerate(rows)]
    for col in range(n):
        pivot = next((r for r in range(col, n) if (work[r][0] >> col) & 1), None)
        if pivot is None:
            raise SingularMapError("matrix is singular over F_2")
        work[col], work[pivot] = work[pivot], work[col]
        pr, pi = work[col]
        for r in range(n):
            if r != col and (work[r][0] >> col) & 1:
                work[r] = (work[r][0] ^ pr, work[r][1] ^ pi)
    return [inv for _, inv in work]


def _transpose(rows: list[int], n: int) -> list[int]:
    return [sum(((rows[i] >> j) & 1) << i for i in range(n)) for j in range(n)]


@functools.lru_cache(maxsize=None)
def _dual_basis(ctx: FieldCtx) -> tuple[int, ...]:
    """Trace-dual of the bit basis {1 << j}; needed for interpolation."""
    n = 2 * ctx.m
    basis = [1 << j for j in range(n)]

    def tr(x):
        return ctx.trace_m(x ^ ctx.frobenius_q(x))

    rows = [sum(tr(ctx.mul(basis[j], basis[k])) << k for k in range(n)) for j in range(n)]
    inv = gf2_inverse(rows, n)
    dual = []
    for j in range(n):
        v = 0
        for k in range(n):
            if (inv[j] >> k) & 1:
                v ^= basis[k]
        dual.append(v)
    return tuple(dual)


@dataclass(frozen=True)
class LinMap:
    ctx: FieldCtx = field(compare=False, repr=False)
    coeffs: tuple[int, ...]

    def __post_init__(self):
        if len(self.coeffs) != 2 * self.ctx.m:
            raise ValueError(f"expected {2 * self.ctx.m} coefficients")
        object.__setattr__(self, "coeffs", tuple(int(c) for c in self.coeffs))

    def __call__(self, x):
        ctx = self.ctx
        if isinstance(x, np.ndarray):
            x = np.asarray(x, dtype=np.int64)
            out = np.zeros_like(x)
        else:
            out = 0
        for i, c in enumerate(self.coeffs):
            if c:
                out = out ^ ctx.mul(c, ctx.frobenius(x, i))
        return out

    eval = __call__

    def __matmul__(self, other: LinMap) -> LinMap:
        return compose(self, other)

    def to_json(self) -> list[int]:
        return list(self.coeffs)

    @classmethod
    def from_json(cls, ctx: FieldCtx, data) -> LinMap:
        return cls(ctx, tuple(int(c) if isinstance(c, int) else int(c, 0) for c in data))

    def columns(self) -> list[int]:
        return [self(1 << j) for j in range(2 * self.ctx.m)]

    def to_matrix(self) -> np.ndarray:
        """Bit matrix whose column j is the image of basis element 1 << j."""
        n = 2 * self.ctx.m
        cols = self.columns()
        return np.array([[(cols[j] >> i) & 1 for j in range(n)] for i in range(n)], dtype=np.uint8)

    def rank(self) -> int:
        return gf2_rank(self.columns(), 2 * self.ctx.m)

    def is_bijective(self) -> bool:
        return self.rank() == 2 * self.ctx.m

    def inverse(self) -> LinMap:
        n = 2 * self.ctx.m
        # rows of the matrix are transposed columns
        rows = _transpose(self.columns(), n)
        inv_rows = gf2_inverse(rows, n)
        return from_images(self.ctx, _transpose(inv_rows, n))


def from_coeffs(ctx: FieldCtx, coeffs) -> LinMap:
    return LinMap(ctx, tuple(coeffs))


def from_images(ctx: FieldCtx, images: list[int]) -> LinMap:
    """Interpolate the linearized polynomial sending 1 << j to images[j]."""
    n = 2 * ctx.m
    dual = _dual_basis(ctx)
    coeffs = []
    for i in range(n):
        c = 0
        for j in range(n):
            if images[j]:
                c ^= ctx.mul(images[j], ctx.frobenius(dual[j], i))
        coeffs.append(c)
    return LinMap(ctx, tuple(coeffs))


def identity(ctx: FieldCtx) -> LinMap:
    return frobenius_power(ctx, 0)


def scale(ctx: FieldCtx, c: int) -> LinMap:
    if c == 0:
        raise SingularMapError("scale(0) is not a bijection")
    coeffs = [0] * (2 * ctx.m)
    coeffs[0] = c
    return LinMap(ctx, tuple(coeffs))


def frobenius_power(ctx: FieldCtx, j: int) -> LinMap:
    coeffs = [0] * (2 * ctx.m)
    coeffs[j % (2 * ctx.m)] = 1
    return LinMap(ctx, tuple(coeffs))


def conj_plus(ctx: FieldCtx, t: int) -> LinMap:
    """x -> x^q + t x; bijective exactly when t is off the unit circle."""
    coeffs = [0] * (2 * ctx.m)
    coeffs[0] = t
    coeffs[ctx.m] ^= 1
    return LinMap(ctx, tuple(coeffs))


def compose(L: LinMap, M: LinMap) -> LinMap:
    """The map x -> L(M(x))."""
    ctx = L.ctx
    n = 2 * ctx.m
    out = [0] * n
    for i, a in enumerate(L.coeffs):
        if not a:
            continue
        for j, b in enumerate(M.coeffs):
            if b:
                out[(i + j) % n] ^= ctx.mul(a, ctx.frobenius(b, i))
    return LinMap(ctx, tuple(out))


# -- equivalence witnesses

TARGETS = ("G1", "G2")


def target_exponent(ctx: FieldCtx, target: str) -> int:
    if target == "G1":
        return 3
    if target == "G2":
        return (1 << (ctx.m - 1)) + 1
    raise ValueError(f"unknown target {target!r}")


@dataclass(frozen=True)
class EquivWitness:
    """Claim: target(x) = L1(f(L2(x))) for every x, with f the source Kim function.

    Only linear maps appear; there is no constant or EA term.
    """

    target: str
    L1: LinMap
    L2: LinMap
    source: object  # KimCoeffs

    def to_json(self) -> dict:
        ctx = self.L1.ctx
        return {
            "target": self.target,
            "L1": self.L1.to_json(),
            "L2": self.L2.to_json(),
            "source": self.source.to_json(),
            "field_ctx": ctx.to_json(),
        }

    @classmethod
    def from_json(cls, data: dict, ctx: FieldCtx | None = None) -> EquivWitness:
        from kimgold.gf2field import make_field
        from kimgold.kimtype import KimCoeffs

        if ctx is None:
            fc = data["field_ctx"]
            ctx = make_field(int(fc["m"]), int(fc["fq_poly"]), int(fc["nu"]))
        return cls(
            data["target"],
            LinMap.from_json(ctx, data["L1"]),
            LinMap.from_json(ctx, data["L2"]),
            KimCoeffs.from_json(data["source"]),
        )


def verify_witness(ctx: FieldCtx, w: EquivWitness) -> bool:
    """Rank check on both maps, then exhaustive pointwise comparison.

    2m <= 20 always holds, so every element is checked. The source table comes
    from monomial exponentiation, not from the construction code.
    """
    if w.target not in TARGETS:
        return False
    if w.L1.ctx is not ctx or w.L2.ctx is not ctx:
        if w.L1.ctx.to_json() != ctx.to_json() or w.L2.ctx.to_json() != ctx.to_json():
            return False
    if not (w.L1.is_bijective() and w.L2.is_bijective()):
        return False
    f = ddt.table_of_kim(ctx, w.source).values
    g = ddt.table_of_exponent(ctx, target_exponent(ctx, w.target)).values
    xs = ctx.elements()
    return bool(np.array_equal(w.L1(f[w.L2(xs)]), g))
