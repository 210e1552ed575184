"""Classification of Kim-type APN functions up to affine equivalence with Gold functions.

Every construction produces a *fragment* ``(C, D)`` meaning
``new(x) = C(old(D(x)))``. Fragments are chained eagerly and the final
witness is checked pointwise against the target before it leaves
:func:`classify`.
"""

from __future__ import annotations

import functools
import logging
from dataclasses import dataclass, field

import numpy as np

from kimgold import kimtype as kt
from kimgold import linmap as lm
from kimgold.gf2field import FieldCtx, FieldError
from kimgold.kimtype import KimCoeffs
from kimgold.linmap import EquivWitness, LinMap

log = logging.getLogger(__name__)


class InvariantViolation(RuntimeError):
    """An APN input reached a case the classification rules out."""


ROUTE_TAGS = (
    "Normalize", "P22", "P23", "P24", "P25", "P26-subfield", "P26-family",
    "P27", "P28", "SmallField-i-S", "SmallField-i-T", "SmallField-ii",
)


@dataclass
class ClassifyResult:
    status: str  # "APN" or "NotAPN"
    target: str | None = None
    witness: EquivWitness | None = None
    route: list[str] = field(default_factory=list)

    def to_json(self, ctx: FieldCtx) -> dict:
        return {
            "status": self.status,
            "target": self.target,
            "route": list(self.route),
            "witness": self.witness.to_json() if self.witness else None,
            "field_ctx": ctx.to_json(),
        }


def _check_fragment(ctx, new: KimCoeffs, C: LinMap, old: KimCoeffs, D: LinMap):
    xs = ctx.elements()
    if not np.array_equal(kt.eval_kim(ctx, new, xs), C(kt.eval_kim(ctx, old, D(xs)))):
        raise FieldError(f"fragment {old} -> {new} failed pointwise check")


def _gold(ctx: FieldCtx, target: str, x):
    return ctx.pow(x, lm.target_exponent(ctx, target))


def _witness(ctx, target, C, D, source) -> EquivWitness:
    w = EquivWitness(target, C, D, source)
    if not lm.verify_witness(ctx, w):
        raise InvariantViolation(f"constructed {target} witness for {source} does not verify")
    return w


# -- clearing a2

def reduce_a2_zero(ctx: FieldCtx, k: KimCoeffs) -> tuple[KimCoeffs, LinMap, LinMap]:
    """Return (k', C, D) with a2' = 0, a1' in F_q and f'(x) = C(f(D(x)))."""
    a1, a2, a3 = k
    if not ctx.in_subfield(a1):
        raise FieldError("reduce_a2_zero needs a1 in F_q")
    if a2 == 0:
        raise FieldError("reduce_a2_zero needs a2 != 0")
    t = ctx.div(a1, a2)
    a3q = ctx.frobenius_q(a3)
    if ctx.in_U(t) or t == a3q:
        raise FieldError("reduce_a2_zero needs a1/a2 off U and a1/a2 != a3^q")
    lead = t ^ a3q
    h0 = (
        lead,
        ctx.div(ctx.mul(a1, a1), a2) ^ ctx.frobenius_q(a2),
        ctx.div(ctx.mul(a1, a3), a2) ^ 1,
    )
    inv = ctx.inv(lead)
    h1 = KimCoeffs(ctx.mul(h0[1], inv), 0, ctx.mul(h0[2], inv))
    C = lm.scale(ctx, inv) @ lm.conj_plus(ctx, t)
    k2, C2, D2 = kt.normalize_a1(ctx, h1)
    return k2, C2 @ C, D2


def reduce_a2_zero_h0(ctx: FieldCtx, k: KimCoeffs) -> tuple[int, int, int, int]:
    """Coefficients of (x^q + t x) o f with t = a1/a2, on x^3q, x^(2q+1), x^(q+2), x^3."""
    a1, a2, a3 = k
    t = ctx.div(a1, a2)
    return (
        t ^ ctx.frobenius_q(a3),
        ctx.div(ctx.mul(a1, a1), a2) ^ ctx.frobenius_q(a2),
        0,
        ctx.div(ctx.mul(a1, a3), a2) ^ 1,
    )


# -- two vanishing coefficients

def _g1_two_zero_fragment(ctx: FieldCtx, k: KimCoeffs) -> tuple[LinMap, LinMap]:
    a1, a2, a3 = k
    if a2 != 0 or (a1 != 0 and a3 != 0):
        raise FieldError("needs a2 = 0 and (a1 = 0 or a3 = 0)")
    if a1 == 0:
        if ctx.in_U(a3):
            raise InvariantViolation("a1 = a2 = 0 with a3 on U is not APN")
        # (x^q + a3^q x) o f = (a3^(q+1) + 1) x^3
        lead = ctx.norm(a3) ^ 1
        C = lm.scale(ctx, ctx.inv(lead)) @ lm.conj_plus(ctx, ctx.frobenius_q(a3))
        return C, lm.identity(ctx)
    raise InvariantViolation("a2 = a3 = 0 with a1 != 0 is not APN")


def witness_g1_two_zero(ctx: FieldCtx, k: KimCoeffs) -> EquivWitness:
    C, D = _g1_two_zero_fragment(ctx, k)
    return _witness(ctx, "G1", C, D, k)


# -- subfield coefficients

def g1_family_maps(ctx: FieldCtx, r: int) -> tuple[LinMap, LinMap]:
    """(x^q + r x, r^3 x^q + x); their sandwich around x^3 is a Kim function."""
    coeffs = [0] * (2 * ctx.m)
    coeffs[0] = 1
    coeffs[ctx.m] = ctx.pow(r, 3)
    return lm.conj_plus(ctx, r), lm.from_coeffs(ctx, coeffs)


def g2_family_maps(ctx: FieldCtx, r: int) -> tuple[LinMap, LinMap]:
    """(L, L^(2q)) with L = x^q + r x; L o G2 o L^(2q) is a Kim function."""
    L = lm.conj_plus(ctx, r)
    return L, lm.frobenius_power(ctx, ctx.m + 1) @ L


def _find_r(ctx: FieldCtx, fn, want: int, exclude) -> int:
    for r in range(ctx.q):
        if r in exclude(r):
            continue
        if fn(r) == want:
            return r
    raise InvariantViolation(f"no r in F_q hits {want}")


def _to_form(ctx: FieldCtx, k: KimCoeffs):
    """Reduce subfield coefficients to form (i) or (ii).

    Returns (form, c1, c2, C) with form(x) = C(f(x)).
    """
    a1, a2, a3 = k
    mul, div = ctx.mul, ctx.div
    if a3 == 0:
        return "i", a1, a2, lm.identity(ctx)
    if a3 == 1:
        if a1 == 0:
            return "ii", 0, a2, lm.identity(ctx)
        if a1 == a2:
            raise InvariantViolation("a1 = a2, a3 = 1 makes f take values in F_q")
        r = div(a2, a1)
        C = lm.scale(ctx, ctx.inv(r ^ 1)) @ lm.conj_plus(ctx, r)
        return "ii", 0, div(a1 ^ mul(r, a2), r ^ 1), C
    den = mul(a3, a3) ^ 1
    coeffs = [0] * (2 * ctx.m)
    coeffs[0] = 1
    coeffs[ctx.m] = a3
    C = lm.scale(ctx, ctx.inv(den)) @ lm.from_coeffs(ctx, coeffs)
    return "i", div(a1 ^ mul(a3, a2), den), div(a2 ^ mul(a3, a1), den), C


def _smallfield_fragment(ctx: FieldCtx, k: KimCoeffs):
    """(target, C, D, tag) with target = C o f o D."""
    if not k.all_in_subfield(ctx):
        raise FieldError("smallfield construction needs a1, a2, a3 in F_q")
    mul, div, inv = ctx.mul, ctx.div, ctx.inv
    form, c1, c2, C0 = _to_form(ctx, k)
    fk = KimCoeffs(c1, c2, 0) if form == "i" else KimCoeffs(0, c2, 1)
    if ctx.m <= 8:
        _check_fragment(ctx, fk, C0, k, lm.identity(ctx))

    if form == "ii":
        if c2 != 1 or ctx.m % 2:
            raise InvariantViolation("form (ii) APN needs c2 = 1 and m even")
        w = ctx.primitive_cube_root()
        L = lm.conj_plus(ctx, w)
        Li = L.inverse()
        # L o G1 o L = (1 + w) f2
        return "G1", Li @ lm.scale(ctx, 1 ^ w) @ C0, Li, "SmallField-ii"

    S = mul(c1, c1) ^ mul(c2, c2) ^ c2
    if S == 0:
        if c2 == 0:
            if c1 != 0:
                raise InvariantViolation("S = 0, c2 = 0 forces c1 = 0")
            return "G1", lm.frobenius_power(ctx, ctx.m) @ C0, lm.identity(ctx), "SmallField-i-S"
        if c2 == 1:
            raise InvariantViolation("S = 0, c2 = 1 gives theta1 = 0")
        b = ctx.sqrt(c2) ^ 1
        if c1 != mul(b, b) ^ b:
            raise InvariantViolation("S = 0 but c1 != b^2 + b")

        def b_prime(r):
            r3 = ctx.pow(r, 3)
            return div(ctx.pow(r ^ 1, 3), r3 ^ 1)

        r = _find_r(ctx, b_prime, b, lambda r: {0, 1} | ({r} if ctx.pow(r, 3) == 1 else set()))
        L1, L2 = g1_family_maps(ctx, r)
        # L2 o G1 o L1 = (r^6 + 1) f1
        lead = ctx.pow(r, 6) ^ 1
        return "G1", L2.inverse() @ lm.scale(ctx, lead) @ C0, L1.inverse(), "SmallField-i-S"

    if ctx.m % 2 or c2 != 1:
        raise InvariantViolation("S != 0 requires m even and T = 0")
    if c1 == 0:
        raise InvariantViolation("S != 0 branch needs c1 != 0")
    r = _find_r(ctx, lambda r: div(mul(r ^ 1, r ^ 1), r), c1, lambda r: {0, 1})
    L, M = g2_family_maps(ctx, r)
    # L o G2 o M = (r^3 + r) f1
    lead = ctx.pow(r, 3) ^ r
    return "G2", L.inverse() @ lm.scale(ctx, lead) @ C0, M.inverse(), "SmallField-i-T"


def smallfield_witness(ctx: FieldCtx, k: KimCoeffs) -> tuple[EquivWitness, str]:
    target, C, D, tag = _smallfield_fragment(ctx, k)
    return _witness(ctx, target, C, D, k), tag


# -- the (u, z) family

def family_coeffs(ctx: FieldCtx, u, z):
    """(a1, a2, a3) parametrized by u, z on the unit circle with u^2 != z."""
    mul, div = ctx.mul, ctx.div
    u2 = mul(u, u)
    den = mul(u2 ^ z, u2 ^ z)
    num = ctx.pow(mul(u2, u) ^ z, 2)
    a2 = div(num, den)
    a1 = div(a2, u)
    a3 = div(mul(mul(u, mul(z, z)), mul(u ^ 1, u ^ 1)), den)
    return a1, a2, a3


@functools.lru_cache(maxsize=None)
def _family_index(ctx: FieldCtx) -> dict[tuple[int, int, int], tuple[int, int]]:
    U = np.array(ctx.unit_circle(), dtype=np.int64)
    uu, zz = (g.ravel() for g in np.meshgrid(U, U, indexing="ij"))
    keep = ctx.mul(uu, uu) != zz
    uu, zz = uu[keep], zz[keep]
    a1, a2, a3 = family_coeffs(ctx, uu, zz)
    index = {}
    for key, pair in zip(zip(a1.tolist(), a2.tolist(), a3.tolist()), zip(uu.tolist(), zz.tolist())):
        index.setdefault(key, pair)
    return index


def recover_uz(ctx: FieldCtx, k: KimCoeffs) -> tuple[int, int] | None:
    """First (u, z) in U x U (sorted scan, u^2 != z) reproducing k, if any."""
    return _family_index(ctx).get((k.a1, k.a2, k.a3))


def unit_ratio_branches(ctx: FieldCtx, k: KimCoeffs) -> list[str]:
    """Which of the two a1/a2-on-U constructions apply to k (possibly both)."""
    out = []
    if k.all_in_subfield(ctx):
        out.append("P26-subfield")
    if recover_uz(ctx, k) is not None:
        out.append("P26-family")
    return out


def prop27_maps(ctx: FieldCtx, u: int, z: int) -> tuple[LinMap, LinMap, tuple[int, int, int, int]]:
    """L1, L2 and the closed-form (c0, c1, c2, c3) of L1 o G2 o L2."""
    if ctx.m % 2:
        raise FieldError("the (u, z) construction needs m even")
    if not (ctx.in_U(u) and ctx.in_U(z)):
        raise FieldError("u and z must lie on U")
    mul, div, pw = ctx.mul, ctx.div, ctx.pow
    u2, u3 = mul(u, u), pw(u, 3)
    if u2 == z or u == z or u3 == z:
        raise FieldError("needs u^2 != z, u != z, u^3 != z")
    w = ctx.primitive_cube_root()
    w2 = mul(w, w)
    D = pw(mul(w2, u3) ^ mul(u ^ w, z), 2)
    if D == 0:
        raise InvariantViolation("denominator of t vanished")
    t = div(pw(mul(w, u3) ^ mul(u ^ w2, z), 2), mul(u, D))
    s = mul(w, u2)
    if ctx.norm(t) == 1:
        raise InvariantViolation("t landed on U")
    if ctx.norm(s) != w2:
        raise InvariantViolation("s^(q+1) != w^2")
    L1 = lm.conj_plus(ctx, t)
    L2 = lm.conj_plus(ctx, s) @ lm.frobenius_power(ctx, 1)
    c0 = div(pw(u2 ^ z, 2), D)
    c1 = div(pw(u3 ^ z, 2), mul(u, D))
    c2 = div(pw(u3 ^ z, 2), D)
    c3 = div(mul(mul(u, mul(z, z)), pw(u ^ 1, 2)), D)
    return L1, L2, (c0, c1, c2, c3)


def prop27_witness(ctx: FieldCtx, u: int, z: int) -> EquivWitness:
    L1, L2, (c0, c1, c2, c3) = prop27_maps(ctx, u, z)
    xs = ctx.elements()
    F = L1(_gold(ctx, "G2", L2(xs)))
    q = ctx.q
    closed = (
        ctx.mul(c0, ctx.pow(xs, 3 * q)) ^ ctx.mul(c1, ctx.pow(xs, 2 * q + 1))
        ^ ctx.mul(c2, ctx.pow(xs, q + 2)) ^ ctx.mul(c3, ctx.pow(xs, 3))
    )
    if not np.array_equal(F, closed):
        raise InvariantViolation(f"closed-form coefficients disagree for u={u}, z={z}")
    k = KimCoeffs(*family_coeffs(ctx, u, z))
    # F = c0 f  =>  G2 = L1^-1 o c0 o f o L2^-1
    return _witness(ctx, "G2", L1.inverse() @ lm.scale(ctx, c0), L2.inverse(), k)


# -- a1/a2 equal to the conjugate of a3

def a3q_case(ctx: FieldCtx, k: KimCoeffs) -> ClassifyResult:
    a1, a2, a3 = k
    if a1 != ctx.mul(a2, ctx.frobenius_q(a3)):
        raise FieldError("a3q_case needs a1 = a2 a3^q")
    if not kt.is_apn_by_theorem(ctx, k):
        return ClassifyResult("NotAPN", route=["P28"])
    if a1 == 0 and a2 == 0:
        w = witness_g1_two_zero(ctx, k)
        return ClassifyResult("APN", "G1", w, ["P28", "P23"])
    raise InvariantViolation(f"{k}: a1/a2 = a3^q with a2 != 0 passed the APN test")


# -- driver

def classify(ctx: FieldCtx, k: KimCoeffs, debug: bool = False) -> ClassifyResult:
    if ctx.m < 4:
        raise kt.ScopeError("classification needs m >= 4")
    route: list[str] = []
    ident = lm.identity(ctx)
    A, B = ident, ident  # current = A o source o B
    cur = k

    def push(new, C, D):
        nonlocal cur, A, B
        if debug:
            _check_fragment(ctx, new, C, cur, D)
        cur, A, B = new, C @ A, B @ D

    if not cur.a1_in_subfield(ctx):
        route.append("Normalize")
        push(*kt.normalize_a1(ctx, cur))

    if not kt.is_apn_by_theorem(ctx, cur):
        return ClassifyResult("NotAPN", route=route)

    while True:
        a1, a2, a3 = cur
        if a2 == 0:
            break
        t = ctx.div(a1, a2)
        if t == ctx.frobenius_q(a3):
            route.append("P28")
            raise InvariantViolation(f"{k}: a1/a2 = a3^q with a2 != 0 passed the APN test")
        if ctx.in_U(t):
            if ctx.m % 2:
                raise InvariantViolation(f"{k}: a1/a2 on U for odd m passed the APN test")
            if cur.all_in_subfield(ctx):
                if recover_uz(ctx, cur) is not None:
                    log.info("%s: both unit-ratio branches apply, using the subfield one", k)
                route.append("P26-subfield")
                target, C, D, tag = _smallfield_fragment(ctx, cur)
                route.append(tag)
                return _finish(ctx, k, target, C @ A, B @ D, route)
            pair = recover_uz(ctx, cur)
            if pair is None:
                raise InvariantViolation(f"{k}: no (u, z) pair although a1/a2 is on U")
            route += ["P26-family", "P27"]
            L1, L2, (c0, *_) = prop27_maps(ctx, *pair)
            C = L1.inverse() @ lm.scale(ctx, c0)
            return _finish(ctx, k, "G2", C @ A, B @ L2.inverse(), route)
        route.append("P22")
        new, C, D = reduce_a2_zero(ctx, cur)
        push(new, C, D)

    a1, _, a3 = cur
    if a1 == 0 or a3 == 0:
        route.append("P23")
        C, D = _g1_two_zero_fragment(ctx, cur)
        return _finish(ctx, k, "G1", C @ A, B @ D, route)
    if not ctx.in_subfield(a3):
        raise InvariantViolation(f"{k}: a2 = 0 stratum with a3 outside F_q passed the APN test")
    route.append("P24" if kt.in_gamma1(ctx, cur) else "P25")
    target, C, D, tag = _smallfield_fragment(ctx, cur)
    route.append(tag)
    return _finish(ctx, k, target, C @ A, B @ D, route)


def _finish(ctx, source, target, L1, L2, route) -> ClassifyResult:
    w = _witness(ctx, target, L1, L2, source)
    return ClassifyResult("APN", target, w, route)
