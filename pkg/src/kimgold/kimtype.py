"""Kim-type functions f(x) = x^(3q) + a1 x^(2q+1) + a2 x^(q+2) + a3 x^3.

The theta/Gamma helpers are written once against ``ctx.mul`` and XOR so the
same code runs on single coefficient triples and on numpy arrays of them.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from kimgold import linmap
from kimgold.gf2field import FieldCtx, FieldError


class ScopeError(FieldError):
    """The Gamma characterization does not apply to this input."""


@dataclass(frozen=True)
class KimCoeffs:
    a1: int
    a2: int
    a3: int

    def a1_in_subfield(self, ctx: FieldCtx) -> bool:
        return ctx.in_subfield(self.a1)

    def all_in_subfield(self, ctx: FieldCtx) -> bool:
        return all(ctx.in_subfield(a) for a in (self.a1, self.a2, self.a3))

    def to_json(self) -> dict:
        return {"a1": self.a1, "a2": self.a2, "a3": self.a3}

    @classmethod
    def from_json(cls, data: dict) -> KimCoeffs:
        def conv(v):
            return v if isinstance(v, int) else int(v, 0)

        return cls(conv(data["a1"]), conv(data["a2"]), conv(data["a3"]))

    def __iter__(self):
        return iter((self.a1, self.a2, self.a3))


class Thetas(NamedTuple):
    t1: object
    t2: object
    t3: object
    t4: object


def eval_kim(ctx: FieldCtx, k: KimCoeffs, x):
    xb = ctx.frobenius_q(x)
    xb2 = ctx.mul(xb, xb)
    x2 = ctx.mul(x, x)
    return (
        ctx.mul(xb2, xb)
        ^ ctx.mul(k.a1, ctx.mul(xb2, x))
        ^ ctx.mul(k.a2, ctx.mul(xb, x2))
        ^ ctx.mul(k.a3, ctx.mul(x2, x))
    )


def theta_values(ctx: FieldCtx, a1, a2, a3) -> Thetas:
    c = ctx.frobenius_q
    a1sq = ctx.mul(a1, a1)
    n2 = ctx.mul(a2, c(a2))
    n3 = ctx.mul(a3, c(a3))
    t1 = 1 ^ a1sq ^ n2 ^ n3
    t2 = a1 ^ ctx.mul(c(a2), a3)
    t3 = c(a2) ^ ctx.mul(a1, c(a3))
    t4 = a1sq ^ n2
    return Thetas(t1, t2, t3, t4)


def thetas(ctx: FieldCtx, k: KimCoeffs) -> Thetas:
    th = theta_values(ctx, k.a1, k.a2, k.a3)
    if ctx.in_subfield(k.a1) and not (ctx.in_subfield(th.t1) and ctx.in_subfield(th.t4)):
        raise FieldError("theta1/theta4 left F_q although a1 is in F_q")
    return th


class GammaReport(NamedTuple):
    thetas: Thetas
    trace_ok: object
    gamma1_poly: object
    gamma2_poly: object
    gamma1: object
    gamma2: object


def gamma_report(ctx: FieldCtx, a1, a2, a3) -> GammaReport:
    """Evaluate both Gamma conditions; works elementwise on arrays.

    Requires a1 in F_q. The trace argument theta2^(q+1)/theta1^2 is checked to
    lie in F_q before Tr_m is taken.
    """
    if np.any(np.asarray(a1) >> ctx.m):
        raise ScopeError("Gamma sets need a1 in F_q; normalize first")
    mul, c = ctx.mul, ctx.frobenius_q
    t1, t2, t3, t4 = th = theta_values(ctx, a1, a2, a3)
    t2b, t3b = c(t2), c(t3)
    t1sq = mul(t1, t1)
    n2 = mul(t2, t2b)
    cross = mul(mul(t2, t2), t3) ^ mul(mul(t2b, t2b), t3b)
    g1 = mul(t1sq, t4) ^ mul(t1, n2) ^ cross
    g2 = mul(t1sq, t3) ^ mul(t1, mul(t2b, t2b)) ^ cross

    nz = t1 != 0
    if isinstance(nz, np.ndarray):
        safe = np.where(nz, t1sq, 1)
        arg = np.where(nz, ctx.div(n2, safe), 0)
    else:
        arg = ctx.div(n2, t1sq) if nz else 0
    if np.any(np.asarray(arg) >> ctx.m):
        raise FieldError("trace argument left F_q")
    trace_ok = nz & (ctx.trace_m(arg) == 0)
    return GammaReport(th, trace_ok, g1, g2, trace_ok & (g1 == 0), trace_ok & (g2 == 0))


def in_gamma1(ctx: FieldCtx, k: KimCoeffs) -> bool:
    return bool(gamma_report(ctx, *k).gamma1)


def in_gamma2(ctx: FieldCtx, k: KimCoeffs) -> bool:
    return bool(gamma_report(ctx, *k).gamma2)


def apn_mask(ctx: FieldCtx, rep: GammaReport):
    if ctx.m % 2 == 0:
        return rep.gamma1 | rep.gamma2
    return rep.gamma1


def _check_scope(ctx: FieldCtx):
    if ctx.m < 4:
        raise ScopeError("the Gamma characterization needs m >= 4; use the DDT oracle")


def is_apn_by_theorem(ctx: FieldCtx, k: KimCoeffs) -> bool:
    _check_scope(ctx)
    return bool(apn_mask(ctx, gamma_report(ctx, *k)))


def is_apn_by_theorem_array(ctx: FieldCtx, a1, a2, a3) -> np.ndarray:
    _check_scope(ctx)
    return apn_mask(ctx, gamma_report(ctx, a1, a2, a3))


def subfield_S(ctx: FieldCtx, a1, a2, a3):
    mul = ctx.mul
    return mul(a1, a1) ^ mul(a1, a3) ^ mul(a2, a2) ^ a2


def subfield_T(ctx: FieldCtx, a1, a2, a3):
    mul = ctx.mul
    return mul(a1, a3) ^ a2 ^ mul(a3, a3) ^ 1


def substitute(ctx: FieldCtx, k: KimCoeffs, c: int) -> KimCoeffs:
    """Coefficients of x -> c^(-3q) f(c x)."""
    y = ctx.pow(c, 1 - ctx.q)
    return KimCoeffs(
        ctx.mul(k.a1, y),
        ctx.mul(k.a2, ctx.mul(y, y)),
        ctx.mul(k.a3, ctx.pow(y, 3)),
    )


def normalize_a1(ctx: FieldCtx, k: KimCoeffs) -> tuple[KimCoeffs, linmap.LinMap, linmap.LinMap]:
    """Move a1 into F_q by a scaling substitution.

    Returns (k', L1, L2) with f'(x) = L1(f(L2(x))) for every x, checked
    exhaustively before returning.
    """
    if ctx.in_subfield(k.a1):
        ident = linmap.identity(ctx)
        return k, ident, ident
    x, y = ctx.polar_decompose(k.a1)
    # c^(1-q) = 1/y sends a1 = x y to x
    c = ctx.lift_q_minus_1(y)
    k2 = substitute(ctx, k, c)
    L1 = linmap.scale(ctx, ctx.inv(ctx.pow(c, 3 * ctx.q)))
    L2 = linmap.scale(ctx, c)
    xs = ctx.elements()
    if k2.a1 != x or not np.array_equal(eval_kim(ctx, k2, xs), L1(eval_kim(ctx, k, L2(xs)))):
        raise FieldError("a1 normalization failed pointwise verification")
    return k2, L1, L2
