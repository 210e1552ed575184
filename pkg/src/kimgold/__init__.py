"""Kim-type APN functions over F_{q^2} and explicit affine equivalences to Gold functions."""

from kimgold.gf2field import FieldCtx, FieldError, make_field
from kimgold.kimtype import KimCoeffs, is_apn_by_theorem
from kimgold.equiv import ClassifyResult, InvariantViolation, classify

__all__ = [
    "FieldCtx", "FieldError", "make_field", "KimCoeffs", "is_apn_by_theorem",
    "ClassifyResult", "InvariantViolation", "classify",
]
__version__ = "0.1.0"
