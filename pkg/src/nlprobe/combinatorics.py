"""Exact combinatorics of normal-ordering the quadrature power (a + a^dag)^zeta.

Everything here is integer or rational arithmetic; floats appear only in
the high-energy scaling law, which is a plain real-valued formula.
"""

from dataclasses import dataclass
from fractions import Fraction
from math import factorial

from .errors import DomainError

__all__ = [
    "OrderingCoeff",
    "normal_order_coeff",
    "coeff_row_sum",
    "amplitude_A",
    "scaling_B",
]


def _check_index_range(zeta, m, s):
    if zeta < 0 or m < 0 or s < 0:
        raise DomainError(f"indices must be non-negative, got zeta={zeta} m={m} s={s}")
    if m > zeta // 2:
        raise DomainError(f"contraction count m={m} exceeds floor(zeta/2)={zeta // 2}")
    if s > zeta - 2 * m:
        raise DomainError(f"creation power s={s} exceeds zeta-2m={zeta - 2 * m}")


def normal_order_coeff(zeta: int, m: int, s: int) -> Fraction:
    """Coefficient of (a^dag)^s a^(zeta-2m-s) in the normal ordering of (a+a^dag)^zeta.

    Equals zeta! / (2^m m! s! (zeta-2m-s)!), computed exactly. The value is
    always a positive integer (it counts operator pairings), but it is
    returned as a Fraction so callers can keep downstream sums exact.
    """
    _check_index_range(zeta, m, s)
    return Fraction(
        factorial(zeta),
        2**m * factorial(m) * factorial(s) * factorial(zeta - 2 * m - s),
    )


@dataclass(frozen=True)
class OrderingCoeff:
    """One term of the normal-ordered expansion, with its exact coefficient."""

    zeta: int
    m: int
    s: int
    value: Fraction

    @classmethod
    def make(cls, zeta: int, m: int, s: int) -> "OrderingCoeff":
        return cls(zeta, m, s, normal_order_coeff(zeta, m, s))


def coeff_row_sum(zeta: int, k: int) -> Fraction:
    """Sum over s of the ordering coefficients at fixed contraction count k.

    Closed form 2^(zeta-3k) zeta! / (k! (zeta-2k)!). The direct term-by-term
    sum is evaluated as well and must agree exactly; a mismatch would mean a
    broken coefficient table, so it is asserted rather than tolerated.
    """
    if k < 0 or zeta < 0 or k > zeta // 2:
        raise DomainError(f"row index k={k} out of range for zeta={zeta}")
    closed = Fraction(2) ** (zeta - 3 * k) * Fraction(
        factorial(zeta), factorial(k) * factorial(zeta - 2 * k)
    )
    direct = sum(
        (normal_order_coeff(zeta, k, s) for s in range(zeta - 2 * k + 1)),
        start=Fraction(0),
    )
    assert closed == direct, f"row-sum identity violated at zeta={zeta} k={k}"
    return closed


def amplitude_A(zeta: int) -> int:
    """Vacuum-limit amplitude entering the low-energy expansion of the bounds.

    (2 zeta)!/zeta! for odd zeta; the same minus [zeta!/(zeta/2)!]^2 for even
    zeta. Exact integer; grows past 64-bit range at zeta >= 11.
    """
    if zeta < 1:
        raise DomainError("amplitude_A requires zeta >= 1")
    value = factorial(2 * zeta) // factorial(zeta)
    if zeta % 2 == 0:
        value -= (factorial(zeta) // factorial(zeta // 2)) ** 2
    return value


def scaling_B(zeta: int, gamma: float) -> float:
    """Prefactor of the leading N^(3 zeta - 2) growth of the coupling QFI.

    B_gamma(zeta) = 4^(3 zeta - 1) zeta^2 (1-gamma)^(zeta-1) gamma^(2 zeta - 1),
    with the 0^0 = 1 convention at the gamma endpoints.
    """
    if zeta < 1:
        raise DomainError("scaling_B requires zeta >= 1")
    if not 0.0 <= gamma <= 1.0:
        raise DomainError(f"gamma={gamma} outside [0, 1]")
    return 4.0 ** (3 * zeta - 1) * zeta**2 * (1.0 - gamma) ** (zeta - 1) * gamma ** (2 * zeta - 1)
