"""Exact-decimal arithmetic shared by the store, the engine and the JSON codec.

money and percent are scaled decimals with at most 6 fractional digits.
Multiplication and division round half-even back to 6 digits; addition and
subtraction are exact (the scale cannot grow).
"""

from __future__ import annotations

from decimal import ROUND_HALF_EVEN, Decimal, localcontext

PLACES = 6
_QUANTUM = Decimal(1).scaleb(-PLACES)


def quantize(d: Decimal) -> Decimal:
    """Round half-even to the 6-fractional-digit grid."""
    return d.quantize(_QUANTUM, rounding=ROUND_HALF_EVEN)


def fits_precision(d: Decimal) -> bool:
    """True when d is representable with at most 6 fractional digits."""
    if not d.is_finite():
        return False
    return d == quantize(d)


def exact_div(numerator: Decimal, denominator: Decimal) -> Decimal:
    """Divide and round half-even to 6 fractional digits."""
    with localcontext() as ctx:
        ctx.prec = 34
        return quantize(numerator / denominator)


def int_div(numerator: int, denominator: int) -> int:
    """Exact quotient rounded half-even to an integer (not C truncation)."""
    with localcontext() as ctx:
        ctx.prec = 34
        q = Decimal(numerator) / Decimal(denominator)
    return int(q.to_integral_value(rounding=ROUND_HALF_EVEN))


def format_minimal(d: Decimal) -> str:
    """Fixed-point rendering with trailing zeros stripped ("0.03", "75", "0.5")."""
    s = f"{d:f}"
    if "." in s:
        s = s.rstrip("0").rstrip(".")
    if s in ("-0", ""):
        s = "0"
    return s


def format_money(d: Decimal) -> str:
    """Money rendering: at least two fractional digits, minimal beyond that.

    12345 -> "12345.00", 1.5 -> "1.50", 1.2345 -> "1.2345".
    """
    s = format_minimal(d)
    if "." not in s:
        return s + ".00"
    fraction = len(s) - s.index(".") - 1
    if fraction == 1:
        return s + "0"
    return s
