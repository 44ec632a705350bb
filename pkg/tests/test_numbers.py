from __future__ import annotations

from decimal import Decimal

from hypothesis import given, strategies as st

from regula import numbers


def test_format_minimal_strips_trailing_zeros():
    assert numbers.format_minimal(Decimal("0.030000")) == "0.03"
    assert numbers.format_minimal(Decimal("75.00")) == "75"
    assert numbers.format_minimal(Decimal("0.5")) == "0.5"
    assert numbers.format_minimal(Decimal("-0.00")) == "0"
    assert numbers.format_minimal(Decimal("100")) == "100"


def test_format_money_keeps_two_digits_minimum():
    assert numbers.format_money(Decimal("12345")) == "12345.00"
    assert numbers.format_money(Decimal("75.00")) == "75.00"
    assert numbers.format_money(Decimal("1.5")) == "1.50"
    assert numbers.format_money(Decimal("1.2345")) == "1.2345"
    assert numbers.format_money(Decimal("1.230000")) == "1.23"
    assert numbers.format_money(Decimal("-3.1")) == "-3.10"


def test_quantize_is_half_even():
    assert numbers.quantize(Decimal("0.0000005")) == Decimal("0")
    assert numbers.quantize(Decimal("0.0000015")) == Decimal("0.000002")
    assert numbers.quantize(Decimal("0.0000025")) == Decimal("0.000002")


def test_int_div_rounds_half_even():
    assert numbers.int_div(7, 2) == 4
    assert numbers.int_div(5, 2) == 2
    assert numbers.int_div(-5, 2) == -2
    assert numbers.int_div(6, 3) == 2


def test_fits_precision():
    assert numbers.fits_precision(Decimal("1.2345678")) is False
    assert numbers.fits_precision(Decimal("1.234567")) is True
    assert numbers.fits_precision(Decimal("1.2300000")) is True  # value fits after trailing zeros


_decimals6 = st.integers(min_value=-(10**12), max_value=10**12).map(
    lambda n: Decimal(n).scaleb(-6)
)


@given(_decimals6)
def test_minimal_format_parses_back_to_the_same_value(d):
    assert Decimal(numbers.format_minimal(d)) == d


@given(_decimals6)
def test_money_format_parses_back_to_the_same_value(d):
    text = numbers.format_money(d)
    assert Decimal(text) == d
    fraction = text.rsplit(".", 1)[1]
    assert 2 <= len(fraction) <= 6
