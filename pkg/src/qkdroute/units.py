"""Exact conversion between wire-format kbit/s values and internal rate units.

All routing arithmetic runs on integers so that deficiency comparisons and
step accounting are exact.  A rate unit is ``resolution_bps`` bits per second
(1 bit/s unless configured otherwise); input files carry kbit/s.
"""

from __future__ import annotations

from dataclasses import dataclass
from decimal import ROUND_FLOOR, Decimal, InvalidOperation, localcontext

_KBPS = Decimal(1000)


def as_decimal(value: object, field: str = "value") -> Decimal:
    """Coerce a JSON-ish numeric value to Decimal without binary float drift."""
    if isinstance(value, Decimal):
        return value
    if isinstance(value, bool):
        raise TypeError(f"{field} must be a number, got bool")
    if isinstance(value, int):
        return Decimal(value)
    if isinstance(value, float):
        # repr of a float is its shortest decimal form, which is what the
        # user wrote in all practical cases
        return Decimal(str(value))
    if isinstance(value, str):
        try:
            return Decimal(value)
        except InvalidOperation as exc:
            raise ValueError(f"{field} is not a number: {value!r}") from exc
    raise TypeError(f"{field} must be a number, got {type(value).__name__}")


@dataclass(frozen=True)
class UnitScale:
    """Fixed base resolution shared by every rate in one network description."""

    resolution_bps: Decimal = Decimal(1)

    def __post_init__(self) -> None:
        res = as_decimal(self.resolution_bps, "resolution_bps")
        if res <= 0:
            raise ValueError(f"resolution_bps must be positive, got {res}")
        object.__setattr__(self, "resolution_bps", res)

    def units_from_kbps(self, value: object, field: str = "rate") -> int:
        """Convert a kbit/s value to integer units, rejecting remainders.

        Raises:
            ValueError: if the value is not an exact multiple of the
                resolution (such inputs would silently corrupt the integer
                bookkeeping downstream).
        """
        dec = as_decimal(value, field)
        with localcontext() as ctx:
            ctx.prec = 50
            units = dec * _KBPS / self.resolution_bps
        if units != units.to_integral_value():
            raise ValueError(
                f"{field} {dec} kbit/s is not representable at a resolution "
                f"of {self.resolution_bps} bit/s"
            )
        return int(units)

    def kbps(self, units: int) -> Decimal:
        return Decimal(int(units)) * self.resolution_bps / _KBPS

    def kbps_str(self, units: int) -> str:
        """Render units as a trimmed decimal kbit/s string, e.g. ``0.1``."""
        text = format(self.kbps(units), "f")
        if "." in text:
            text = text.rstrip("0").rstrip(".")
        if text in ("", "-0"):
            text = "0"
        return text

    def bit_count(self, units: int, tau: Decimal) -> int:
        """Number of whole bits produced at ``units`` over ``tau`` seconds."""
        bits = Decimal(int(units)) * self.resolution_bps * tau
        return int(bits.to_integral_value(rounding=ROUND_FLOOR))

    def bits_exact(self, units: int, tau: Decimal) -> bool:
        bits = Decimal(int(units)) * self.resolution_bps * tau
        return bits == bits.to_integral_value()
