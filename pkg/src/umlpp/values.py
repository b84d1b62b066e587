"""Runtime values.

Scalars map to Python natives (str, int, float, bool, datetime.date); money,
enumeration literals and object references get small wrapper types. Ordered
collections are plain tuples. Monetary amounts are decimal throughout; binary
floats never touch them.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from datetime import date
from decimal import Decimal, InvalidOperation

CURRENCY_RE = re.compile(r"^[A-Z]{3}$")


@dataclass(frozen=True, slots=True)
class Money:
    amount: Decimal
    currency: str

    def __post_init__(self):
        if not CURRENCY_RE.match(self.currency):
            raise ValueError(f"bad currency code {self.currency!r}")
        if not isinstance(self.amount, Decimal):
            raise ValueError("monetary amount must be a Decimal")

    @classmethod
    def parse(cls, amount: str, currency: str) -> "Money":
        try:
            dec = Decimal(amount)
        except InvalidOperation as exc:
            raise ValueError(f"bad decimal amount {amount!r}") from exc
        if not dec.is_finite():
            raise ValueError(f"bad decimal amount {amount!r}")
        return cls(dec, currency)

    @property
    def amount_str(self) -> str:
        # 'f' keeps the stored scale and never switches to scientific notation
        return format(self.amount, "f")

    def same_currency(self, other: "Money") -> bool:
        return self.currency == other.currency

    def __add__(self, other: "Money") -> "Money":
        return Money(self.amount + other.amount, self.currency)

    def __sub__(self, other: "Money") -> "Money":
        return Money(self.amount - other.amount, self.currency)

    def scaled(self, factor: int) -> "Money":
        return Money(self.amount * factor, self.currency)

    def __neg__(self) -> "Money":
        return Money(-self.amount, self.currency)

    def __str__(self) -> str:
        return f"{self.amount_str} {self.currency}"


@dataclass(frozen=True, slots=True)
class EnumValue:
    enumeration: str  # element id of the enumeration
    literal: str

    def __str__(self) -> str:
        return self.literal


@dataclass(frozen=True, slots=True)
class ObjectRef:
    object_id: str

    def __str__(self) -> str:
        return self.object_id


# A value is one of: str | int | float | bool | date | Money | EnumValue |
# ObjectRef | tuple (ordered bag of values)
Value = object


def is_value(v) -> bool:
    if isinstance(v, (str, bool, int, float, date, Money, EnumValue, ObjectRef)):
        return True
    return isinstance(v, tuple) and all(is_value(x) for x in v)


def values_equal(a, b) -> bool:
    """Value equality: numeric across int/float, everything else same-kind.

    bool is checked before int because Python treats True == 1.
    """
    if isinstance(a, bool) or isinstance(b, bool):
        return isinstance(a, bool) and isinstance(b, bool) and a == b
    if isinstance(a, (int, float)) and isinstance(b, (int, float)):
        return a == b
    if type(a) is not type(b):
        return False
    if isinstance(a, tuple):
        return len(a) == len(b) and all(values_equal(x, y) for x, y in zip(a, b))
    return a == b
