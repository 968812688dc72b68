"""Forward-mode complex dual numbers: a value paired with d(value)/d(parameter)."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True, slots=True)
class DualComplex:
    value: complex
    deriv: complex = 0j

    @classmethod
    def variable(cls, x) -> "DualComplex":
        return cls(complex(x), 1 + 0j)

    @staticmethod
    def lift(x) -> "DualComplex":
        return x if isinstance(x, DualComplex) else DualComplex(complex(x), 0j)

    def __add__(self, other):
        o = DualComplex.lift(other)
        return DualComplex(self.value + o.value, self.deriv + o.deriv)

    __radd__ = __add__

    def __sub__(self, other):
        o = DualComplex.lift(other)
        return DualComplex(self.value - o.value, self.deriv - o.deriv)

    def __rsub__(self, other):
        return DualComplex.lift(other) - self

    def __neg__(self):
        return DualComplex(-self.value, -self.deriv)

    def __mul__(self, other):
        o = DualComplex.lift(other)
        return DualComplex(self.value * o.value, self.deriv * o.value + self.value * o.deriv)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = DualComplex.lift(other)
        if o.value == 0:
            raise ZeroDivisionError("dual division by zero")
        q = self.value / o.value
        return DualComplex(q, (self.deriv - q * o.deriv) / o.value)

    def __rtruediv__(self, other):
        return DualComplex.lift(other) / self

    def __pow__(self, k):
        if not isinstance(k, int):
            raise TypeError("only integer powers are supported")
        if k < 0:
            return 1 / (self ** -k)
        result = DualComplex(1 + 0j)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __abs__(self):
        return abs(self.value)

    def __complex__(self):
        return complex(self.value)


def polyval(coeffs, x):
    """Horner evaluation with ascending ``coeffs``; entries and ``x`` may be dual."""
    acc = DualComplex.lift(0)
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc
