"""Forward-mode dual numbers over the complex field."""

from __future__ import annotations

from dataclasses import dataclass
from numbers import Number


@dataclass(frozen=True)
class DualComplex:
    """``value + deriv * eps`` with ``eps**2 = 0``."""

    value: complex
    deriv: complex = 0j

    @staticmethod
    def lift(x) -> "DualComplex":
        return x if isinstance(x, DualComplex) else DualComplex(complex(x), 0j)

    def __add__(self, other):
        if isinstance(other, DualComplex):
            return DualComplex(self.value + other.value, self.deriv + other.deriv)
        if isinstance(other, Number):
            return DualComplex(self.value + other, self.deriv)
        return NotImplemented

    __radd__ = __add__

    def __neg__(self):
        return DualComplex(-self.value, -self.deriv)

    def __sub__(self, other):
        if isinstance(other, (DualComplex, Number)):
            return self + (-other)
        return NotImplemented

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, DualComplex):
            return DualComplex(self.value * other.value, self.value * other.deriv + self.deriv * other.value)
        if isinstance(other, Number):
            return DualComplex(self.value * other, self.deriv * other)
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Number):
            return DualComplex(self.value / other, self.deriv / other)
        if not isinstance(other, DualComplex):
            return NotImplemented
        if other.value == 0:
            raise ZeroDivisionError("dual division by a number with zero value part")
        v = self.value / other.value
        return DualComplex(v, (self.deriv - v * other.deriv) / other.value)

    def __rtruediv__(self, other):
        return DualComplex.lift(other) / self

    def __pow__(self, k: int):
        if not isinstance(k, int):
            return NotImplemented
        if k < 0:
            return 1 / (self**-k)
        out = DualComplex(1 + 0j)
        for _ in range(k):
            out = out * self
        return out

    def __repr__(self) -> str:
        return f"{self.value} + {self.deriv}eps"
