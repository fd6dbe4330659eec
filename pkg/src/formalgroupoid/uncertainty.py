"""Numbers carrying first-order error contributions.

A ``Measured`` value is ``value + sum_k e_k * xi_k`` where the ``xi_k`` are
independent unit-variance errors, one per estimated weight.  Arithmetic keeps
the ``e_k`` to first order, so the standard error of any polynomial
expression in estimated weights is ``sqrt(sum e_k**2)``.
"""

import math
from fractions import Fraction


class Measured:
    __slots__ = ("value", "errs")

    def __init__(self, value, errs=None):
        self.value = value
        self.errs = {k: e for k, e in (errs or {}).items() if e != 0}

    @classmethod
    def source(cls, key, value, stderr):
        """An independent estimate identified by ``key``."""
        return cls(value, {key: stderr} if stderr else None)

    @property
    def stderr(self):
        return math.sqrt(sum(float(e) ** 2 for e in self.errs.values()))

    def _merge(self, other, sign=1):
        errs = dict(self.errs)
        for k, e in other.errs.items():
            errs[k] = errs.get(k, 0) + sign * e
        return errs

    def __add__(self, other):
        if isinstance(other, Measured):
            return Measured(self.value + other.value, self._merge(other))
        return Measured(self.value + other, self.errs)

    __radd__ = __add__

    def __neg__(self):
        return Measured(-self.value, {k: -e for k, e in self.errs.items()})

    def __sub__(self, other):
        if isinstance(other, Measured):
            return Measured(self.value - other.value, self._merge(other, -1))
        return Measured(self.value - other, self.errs)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Measured):
            errs = {k: other.value * e for k, e in self.errs.items()}
            for k, e in other.errs.items():
                errs[k] = errs.get(k, 0) + self.value * e
            return Measured(self.value * other.value, errs)
        return Measured(self.value * other, {k: e * other for k, e in self.errs.items()})

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Measured):
            raise TypeError("division by a measured quantity is not supported")
        if isinstance(other, int):
            other = Fraction(other)
        return Measured(self.value / other, {k: e / other for k, e in self.errs.items()})

    def __eq__(self, other):
        if isinstance(other, Measured):
            return self.value == other.value and self.errs == other.errs
        return not self.errs and self.value == other

    __hash__ = None

    def __float__(self):
        return float(self.value)

    def __abs__(self):
        return abs(self.value)

    def __repr__(self):
        return f"Measured({float(self.value):.6g} +- {self.stderr:.2g})"


def value_of(c):
    return c.value if isinstance(c, Measured) else c


def stderr_of(c):
    return c.stderr if isinstance(c, Measured) else 0.0


def within(c, k=5.0, floor=0.0):
    """True when ``|value| <= k * stderr + floor``."""
    return abs(float(value_of(c))) <= k * stderr_of(c) + floor
