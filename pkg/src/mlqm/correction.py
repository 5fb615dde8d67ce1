"""Numbers of the form ``base * (1 + epsilon)`` with the correction kept apart.

Quantum-gravity corrections are many orders of magnitude below the unit
roundoff of a double at 1.0, so ``1.0 + 1e-40 == 1.0``. Keeping ``epsilon``
in its own slot preserves it exactly through products and scalings.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from numbers import Real


@dataclass(frozen=True)
class CorrectionValue:
    base: float
    epsilon: float = 0.0

    def __post_init__(self) -> None:
        if not (math.isfinite(self.base) and math.isfinite(self.epsilon)):
            raise ValueError(f"non-finite CorrectionValue: {self.base!r}, {self.epsilon!r}")
        object.__setattr__(self, "base", float(self.base))
        object.__setattr__(self, "epsilon", float(self.epsilon))

    @classmethod
    def unity(cls) -> CorrectionValue:
        return cls(1.0, 0.0)

    @property
    def value(self) -> float:
        """Collapsed float; drops ``epsilon`` whenever it is below roundoff."""
        return self.base * (1.0 + self.epsilon)

    @property
    def excess(self) -> float:
        """``value - base`` evaluated without cancellation."""
        return self.base * self.epsilon

    def __mul__(self, other: CorrectionValue | Real) -> CorrectionValue:
        if isinstance(other, CorrectionValue):
            e1, e2 = self.epsilon, other.epsilon
            return CorrectionValue(self.base * other.base, e1 + e2 + e1 * e2)
        if isinstance(other, Real):
            return CorrectionValue(self.base * float(other), self.epsilon)
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, other: CorrectionValue | Real) -> CorrectionValue:
        if isinstance(other, CorrectionValue):
            # (1+e1)/(1+e2) - 1 = (e1 - e2)/(1 + e2)
            eps = (self.epsilon - other.epsilon) / (1.0 + other.epsilon)
            return CorrectionValue(self.base / other.base, eps)
        if isinstance(other, Real):
            return CorrectionValue(self.base / float(other), self.epsilon)
        return NotImplemented

    def __abs__(self) -> CorrectionValue:
        return CorrectionValue(abs(self.base), self.epsilon)

    def __neg__(self) -> CorrectionValue:
        return CorrectionValue(-self.base, self.epsilon)

    def ratio_minus_one(self, other: CorrectionValue) -> float:
        """``self/other - 1`` for values sharing the same base."""
        if self.base != other.base:
            return (self / other).value - 1.0
        return (self / other).epsilon

    def as_pair(self) -> tuple[str, str]:
        """Both slots in scientific notation with 17 significant digits."""
        return format_sci(self.base), format_sci(self.epsilon)

    def to_dict(self) -> dict[str, str]:
        base, eps = self.as_pair()
        return {"base": base, "epsilon": eps}

    def __str__(self) -> str:
        base, eps = self.as_pair()
        return f"{base} * (1 + {eps})"


def format_sci(x: float) -> str:
    return format(float(x), ".16e")
