"""Physical constants in natural units (hbar = c = 1, energies in GeV)."""

from __future__ import annotations

from dataclasses import dataclass

PLANCK_MASS_GEV = 1.220890e19


@dataclass(frozen=True)
class PhysicalConstants:
    m_p_GeV: float = PLANCK_MASS_GEV
    hbar: float = 1.0
    c: float = 1.0

    def __post_init__(self) -> None:
        if not self.m_p_GeV > 0:
            raise ValueError(f"Planck mass must be positive, got {self.m_p_GeV}")
        if self.hbar != 1.0 or self.c != 1.0:
            raise ValueError("only natural units (hbar = c = 1) are supported")

    def dimensionless_u(self, pi_GeV):
        """Momentum magnitude(s) in GeV to ``u = pi^2 / (m_p c)^2``."""
        return (pi_GeV / self.m_p_GeV) ** 2


DEFAULT_CONSTANTS = PhysicalConstants()
