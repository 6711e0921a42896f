"""Directional antenna: Gaussian main lobe in linear scale, constant sidelobes.

All angles in this module are in degrees, the unit the gain formulas are
written in. Gains are in dB.
"""

import math
from dataclasses import dataclass

from model.errors import DomainError
from model.units import Db, Degrees

MAIN_LOBE_FACTOR = 2.6
HALF_POWER_DROP_DB = 3.01


@dataclass(frozen=True)
class AntennaPattern:
    theta_3db: float
    g0: float
    g_sl: float
    theta_ml: float

    def __post_init__(self):
        if not 0.0 < self.theta_3db <= 180.0:
            raise DomainError(f"theta_3db must lie in (0, 180] degrees, got {self.theta_3db}")
        if not self.g0 > self.g_sl:
            raise DomainError(f"maximum gain {self.g0} dB must exceed sidelobe gain {self.g_sl} dB")
        if not math.isclose(self.theta_ml, MAIN_LOBE_FACTOR * self.theta_3db, rel_tol=1e-12):
            raise DomainError("theta_ml must equal 2.6 * theta_3db")

    @classmethod
    def from_beamwidth(cls, theta_3db: float) -> "AntennaPattern":
        return cls(
            theta_3db=theta_3db,
            g0=max_gain(Degrees(theta_3db)),
            g_sl=sidelobe_gain(Degrees(theta_3db)),
            theta_ml=MAIN_LOBE_FACTOR * theta_3db,
        )


def max_gain(theta_3db: Degrees) -> Db:
    if not 0.0 < theta_3db <= 180.0:
        raise DomainError(f"theta_3db must lie in (0, 180] degrees, got {theta_3db}")
    return Db(10.0 * math.log10((1.6162 / math.sin(math.radians(theta_3db) / 2.0)) ** 2))


def sidelobe_gain(theta_3db: Degrees) -> Db:
    # natural log of the beamwidth expressed in degrees
    if not theta_3db > 0.0:
        raise DomainError(f"theta_3db must be positive, got {theta_3db}")
    return Db(-0.4111 * math.log(theta_3db) - 10.579)


def gain_at(pattern: AntennaPattern, theta: Degrees) -> Db:
    """Gain at off-boresight angle ``theta``; callers pass |theta|.

    The main-lobe branch is closed on the right, so theta = theta_ml/2 still
    uses it.
    """
    if not 0.0 <= theta <= 180.0:
        raise DomainError(f"theta must lie in [0, 180] degrees, got {theta}")
    if theta <= pattern.theta_ml / 2.0:
        return Db(pattern.g0 - HALF_POWER_DROP_DB * (2.0 * theta / pattern.theta_3db) ** 2)
    return Db(pattern.g_sl)


def discontinuity_gap(pattern: AntennaPattern) -> Db:
    """Main-lobe branch value at theta_ml/2 minus the sidelobe level."""
    edge = pattern.g0 - HALF_POWER_DROP_DB * MAIN_LOBE_FACTOR ** 2
    return Db(edge - pattern.g_sl)
