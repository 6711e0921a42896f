import math
from dataclasses import dataclass
from enum import Enum
from typing import Union

import numpy as np

from model.antenna import AntennaPattern
from model.errors import DegenerateInputError, DomainError
from model.units import Dbm, DbmLike, Degrees

ArrayLike = Union[float, np.ndarray]

THERMAL_NOISE_DENSITY_DBM_HZ = -174.0


class SnrModel(Enum):
    """How received and noise power combine into an SNR.

    PAPER_LITERAL divides the two dBm values as numbers; PHYSICAL uses
    the linear power ratio.
    """
    PAPER_LITERAL = "paper-literal"
    PHYSICAL = "physical"


@dataclass(frozen=True)
class LinkBudget:
    pattern: AntennaPattern
    w: float
    n_pl: float
    wavelength: float
    b: float
    nf: float

    def __post_init__(self):
        if self.w < 0:
            raise DomainError(f"shadowing margin must be >= 0 dB, got {self.w}")
        if not self.n_pl > 0:
            raise DomainError(f"path-loss exponent must be positive, got {self.n_pl}")
        if not self.wavelength > 0:
            raise DomainError(f"wavelength must be positive, got {self.wavelength}")
        if not self.b > 0:
            raise DomainError(f"bandwidth must be positive, got {self.b}")
        if self.nf < 0:
            raise DomainError(f"noise figure must be >= 0 dB, got {self.nf}")

    @classmethod
    def from_parameters(
        cls,
        theta_3db: float,
        shadowing: float,
        path_loss_exp: float,
        wavelength: float,
        bandwidth: float,
        noise_figure: float,
    ) -> "LinkBudget":
        return cls(
            pattern=AntennaPattern.from_beamwidth(Degrees(theta_3db)),
            w=shadowing,
            n_pl=path_loss_exp,
            wavelength=wavelength,
            b=bandwidth,
            nf=noise_figure,
        )


def noise_power_dbm(budget: LinkBudget) -> Dbm:
    return Dbm(THERMAL_NOISE_DENSITY_DBM_HZ + 10.0 * math.log10(budget.b) + budget.nf)


def _check_distance(d: ArrayLike) -> None:
    if np.any(np.asarray(d) <= 0):
        raise DomainError(f"distance must be positive, got {d}")


def path_gain_db(budget: LinkBudget, d: ArrayLike) -> ArrayLike:
    """Everything in the received power except the transmit power, TX and RX gains at G0."""
    _check_distance(d)
    return (
        2.0 * budget.pattern.g0
        - budget.w
        + 10.0 * budget.n_pl * np.log10(budget.wavelength / (4.0 * math.pi * np.asarray(d, dtype=float)))
    )


def rx_power_dbm(budget: LinkBudget, ptx_dbm: DbmLike, d: ArrayLike) -> DbmLike:
    result = ptx_dbm + path_gain_db(budget, d)
    return Dbm(float(result)) if np.ndim(result) == 0 else result


def snr(budget: LinkBudget, model: SnrModel, ptx_dbm: DbmLike, d: ArrayLike) -> ArrayLike:
    noise = noise_power_dbm(budget)
    received = rx_power_dbm(budget, ptx_dbm, d)
    if model is SnrModel.PAPER_LITERAL:
        if noise == 0.0:
            raise DegenerateInputError("noise power is exactly 0 dBm; the dB-ratio SNR is undefined")
        value = np.asarray(received) / noise
    else:
        value = 10.0 ** ((np.asarray(received) - noise) / 10.0)
    return float(value) if np.ndim(value) == 0 else value


def rate(snr_value: ArrayLike) -> ArrayLike:
    """Unitless Shannon rate log2(1 + snr); bandwidth is not applied."""
    values = np.asarray(snr_value, dtype=float)
    if np.any(values <= -1.0):
        raise DomainError(
            f"snr <= -1 has no rate (min snr {float(np.min(values))}); "
            "the operating point left the model's valid region"
        )
    result = np.log2(1.0 + values)
    return float(result) if np.ndim(result) == 0 else result


def tx_power_for_snr(budget: LinkBudget, model: SnrModel, snr_target: ArrayLike, d: ArrayLike) -> DbmLike:
    """Transmit power (dBm) that produces ``snr_target`` at distance ``d``.

    In physical mode a zero target maps to -inf dBm, i.e. 0 W.
    """
    noise = noise_power_dbm(budget)
    gain = path_gain_db(budget, d)
    target = np.asarray(snr_target, dtype=float)
    if model is SnrModel.PAPER_LITERAL:
        if noise == 0.0:
            raise DegenerateInputError("noise power is exactly 0 dBm; the dB-ratio SNR is undefined")
        power = target * noise - gain
    else:
        if np.any(target < 0):
            raise DomainError("a physical SNR target must be non-negative")
        with np.errstate(divide="ignore"):
            power = 10.0 * np.log10(target) + noise - gain
    return Dbm(float(power)) if np.ndim(power) == 0 else power
