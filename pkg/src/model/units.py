"""Semantic unit types.

Log-domain (dB, dBm) and linear quantities are kept apart with ``NewType``
so a type checker rejects passing a dBm value where watts are expected.
Conversions between the two domains only happen through the helpers below.
"""

import math
from typing import NewType, Union

import numpy as np

Db = NewType("Db", float)
Dbm = NewType("Dbm", float)
Watts = NewType("Watts", float)
Joules = NewType("Joules", float)
LinearRatio = NewType("LinearRatio", float)
Meters = NewType("Meters", float)
Seconds = NewType("Seconds", float)
MetersPerSecond = NewType("MetersPerSecond", float)
Degrees = NewType("Degrees", float)
Radians = NewType("Radians", float)

# array forms of a log-domain power, for vectorised link evaluation
DbmLike = Union[Dbm, np.ndarray]


def dbm_to_watts(power: Dbm) -> Watts:
    return Watts(10.0 ** ((power - 30.0) / 10.0))


def watts_to_dbm(power: Watts) -> Dbm:
    if power <= 0.0:
        return Dbm(-math.inf)
    return Dbm(10.0 * math.log10(power) + 30.0)


def db_to_linear(value: Db) -> LinearRatio:
    return LinearRatio(10.0 ** (value / 10.0))


def linear_to_db(value: LinearRatio) -> Db:
    if value <= 0.0:
        return Db(-math.inf)
    return Db(10.0 * math.log10(value))


def kmh_to_ms(speed_kmh: float) -> MetersPerSecond:
    return MetersPerSecond(speed_kmh / 3.6)
