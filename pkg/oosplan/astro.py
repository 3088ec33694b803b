"""Phasing maneuvers on a circular orbit and impulsive propellant accounting.

A servicer changes longitude on its circular orbit by entering a phasing orbit
of semi-major axis ``a``, completing ``k1`` revolutions on it while the target
slot completes ``alpha + 2*pi*k2`` radians, then circularizing again.
"""

import math

from dataclasses import dataclass
from typing import Iterator

from oosplan.exceptions import NoFeasibleTransfer

MU_EARTH: float = 398600.4418
"""Earth gravitational parameter, km^3/s^2."""
G0: float = 9.80665
"""Standard gravity, m/s^2."""
R_EARTH: float = 6378.137
R_GEO: float = 42164.0
DEFAULT_R_CRIT: float = R_EARTH + 2000.0
"""Phasing orbits must keep their perigee above the low Earth orbit belt."""

SECONDS_PER_DAY: float = 86400.0
TWO_PI: float = 2.0 * math.pi


@dataclass(frozen=True)
class OrbitGeometry:
    """
    Circular orbit shared by customers, depots and servicers.

    :param r: Orbit radius, km.
    :param r_crit: Radius of the zone phasing orbits may not enter, km.
    :param mu: Gravitational parameter, km^3/s^2.
    :param g0: Sea-level gravitational acceleration, m/s^2.
    """

    r: float = R_GEO
    r_crit: float = DEFAULT_R_CRIT
    mu: float = MU_EARTH
    g0: float = G0

    def __post_init__(self):
        if not self.r > self.r_crit > 0:
            raise ValueError(
                f"Orbit radius {self.r} km must exceed critical radius "
                f"{self.r_crit} km, which must be positive"
            )
        if self.mu <= 0 or self.g0 <= 0:
            raise ValueError("mu and g0 must be positive")

    @property
    def mean_motion_time(self) -> float:
        """Seconds needed to sweep one radian on the circular orbit."""
        return math.sqrt(self.r**3 / self.mu)

    @property
    def period(self) -> float:
        return TWO_PI * self.mean_motion_time

    @property
    def a_min(self) -> float:
        """Smallest phasing semi-major axis allowed by the altitude limit."""
        return (self.r + self.r_crit) / 2.0


@dataclass(frozen=True)
class PhasingSolution:
    a: float
    k1: int
    k2: int
    delta_v: float
    t_travel: float


def relative_angle(lon_from: float, lon_to: float) -> float:
    """
    Angle the target slot travels before the servicer catches it.

    :param lon_from: Longitude of the departing servicer, deg East.
    :param lon_to: Longitude of the target slot, deg East.
    :returns: ``alpha = 2*pi - dtheta0`` in (0, 2*pi], where ``dtheta0`` is the
        eastward lead of the target.
    """
    lead = math.radians((lon_to - lon_from) % 360.0)
    return TWO_PI - lead


def phasing_axis(alpha: float, k1: int, k2: int, geom: OrbitGeometry) -> float:
    return ((alpha + TWO_PI * k2) / (TWO_PI * k1)) ** (2.0 / 3.0) * geom.r


def travel_time(alpha: float, k2: int, geom: OrbitGeometry) -> float:
    return (alpha + TWO_PI * k2) * geom.mean_motion_time


def phasing_delta_v(a: float, geom: OrbitGeometry) -> float:
    """Total delta-V of entering and leaving a phasing orbit of axis ``a``, km/s."""
    circular = math.sqrt(geom.mu / geom.r)
    apsis = math.sqrt(geom.mu * (2.0 / geom.r - 1.0 / a))
    return 2.0 * abs(circular - apsis)


def enumerate_phasing(
    alpha: float, geom: OrbitGeometry, tof_max: float
) -> Iterator[PhasingSolution]:
    """
    Yield every (k1, k2) pair meeting the time-of-flight and altitude limits.

    Travel time does not depend on ``k1`` and grows with ``k2``, so the outer
    loop stops at the first ``k2`` that is too slow. The phasing axis shrinks as
    ``k1`` grows, so the inner loop stops at the first ``k1`` below ``a_min``.
    """
    if not 0.0 <= alpha <= TWO_PI:
        raise ValueError(f"alpha must lie in [0, 2*pi], got {alpha}")
    if tof_max <= 0:
        raise ValueError(f"tof_max must be positive, got {tof_max}")
    k2 = 0
    while True:
        t_travel = travel_time(alpha, k2, geom)
        if t_travel > tof_max:
            return
        k1 = 1
        while True:
            a = phasing_axis(alpha, k1, k2, geom)
            if a < geom.a_min:
                break
            yield PhasingSolution(
                a=a,
                k1=k1,
                k2=k2,
                delta_v=phasing_delta_v(a, geom),
                t_travel=t_travel,
            )
            k1 += 1
        k2 += 1


def solve_phasing(alpha: float, geom: OrbitGeometry, tof_max: float) -> PhasingSolution:
    """
    Cheapest phasing maneuver reaching a slot within ``tof_max`` seconds.

    Ties on delta-V go to the shorter transfer, then to the smaller ``k1``.

    :param alpha: Relative angle, rad (see :func:`relative_angle`).
    :param geom: Orbit geometry.
    :param tof_max: Maximum time of flight, s.
    :raises NoFeasibleTransfer: If no pair satisfies both limits.
    """
    best = min(
        enumerate_phasing(alpha, geom, tof_max),
        key=lambda sol: (sol.delta_v, sol.t_travel, sol.k1),
        default=None,
    )
    if best is None:
        raise NoFeasibleTransfer(
            f"No phasing maneuver for alpha={alpha:.6f} rad within {tof_max:.0f} s"
        )
    return best


def consumption_fraction(delta_v: float, isp: float, geom: OrbitGeometry) -> float:
    """
    Fraction of the departing wet mass burned for ``delta_v`` (km/s).

    ``phi = 1 - exp(-dv / (g0 * isp))``; the propellant burned on an arc is
    ``phi`` times everything the vehicle carries, which keeps the flow
    transformation linear.
    """
    if delta_v < 0 or isp <= 0:
        raise ValueError("delta_v must be nonnegative and isp positive")
    return -math.expm1(-delta_v * 1000.0 / (geom.g0 * isp))


def propellant_for_maneuver(
    delta_v: float, isp: float, m0: float, geom: OrbitGeometry
) -> float:
    """Propellant mass (kg) burned by a vehicle of wet mass ``m0`` (kg)."""
    if m0 <= 0:
        raise ValueError(f"m0 must be positive, got {m0}")
    return m0 * consumption_fraction(delta_v, isp, geom)
