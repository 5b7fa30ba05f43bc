"""User point processes: PLP road realizations, Cox users on roads,
indoor spatial PPP, and the per-ring demand masses.

Sampling is deterministic given an explicit generator; parallel Monte
Carlo derives one stream per realization via :func:`rng_stream`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .linkmodel import DemandProfile, INDOOR, OUTDOOR

PAPER = "paper"
STANDARD = "standard"
SAMPLERS = (PAPER, STANDARD)


@dataclass(frozen=True)
class GeometryParams:
    """Intensities: roads per km (PLP), users per km of road, users per km^2."""

    road_intensity: float
    user_intensity_linear: float
    user_intensity_area: float

    def __post_init__(self):
        for name in ("road_intensity", "user_intensity_linear", "user_intensity_area"):
            v = getattr(self, name)
            if not (v >= 0 and math.isfinite(v)):
                raise DomainError(f"{name} must be nonnegative and finite")


@dataclass(frozen=True)
class RoadRealization:
    """One sampled PLP conditioned to the cell disk: chord distances r_j."""

    chord_distances: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.chord_distances, dtype=float)
        if arr.ndim != 1:
            raise DomainError("chord_distances must be one-dimensional")
        if arr.size and arr.min() < 0:
            raise DomainError("chord distances must be nonnegative")
        arr = arr.copy()
        arr.flags.writeable = False
        object.__setattr__(self, "chord_distances", arr)

    @property
    def count(self) -> int:
        """Number of roads hitting the cell (Y)."""
        return int(self.chord_distances.size)


@dataclass(frozen=True)
class UserDrop:
    """Sampled user distances to the cell center, split by environment."""

    outdoor_km: np.ndarray
    indoor_km: np.ndarray

    @property
    def count(self) -> int:
        return int(self.outdoor_km.size + self.indoor_km.size)


def rng_stream(seed: int, index: int) -> np.random.Generator:
    """Independent reproducible stream for realization/replication `index`."""
    return np.random.default_rng(np.random.SeedSequence((seed, index)))


def expected_roads(gp: GeometryParams, cell_radius_km: float) -> float:
    """Mean number of roads hitting the cell disk: 2*pi*lambda*R."""
    return 2.0 * math.pi * gp.road_intensity * cell_radius_km


def sample_roads(gp: GeometryParams, cell_radius_km: float, sampler: str,
                 rng: np.random.Generator) -> RoadRealization:
    """Draw Y ~ Poisson(2*pi*lambda*R) roads and their chord distances.

    Sampler `paper` takes r = R*sqrt(U) (uniform in the disk, the law the
    closed-form mean load assumes); `standard` takes r = R*U (uniform on
    [0, R], the half-cylinder construction).
    """
    if cell_radius_km <= 0:
        raise DomainError("cell_radius_km must be positive")
    if sampler not in SAMPLERS:
        raise DomainError(f"unknown sampler {sampler!r}")
    y = int(rng.poisson(expected_roads(gp, cell_radius_km)))
    u = rng.uniform(size=y)
    r = cell_radius_km * (np.sqrt(u) if sampler == PAPER else u)
    return RoadRealization(chord_distances=r)


def chord_mass(road: RoadRealization, interval: tuple[float, float],
               delta: float) -> float:
    """Expected users on the road chords inside the annulus (u, v].

    Per road: 2*delta*(sqrt(v^2-r^2)_+ - sqrt(u^2-r^2)_+).
    """
    u, v = interval
    if not 0.0 <= u <= v:
        raise DomainError(f"bad interval ({u}, {v}]")
    r2 = road.chord_distances ** 2
    seg = np.sqrt(np.maximum(v * v - r2, 0.0)) - np.sqrt(np.maximum(u * u - r2, 0.0))
    return 2.0 * delta * float(seg.sum())


def _annulus_area(interval: tuple[float, float]) -> float:
    u, v = interval
    return math.pi * (v * v - u * u)


def outdoor_masses(road: RoadRealization, profile: DemandProfile,
                   delta: float) -> np.ndarray:
    """Per-level expected outdoor user counts on this realization.

    Entry n-1 holds the mass of level n; levels with no interval get 0.
    """
    if profile.environment != OUTDOOR:
        raise DomainError("outdoor_masses needs an outdoor profile")
    w = np.zeros(profile.n_levels)
    for n, intervals in profile.rings.items():
        w[n - 1] = sum(chord_mass(road, iv, delta) for iv in intervals)
    return w


def indoor_masses(profile: DemandProfile, kappa: float) -> np.ndarray:
    """Per-level expected indoor user counts: kappa * area of each level set."""
    if profile.environment != INDOOR:
        raise DomainError("indoor_masses needs an indoor profile")
    w = np.zeros(profile.n_levels)
    for n, intervals in profile.rings.items():
        w[n - 1] = kappa * sum(_annulus_area(iv) for iv in intervals)
    return w


def mean_users(gp: GeometryParams, cell_radius_km: float) -> float:
    """Average user count (lambda*delta + kappa) * pi * R^2.

    This is the printed intensity convention; the outdoor point process as
    sampled has a different measured mean, which `simulate` reports
    separately rather than reconciling.
    """
    lam_delta = gp.road_intensity * gp.user_intensity_linear
    return (lam_delta + gp.user_intensity_area) * math.pi * cell_radius_km ** 2


def sample_users(gp: GeometryParams, cell_radius_km: float,
                 road: RoadRealization, rng: np.random.Generator) -> UserDrop:
    """Drop users: linear PPP per chord, spatial PPP in the disk.

    Outdoor: per road j, Poisson(2*delta*sqrt(R^2-r_j^2)) users uniform on
    the chord. Indoor: Poisson(kappa*pi*R^2) users uniform in the disk.
    """
    r = np.minimum(road.chord_distances, cell_radius_km)
    half = np.sqrt(np.maximum(cell_radius_km ** 2 - r ** 2, 0.0))
    counts = rng.poisson(2.0 * gp.user_intensity_linear * half)
    total = int(counts.sum())
    offsets = np.repeat(half, counts) * rng.uniform(-1.0, 1.0, size=total)
    outdoor = np.hypot(np.repeat(r, counts), offsets)

    n_indoor = int(rng.poisson(gp.user_intensity_area * math.pi * cell_radius_km ** 2))
    indoor = cell_radius_km * np.sqrt(rng.uniform(size=n_indoor))
    return UserDrop(outdoor_km=outdoor, indoor_km=indoor)
