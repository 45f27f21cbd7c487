"""Deterministic analytic fixtures and seeded random suites.

Every generator pads the support strictly inside an origin-symmetric bbox so
the compact-support invariant holds exactly, and takes explicit resolution /
seed arguments so reruns are byte-identical.
"""

from __future__ import annotations

import numpy as np

from .grids import GridFunction
from .intervals import IntervalSet, normalize

__all__ = [
    "tent_1d",
    "asymmetric_tent_1d",
    "staircase_1d",
    "rectangle_indicator_2d",
    "radial_bump_2d",
    "paraboloid_cap_2d",
    "truncated_cone_2d",
    "two_bumps_2d",
    "random_bumps",
    "random_interval_set",
]


def _grid(bbox, shape):
    axes = [
        a + (b - a) / n * (np.arange(n) + 0.5) for (a, b), n in zip(bbox, shape)
    ]
    return np.meshgrid(*axes, indexing="ij")


def tent_1d(n: int = 256, half_width: float = 2.0, center: float = 0.0) -> GridFunction:
    """Unit tent max(0, 1 - |x - center|) on [-half_width, half_width]."""
    bbox = ((-half_width, half_width),)
    (x,) = _grid(bbox, (n,))
    return GridFunction(bbox, np.maximum(0.0, 1.0 - np.abs(x - center)))


def asymmetric_tent_1d(n: int = 256, half_width: float = 2.5) -> GridFunction:
    """Peak 1 at x = 0, rising with slope 1 from x = -1, falling with slope
    1/2 to x = 2; gradient energy 3/2, symmetrized energy 4/3."""
    bbox = ((-half_width, half_width),)
    (x,) = _grid(bbox, (n,))
    vals = np.where(x < 0, 1.0 + x, 1.0 - 0.5 * x)
    return GridFunction(bbox, np.maximum(0.0, vals))


def staircase_1d(n: int = 256, half_width: float = 4.0) -> GridFunction:
    """Value 1 on (0, 1) and 2 on (1, 2); use n divisible by 2*half_width
    so the steps align with cell edges."""
    bbox = ((-half_width, half_width),)
    (x,) = _grid(bbox, (n,))
    vals = np.zeros(n)
    vals[(x > 0) & (x < 1)] = 1.0
    vals[(x > 1) & (x < 2)] = 2.0
    return GridFunction(bbox, vals)


def rectangle_indicator_2d(
    n: int = 128,
    half_width: float = 2.0,
    rect: tuple[tuple[float, float], tuple[float, float]] = ((-0.5, 1.0), (-0.25, 0.75)),
) -> GridFunction:
    bbox = ((-half_width, half_width), (-half_width, half_width))
    x, y = _grid(bbox, (n, n))
    (x0, x1), (y0, y1) = rect
    vals = ((x > x0) & (x < x1) & (y > y0) & (y < y1)).astype(float)
    return GridFunction(bbox, vals)


def radial_bump_2d(
    n: int = 128, half_width: float = 1.5, center: tuple[float, float] = (0.0, 0.0)
) -> GridFunction:
    """(1 - |x - center|^2)_+ on a square box."""
    bbox = ((-half_width, half_width), (-half_width, half_width))
    x, y = _grid(bbox, (n, n))
    r2 = (x - center[0]) ** 2 + (y - center[1]) ** 2
    return GridFunction(bbox, np.maximum(0.0, 1.0 - r2))


def paraboloid_cap_2d(n: int = 256, half_width: float = 1.2) -> GridFunction:
    """(1 - r^2)/4 on the unit disk: the linear-flux torsion profile with
    boundary slope 1/2."""
    bbox = ((-half_width, half_width), (-half_width, half_width))
    x, y = _grid(bbox, (n, n))
    return GridFunction(bbox, np.maximum(0.0, 0.25 * (1.0 - x * x - y * y)))


def truncated_cone_2d(
    n: int = 256,
    half_width: float = 1.5,
    plateau_radius: float = 0.4,
    outer_radius: float = 1.0,
) -> GridFunction:
    """Cone of slope 1 truncated to a flat plateau: a genuine critical set
    of positive measure surrounded by one annulus of radial decrease."""
    bbox = ((-half_width, half_width), (-half_width, half_width))
    x, y = _grid(bbox, (n, n))
    rho = np.sqrt(x * x + y * y)
    vals = np.clip(outer_radius - rho, 0.0, outer_radius - plateau_radius)
    return GridFunction(bbox, vals)


def two_bumps_2d(n: int = 128, half_width: float = 2.0) -> GridFunction:
    """Two disjoint radial bumps (disconnected support)."""
    bbox = ((-half_width, half_width), (-half_width, half_width))
    x, y = _grid(bbox, (n, n))
    r2a = (x + 1.0) ** 2 + y**2
    r2b = (x - 1.0) ** 2 + y**2
    vals = np.maximum(0.0, 0.36 - r2a) + np.maximum(0.0, 0.25 - r2b)
    return GridFunction(bbox, vals / 0.36)


def random_bumps(
    seed: int,
    n: int = 128,
    half_width: float = 1.2,
    n_bumps: tuple[int, int] = (2, 4),
) -> GridFunction:
    """A smooth random sum of Gaussian bumps under a compact-support
    envelope; deterministic in the seed."""
    rng = np.random.default_rng(seed)
    bbox = ((-half_width, half_width), (-half_width, half_width))
    x, y = _grid(bbox, (n, n))
    k = int(rng.integers(n_bumps[0], n_bumps[1] + 1))
    vals = np.zeros_like(x)
    for _ in range(k):
        cx, cy = rng.uniform(-0.45, 0.45, 2)
        w = rng.uniform(0.15, 0.4)
        amp = rng.uniform(0.3, 1.0)
        vals += amp * np.exp(-(((x - cx) ** 2 + (y - cy) ** 2) / w**2))
    r2 = (x * x + y * y) / (0.9 * half_width) ** 2
    envelope = np.maximum(0.0, 1.0 - r2) ** 3
    return GridFunction(bbox, vals * envelope)


def random_interval_set(
    rng: np.random.Generator,
    max_intervals: int = 8,
    span: float = 8.0,
    dyadic: bool = True,
) -> IntervalSet:
    """Random disjoint interval union; dyadic endpoints (multiples of 1/64)
    keep float arithmetic exact in measure bookkeeping."""
    k = int(rng.integers(1, max_intervals + 1))
    if dyadic:
        grid = np.arange(-span * 64, span * 64 + 1)
        picks = np.sort(rng.choice(grid, size=2 * k, replace=False)) / 64.0
    else:
        picks = np.sort(rng.uniform(-span, span, 2 * k))
    return normalize(list(zip(picks[0::2], picks[1::2])))
