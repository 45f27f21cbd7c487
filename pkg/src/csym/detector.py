"""Numerical symmetry criteria for compactly supported grid functions.

Three layers of evidence, ordered by strength:

1. ``energy_derivative`` - the one-sided derivative of the gradient energy
   under the continuous symmetrization flow, extrapolated to t = 0.  It is
   nonnegative up to discretization noise; a value at zero (within
   tolerance) is the flow-based symmetry signal in that direction.
2. ``local_symmetry_check`` - for level-matched reflected point pairs along
   a direction, the gradient components must agree up to the sign of the
   directional component.  Plateau-free radial functions pass in every
   direction; genuinely asymmetric profiles fail with an O(1) residual.
3. ``radial_decomposition`` - segments the support into gradient-active
   components and a near-critical set, fits a common center to each active
   component from gradient collinearity, and emits the annuli on which the
   profile decreases radially.

The detector gathers evidence at grid resolution; tolerances default to the
first order the gradient stencil can resolve.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy import ndimage

from .functionals import dirichlet_energy
from .grids import Direction, GridFunction, csts

__all__ = [
    "EnergyDerivative",
    "energy_derivative",
    "reflection_point",
    "ReflectionPair",
    "LocalSymmetryResult",
    "local_symmetry_check",
    "sample_points",
    "Annulus",
    "RadialDecomposition",
    "radial_decomposition",
    "direction_set",
]

DEFAULT_T_LIST = (1e-1, 1e-2, 1e-3, 1e-4)


@dataclass(frozen=True)
class EnergyDerivative:
    """Extrapolated energy-derivative-at-zero with an uncertainty estimate
    and the raw (t, quotient) samples."""

    value: float
    uncertainty: float
    samples: tuple[tuple[float, float], ...]
    tolerance: float

    @property
    def symmetric(self) -> bool:
        return self.value <= self.tolerance


def energy_derivative(
    u: GridFunction,
    G: Callable[[np.ndarray], np.ndarray],
    d: Direction | int = 0,
    t_list: Sequence[float] = DEFAULT_T_LIST,
) -> EnergyDerivative:
    """Difference quotients D(t) = (E(u) - E(u^t)) / t of the gradient
    energy E = int G(|grad u|), extrapolated to t = 0.

    ``t_list`` must hold at least three strictly decreasing positive times
    below 1.  The quotient is nonnegative for convex G up to grid noise;
    times whose flow displacement stays below grid resolution contribute
    exact zeros and are excluded from the linear extrapolation (they carry
    no slope information).  The default tolerance is 10 h sup|G'(|grad u|)|.
    """
    ts = [float(t) for t in t_list]
    if len(ts) < 3:
        raise ValueError("need at least 3 flow times for extrapolation")
    if any(t <= 0 or t >= 1 for t in ts) or any(
        t2 >= t1 for t1, t2 in zip(ts, ts[1:])
    ):
        raise ValueError("t_list must be strictly decreasing in (0, 1)")
    e0 = dirichlet_energy(u, G, require_convex=True)
    samples = []
    moved = []
    for t in ts:
        ut = csts(u, t, d)
        quotient = (e0 - dirichlet_energy(ut, G)) / t
        samples.append((t, quotient))
        moved.append(bool(np.any(ut.values != u.values)))
    h = u.max_spacing
    gmax = float(u.gradient_norm().max())
    dz = 1e-6 * max(gmax, 1.0)
    gprime = float(
        (np.asarray(G(np.array(gmax + dz))) - np.asarray(G(np.array(gmax)))) / dz
    )
    tol = 10.0 * h * abs(gprime)
    informative = [(t, q) for (t, q), m in zip(samples, moved) if m]
    if not informative:
        return EnergyDerivative(0.0, 0.0, tuple(samples), tol)
    tarr = np.array([t for t, _ in informative])
    qarr = np.array([q for _, q in informative])
    if len(informative) == 1:
        value, resid = float(qarr[0]), 0.0
    else:
        # linear model q ~ value + slope * t; intercept is the limit
        coeffs, *_ = np.polynomial.polynomial.polyfit(tarr, qarr, 1, full=True)
        value = float(coeffs[0])
        resid = float(np.abs(qarr - (coeffs[0] + coeffs[1] * tarr)).max())
    spread = float(np.abs(qarr - value).min())
    return EnergyDerivative(value, resid + 0.5 * spread, tuple(samples), tol)


def _interp_gradient(u: GridFunction, point: np.ndarray) -> np.ndarray:
    """Multilinear interpolation of the central-difference gradient."""
    grads = u.gradient()
    out = np.empty(u.ndim)
    for k, g in enumerate(grads):
        out[k] = _interp_array(u, g, np.atleast_2d(point))[0]
    return out


def _interp_array(u: GridFunction, arr: np.ndarray, pts: np.ndarray) -> np.ndarray:
    """Multilinear interpolation of an arbitrary (possibly signed) array on
    u's grid; clamps to the boundary cells."""
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    frac = np.empty_like(pts)
    base = np.empty(pts.shape, dtype=np.intp)
    for k in range(u.ndim):
        a, b = u.bbox[k]
        h = (b - a) / u.shape[k]
        x = (pts[:, k] - a) / h - 0.5
        i0 = np.clip(np.floor(x).astype(np.intp), 0, u.shape[k] - 2)
        base[:, k] = i0
        frac[:, k] = np.clip(x - i0, 0.0, 1.0)
    out = np.zeros(len(pts))
    for corner in range(1 << u.ndim):
        weight = np.ones(len(pts))
        idx = []
        for k in range(u.ndim):
            hi = (corner >> k) & 1
            weight *= frac[:, k] if hi else 1.0 - frac[:, k]
            idx.append(base[:, k] + hi)
        out += weight * arr[tuple(idx)]
    return out


def reflection_point(
    u: GridFunction,
    y: np.ndarray,
    d: Direction | int = 0,
    grad_tol: float = 1e-9,
    max_span: float | None = None,
) -> np.ndarray | None:
    """March from ``y`` along direction ``d`` through the region u > u(y)
    and return the first level-matched point on the way down, located to
    sub-cell accuracy by bisection of the interpolant.

    Preconditions (violations raise): 0 < u(y) < max u and the directional
    derivative at y exceeds ``grad_tol``.  Returns None (NOT FOUND) when the
    ray leaves the box or the value never recrosses at grid resolution.
    """
    y = np.asarray(y, dtype=float)
    d = d if isinstance(d, Direction) else Direction(d)
    e = d.unit_vector(u.ndim)
    v = float(u.interp(y))
    if not 0.0 < v < u.max_value:
        raise ValueError(f"need 0 < u(y) < max u, got u(y) = {v}")
    slope = float(_interp_gradient(u, y) @ e)
    if not slope > grad_tol:
        raise ValueError(
            f"directional derivative {slope:.3e} not above tolerance {grad_tol:.3e}"
        )
    h = min(u.spacing)
    step = 0.5 * h
    span = max_span if max_span is not None else 2.0 * u.radius
    tau_prev = 0.0
    phi_prev = v
    tau = step
    first = True
    while tau <= span:
        point = y + tau * e
        if not _in_box(u, point):
            return None
        phi = float(u.interp(point))
        if first and phi <= v:
            return None  # cannot resolve the uphill region at grid scale
        first = False
        if phi <= v:
            lo, hi = tau_prev, tau
            for _ in range(80):
                mid = 0.5 * (lo + hi)
                if float(u.interp(y + mid * e)) > v:
                    lo = mid
                else:
                    hi = mid
            return y + 0.5 * (lo + hi) * e
        tau_prev, phi_prev = tau, phi
        tau += step
    return None


def _in_box(u: GridFunction, point: np.ndarray) -> bool:
    return all(a <= x <= b for x, (a, b) in zip(point, u.bbox))


@dataclass(frozen=True)
class ReflectionPair:
    point: np.ndarray
    mirror: np.ndarray
    residual_parallel: float
    residual_perpendicular: float

    @property
    def residual(self) -> float:
        return max(self.residual_parallel, self.residual_perpendicular)


@dataclass(frozen=True)
class LocalSymmetryResult:
    direction: np.ndarray
    pairs: tuple[ReflectionPair, ...]
    n_not_found: int
    n_skipped: int
    tol: float

    @property
    def max_residual(self) -> float:
        return max((p.residual for p in self.pairs), default=math.inf)

    @property
    def passed(self) -> bool:
        return bool(self.pairs) and self.max_residual <= self.tol


def local_symmetry_check(
    u: GridFunction,
    d: Direction | int,
    samples: np.ndarray,
    tol: float,
    grad_tol: float = 1e-9,
) -> LocalSymmetryResult:
    """Gradient-reflection residuals over a set of sample points.

    For each sample y with mirror y~ the parallel residual is
    |du/de(y) + du/de(y~)| and the perpendicular residual is the max
    deviation of the remaining gradient components.  Samples violating the
    preconditions are skipped, unresolvable mirrors are counted as NOT
    FOUND; both are excluded from pass/fail.
    """
    if not tol > 0:
        raise ValueError("tolerance must be positive")
    d = d if isinstance(d, Direction) else Direction(d)
    e = d.unit_vector(u.ndim)
    pairs = []
    n_not_found = 0
    n_skipped = 0
    for y in np.atleast_2d(np.asarray(samples, dtype=float)):
        try:
            mirror = reflection_point(u, y, d, grad_tol=grad_tol)
        except ValueError:
            n_skipped += 1
            continue
        if mirror is None:
            n_not_found += 1
            continue
        gy = _interp_gradient(u, y)
        gm = _interp_gradient(u, mirror)
        par = abs(float(gy @ e) + float(gm @ e))
        perp_vec = (gy - (gy @ e) * e) - (gm - (gm @ e) * e)
        perp = float(np.abs(perp_vec).max()) if u.ndim > 1 else 0.0
        pairs.append(ReflectionPair(y, mirror, par, perp))
    return LocalSymmetryResult(
        direction=e,
        pairs=tuple(pairs),
        n_not_found=n_not_found,
        n_skipped=n_skipped,
        tol=tol,
    )


def sample_points(
    u: GridFunction,
    d: Direction | int = 0,
    n_samples: int = 64,
    value_band: tuple[float, float] = (0.2, 0.8),
    grad_frac: float = 0.15,
) -> np.ndarray:
    """Deterministic sample points satisfying the reflection preconditions:
    values inside a band of the range and directional slope bounded away
    from zero (a fixed fraction of its max)."""
    d = d if isinstance(d, Direction) else Direction(d)
    e = d.unit_vector(u.ndim)
    grads = u.gradient()
    dirgrad = sum(gk * ek for gk, ek in zip(grads, e))
    vmax = u.max_value
    lo, hi = value_band
    mask = (
        (u.values > lo * vmax)
        & (u.values < hi * vmax)
        & (dirgrad > grad_frac * float(dirgrad.max()))
    )
    pts = u.cell_centers()[mask]
    if len(pts) == 0:
        return pts.reshape(0, u.ndim)
    stride = max(1, len(pts) // n_samples)
    return pts[::stride][:n_samples]


@dataclass(frozen=True)
class Annulus:
    center: tuple[float, ...]
    r_inner: float
    r_outer: float
    center_fit_residual: float
    radially_decreasing: bool
    hole_condition: bool
    n_cells: int


@dataclass(frozen=True)
class RadialDecomposition:
    annuli: tuple[Annulus, ...]
    critical_mask: np.ndarray
    connected: bool
    classification: str
    grad_tol: float

    @property
    def disjoint(self) -> bool:
        items = list(self.annuli)
        for i in range(len(items)):
            for j in range(i + 1, len(items)):
                a, b = items[i], items[j]
                dist = math.dist(a.center, b.center)
                if dist >= a.r_outer + b.r_outer:
                    continue
                same = dist <= 0.25 * min(a.r_outer, b.r_outer)
                if same and (
                    a.r_outer <= b.r_inner or b.r_outer <= a.r_inner
                ):
                    continue
                return False
        return True


def radial_decomposition(
    u: GridFunction,
    tol: float = 0.0,
    center_fit_tol: float = 0.1,
    min_component_cells: int = 8,
) -> RadialDecomposition:
    """Split the support into annuli of radial decrease plus a near-critical
    set.

    Cells with |grad u| <= max(tol, 3 L h) form the critical mask; each
    remaining connected component gets a common center fitted by least
    squares on the collinearity grad u || (x - center).  A component whose
    normalized fit residual exceeds ``center_fit_tol`` marks the function
    non-symmetric.  Unresolvable apex caps (critical cells within a few
    cells of a fitted center with vanishing inner radius) are absorbed into
    their annulus, so a smooth cap reports r_inner = 0 and an empty critical
    set rather than a spurious plateau.
    """
    h = u.max_spacing
    lip = u.lipschitz_estimate()
    grad_tol = max(tol, 3.0 * lip * h)
    support = u.values > 0
    gnorm = u.gradient_norm()
    active = support & (gnorm > grad_tol)
    critical = support & ~active
    structure = np.ones((3,) * u.ndim, dtype=bool)
    n_support = int(ndimage.label(support, structure=structure)[1])
    labels, n_comp = ndimage.label(active, structure=structure)
    centers_all = u.cell_centers()
    grads = np.stack(u.gradient(), axis=-1)
    annuli = []
    bad_fit = False
    for comp in range(1, n_comp + 1):
        mask = labels == comp
        n_cells = int(mask.sum())
        if n_cells < min_component_cells:
            critical = critical | mask
            continue
        X = centers_all[mask]
        Gv = grads[mask]
        center, fit_res = _fit_center(X, Gv)
        rho = np.linalg.norm(X - center, axis=1)
        radial_deriv = np.sum(Gv * (X - center), axis=1) / np.maximum(rho, 1e-300)
        r_inner = max(0.0, float(rho.min()) - 0.5 * h)
        r_outer = float(rho.max()) + 0.5 * h
        rho_all = np.linalg.norm(
            centers_all.reshape(-1, u.ndim) - center, axis=1
        ).reshape(u.shape)
        if r_inner > 0.0:
            # A smooth apex leaves an unresolvable sub-threshold cap: its
            # rim gradient barely clears the threshold, whereas a genuine
            # plateau edge jumps.  Caps collapse to r_inner = 0 and leave
            # the critical set.
            rim = mask & (rho_all < r_inner + 2.0 * h)
            rim_grad = float(gnorm[rim].mean()) if rim.any() else math.inf
            if r_inner <= 1.5 * h or rim_grad <= 3.0 * grad_tol:
                cap = critical & (rho_all < r_inner + h)
                critical = critical & ~cap
                r_inner = 0.0
        decreasing = bool(np.all(radial_deriv < grad_tol))
        hole_ok = True
        if r_inner > 0.0:
            hole = support & (rho_all < r_inner)
            rim = mask & (rho_all < r_inner + 2.0 * h)
            if hole.any() and rim.any():
                hole_ok = bool(
                    u.values[hole].min()
                    >= u.values[rim].max() - 2.0 * lip * h
                )
        annuli.append(
            Annulus(
                center=tuple(float(x) for x in center),
                r_inner=r_inner,
                r_outer=r_outer,
                center_fit_residual=fit_res,
                radially_decreasing=decreasing,
                hole_condition=hole_ok,
                n_cells=n_cells,
            )
        )
        if fit_res > center_fit_tol:
            bad_fit = True
    if bad_fit:
        classification = "non-symmetric"
    elif (
        len(annuli) == 1
        and annuli[0].r_inner == 0.0
        and not critical.any()
        and annuli[0].radially_decreasing
    ):
        classification = "ball, radial"
    elif annuli and all(a.radially_decreasing and a.hole_condition for a in annuli):
        classification = "locally symmetric"
    else:
        classification = "non-symmetric"
    return RadialDecomposition(
        annuli=tuple(annuli),
        critical_mask=critical,
        connected=n_support <= 1,
        classification=classification,
        grad_tol=grad_tol,
    )


def _fit_center(X: np.ndarray, G: np.ndarray) -> tuple[np.ndarray, float]:
    """Least-squares center y minimizing || G x (X - y) ||; the normalized
    residual is the rms sine of the misalignment."""
    ndim = X.shape[1]
    if ndim == 1:
        # collinearity is vacuous in 1-D; center = midpoint of sign change
        w = np.argsort(X[:, 0])
        return np.array([float(np.median(X[w, 0]))]), 0.0
    if ndim == 2:
        # cross_i(y) = gx (X2 - y2) - gy (X1 - y1)
        A = np.column_stack([G[:, 1], -G[:, 0]])
        b = G[:, 1] * X[:, 0] - G[:, 0] * X[:, 1]
    else:
        rows = []
        rhs = []
        for g, x in zip(G, X):
            skew = np.array(
                [[0, -g[2], g[1]], [g[2], 0, -g[0]], [-g[1], g[0], 0]]
            )
            rows.append(skew)
            rhs.append(np.cross(g, x))
        A = np.vstack(rows)
        b = np.concatenate(rhs)
    y, *_ = np.linalg.lstsq(A, b, rcond=None)
    resid_vec = A @ y - b
    scale = np.linalg.norm(G, axis=1) * np.linalg.norm(X - y, axis=1)
    denom = float(np.sqrt(np.mean(scale**2))) or 1.0
    n_rows_per_pt = len(resid_vec) // len(X)
    res = float(
        np.sqrt(np.mean(resid_vec.reshape(len(X), n_rows_per_pt) ** 2))
    )
    return y, res / denom


def direction_set(ndim: int, k: int) -> list[Direction]:
    """K probing directions: equally spaced half-turn angles in 2-D, a
    Fibonacci hemisphere in 3-D, the single axis in 1-D."""
    if ndim == 1:
        return [Direction(0)]
    dirs = []
    if ndim == 2:
        for i in range(k):
            theta = math.pi * i / k
            q = np.array(
                [
                    [math.cos(theta), -math.sin(theta)],
                    [math.sin(theta), math.cos(theta)],
                ]
            )
            dirs.append(Direction(0, None if i == 0 else q))
        return dirs
    golden = (1 + math.sqrt(5)) / 2
    for i in range(k):
        z = (i + 0.5) / k
        phi = 2 * math.pi * i / golden
        s = math.sqrt(1 - z * z)
        e = np.array([s * math.cos(phi), s * math.sin(phi), z])
        q = _rotation_to(e)
        dirs.append(Direction(0, q))
    return dirs


def _rotation_to(e: np.ndarray) -> np.ndarray:
    """Orthonormal matrix whose first column is e."""
    e = e / np.linalg.norm(e)
    basis = [e]
    for cand in np.eye(len(e)):
        v = cand - sum((cand @ b) * b for b in basis)
        n = np.linalg.norm(v)
        if n > 1e-8:
            basis.append(v / n)
        if len(basis) == len(e):
            break
    return np.column_stack(basis)
