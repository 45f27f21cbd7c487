"""Integral functionals on grid functions and the problem data for the
radial overdetermined problem.

All integrals are midpoint-on-cells sums, Sum F(cell) * cellvol, evaluated
with numpy reductions (deterministic pairwise summation), and gradients come
from central differences.  Inequality checks built on these live in
:mod:`csym.checks` and report (lhs, rhs, margin, cell width) rather than a
bare boolean, so discretization error stays visible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .grids import GridFunction

__all__ = [
    "lp_distance",
    "cavalieri",
    "hardy_littlewood",
    "dirichlet_energy",
    "midpoint_convex",
    "WeightedIntegrand",
    "weighted_functional",
    "boundary_layer_measure",
    "EquationSpec",
    "HypothesisError",
]


def _require_same_grid(u: GridFunction, v: GridFunction) -> None:
    if not u.same_grid(v):
        raise ValueError("grid mismatch: operands must share bbox and shape")


def lp_distance(u: GridFunction, v: GridFunction, p: float) -> float:
    """(Sum |u - v|^p cellvol)^(1/p) for p >= 1."""
    _require_same_grid(u, v)
    if p < 1:
        raise ValueError("p must be >= 1")
    diff = np.abs(u.values - v.values)
    if math.isinf(p):
        return float(diff.max())
    return float((np.sum(diff**p) * u.cell_volume) ** (1.0 / p))


def cavalieri(u: GridFunction, F: Callable[[np.ndarray], np.ndarray]) -> float:
    """Cell sum of F(u); F must be continuous with F(0) = 0 so the zero
    extension contributes nothing."""
    f0 = float(np.asarray(F(np.array(0.0))))
    if abs(f0) > 1e-12:
        raise ValueError(f"F(0) must vanish, got {f0}")
    return float(np.sum(F(u.values)) * u.cell_volume)


def hardy_littlewood(u: GridFunction, v: GridFunction) -> float:
    """Product integral Sum u*v*cellvol."""
    _require_same_grid(u, v)
    return float(np.sum(u.values * v.values) * u.cell_volume)


def midpoint_convex(
    G: Callable[[np.ndarray], np.ndarray], z_max: float, n: int = 129
) -> bool:
    """Sampled midpoint-convexity check of G on [0, z_max]."""
    z = np.linspace(0.0, max(z_max, 1e-12), n)
    g = np.asarray(G(z), dtype=float)
    mid = np.asarray(G(0.5 * (z[:-1] + z[1:])), dtype=float)
    scale = 1e-10 * (1.0 + np.abs(g).max())
    return bool(np.all(mid <= 0.5 * (g[:-1] + g[1:]) + scale))


def dirichlet_energy(
    u: GridFunction,
    G: Callable[[np.ndarray], np.ndarray],
    require_convex: bool = False,
) -> float:
    """Gradient-integral Sum G(|grad u|) cellvol with central differences.

    With ``require_convex`` the integrand is checked for (sampled) midpoint
    convexity and G(0) = 0, as the rearrangement inequality demands; the
    plain value is computable either way.
    """
    grad = u.gradient_norm()
    if require_convex:
        g0 = float(np.asarray(G(np.array(0.0))))
        if abs(g0) > 1e-12:
            raise ValueError(f"G(0) must vanish, got {g0}")
        if not midpoint_convex(G, float(grad.max())):
            raise ValueError("G failed the sampled convexity check")
    return float(np.sum(G(grad)) * u.cell_volume)


@dataclass(frozen=True)
class WeightedIntegrand:
    """An integrand F(x, v) together with its declared structure in the flow
    axis: d/dv F even in x_axis and nonincreasing for x_axis > 0, F(x, 0) = 0.

    The declaration is required, not inferred; the monotonicity of the
    weighted functional under symmetrization is only meaningful for
    integrands of this shape.
    """

    fn: Callable[[np.ndarray, np.ndarray], np.ndarray]
    even_in_axis: bool
    nonincreasing_in_axis: bool
    axis: int = 0

    @classmethod
    def separable(
        cls, w: Callable[[np.ndarray], np.ndarray], axis: int = 0
    ) -> "WeightedIntegrand":
        """F(x, v) = w(|x_axis|) * v for nonincreasing w >= 0."""

        def fn(points: np.ndarray, values: np.ndarray) -> np.ndarray:
            return w(np.abs(points[..., axis])) * values

        return cls(fn=fn, even_in_axis=True, nonincreasing_in_axis=True, axis=axis)


def weighted_functional(u: GridFunction, F: WeightedIntegrand) -> float:
    """Cell sum of F(cell center, value)."""
    if not isinstance(F, WeightedIntegrand):
        raise TypeError(
            "F must be a WeightedIntegrand carrying its structure declaration"
        )
    vals = F.fn(u.cell_centers(), u.values)
    return float(np.sum(vals) * u.cell_volume)


def boundary_layer_measure(u: GridFunction, s: float) -> float:
    """Cell-count measure of the near-boundary layer {0 < u <= s}."""
    if not s > 0:
        raise ValueError("layer height must be positive")
    mask = (u.values > 0) & (u.values <= s)
    return float(np.count_nonzero(mask)) * u.cell_volume


class HypothesisError(ValueError):
    """Problem data violates a structural hypothesis (checked by sampling)."""


def _as_vec(fn: Callable, *args: np.ndarray) -> np.ndarray:
    out = fn(*args)
    return np.asarray(out, dtype=float)


@dataclass(frozen=True)
class EquationSpec:
    """Data (g, f, lambda) of the quasilinear flux problem
    -div( g(|grad u|) grad u / |grad u| ) = f(|x|, u), plus the derived
    primitive G(z) = int_0^z g and h(z) = G(z) - z g(z).

    ``g`` must vanish at 0 and increase strictly, ``lam`` must be positive
    and nondecreasing, f nonincreasing in |x|; violations raise
    :class:`HypothesisError` at construction (sampled checks over the
    working box [0, r_max] x [0, u_max]).
    """

    g: Callable[[np.ndarray], np.ndarray]
    f: Callable[[np.ndarray, np.ndarray], np.ndarray]
    lam: Callable[[np.ndarray], np.ndarray]
    r_max: float = 8.0
    u_max: float = 4.0
    z_max: float = 8.0
    g_inverse_exact: Callable[[float], float] | None = None
    family: str = "custom"
    _G_table: tuple = field(init=False, repr=False, compare=False, default=())
    f0: float = field(init=False, compare=False, default=0.0)

    def __post_init__(self) -> None:
        zs = np.linspace(0.0, self.z_max, 4097)
        gs = _as_vec(self.g, zs)
        if abs(gs[0]) > 1e-12:
            raise HypothesisError(f"g(0) must vanish, got {gs[0]}")
        if (np.diff(gs) <= 0).any():
            raise HypothesisError("g must be strictly increasing on (0, inf)")
        # cached primitive G by cumulative trapezoid (exact enough for the
        # tabulated path; named families override with closed forms)
        G_vals = np.concatenate(
            ([0.0], np.cumsum(0.5 * (gs[1:] + gs[:-1]) * np.diff(zs)))
        )
        object.__setattr__(self, "_G_table", (zs, G_vals))
        rs = np.linspace(0.0, self.r_max, 257)
        ls = _as_vec(self.lam, rs)
        # only boundary radii R > 0 are ever evaluated, so positivity is
        # required away from the origin
        if (ls[1:] <= 0).any() or ls[0] < 0:
            raise HypothesisError("lambda must be positive for r > 0")
        if (np.diff(ls) < -1e-12 * (1 + np.abs(ls).max())).any():
            raise HypothesisError("lambda must be nondecreasing")
        vs = np.linspace(0.0, self.u_max, 33)
        for v in vs:
            fr = _as_vec(self.f, rs, np.full_like(rs, v))
            if (np.diff(fr) > 1e-12 * (1 + np.abs(fr).max())).any():
                raise HypothesisError("f must be nonincreasing in |x|")
        f_grid = _as_vec(
            self.f,
            np.repeat(rs, len(vs)),
            np.tile(vs, len(rs)),
        )
        object.__setattr__(self, "f0", float(np.abs(f_grid).max()))
        hs = self.h(zs)
        if (np.diff(hs) > 1e-9 * (1 + np.abs(hs).max())).any():
            raise HypothesisError("h = G - z g must be nonincreasing")

    def G(self, z: np.ndarray | float) -> np.ndarray | float:
        zs, Gv = self._G_table
        return np.interp(z, zs, Gv)

    def h(self, z: np.ndarray | float) -> np.ndarray | float:
        return self.G(z) - np.asarray(z, dtype=float) * _as_vec(self.g, np.asarray(z, dtype=float))

    # -- named families ------------------------------------------------------

    @classmethod
    def power_law(
        cls,
        p: float,
        f: Callable[[np.ndarray, np.ndarray], np.ndarray] | float = 1.0,
        lam: Callable[[np.ndarray], np.ndarray] | float = 1.0,
        **kwargs,
    ) -> "EquationSpec":
        """g(z) = z^(p-1) for p > 1 (p = 2: linear flux), with closed-form
        inverse; constant f / lambda may be given as numbers."""
        if not p > 1:
            raise HypothesisError("power law needs p > 1")
        if not callable(f):
            fval = float(f)
            f = lambda r, v: np.full_like(np.asarray(r, dtype=float), fval)
        if not callable(lam):
            lval = float(lam)
            lam = lambda r: np.full_like(np.asarray(r, dtype=float), lval)
        spec = cls(
            g=lambda z: np.asarray(z, dtype=float) ** (p - 1.0),
            f=f,
            lam=lam,
            g_inverse_exact=lambda y: y ** (1.0 / (p - 1.0)),
            family=f"power(p={p:g})",
            **kwargs,
        )
        object.__setattr__(spec, "_power_p", p)
        return spec

    def G_exact(self, z: np.ndarray | float):
        """Closed-form primitive for the power family, table otherwise."""
        p = getattr(self, "_power_p", None)
        if p is not None:
            return np.asarray(z, dtype=float) ** p / p
        return self.G(z)
