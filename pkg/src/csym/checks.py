"""Executable rearrangement-inequality checks.

Each check symmetrizes its inputs, evaluates both sides of an inequality,
and returns an :class:`InequalityRecord` carrying (lhs, rhs, margin, cell
width) so callers can bind discretization error to grid refinement instead
of trusting a boolean.  Margin convention: margin = rhs - lhs for a claim
"lhs <= rhs", so a nonnegative margin means the inequality held and a
negative margin quantifies the violation.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import functionals as fn
from .grids import Direction, GridFunction, csts

__all__ = [
    "InequalityRecord",
    "check_nonexpansive",
    "check_cavalieri",
    "check_hardy_littlewood",
    "check_dirichlet",
    "check_weighted",
    "check_displacement",
    "check_equimeasurable",
    "check_support",
    "check_lipschitz",
    "PROPERTY_CHECKS",
    "run_property",
]


@dataclass(frozen=True)
class InequalityRecord:
    name: str
    lhs: float
    rhs: float
    cell_width: float
    t: float

    @property
    def margin(self) -> float:
        return self.rhs - self.lhs

    @property
    def violation(self) -> float:
        return max(0.0, -self.margin)

    @property
    def satisfied(self) -> bool:
        return self.margin >= 0.0


def check_nonexpansive(
    u: GridFunction,
    v: GridFunction,
    t: float,
    p: float = 2.0,
    d: Direction | int = 0,
    ut: GridFunction | None = None,
    vt: GridFunction | None = None,
) -> InequalityRecord:
    """||u^t - v^t||_p <= ||u - v||_p."""
    ut = csts(u, t, d) if ut is None else ut
    vt = csts(v, t, d) if vt is None else vt
    return InequalityRecord(
        name=f"nonexp(p={p:g})",
        lhs=fn.lp_distance(ut, vt, p),
        rhs=fn.lp_distance(u, v, p),
        cell_width=u.max_spacing,
        t=t,
    )


def check_cavalieri(
    u: GridFunction,
    t: float,
    F: Callable[[np.ndarray], np.ndarray] = lambda s: s * s,
    d: Direction | int = 0,
    ut: GridFunction | None = None,
) -> InequalityRecord:
    """Invariance of int F(u): checked as |difference| <= 0 margin record
    (lhs = |int F(u^t) - int F(u)|, rhs = 0)."""
    ut = csts(u, t, d) if ut is None else ut
    diff = abs(fn.cavalieri(ut, F) - fn.cavalieri(u, F))
    return InequalityRecord(
        name="cavalieri", lhs=diff, rhs=0.0, cell_width=u.max_spacing, t=t
    )


def check_hardy_littlewood(
    u: GridFunction,
    v: GridFunction,
    t: float,
    d: Direction | int = 0,
    ut: GridFunction | None = None,
    vt: GridFunction | None = None,
) -> InequalityRecord:
    """int u v <= int u^t v^t under simultaneous symmetrization."""
    ut = csts(u, t, d) if ut is None else ut
    vt = csts(v, t, d) if vt is None else vt
    return InequalityRecord(
        name="hardy-littlewood",
        lhs=fn.hardy_littlewood(u, v),
        rhs=fn.hardy_littlewood(ut, vt),
        cell_width=u.max_spacing,
        t=t,
    )


def check_dirichlet(
    u: GridFunction,
    t: float,
    G: Callable[[np.ndarray], np.ndarray] = lambda z: z * z,
    d: Direction | int = 0,
    ut: GridFunction | None = None,
) -> InequalityRecord:
    """int G(|grad u^t|) <= int G(|grad u|) for convex G."""
    ut = csts(u, t, d) if ut is None else ut
    return InequalityRecord(
        name="polyasz",
        lhs=fn.dirichlet_energy(ut, G, require_convex=True),
        rhs=fn.dirichlet_energy(u, G),
        cell_width=u.max_spacing,
        t=t,
    )


def check_weighted(
    u: GridFunction,
    t: float,
    F: fn.WeightedIntegrand | None = None,
    d: Direction | int = 0,
    ut: GridFunction | None = None,
) -> InequalityRecord:
    """int F(x, u) <= int F(x, u^t) for admissible weights."""
    if F is None:
        F = fn.WeightedIntegrand.separable(lambda a: np.exp(-a))
    if not (F.even_in_axis and F.nonincreasing_in_axis):
        raise ValueError("weighted check needs the even/nonincreasing structure")
    ut = csts(u, t, d) if ut is None else ut
    return InequalityRecord(
        name="weighted",
        lhs=fn.weighted_functional(u, F),
        rhs=fn.weighted_functional(ut, F),
        cell_width=u.max_spacing,
        t=t,
    )


def check_displacement(
    u: GridFunction,
    t: float,
    d: Direction | int = 0,
    ut: GridFunction | None = None,
) -> InequalityRecord:
    """max |u^t - u| <= L R t + 2 L h (uniform displacement bound)."""
    ut = csts(u, t, d) if ut is None else ut
    lip = u.lipschitz_estimate()
    h = u.max_spacing
    return InequalityRecord(
        name="displacement",
        lhs=float(np.abs(ut.values - u.values).max()),
        rhs=lip * u.radius * t + 2.0 * lip * h,
        cell_width=h,
        t=t,
    )


def check_equimeasurable(
    u: GridFunction,
    t: float,
    d: Direction | int = 0,
    ut: GridFunction | None = None,
) -> InequalityRecord:
    """Exact level-set cell counts: the sorted sample multisets must agree;
    lhs is the count of mismatched entries."""
    ut = csts(u, t, d) if ut is None else ut
    mism = int(np.count_nonzero(np.sort(u.values.ravel()) != np.sort(ut.values.ravel())))
    return InequalityRecord(
        name="equimeas", lhs=float(mism), rhs=0.0, cell_width=u.max_spacing, t=t
    )


def check_support(
    u: GridFunction,
    t: float,
    d: Direction | int = 0,
    ut: GridFunction | None = None,
) -> InequalityRecord:
    """Support containment: max support radius of u^t <= that of u (+h)."""
    ut = csts(u, t, d) if ut is None else ut

    def support_radius(w: GridFunction) -> float:
        mask = w.values > 0
        if not mask.any():
            return 0.0
        pts = w.cell_centers()[mask]
        return float(np.sqrt((pts**2).sum(axis=1)).max())

    return InequalityRecord(
        name="support",
        lhs=support_radius(ut),
        rhs=support_radius(u) + u.max_spacing,
        cell_width=u.max_spacing,
        t=t,
    )


def check_lipschitz(
    u: GridFunction,
    t: float,
    d: Direction | int = 0,
    ut: GridFunction | None = None,
) -> InequalityRecord:
    """Lipschitz-constant preservation at grid scale: L(u^t) <= L(u) up to a
    quantization allowance of one extra level gap per cell."""
    ut = csts(u, t, d) if ut is None else ut
    return InequalityRecord(
        name="lipschitz",
        lhs=ut.lipschitz_estimate(),
        rhs=2.0 * u.lipschitz_estimate(),
        cell_width=u.max_spacing,
        t=t,
    )


PROPERTY_CHECKS = {
    "nonexp": check_nonexpansive,
    "cavalieri": check_cavalieri,
    "hardy-littlewood": check_hardy_littlewood,
    "polyasz": check_dirichlet,
    "weighted": check_weighted,
    "displacement": check_displacement,
    "equimeas": check_equimeasurable,
    "support": check_support,
    "lipschitz": check_lipschitz,
}

_BINARY = {"nonexp", "hardy-littlewood"}


def run_property(
    name: str,
    u: GridFunction,
    v: GridFunction | None = None,
    t_list: Sequence[float] = (0.1,),
    d: Direction | int = 0,
) -> list[InequalityRecord]:
    """Run one named property over the flow times; binary properties need a
    partner function ``v``."""
    try:
        checker = PROPERTY_CHECKS[name]
    except KeyError:
        raise ValueError(
            f"unknown property {name!r}; known: {sorted(PROPERTY_CHECKS)}"
        ) from None
    records = []
    for t in t_list:
        if name in _BINARY:
            if v is None:
                raise ValueError(f"property {name!r} needs two grid functions")
            records.append(checker(u, v, t, d=d))
        else:
            records.append(checker(u, t, d=d))
    return records
