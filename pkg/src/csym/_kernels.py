"""Compiled kernels for the interval flow and the fiber-wise symmetrization.

Everything here works on plain float64 arrays so numba can compile it.
Interval positions are expressed in whatever unit the caller chooses; the
grid code uses cell widths with the origin of the flow axis at coordinate 0.

If numba is unavailable the kernels run as plain Python (slow but identical).
"""

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only on stripped installs
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]

        def deco(fn):
            return fn

        return deco


@njit(cache=True)
def _merge_touching(c, r, m):
    """Coalesce every chain of touching intervals (gap within rounding
    tolerance) into its union; radii add, so measure is preserved.  Returns
    the new count."""
    k = 0
    i = 0
    while i < m:
        j = i
        while j + 1 < m:
            gap = (c[j + 1] - c[j]) - (r[j] + r[j + 1])
            tol = 1e-12 * (1.0 + abs(c[j]) + abs(c[j + 1]))
            if gap <= tol:
                j += 1
            else:
                break
        if j > i:
            left = c[i] - r[i]
            right = c[j] + r[j]
            rsum = 0.0
            for q in range(i, j + 1):
                rsum += r[q]
            c[k] = 0.5 * (left + right)
            r[k] = rsum
        else:
            c[k] = c[i]
            r[k] = r[i]
        k += 1
        i = j + 1
    return k


@njit(cache=True)
def flow_merge(c, r, m, t):
    """Advance ``m`` disjoint intervals (centers ``c``, radii ``r``) by flow
    time ``t``.

    Centers follow c(t) = c0 * exp(-t) independently; when two intervals
    touch they coalesce into one interval spanning their union (radii add),
    and the merged center continues under the same law.  Collision times are
    solved in closed form, so the construction is event-driven and exact up
    to float rounding.  A collision landing exactly at the end time is
    processed, so the returned state is always a well-separated union.

    Mutates ``c`` and ``r`` in place and returns the new interval count.
    """
    if m <= 0:
        return 0
    remaining = t
    while m > 1:
        # Earliest contact among adjacent pairs: (c2 - c1) e^{-tau} = r1 + r2.
        # Gaps are positive, so the ratio is > 1 and tau > 0.
        tau = np.inf
        for i in range(m - 1):
            tau_i = np.log((c[i + 1] - c[i]) / (r[i] + r[i + 1]))
            if tau_i < tau:
                tau = tau_i
        if tau > remaining:
            break
        if tau > 0.0:
            s = np.exp(-tau)
            for i in range(m):
                c[i] *= s
            remaining -= tau
        # Simultaneous multi-collisions merge as whole chains in one event,
        # which keeps the construction order-independent.
        m = _merge_touching(c, r, m)
    if remaining > 0.0:
        s = np.exp(-remaining)
        for i in range(m):
            c[i] *= s
    # Rounding can leave a sub-tolerance gap when a collision lands within
    # one ulp of the end time; store such chains merged.
    return _merge_touching(c, r, m)


@njit(cache=True)
def _quantize_level(v, cov, chosen, out, w, need, origin, mcen):
    """Grow the chosen cell set by ``need`` cells of highest coverage.

    Ties are broken toward the flowed mass center ``mcen`` and then toward
    lower index, which keeps the output deterministic.  Newly chosen cells
    receive the level value ``w``.
    """
    n = v.shape[0]
    for _ in range(need):
        best = -1
        bcov = -1.0
        bdist = np.inf
        for i in range(n):
            if chosen[i]:
                continue
            ci = cov[i]
            if ci <= 0.0:
                continue
            d = abs((i + 0.5 - origin) - mcen)
            if ci > bcov + 1e-12 or (ci > bcov - 1e-12 and d < bdist - 1e-12):
                best = i
                bcov = ci
                bdist = d
        if best < 0:
            # Degenerate float fallback: keep the cell count exact anyway.
            for i in range(n):
                if not chosen[i]:
                    d = abs((i + 0.5 - origin) - mcen)
                    if d < bdist:
                        bdist = d
                        best = i
        chosen[best] = True
        out[best] = w
    return


@njit(cache=True)
def _flow_cell_set(v, w, strict, origin, t, is_inf, c, r):
    """Build the superlevel set {v >= w} (or {v > w}) as intervals in cell
    units, flow it, and return the component count."""
    n = v.shape[0]
    m = 0
    i = 0
    while i < n:
        inside = v[i] > w if strict else v[i] >= w
        if inside:
            j = i
            while j + 1 < n:
                nxt = v[j + 1] > w if strict else v[j + 1] >= w
                if not nxt:
                    break
                j += 1
            c[m] = 0.5 * ((i - origin) + (j + 1 - origin))
            r[m] = 0.5 * (j + 1 - i)
            m += 1
            i = j + 1
        else:
            i += 1
    if is_inf:
        tot = 0.0
        for q in range(m):
            tot += r[q]
        if tot > 0.0:
            c[0] = 0.0
            r[0] = tot
            m = 1
        else:
            m = 0
    elif t > 0.0:
        m = flow_merge(c, r, m, t)
    return m


@njit(cache=True)
def _coverage(c, r, m, origin, cov):
    """Per-cell overlap of the interval union with the unit cells, plus the
    union's mass center (for tie-breaking)."""
    n = cov.shape[0]
    for i in range(n):
        cov[i] = 0.0
    mass = 0.0
    mcen = 0.0
    for q in range(m):
        a = c[q] - r[q]
        b = c[q] + r[q]
        mass += 2.0 * r[q]
        mcen += 2.0 * r[q] * c[q]
        ilo = int(np.floor(a + origin))
        ihi = int(np.ceil(b + origin)) - 1
        if ilo < 0:
            ilo = 0
        if ihi > n - 1:
            ihi = n - 1
        for i in range(ilo, ihi + 1):
            lo = i - origin
            ov = min(b, lo + 1.0) - max(a, lo)
            if ov > 0.0:
                cov[i] += ov
    if mass > 0.0:
        mcen /= mass
    return mcen


@njit(cache=True)
def _fiber_csts_gridvals(v, origin, t, is_inf, out, c, r, cov, chosen):
    """Continuous symmetrization of one fiber using the fiber's own distinct
    positive values as the level grid.

    Levels are processed from the top down; each level's superlevel set is
    flowed exactly and then re-quantized to cells with its cell count
    preserved, growing the already-chosen set.  The output values are a
    permutation of the input values, so every level-set cell count is exact.
    """
    n = v.shape[0]
    for i in range(n):
        out[i] = 0.0
        chosen[i] = False
    order = np.argsort(v)
    nchosen = 0
    pos = n - 1
    while pos >= 0:
        w = v[order[pos]]
        if w <= 0.0:
            break
        p2 = pos
        while p2 >= 0 and v[order[p2]] == w:
            p2 -= 1
        k = n - 1 - p2
        m = _flow_cell_set(v, w, False, origin, t, is_inf, c, r)
        mcen = _coverage(c, r, m, origin, cov)
        _quantize_level(v, cov, chosen, out, w, k - nchosen, origin, mcen)
        nchosen = k
        pos = p2
    return


@njit(cache=True)
def _fiber_csts_levels(v, levels_desc, origin, t, is_inf, out, c, r, cov, chosen):
    """Continuous symmetrization of one fiber quantized to an explicit level
    grid (descending positive values); output values live on that grid."""
    n = v.shape[0]
    for i in range(n):
        out[i] = 0.0
        chosen[i] = False
    nchosen = 0
    for li in range(levels_desc.shape[0]):
        w = levels_desc[li]
        k = 0
        for i in range(n):
            if v[i] > w:
                k += 1
        if k <= nchosen:
            continue
        m = _flow_cell_set(v, w, True, origin, t, is_inf, c, r)
        mcen = _coverage(c, r, m, origin, cov)
        _quantize_level(v, cov, chosen, out, w, k - nchosen, origin, mcen)
        nchosen = k
    return


@njit(cache=True)
def csts_axis_gridvals(vals, origin, t, is_inf):
    """Apply the fiber symmetrization to every row of ``vals`` (fibers x
    cells), level grid = each fiber's own values."""
    nf, n = vals.shape
    out = np.zeros_like(vals)
    c = np.empty(n // 2 + 2, np.float64)
    r = np.empty(n // 2 + 2, np.float64)
    cov = np.empty(n, np.float64)
    chosen = np.empty(n, np.bool_)
    for f in range(nf):
        _fiber_csts_gridvals(vals[f], origin, t, is_inf, out[f], c, r, cov, chosen)
    return out


@njit(cache=True)
def csts_axis_levels(vals, levels_desc, origin, t, is_inf):
    """Row-wise fiber symmetrization quantized to an explicit level grid."""
    nf, n = vals.shape
    out = np.zeros_like(vals)
    c = np.empty(n // 2 + 2, np.float64)
    r = np.empty(n // 2 + 2, np.float64)
    cov = np.empty(n, np.float64)
    chosen = np.empty(n, np.bool_)
    for f in range(nf):
        _fiber_csts_levels(
            vals[f], levels_desc, origin, t, is_inf, out[f], c, r, cov, chosen
        )
    return out
