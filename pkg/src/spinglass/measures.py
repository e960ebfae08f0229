"""Probability-metric engine: reference laws, W1 and bounded-Lipschitz
distances, test-function truncation, and Fejer smoothing.

W1 against a continuous law is the exact staircase integral of
|F_n - F| using the law's closed-form CDF antiderivative, with crossing
points located by bisection.  The bounded-Lipschitz distance splits the
unit budget between the sup bound M and Lipschitz bound L; for each split
the inner linear program is solved exactly by the dual sweep in _flat, and
the split itself is optimized by golden section (the value is concave in
L).  A dense LP built on scipy's HiGHS is kept behind method="lp" as the
correctness oracle.

Fejer convolution of piecewise-linear test functions is evaluated in
closed form through the antiderivatives of K and t*K (sine and cosine
integrals), so its accuracy is limited by the special functions, well
inside the 1e-6 budget per point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.optimize import linprog
from scipy.special import ndtr, sici

from ._flat import flat_value

__all__ = [
    "GaussianLaw",
    "SemicircleLaw",
    "GridSpec",
    "DiscreteMeasure",
    "as_measure",
    "PiecewiseLinearFn",
    "w1_to_law",
    "w1_discrete",
    "dbl_discrete",
    "dbl_fixed_split",
    "dbl_to_law",
    "truncate_bl",
    "fejer_kernel",
    "fejer_convolve",
    "tail_mass",
]

_EULER_GAMMA = 0.5772156649015328606


# ---------------------------------------------------------------------------
# reference laws
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GaussianLaw:
    """Standard Gaussian reference: cdf, pdf, and int_{-inf}^x cdf."""

    name: str = "standard_gaussian"
    mean: float = 0.0

    def pdf(self, x):
        x = np.asarray(x, dtype=np.float64)
        return np.exp(-0.5 * x * x) / math.sqrt(2.0 * math.pi)

    def cdf(self, x):
        return ndtr(np.asarray(x, dtype=np.float64))

    def cdf_antiderivative(self, x):
        # int Phi = x Phi(x) + phi(x); vanishes at -inf
        x = np.asarray(x, dtype=np.float64)
        return x * ndtr(x) + self.pdf(x)

    def upper_tail_integral(self, x):
        # int_x^inf (1 - Phi) = phi(x) - x (1 - Phi(x))
        x = np.asarray(x, dtype=np.float64)
        return self.pdf(x) - x * ndtr(-x)

    def default_grid(self) -> "GridSpec":
        return GridSpec(-8.0, 8.0, 2e-3)


@dataclass(frozen=True)
class SemicircleLaw:
    """Wigner semicircle on [-radius, radius] (radius 2 for unit variance)."""

    radius: float = 2.0
    name: str = "semicircle"
    mean: float = 0.0

    def pdf(self, x):
        x = np.asarray(x, dtype=np.float64)
        r = self.radius
        inside = np.clip(r * r - x * x, 0.0, None)
        return 2.0 / (math.pi * r * r) * np.sqrt(inside)

    def cdf(self, x):
        x = np.asarray(x, dtype=np.float64)
        r = self.radius
        xc = np.clip(x, -r, r)
        val = 0.5 + xc * np.sqrt(r * r - xc * xc) / (math.pi * r * r) + np.arcsin(
            xc / r
        ) / math.pi
        return np.clip(val, 0.0, 1.0)

    def cdf_antiderivative(self, x):
        x = np.asarray(x, dtype=np.float64)
        r = self.radius
        xc = np.clip(x, -r, r)
        s = np.sqrt(np.clip(r * r - xc * xc, 0.0, None))
        inner = xc / 2.0 + (-(s**3) / (3.0 * r * r) + xc * np.arcsin(xc / r) + s) / math.pi
        return np.where(x <= -r, 0.0, np.where(x >= r, x, inner))

    def upper_tail_integral(self, x):
        # for a mean-zero law, int_x^inf (1 - F) = A(x) - x exactly
        x = np.asarray(x, dtype=np.float64)
        return self.cdf_antiderivative(x) - x

    def default_grid(self) -> "GridSpec":
        return GridSpec(-self.radius, self.radius, 2e-3)


@dataclass(frozen=True)
class GridSpec:
    """Uniform discretization grid for projecting a law onto atoms."""

    lo: float
    hi: float
    step: float

    def __post_init__(self):
        if not (self.hi > self.lo):
            raise ValueError("grid needs hi > lo")
        if self.step <= 0 or self.step > 0.05:
            raise ValueError(f"grid step must be in (0, 0.05], got {self.step}")

    def edges(self) -> np.ndarray:
        n_cells = max(1, int(round((self.hi - self.lo) / self.step)))
        return np.linspace(self.lo, self.hi, n_cells + 1)

    def discretize(self, law) -> tuple["DiscreteMeasure", float]:
        """Project the law onto cell midpoints; returns (measure, slack).

        Cell masses are CDF differences; the mass outside [lo, hi] is folded
        into the end cells.  Any BL-1 test function moves by at most step/2
        within a cell, so the certified discretization slack is
        step/2 + (tail mass), at most `step` for sane grids.
        """
        edges = self.edges()
        cdf = law.cdf(edges)
        masses = np.diff(cdf)
        tail = float(cdf[0] + (1.0 - cdf[-1]))
        masses[0] += cdf[0]
        masses[-1] += 1.0 - cdf[-1]
        mids = 0.5 * (edges[:-1] + edges[1:])
        keep = masses > 0
        measure = DiscreteMeasure(mids[keep], masses[keep] / masses[keep].sum())
        return measure, 0.5 * self.step + tail


# ---------------------------------------------------------------------------
# discrete measures
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DiscreteMeasure:
    """Finite discrete measure with sorted support and merged duplicates."""

    atoms: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.atoms, dtype=np.float64).ravel()
        w = np.asarray(self.weights, dtype=np.float64).ravel()
        if a.shape != w.shape or a.size == 0:
            raise ValueError("atoms and weights must be matching nonempty arrays")
        if np.any(np.isnan(a)) or np.any(np.isnan(w)) or np.any(w < 0):
            raise ValueError("atoms/weights must be finite with nonnegative weights")
        uniq, inv = np.unique(a, return_inverse=True)
        merged = np.zeros(uniq.shape[0])
        np.add.at(merged, inv, w)
        object.__setattr__(self, "atoms", uniq)
        object.__setattr__(self, "weights", merged)

    @property
    def total(self) -> float:
        return float(self.weights.sum())


def as_measure(obj) -> DiscreteMeasure:
    """Coerce a SpectralMeasure, array of atoms, or (atoms, weights) pair."""
    if isinstance(obj, DiscreteMeasure):
        return obj
    eig = getattr(obj, "eigenvalues", None)
    if eig is not None:
        n = eig.shape[0]
        return DiscreteMeasure(eig, np.full(n, 1.0 / n))
    if isinstance(obj, tuple) and len(obj) == 2:
        return DiscreteMeasure(np.asarray(obj[0]), np.asarray(obj[1]))
    arr = np.asarray(obj, dtype=np.float64).ravel()
    return DiscreteMeasure(arr, np.full(arr.shape[0], 1.0 / arr.shape[0]))


# ---------------------------------------------------------------------------
# W1
# ---------------------------------------------------------------------------

def w1_to_law(measure, law, bisect_tol: float = 1e-12) -> float:
    """Exact W1 between a discrete measure and a continuous reference law.

    Integrates |F_n - F| piece by piece: on each staircase step the law's
    CDF crosses the constant level at most once; the crossing is located by
    bisection and both sides are integrated with the CDF antiderivative.
    Tails are handled in closed form.
    """
    mu = as_measure(measure)
    if abs(mu.total - 1.0) > 1e-9:
        raise ValueError("w1_to_law needs a probability measure")
    x = mu.atoms
    cum = np.cumsum(mu.weights)
    total = float(law.cdf_antiderivative(x[0]))  # left tail: int F
    total += float(law.upper_tail_integral(x[-1]))  # right tail: int (1 - F)
    if x.shape[0] == 1:
        return total
    a, b = x[:-1], x[1:]
    c = cum[:-1]
    fa, fb = law.cdf(a), law.cdf(b)
    aa, ab = law.cdf_antiderivative(a), law.cdf_antiderivative(b)
    below = fb <= c  # law cdf stays below the step level
    above = fa >= c
    seg = np.where(
        below,
        c * (b - a) - (ab - aa),
        np.where(above, (ab - aa) - c * (b - a), 0.0),
    )
    cross = ~(below | above)
    if np.any(cross):
        lo = a[cross].copy()
        hi = b[cross].copy()
        level = c[cross]
        # bisection on F(z) = level, vectorized
        while np.max(hi - lo) > bisect_tol:
            mid = 0.5 * (lo + hi)
            fm = law.cdf(mid)
            go_right = fm < level
            lo = np.where(go_right, mid, lo)
            hi = np.where(go_right, hi, mid)
        z = 0.5 * (lo + hi)
        az = law.cdf_antiderivative(z)
        seg_cross = (
            level * (z - a[cross])
            - (az - aa[cross])
            + (ab[cross] - az)
            - level * (b[cross] - z)
        )
        seg = seg.copy()
        seg[cross] = seg_cross
    return total + float(seg.sum())


def w1_discrete(mu, nu) -> float:
    """Two-sample W1 = integral of |F_mu - F_nu| over the merged support."""
    m1, m2 = as_measure(mu), as_measure(nu)
    if abs(m1.total - m2.total) > 1e-9:
        raise ValueError("w1 needs equal total masses")
    xs = np.concatenate([m1.atoms, m2.atoms])
    ds = np.concatenate([m1.weights, -m2.weights])
    order = np.argsort(xs, kind="stable")
    xs, ds = xs[order], ds[order]
    cum = np.cumsum(ds)[:-1]
    return float(np.sum(np.abs(cum) * np.diff(xs)))


# ---------------------------------------------------------------------------
# bounded-Lipschitz distance
# ---------------------------------------------------------------------------

_MERGE_LIMIT = 50_000
_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


def _merged_difference(mu, nu) -> tuple[np.ndarray, np.ndarray]:
    m1, m2 = as_measure(mu), as_measure(nu)
    if abs(m1.total - 1.0) > 1e-9 or abs(m2.total - 1.0) > 1e-9:
        raise ValueError("bounded-Lipschitz distance needs probability measures")
    xs = np.concatenate([m1.atoms, m2.atoms])
    ds = np.concatenate([m1.weights, -m2.weights])
    order = np.argsort(xs, kind="stable")
    xs, ds = xs[order], ds[order]
    uniq, inv = np.unique(xs, return_inverse=True)
    merged = np.zeros(uniq.shape[0])
    np.add.at(merged, inv, ds)
    if uniq.shape[0] > _MERGE_LIMIT:
        raise ValueError(f"merged support {uniq.shape[0]} exceeds {_MERGE_LIMIT}")
    return uniq, merged


def dbl_fixed_split(mu, nu, sup_bound: float, lip_bound: float) -> float:
    """sup of integral f d(mu-nu) over |f| <= sup_bound, Lip(f) <= lip_bound."""
    xs, ds = _merged_difference(mu, nu)
    if xs.shape[0] <= 1:
        return 0.0
    return float(flat_value(ds, np.diff(xs), float(sup_bound), float(lip_bound)))


def dbl_discrete(mu, nu, method: str = "sweep", tol: float = 1e-6) -> float:
    """Bounded-Lipschitz distance between two discrete probability measures.

    Splits the unit BL budget as M + L = 1 and maximizes the fixed-split
    value over L by golden section (the value is concave in L: feasible
    sets average).  method="sweep" uses the exact dual sweep per split;
    method="lp" solves one joint linear program (slow, the oracle).
    """
    xs, ds = _merged_difference(mu, nu)
    if xs.shape[0] <= 1:
        return 0.0
    deltas = np.diff(xs)
    if method == "lp":
        return _dbl_joint_lp(xs, ds)
    if method != "sweep":
        raise ValueError(f"unknown method {method!r}")

    def value(lip):
        return flat_value(ds, deltas, 1.0 - lip, lip)

    a, b = 0.0, 1.0
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = value(c), value(d)
    best = max(fc, fd)
    while b - a > tol:
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = value(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = value(d)
        best = max(best, fc, fd)
    return float(best)


def _dbl_joint_lp(xs, ds) -> float:
    """One LP over (f, L): max d.f s.t. |f_i| <= 1-L, |df_i| <= L dx_i."""
    m = xs.shape[0]
    dx = np.diff(xs)
    rows, cols, vals, rhs = [], [], [], []
    r = 0
    for i in range(m):  # f_i + L <= 1 and -f_i + L <= 1
        rows += [r, r, r + 1, r + 1]
        cols += [i, m, i, m]
        vals += [1.0, 1.0, -1.0, 1.0]
        rhs += [1.0, 1.0]
        r += 2
    for i in range(m - 1):  # |f_{i+1} - f_i| - L dx_i <= 0
        rows += [r, r, r, r + 1, r + 1, r + 1]
        cols += [i + 1, i, m, i + 1, i, m]
        vals += [1.0, -1.0, -dx[i], -1.0, 1.0, -dx[i]]
        rhs += [0.0, 0.0]
        r += 2
    a_ub = sparse.csr_matrix((vals, (rows, cols)), shape=(r, m + 1))
    cost = np.concatenate([-ds, [0.0]])
    bounds = [(None, None)] * m + [(0.0, 1.0)]
    res = linprog(cost, A_ub=a_ub, b_ub=rhs, bounds=bounds, method="highs")
    if res.status != 0:
        raise RuntimeError(f"LP failed: {res.message}")
    return float(-res.fun)


def dbl_to_law(measure, law, grid: GridSpec | None = None) -> tuple[float, float]:
    """Bounded-Lipschitz distance from a discrete measure to a law.

    The law is discretized on the grid (cell masses from CDF differences);
    returns (distance, certified slack) where slack bounds the effect of
    the discretization on any BL-1 test function.
    """
    if grid is None:
        grid = law.default_grid()
    nu, slack = grid.discretize(law)
    return dbl_discrete(measure, nu), slack


def tail_mass(measure, t: float) -> float:
    """Mass of |x| > t under a discrete measure."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    mu = as_measure(measure)
    return float(mu.weights[np.abs(mu.atoms) > t].sum())


# ---------------------------------------------------------------------------
# piecewise-linear test functions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PiecewiseLinearFn:
    """Continuous piecewise-linear function, constant outside its breakpoints."""

    breakpoints: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.breakpoints, dtype=np.float64).ravel()
        v = np.asarray(self.values, dtype=np.float64).ravel()
        if b.shape != v.shape or b.size < 2:
            raise ValueError("need matching breakpoints/values, at least two")
        if not np.all(np.diff(b) > 0):
            raise ValueError("breakpoints must be strictly increasing")
        object.__setattr__(self, "breakpoints", b)
        object.__setattr__(self, "values", v)

    def __call__(self, x):
        return np.interp(x, self.breakpoints, self.values)

    def slopes(self) -> np.ndarray:
        return np.diff(self.values) / np.diff(self.breakpoints)

    def lipschitz(self) -> float:
        return float(np.max(np.abs(self.slopes()))) if self.values.size > 1 else 0.0

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values)))

    def bl_norm(self) -> float:
        return self.sup_norm() + self.lipschitz()

    def support_bounds(self) -> tuple[float, float] | None:
        nz = np.nonzero(self.values)[0]
        if nz.size == 0:
            return None
        lo = self.breakpoints[max(nz[0] - 1, 0)]
        hi = self.breakpoints[min(nz[-1] + 1, self.breakpoints.size - 1)]
        if self.values[0] != 0.0:
            lo = -math.inf
        if self.values[-1] != 0.0:
            hi = math.inf
        return float(lo), float(hi)

    def integrate_against(self, measure) -> float:
        mu = as_measure(measure)
        return float(np.sum(mu.weights * self(mu.atoms)))

    def in_g_class(self, half_support: float, pieces: int, tol: float = 1e-9) -> bool:
        """Membership in the uniform-grid test class: f(0)=0, BL<=1,
        support within [-2R, 2R], linear on the m uniform pieces."""
        r2 = 2.0 * half_support
        if abs(float(self(0.0))) > tol or self.bl_norm() > 1.0 + tol:
            return False
        sup = self.support_bounds()
        if sup is not None and (sup[0] < -r2 - tol or sup[1] > r2 + tol):
            return False
        grid = np.linspace(-r2, r2, pieces + 1)
        inside = self.breakpoints[(self.breakpoints > -r2 + tol) & (self.breakpoints < r2 - tol)]
        on_grid = np.min(np.abs(inside[:, None] - grid[None, :]), axis=1) if inside.size else np.array([])
        return bool(np.all(on_grid <= tol)) if on_grid.size else True


def truncate_bl(f: PiecewiseLinearFn, radius: float) -> PiecewiseLinearFn:
    """Truncate a BL test function to live on [-2R, 2R].

    Inside [-R, R] the function is unchanged; beyond, it ramps to zero at
    unit slope over a run of length |f(+-R)| and vanishes after.  Exact on
    the piecewise-linear representation and idempotent.
    """
    if radius <= 0:
        raise ValueError("radius must be positive")
    if abs(float(f(0.0))) > 1e-12:
        raise ValueError("truncation requires f(0) = 0")
    # the closing ramps have unit slope, so idempotence needs the weaker
    # max-norm ball: sup <= 1 and Lip <= 1 (implied by ||f||_BL <= 1)
    if f.sup_norm() > 1.0 + 1e-9 or f.lipschitz() > 1.0 + 1e-9:
        raise ValueError("truncation requires sup|f| <= 1 and Lip(f) <= 1")
    r = float(radius)
    f_r = float(f(r))
    f_l = float(f(-r))
    inner_mask = (f.breakpoints > -r) & (f.breakpoints < r)
    bps = [(-r, f_l)] + [
        (float(x), float(v))
        for x, v in zip(f.breakpoints[inner_mask], f.values[inner_mask])
    ] + [(r, f_r)]
    if f_l != 0.0:
        bps = [(-r - abs(f_l), 0.0)] + bps
    if f_r != 0.0:
        bps = bps + [(r + abs(f_r), 0.0)]
    xs = np.array([p for p, _ in bps])
    vs = np.array([v for _, v in bps])
    return PiecewiseLinearFn(xs, vs)


# ---------------------------------------------------------------------------
# Fejer kernel
# ---------------------------------------------------------------------------

def fejer_kernel(lam: float, x) -> np.ndarray:
    """K_lam(x) = (lam / 2 pi) (sin(lam x / 2) / (lam x / 2))^2."""
    if lam <= 0:
        raise ValueError("lam must be positive")
    x = np.asarray(x, dtype=np.float64)
    u = 0.5 * lam * x
    small = np.abs(u) < 1e-4
    us = np.where(small, 1.0, u)  # avoid 0/0; small branch uses the series
    ratio_sq = np.where(small, 1.0 - u * u / 3.0, (np.sin(us) / us) ** 2)
    out = lam / (2.0 * math.pi) * ratio_sq
    return out if out.shape else float(out)


def _cin(z: np.ndarray) -> np.ndarray:
    """Cin(z) = gamma + log z - Ci(z) for z >= 0, entire, series near 0."""
    z = np.asarray(z, dtype=np.float64)
    small = z < 1e-3
    zs = np.where(small, 1.0, z)
    _, ci = sici(zs)
    out = np.where(small, z * z / 4.0 - z**4 / 96.0, _EULER_GAMMA + np.log(zs) - ci)
    return out


def fejer_convolve(f: PiecewiseLinearFn, lam: float, eval_points) -> np.ndarray:
    """(f * K_lam) at eval_points, in closed form for piecewise-linear f.

    Uses antiderivatives G = int K (via the sine integral) and
    T = int t K(t) dt (via Cin); per evaluation point the convolution is a
    sum over the pieces of f.  Requires compact support (zero end values).
    """
    if lam <= 0:
        raise ValueError("lam must be positive")
    if f.values[0] != 0.0 or f.values[-1] != 0.0:
        raise ValueError("fejer_convolve requires a compactly supported function")
    xs = np.atleast_1d(np.asarray(eval_points, dtype=np.float64))
    y = f.breakpoints
    t = xs[:, None] - y[None, :]  # (Nx, P+1) offsets at piece edges
    z = lam * np.abs(t)
    si_z, _ = sici(z)
    # G(t) = sign(t)/pi * (Si(z) - 2 sin^2(z/2)/z), the CDF of K up to 1/2
    zsafe = np.where(z == 0.0, 1.0, z)
    g_mag = (si_z - 2.0 * np.sin(0.5 * z) ** 2 / zsafe) / math.pi
    g = np.sign(t) * np.where(z == 0.0, 0.0, g_mag)
    # T(t) = Cin(z) / (pi lam), even in t
    t_anti = _cin(z) / (math.pi * lam)

    slopes = f.slopes()
    alphas = f.values[:-1] - slopes * y[:-1]  # piece p: f(y) = alpha + beta y
    out = np.zeros(xs.shape[0])
    for p in range(y.size - 1):
        beta = slopes[p]
        alpha = alphas[p]
        gb, ga = g[:, p], g[:, p + 1]  # b = x - y_p >= a = x - y_{p+1}
        tb, ta = t_anti[:, p], t_anti[:, p + 1]
        if alpha == 0.0 and beta == 0.0:
            continue
        out += (alpha + beta * xs) * (gb - ga) - beta * (tb - ta)
    return out
