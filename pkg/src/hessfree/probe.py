"""Jensen-gap probes.

For a map F and a weighted configuration (x_1..x_n, w_1..w_n) the probe
evaluates

    gap    = || F(sum_i w_i x_i) - sum_i w_i F(x_i) ||
    spread = sum_{i<j} w_i w_j ||x_i - x_j||^2
    ratio  = 2 gap / spread

If the derivative of F is L-Lipschitz then gap <= (L/2) spread for every
configuration, and the supremum of the ratio over all configurations
equals the best such L; the ratio is therefore simultaneously a sound
lower-bound witness and a falsification test for claimed constants.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .oracles import VectorOracle
from .vecspace import Configuration, SimplexWeights, Vector, convex_combination, pair_spread

# below this, ratio is reported absent instead of dividing by near-zero
SPREAD_FLOOR_COEFF = 1e-14

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
_T_GRID = 32
_GOLDEN_ITERS = 20


@dataclass(frozen=True)
class ProbeResult:
    """One evaluated configuration.

    ratio is None when spread <= SPREAD_FLOOR_COEFF * (1 + max_i ||x_i||)^2.
    value_scale (max norm of F values seen) and point_scale (max point
    norm) feed scale-aware tolerances downstream.
    """

    gap: float
    spread: float
    ratio: float | None
    config: Configuration
    oracle_label: str
    value_scale: float
    point_scale: float

    def spread_floor(self) -> float:
        return SPREAD_FLOOR_COEFF * (1.0 + self.point_scale) ** 2


def jensen_probe(F: VectorOracle, c: Configuration) -> ProbeResult:
    """Evaluate gap, spread and ratio for one configuration."""
    if c.dim != F.dim_in:
        raise ValueError(f"configuration dim {c.dim} != oracle dim_in {F.dim_in}")
    pts = c.points
    w = c.weights.weights
    values = np.asarray(F.eval(pts), dtype=np.float64)
    center = np.asarray(F.eval(w @ pts), dtype=np.float64)
    if not (np.isfinite(values).all() and np.isfinite(center).all()):
        raise ValueError(f"non-finite output from oracle {F.label!r}")
    resid = center - w @ values
    gap = float(np.sqrt(resid @ resid))
    spread = pair_spread(c)
    point_scale = float(np.sqrt(np.einsum("ij,ij->i", pts, pts).max()))
    vs = float(np.sqrt(np.einsum("...i,...i->...", values, values).max()))
    value_scale = max(vs, float(np.sqrt(center @ center)))
    floor = SPREAD_FLOOR_COEFF * (1.0 + point_scale) ** 2
    ratio = 2.0 * gap / spread if spread > floor else None
    return ProbeResult(gap, spread, ratio, c, F.label, value_scale, point_scale)


def two_point_probe(F: VectorOracle, x: Vector, y: Vector, t: float) -> ProbeResult:
    """The n = 2 specialization with weights (1 - t, t), so that
    spread = t (1 - t) ||x - y||^2."""
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"t must lie in [0, 1], got {t!r}")
    c = Configuration(np.stack([np.atleast_1d(x), np.atleast_1d(y)]),
                      SimplexWeights(np.array([1.0 - t, t])))
    return jensen_probe(F, c)


def _score(r: ProbeResult) -> float:
    return r.ratio if r.ratio is not None else -math.inf


def best_t_probe(
    F: VectorOracle, x: Vector, y: Vector, min_spread_coeff: float = 0.0
) -> ProbeResult:
    """Maximize the two-point ratio over t: coarse grid t = k/32
    (k = 1..31), then golden-section refinement over the bracketing
    interval around the best grid point.

    The scan shares F(x), F(y) and the pair geometry across all t; the
    winning t is then re-evaluated through two_point_probe so the
    returned result is replayable bit-for-bit.  min_spread_coeff, when
    positive, declares t values with spread below
    min_spread_coeff * (1 + max norm)^2 uninformative for the scan.
    """
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    y = np.atleast_1d(np.asarray(y, dtype=np.float64))
    if x.shape != y.shape:
        raise ValueError("x and y must have equal dimension")
    fvals = np.asarray(F.eval(np.stack([x, y])), dtype=np.float64)
    if not np.isfinite(fvals).all():
        raise ValueError(f"non-finite output from oracle {F.label!r}")
    fx, fy = fvals[0], fvals[1]
    d2 = float((x - y) @ (x - y))
    ps = max(float(np.sqrt(x @ x)), float(np.sqrt(y @ y)))
    floor = max(SPREAD_FLOOR_COEFF, min_spread_coeff) * (1.0 + ps) ** 2

    def scan(ts: np.ndarray) -> np.ndarray:
        xbars = (1.0 - ts)[:, None] * x[None, :] + ts[:, None] * y[None, :]
        centers = np.asarray(F.eval(xbars), dtype=np.float64)
        if not np.isfinite(centers).all():
            raise ValueError(f"non-finite output from oracle {F.label!r}")
        resid = centers - ((1.0 - ts)[:, None] * fx[None, :] + ts[:, None] * fy[None, :])
        gaps = np.sqrt(np.einsum("ij,ij->i", resid, resid))
        spreads = ts * (1.0 - ts) * d2
        ratios = np.full(ts.size, -math.inf)
        ok = spreads > floor
        ratios[ok] = 2.0 * gaps[ok] / spreads[ok]
        return ratios

    grid = np.arange(1, _T_GRID) / _T_GRID
    ratios = scan(grid)
    best_k = int(np.argmax(ratios))
    best_t = float(grid[best_k])
    best_r = float(ratios[best_k])

    a = (best_k) / _T_GRID  # == grid[best_k] - 1/32
    b = (best_k + 2) / _T_GRID
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    rc = float(scan(np.array([c]))[0])
    rd = float(scan(np.array([d]))[0])
    for _ in range(_GOLDEN_ITERS):
        for t_new, r_new in ((c, rc), (d, rd)):
            if r_new > best_r:
                best_t, best_r = t_new, r_new
        if rc >= rd:
            b, d, rd = d, c, rc
            c = b - _GOLDEN * (b - a)
            rc = float(scan(np.array([c]))[0])
        else:
            a, c, rc = c, d, rd
            d = a + _GOLDEN * (b - a)
            rd = float(scan(np.array([d]))[0])
    for t_new, r_new in ((c, rc), (d, rd)):
        if r_new > best_r:
            best_t, best_r = t_new, r_new
    return two_point_probe(F, x, y, best_t)


def midpoint_convexity_violation(g, x: Vector, y: Vector) -> float:
    """g((x + y) / 2) - (g(x) + g(y)) / 2.

    Nonpositive for convex g; a strictly positive value certifies that g
    is not convex (g must accept batched points)."""
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    y = np.atleast_1d(np.asarray(y, dtype=np.float64))
    if x.shape != y.shape:
        raise ValueError("x and y must have equal dimension")
    vals = np.asarray(g(np.stack([(x + y) / 2.0, x, y])), dtype=np.float64)
    if not np.isfinite(vals).all():
        raise ValueError("non-finite value in convexity probe")
    return float(vals[0] - (vals[1] + vals[2]) / 2.0)
