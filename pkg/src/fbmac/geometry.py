"""Rate-region polygons, time-sharing hulls, parameter sweeps and sum-rate
optimization for the Gaussian scheme."""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import minimize

from .errors import InvalidParams
from .gaussian import (
    INF,
    SchemeParams,
    closed_form_arrays,
    closed_form_bounds,
    decoupled_bounds,
    lambda_max,
    oracle_bounds,
)
from .baselines import GaussianMacParams, nofb_pentagon
from .terms import C_TOL, RegionBounds

GEOM_TOL = 1e-12
LAM_MARGIN = 1e-12


@dataclass(frozen=True)
class RegionPolygon:
    """Convex, downward-closed polygon; vertices counter-clockwise from (0, 0)."""

    vertices: tuple[tuple[float, float], ...]

    def contains(self, r1: float, r2: float, tol: float = C_TOL) -> bool:
        if r1 < -tol or r2 < -tol:
            return False
        v = self.vertices
        if len(v) == 1:
            return abs(r1) <= tol and abs(r2) <= tol
        if len(v) == 2:
            (x0, y0), (x1, y1) = v
            ex, ey = x1 - x0, y1 - y0
            t = min(1.0, max(0.0, ((r1 - x0) * ex + (r2 - y0) * ey) / (ex * ex + ey * ey)))
            return math.hypot(x0 + t * ex - r1, y0 + t * ey - r2) <= tol
        for (x0, y0), (x1, y1) in zip(v, v[1:] + v[:1]):
            ex, ey = x1 - x0, y1 - y0
            length = math.hypot(ex, ey)
            # signed distance to the left of the edge
            if (ex * (r2 - y0) - ey * (r1 - x0)) / length < -tol:
                return False
        return True

    def contains_polygon(self, other: "RegionPolygon", tol: float = C_TOL) -> bool:
        return all(self.contains(x, y, tol) for x, y in other.vertices)


def _cross(o, a, b):
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def _dedupe(pts):
    out = []
    for p in pts:
        if not out or abs(p[0] - out[-1][0]) > GEOM_TOL or abs(p[1] - out[-1][1]) > GEOM_TOL:
            out.append(p)
    while len(out) > 1 and abs(out[0][0] - out[-1][0]) <= GEOM_TOL \
            and abs(out[0][1] - out[-1][1]) <= GEOM_TOL:
        out.pop()
    return out


def polygon_from_bounds(b: RegionBounds) -> RegionPolygon:
    s = max(0.0, b.sum_bound)
    r1 = min(max(0.0, b.bR1), s)
    r2 = min(max(0.0, b.bR2), s)
    pts = [(0.0, 0.0), (r1, 0.0), (r1, min(r2, s - r1)), (min(r1, s - r2), r2), (0.0, r2)]
    return RegionPolygon(tuple(_dedupe(pts)))


def _monotone_chain(pts):
    pts = sorted(set(pts))
    if len(pts) <= 2:
        return pts
    lower, upper = [], []
    for p in pts:
        while len(lower) >= 2 and _cross(lower[-2], lower[-1], p) <= GEOM_TOL:
            lower.pop()
        lower.append(p)
    for p in reversed(pts):
        while len(upper) >= 2 and _cross(upper[-2], upper[-1], p) <= GEOM_TOL:
            upper.pop()
        upper.append(p)
    return lower[:-1] + upper[:-1]


def _staircase(points: np.ndarray) -> np.ndarray:
    """Points not weakly dominated by another point (plus ties), R1 descending."""
    order = np.lexsort((-points[:, 1], -points[:, 0]))
    pts = points[order]
    best = np.maximum.accumulate(pts[:, 1])
    keep = np.ones(len(pts), dtype=bool)
    keep[1:] = pts[1:, 1] > best[:-1]
    return pts[keep]


def convex_hull(points) -> RegionPolygon:
    """Time-sharing hull of rate points, closed downward to the axes."""
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    if pts.size == 0:
        raise ValueError("need at least one point")
    if np.any(pts < -GEOM_TOL):
        raise ValueError("rate points must be nonnegative")
    pts = np.clip(pts, 0.0, None)
    front = _staircase(pts)
    cand = [(0.0, 0.0), (float(pts[:, 0].max()), 0.0), (0.0, float(pts[:, 1].max()))]
    cand += [(float(x), float(y)) for x, y in front]
    hull = _monotone_chain(cand)
    # start at the origin, counter-clockwise
    i = hull.index((0.0, 0.0))
    return RegionPolygon(tuple(hull[i:] + hull[:i]))


def pareto_frontier(poly: RegionPolygon) -> list[tuple[float, float]]:
    """Vertices not strictly dominated by another vertex, R1 ascending."""
    v = poly.vertices
    front = [p for p in v
             if not any(q[0] > p[0] + GEOM_TOL and q[1] > p[1] + GEOM_TOL for q in v)]
    return sorted(front, key=lambda p: (p[0], -p[1]))


# ---------------------------------------------------------------------------
# sweeps


def default_sigma12_grid(P: float, sigma2: float, Rfb: float, n: int = 16) -> tuple[float, ...]:
    hi = (sigma2 + P) * 4.0
    if Rfb <= 0:
        lo = (sigma2 + P) * 0.25
    elif math.isinf(Rfb):
        lo = (sigma2 + P) * 1e-4
    else:
        lo = (sigma2 + P) / (2.0 ** (2 * Rfb) - 1.0) * 0.25
    return tuple(float(x) for x in np.geomspace(lo, hi, n))


def _step_grid(step: float) -> tuple[float, ...]:
    n = int(round(1.0 / step))
    return tuple(round(i * step, 12) for i in range(n + 1))


@dataclass(frozen=True)
class SweepConfig:
    alphas: tuple[float, ...] = _step_grid(0.05)
    betas: tuple[float, ...] = _step_grid(0.05)
    thetas: tuple[float, ...] = tuple(float(x) for x in np.linspace(0.0, 1.0, 21))
    lam_fracs: tuple[float, ...] = (0.0, 0.25, 0.5, 0.75, 0.99)
    sigma12_sqs: tuple[float, ...] | None = None  # None -> default_sigma12_grid
    sigma1_sqs: tuple[float, ...] = (INF,)
    sigma2_sqs: tuple[float, ...] = (INF,)
    refine_iters: int = 400
    restarts: int = 2
    seed: int = 0

    def __post_init__(self):
        for name in ("alphas", "betas", "thetas"):
            if any(not 0.0 <= x <= 1.0 for x in getattr(self, name)):
                raise InvalidParams(f"{name} must lie in [0, 1]")
        if any(not -1.0 <= x <= 1.0 for x in self.lam_fracs):
            raise InvalidParams("lam_fracs must lie in [-1, 1]")
        if self.sigma12_sqs is not None and any(x <= 0 for x in self.sigma12_sqs):
            raise InvalidParams("sigma12_sqs must be positive")
        if any(x <= 0 for x in self.sigma1_sqs + self.sigma2_sqs):
            raise InvalidParams("private feedback variances must be positive")
        if self.refine_iters < 0 or self.restarts < 0:
            raise InvalidParams("refine_iters and restarts must be nonnegative")

    def sigma12_grid(self, P, sigma2, Rfb):
        if self.sigma12_sqs is not None:
            return tuple(self.sigma12_sqs)
        return default_sigma12_grid(P, sigma2, Rfb)


def _lam_from_frac(frac, lmax):
    # nonnegative fractions scale lambda_max; negative ones reach down to -1
    return np.where(frac >= 0, frac * np.maximum(lmax - LAM_MARGIN, 0.0), frac)


def _grid_arrays(cfg: SweepConfig, P, sigma2, Rfb):
    pairs = [(a, b) for a in cfg.alphas for b in cfg.betas if a + b <= 1.0 + 1e-12]
    combos = list(itertools.product(
        range(len(pairs)), cfg.thetas, cfg.lam_fracs, cfg.sigma12_grid(P, sigma2, Rfb),
        cfg.sigma1_sqs, cfg.sigma2_sqs,
    ))
    if not combos:
        return None
    arr = np.array([(pairs[i][0], pairs[i][1], th, lf, s12, s1, s2p)
                    for i, th, lf, s12, s1, s2p in combos], dtype=float)
    a, b, th, lf, s12, s1, s2p = arr.T
    b = np.minimum(b, 1.0 - a)
    lmax = P * th * a / (sigma2 + s12 + P * th * a + 2 * P * (1 - th))
    lam = _lam_from_frac(lf, lmax)
    return dict(a=a, b=b, th=th, lam=lam, s12=s12, s1=s1, s2p=s2p)


def evaluate_grid(cfg: SweepConfig, P: float, sigma2: float, Rfb: float):
    """Closed-form bounds on every grid point; returns (grid, bounds, feasible)."""
    g = _grid_arrays(cfg, P, sigma2, Rfb)
    if g is None:
        return None, None, np.zeros(0, dtype=bool)
    out = closed_form_arrays(P, sigma2, g["s12"], g["s1"], g["s2p"],
                             g["a"], g["b"], g["th"], g["lam"])
    feasible = out["fbCost"] <= Rfb + C_TOL if not math.isinf(Rfb) else np.ones_like(g["a"], bool)
    return g, out, feasible


def _vertices(out, mask) -> np.ndarray:
    r1b, r2b = out["bR1"][mask], out["bR2"][mask]
    s = np.maximum(np.minimum(out["bSumA"][mask], out["bSumB"][mask]), 0.0)
    r1 = np.minimum(np.maximum(r1b, 0.0), s)
    r2 = np.minimum(np.maximum(r2b, 0.0), s)
    return np.concatenate([
        np.stack([r1, np.minimum(r2, s - r1)], axis=1),
        np.stack([np.minimum(r1, s - r2), r2], axis=1),
    ])


@dataclass
class SweepResult:
    points: np.ndarray
    hull: RegionPolygon
    evaluated: int
    feasible: int
    fallback: bool = False


def sweep_regions(cfg: SweepConfig, Rfb: float, P: float, sigma2: float) -> SweepResult:
    """Union of closed-form regions over the grid, convexified by time sharing.

    An empty feasible set falls back to the no-feedback pentagon and sets
    ``fallback``.
    """
    g, out, feasible = evaluate_grid(cfg, P, sigma2, Rfb)
    n = int(feasible.size)
    if not feasible.any():
        poly = polygon_from_bounds(nofb_pentagon(GaussianMacParams(P, sigma2)))
        return SweepResult(np.array(poly.vertices), poly, n, 0, fallback=True)
    pts = _vertices(out, feasible)
    return SweepResult(pts, convex_hull(pts), n, int(feasible.sum()))


def sweep_decoupled(P: float, sigma2: float, Rfb: float, alphas=None, thetas=None,
                    sigma12_sqs=None) -> SweepResult:
    """Same as :func:`sweep_regions` for the independent-block region.

    Each point needs a handful of Gaussian MI evaluations, so the default grid
    is coarser than the closed-form sweep.
    """
    alphas = _step_grid(0.1) if alphas is None else alphas
    thetas = tuple(np.linspace(0, 1, 11)) if thetas is None else thetas
    sigma12_sqs = default_sigma12_grid(P, sigma2, Rfb, 12) if sigma12_sqs is None else sigma12_sqs
    pts, n = [], 0
    for a, th, s12 in itertools.product(alphas, thetas, sigma12_sqs):
        n += 1
        b = decoupled_bounds(P, sigma2, float(a), float(th), float(s12), Rfb=Rfb)
        if b.fbCost > Rfb + C_TOL:
            continue
        pts.extend(polygon_from_bounds(b).vertices)
    if not pts:
        poly = polygon_from_bounds(nofb_pentagon(GaussianMacParams(P, sigma2)))
        return SweepResult(np.array(poly.vertices), poly, n, 0, fallback=True)
    return SweepResult(np.array(pts), convex_hull(pts), n, len(pts))


# ---------------------------------------------------------------------------
# sum-rate optimization


@dataclass
class OptResult:
    best_params: SchemeParams | None
    best_value: float
    evaluations: int
    trace: list = field(default_factory=list)
    grid_value: float = -INF
    oracle_delta: float | None = None


def _decode(x, P, sigma2, Rfb, s1, s2p) -> SchemeParams:
    # box coordinates: alpha, beta share of (1 - alpha), theta, lam frac, log sigma12^2
    a = float(np.clip(x[0], 0.0, 1.0))
    b = float(np.clip(x[1], 0.0, 1.0)) * (1.0 - a)
    th = float(np.clip(x[2], 0.0, 1.0))
    lf = float(np.clip(x[3], -1.0, 1.0))
    s12 = float(math.exp(x[4]))
    p = SchemeParams(P, sigma2, a, b, th, 0.0, s12, s1, s2p, Rfb)
    lam = float(_lam_from_frac(np.float64(lf), lambda_max(p)))
    return p.with_(lam=min(lam, lambda_max(p) - LAM_MARGIN) if lam > 0 else lam)


def _objective(p: SchemeParams) -> float:
    b = closed_form_bounds(p)
    if not math.isinf(p.Rfb) and b.fbCost > p.Rfb + C_TOL:
        return -INF
    return b.sum_bound


def optimize_sum_rate(P: float, sigma2: float, Rfb: float, common_feedback: bool = True,
                      cfg: SweepConfig | None = None, validate: bool = True) -> OptResult:
    """Maximize min(bSumA, bSumB) over feasible scheme parameters.

    A grid pass picks starting points (the best one plus ``cfg.restarts``
    seeded draws from the top of the grid); a bounded Nelder-Mead search then
    refines each.  Infeasible iterates score -inf.
    """
    cfg = cfg or SweepConfig()
    if common_feedback:
        cfg_use = cfg if cfg.sigma1_sqs == (INF,) and cfg.sigma2_sqs == (INF,) else \
            _replace_cfg(cfg, sigma1_sqs=(INF,), sigma2_sqs=(INF,))
    else:
        cfg_use = cfg
    g, out, feasible = evaluate_grid(cfg_use, P, sigma2, Rfb)
    res = OptResult(None, -INF, int(feasible.size))
    if not feasible.any():
        return res
    vals = np.where(feasible, np.minimum(out["bSumA"], out["bSumB"]), -np.inf)
    order = np.argsort(-vals, kind="stable")

    def params_at(i):
        p = SchemeParams(P, sigma2, float(g["a"][i]), float(g["b"][i]), float(g["th"][i]),
                         float(g["lam"][i]), float(g["s12"][i]), float(g["s1"][i]),
                         float(g["s2p"][i]), Rfb)
        return p

    best_i = int(order[0])
    res.best_params = params_at(best_i)
    res.best_value = res.grid_value = float(vals[best_i])
    res.trace.append((res.best_params, res.best_value))

    n_feasible = int(feasible.sum())
    rng = random.Random(cfg.seed)
    top = [int(i) for i in order[:max(1, min(n_feasible, 50))]]
    starts = [best_i] + [rng.choice(top) for _ in range(cfg.restarts)]
    s1, s2p = None, None
    for i in starts:
        if cfg.refine_iters == 0:
            break
        p0 = params_at(i)
        s1, s2p = p0.sigma1_sq, p0.sigma2_sq
        lmax = lambda_max(p0)
        lf = p0.lam / lmax if p0.lam > 0 and lmax > 0 else (p0.lam if p0.lam < 0 else 0.0)
        x0 = np.array([p0.alpha, p0.beta / (1 - p0.alpha) if p0.alpha < 1 else 0.0,
                       p0.theta, lf, math.log(p0.sigma12_sq)])

        def f(x):
            res.evaluations += 1
            p = _decode(x, P, sigma2, Rfb, s1, s2p)
            v = _objective(p)
            if v > res.best_value:
                res.best_value, res.best_params = v, p
                res.trace.append((p, v))
            return -v if v > -INF else INF

        span = (sigma2 + P) * 1e3
        minimize(f, x0, method="Nelder-Mead",
                 bounds=[(0, 1), (0, 1), (0, 1), (-1, 1), (math.log(1e-9), math.log(span))],
                 options={"maxiter": cfg.refine_iters, "xatol": 1e-10, "fatol": 1e-13,
                          "initial_simplex": _simplex(x0)})
    if validate and res.best_params is not None:
        _, ob = oracle_bounds(res.best_params)
        res.oracle_delta = ob.max_abs_delta(closed_form_bounds(res.best_params))
    return res


def _simplex(x0):
    steps = np.array([0.05, 0.05, 0.05, 0.1, 0.3])
    pts = [x0]
    for k in range(len(x0)):
        y = x0.copy()
        # step inward so the simplex does not start pinned to a bound
        lo, hi = (0.0, 1.0) if k < 3 else ((-1.0, 1.0) if k == 3 else (-np.inf, np.inf))
        y[k] = y[k] + steps[k] if y[k] + steps[k] <= hi else y[k] - steps[k]
        y[k] = max(lo, y[k])
        pts.append(y)
    return np.array(pts)


def _replace_cfg(cfg, **kw):
    return replace(cfg, **kw)


def optimize_decoupled_sum_rate(P: float, sigma2: float, Rfb: float, alphas=None,
                                thetas=None, sigma12_sqs=None) -> tuple[float, tuple | None]:
    """Best grid sum rate of the independent-block region."""
    alphas = _step_grid(0.1) if alphas is None else alphas
    thetas = tuple(np.linspace(0, 1, 11)) if thetas is None else thetas
    sigma12_sqs = default_sigma12_grid(P, sigma2, Rfb, 12) if sigma12_sqs is None else sigma12_sqs
    best, arg = -INF, None
    for a, th, s12 in itertools.product(alphas, thetas, sigma12_sqs):
        b = decoupled_bounds(P, sigma2, float(a), float(th), float(s12), Rfb=Rfb)
        if b.fbCost > Rfb + C_TOL:
            continue
        if b.sum_bound > best:
            best, arg = b.sum_bound, (float(a), float(th), float(s12))
    return best, arg
