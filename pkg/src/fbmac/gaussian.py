"""Gaussian instance of the rate-limited-feedback MAC scheme.

Two consecutive blocks are modelled jointly: the previous block ("tilde"
variables, prefixed ``t``) and the current block.  The current block's
correlated resolution pair (V1, V2) is a linear function of the previous
block's fresh cooperative parts and the common feedback, with coefficients
chosen so that (V1, V2) has the same law as (tV1, tV2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import InfiniteMutualInformation, InvalidParams, NoRealSolution
from .info import LinearGaussianSystem, add_variable, cond_mi_gaussian
from .terms import C_TOL, MacMiTerms, RegionBounds, bounds_from_terms, evaluate_terms

INF = math.inf


def cap(x: float) -> float:
    """Gaussian capacity function 0.5 * log2(1 + x)."""
    return 0.5 * math.log2(1.0 + x)


@dataclass(frozen=True)
class SchemeParams:
    """Parameters of the Gaussian scheme.

    ``sigma1_sq``/``sigma2_sq`` equal to ``math.inf`` remove the private
    feedback descriptions (common-feedback-only mode).  ``lam`` is checked
    against :func:`lambda_max` only where it matters (xi solving and
    feasibility), so out-of-range values can still be represented.
    """

    P: float
    sigma2: float
    alpha: float
    beta: float
    theta: float
    lam: float
    sigma12_sq: float
    sigma1_sq: float = INF
    sigma2_sq: float = INF
    Rfb: float = INF

    def __post_init__(self):
        check_structure(self)

    @property
    def common_feedback(self) -> bool:
        return math.isinf(self.sigma1_sq) and math.isinf(self.sigma2_sq)

    @property
    def coop(self) -> float:
        """Weight 1 - alpha - beta of the common codeword in U_i."""
        return max(0.0, 1.0 - self.alpha - self.beta)

    def with_(self, **kw) -> "SchemeParams":
        return replace(self, **kw)


def check_structure(p: SchemeParams) -> None:
    def bad(msg):
        raise InvalidParams(msg)

    for name in ("P", "sigma2", "alpha", "beta", "theta", "lam", "sigma12_sq",
                 "sigma1_sq", "sigma2_sq", "Rfb"):
        v = getattr(p, name)
        if not isinstance(v, (int, float)) or math.isnan(v):
            bad(f"{name} must be a real number, got {v!r}")
    if not (0 < p.P < INF):
        bad("P must be positive and finite")
    if not (0 < p.sigma2 < INF):
        bad("sigma2 must be positive and finite")
    for name in ("alpha", "beta", "theta"):
        if not 0.0 <= getattr(p, name) <= 1.0:
            bad(f"{name} must lie in [0, 1]")
    if p.alpha + p.beta > 1.0 + 1e-12:
        bad("alpha + beta must not exceed 1")
    if not -1.0 <= p.lam <= 1.0:
        bad("lam must lie in [-1, 1]")
    if not (0 < p.sigma12_sq < INF):
        bad("sigma12_sq must be positive and finite")
    for name in ("sigma1_sq", "sigma2_sq"):
        if not getattr(p, name) > 0:
            bad(f"{name} must be positive (or inf)")
    if not p.Rfb >= 0:
        bad("Rfb must be nonnegative")


def lambda_max(p: SchemeParams) -> float:
    """Largest correlation of the resolution pair for which xi is real."""
    num = p.P * p.theta * p.alpha
    return num / (p.sigma2 + p.sigma12_sq + num + 2 * p.P * (1 - p.theta))


def _gain(p: SchemeParams) -> float:
    # correlation between A~_i and the normalized feedback statistic f
    return math.sqrt(
        p.P * p.theta * p.alpha
        / (p.sigma2 + p.sigma12_sq + 2 * p.P * p.alpha * p.theta + 2 * p.P * (1 - p.theta))
    )


@dataclass(frozen=True)
class XiPair:
    xi1: float
    xi2: float


def xi_residuals(p: SchemeParams, xi: XiPair) -> tuple[float, float]:
    g = _gain(p)
    r1 = xi.xi1**2 + xi.xi2**2 + 2 * xi.xi1 * xi.xi2 * g - 1.0
    r2 = -2 * xi.xi1 * xi.xi2 * g - xi.xi2**2 - p.lam
    return abs(r1), abs(r2)


def solve_xi(p: SchemeParams, branch: int = +1) -> XiPair:
    """Solve the two moment conditions for (xi1, xi2).

    Adding the conditions gives xi1**2 = 1 + lam; the second is then a
    quadratic in xi2.  ``branch`` picks the sign of the square root.
    """
    if branch not in (+1, -1):
        raise ValueError("branch must be +1 or -1")
    g = _gain(p)
    disc = (1 + p.lam) * g * g - p.lam
    if disc < 0:
        if disc > -1e-15:
            disc = 0.0
        else:
            raise NoRealSolution(
                f"lam={p.lam} exceeds lambda_max={lambda_max(p)} (discriminant {disc:.3e})"
            )
    xi1 = math.sqrt(1 + p.lam)
    return XiPair(xi1, -xi1 * g + branch * math.sqrt(disc))


def build_system(p: SchemeParams, branch: int = +1) -> LinearGaussianSystem:
    """Linear-Gaussian model of the previous and current block."""
    xi = solve_xi(p, branch)
    P, th, a, b, c = p.P, p.theta, p.alpha, p.beta, p.coop
    sa, sb, sc = math.sqrt(a), math.sqrt(b), math.sqrt(c)
    s = LinearGaussianSystem()

    def fresh(s, name, var=1.0):
        return add_variable(s, name, (), var)

    def block(s, pre, v1, v2):
        # one block's inputs and outputs given its resolution pair (v1, v2)
        for n in ("W", "A1", "A2", "IX1", "IX2"):
            s = fresh(s, pre + n)
        s = fresh(s, pre + "Z", p.sigma2)
        s = fresh(s, pre + "Z12", p.sigma12_sq)
        priv = [i for i, v in ((1, p.sigma1_sq), (2, p.sigma2_sq)) if not math.isinf(v)]
        for i in priv:
            s = fresh(s, f"{pre}Z{i}", getattr(p, f"sigma{i}_sq"))
        for i, v in ((1, v1), (2, v2)):
            s = add_variable(s, f"{pre}U{i}", [(f"{pre}A{i}", sa), (v, sb), (pre + "W", sc)])
            s = add_variable(
                s, f"{pre}X{i}",
                [(f"{pre}IX{i}", math.sqrt(P * (1 - th))), (f"{pre}U{i}", math.sqrt(P * th))],
            )
        s = add_variable(s, pre + "Y", [(pre + "X1", 1.0), (pre + "X2", 1.0), (pre + "Z", 1.0)])
        s = add_variable(s, pre + "Y12", [(pre + "Y", 1.0), (pre + "Z12", 1.0)])
        for i in priv:
            s = add_variable(s, f"{pre}Y{i}", [(pre + "Y", 1.0), (f"{pre}Z{i}", 1.0)])
        return s

    s = fresh(s, "tV1")
    s = add_variable(s, "tV2", [("tV1", p.lam)], 1.0 - p.lam**2)
    s = block(s, "t", "tV1", "tV2")

    # f(S~): the part of Y~12 not explained by the common components, normalized
    norm = math.sqrt(p.sigma2 + p.sigma12_sq + 2 * P * a * th + 2 * P * (1 - th))
    s = add_variable(
        s, "f",
        [("tY12", 1 / norm), ("tV1", -math.sqrt(b * th * P) / norm),
         ("tV2", -math.sqrt(b * th * P) / norm), ("tW", -2 * math.sqrt(c * th * P) / norm)],
    )
    s = add_variable(s, "V1", [("tA1", xi.xi1), ("f", xi.xi2)])
    s = add_variable(s, "V2", [("tA2", -xi.xi1), ("f", -xi.xi2)])
    return block(s, "", "V1", "V2")


def _cap(x):
    return 0.5 * np.log2(1.0 + x)


def closed_form_arrays(P, s2, s12, s1, s2p, a, b, th, lam) -> dict[str, np.ndarray]:
    """Closed-form bounds, broadcasting over array arguments.

    ``s1``/``s2p`` are the private feedback noise variances (``inf`` drops
    the corresponding description).
    """
    P, s2, s12, s1, s2p, a, b, th, lam = np.broadcast_arrays(
        *(np.asarray(x, dtype=float) for x in (P, s2, s12, s1, s2p, a, b, th, lam))
    )
    c = 1.0 - a - b
    m = 1.0 - c * th  # fraction of X_i power not carried by W
    with np.errstate(divide="ignore", invalid="ignore"):
        corr = np.where(b > 0, b * b * th * lam * lam / m, 0.0)
        fb = _cap(s2 / s12 + P / s12 - P * th / s12 * (c + corr))
        spread = m * m - b * b * th * th * lam * lam
        num = s2 * m + P * spread
        den = (s2 + s12) * m + P * spread
        # num/den -> s2/(s2+s12) as m -> 0 (only possible with beta = 0)
        ratio = np.where(den > 0, num / den, s2 / (s2 + s12))
        harm = {}
        for i, si in ((1, s1), (2, s2p)):
            finite = np.isfinite(si)
            sf = np.where(finite, si, 1.0)
            fb = fb + np.where(finite, _cap(s12 / sf * ratio), 0.0)
            harm[i] = np.where(finite, s12 * sf / (s12 + sf), s12)

    def cross(h):
        return _cap(
            P * th * a / (s2 + h + P * (1 - th))
            + P * th * b * (1 + lam) / (h + s2 + P * (1 - th) + P * a * th)
        )

    noise = 2 * P * (1 - th) + s2
    resolve = (
        _cap(a * P * th / noise)
        + _cap(4 * P * th * c / (s2 + 2 * P * (1 - th) + 2 * P * th * (a + b * (1 + lam))))
        + _cap(b * P * th * noise * (1 + lam)
               / ((2 * a * P * th + noise) * (s2 + 2 * P * (1 - th) + a * P * th)))
    )
    coop1 = np.minimum(cross(harm[2]), resolve)
    coop2 = np.minimum(cross(harm[1]), resolve)
    fresh = _cap(P * (1 - th) / s2)
    fresh12 = _cap(2 * P * (1 - th) / s2)
    return {
        "bR1": fresh + coop1,
        "bR2": fresh + coop2,
        "bSumA": fresh12 + _cap(2 * P * th * (2 - a - b * (1 - lam)) / noise),
        "bSumB": fresh12 + coop1 + coop2,
        "fbCost": fb,
    }


def closed_form_bounds(p: SchemeParams) -> RegionBounds:
    """Printed closed-form bounds of the Gaussian scheme."""
    out = closed_form_arrays(p.P, p.sigma2, p.sigma12_sq, p.sigma1_sq, p.sigma2_sq,
                             p.alpha, p.beta, p.theta, p.lam)
    return RegionBounds(**{k: float(v) for k, v in out.items()})


def _gaussian_terms(s: LinearGaussianSystem, **kw) -> MacMiTerms:
    def mi(a, b, c):
        try:
            return cond_mi_gaussian(s, a, b, c)
        except InfiniteMutualInformation as exc:
            raise InfiniteMutualInformation(str(exc), term=(a, b, c)) from None

    return evaluate_terms(mi, present=set(s.names), **kw)


def oracle_terms(p: SchemeParams, branch: int = +1, **kw) -> MacMiTerms:
    """All sixteen MI terms computed directly on the linear-Gaussian model."""
    return _gaussian_terms(build_system(p, branch), **kw)


def oracle_bounds(p: SchemeParams, branch: int = +1, **kw) -> tuple[MacMiTerms, RegionBounds]:
    t = oracle_terms(p, branch, **kw)
    return t, bounds_from_terms(t)


def feedback_feasible(p: SchemeParams, bounds: RegionBounds | None = None) -> bool:
    if math.isinf(p.Rfb):
        return True
    if bounds is None:
        bounds = closed_form_bounds(p)
    return p.Rfb >= bounds.fbCost - C_TOL


def is_feasible(p: SchemeParams) -> bool:
    """lam admissible and feedback budget respected."""
    return p.lam <= lambda_max(p) + 1e-15 and feedback_feasible(p)


def wyner_ziv_min_sigma12_sq(P: float, sigma2: float, Rfb: float) -> float:
    """Smallest quantization noise a common-feedback link of rate Rfb supports
    when nothing is known at the transmitters (theta = 0)."""
    if Rfb <= 0:
        raise InvalidParams("Rfb must be positive")
    if math.isinf(Rfb):
        return 0.0
    return (sigma2 + P) / (2.0 ** (2 * Rfb) - 1.0)


def build_decoupled_system(P, sigma2, alpha, theta, sigma12_sq, sigma1_sq=INF,
                           sigma2_sq=INF) -> LinearGaussianSystem:
    """Single-block model without resolution pair: U_i = sqrt(a) A_i + sqrt(1-a) W."""
    s = LinearGaussianSystem()
    for n in ("W", "A1", "A2", "IX1", "IX2"):
        s = add_variable(s, n, (), 1.0)
    s = add_variable(s, "Z", (), sigma2)
    s = add_variable(s, "Z12", (), sigma12_sq)
    priv = [i for i, v in ((1, sigma1_sq), (2, sigma2_sq)) if not math.isinf(v)]
    for i in priv:
        s = add_variable(s, f"Z{i}", (), (sigma1_sq, sigma2_sq)[i - 1])
    for i in (1, 2):
        s = add_variable(s, f"U{i}", [(f"A{i}", math.sqrt(alpha)), ("W", math.sqrt(1 - alpha))])
        s = add_variable(
            s, f"X{i}",
            [(f"IX{i}", math.sqrt(P * (1 - theta))), (f"U{i}", math.sqrt(P * theta))],
        )
    s = add_variable(s, "Y", [("X1", 1.0), ("X2", 1.0), ("Z", 1.0)])
    s = add_variable(s, "Y12", [("Y", 1.0), ("Z12", 1.0)])
    for i in priv:
        s = add_variable(s, f"Y{i}", [("Y", 1.0), (f"Z{i}", 1.0)])
    return s


def decoupled_bounds(P, sigma2, alpha, theta, sigma12_sq, sigma1_sq=INF,
                     sigma2_sq=INF, Rfb=INF) -> RegionBounds:
    """Region without transmitter-side resolution (independent blocks)."""
    # reuse the parameter checks; beta and lam are structurally zero
    SchemeParams(P, sigma2, alpha, 0.0, theta, 0.0, sigma12_sq, sigma1_sq, sigma2_sq, Rfb)
    s = build_decoupled_system(P, sigma2, alpha, theta, sigma12_sq, sigma1_sq, sigma2_sq)

    def mi(a, b, c=()):
        a, b, c = (tuple(v for v in x if v in s) for x in (a, b, c))
        return cond_mi_gaussian(s, a, b, c) if a and b else 0.0

    fb = (max(mi(["Y12"], ["Y"], ["W", "X1"]), mi(["Y12"], ["Y"], ["W", "X2"]))
          + mi(["Y"], ["Y1"], ["Y12", "X1", "W"]) + mi(["Y"], ["Y2"], ["Y12", "X2", "W"]))
    iw = mi(["W"], ["Y"])
    coop1 = min(mi(["U1"], ["Y"], ["W", "U2"]) + iw, mi(["U1"], ["Y2", "Y12"], ["W", "X2"]))
    coop2 = min(mi(["U2"], ["Y"], ["W", "U1"]) + iw, mi(["U2"], ["Y1", "Y12"], ["W", "X1"]))
    return RegionBounds(
        bR1=mi(["X1"], ["Y"], ["W", "U1", "X2"]) + coop1,
        bR2=mi(["X2"], ["Y"], ["W", "U2", "X1"]) + coop2,
        bSumA=mi(["X1", "X2"], ["Y"]),
        bSumB=mi(["X1", "X2"], ["Y"], ["W", "U1", "U2"]) + coop1 + coop2,
        fbCost=fb,
    )
