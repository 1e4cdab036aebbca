"""The sixteen mutual-information terms of the achievable region and the
rate bounds they induce."""

from __future__ import annotations

from dataclasses import asdict, dataclass, fields

C_TOL = 1e-9

TERM_NAMES = (
    "tFB1", "tFB2", "tFBa", "tFBb",
    "d1", "d2", "d12",
    "a1", "a2",
    "bW", "bU1", "bU2", "bV1", "bV2", "bU12", "bV12",
)


@dataclass(frozen=True)
class MacMiTerms:
    """Named MI quantities (bits).

    ``tFB*`` price the feedback link, ``d*`` are the fresh-data terms decoded
    at the receiver without feedback help, ``a*`` measure how well each
    transmitter can decode the other's cooperative codeword, and ``b*`` are
    the receiver's list-resolution terms.
    """

    tFB1: float
    tFB2: float
    tFBa: float
    tFBb: float
    d1: float
    d2: float
    d12: float
    a1: float
    a2: float
    bW: float
    bU1: float
    bU2: float
    bV1: float
    bV2: float
    bU12: float
    bV12: float

    def as_dict(self) -> dict[str, float]:
        return asdict(self)

    @property
    def res1(self) -> float:
        """Receiver-side resolution available for user 1's cooperative part."""
        return self.bW + self.bU1 + self.bV1

    @property
    def res2(self) -> float:
        return self.bW + self.bU2 + self.bV2

    @property
    def res12(self) -> float:
        return self.bW + self.bU12 + self.bV12

    @property
    def fb_cost(self) -> float:
        return max(self.tFB1, self.tFB2) + self.tFBa + self.tFBb


@dataclass(frozen=True)
class RegionBounds:
    """Individual and sum-rate bounds plus the feedback rate they require."""

    bR1: float
    bR2: float
    bSumA: float
    bSumB: float
    fbCost: float

    @property
    def sum_bound(self) -> float:
        return min(self.bSumA, self.bSumB)

    def as_dict(self) -> dict[str, float]:
        return asdict(self)

    def max_abs_delta(self, other: "RegionBounds") -> float:
        return max(abs(getattr(self, f.name) - getattr(other, f.name)) for f in fields(self))

    def contains(self, r1: float, r2: float, tol: float = C_TOL) -> bool:
        return (
            r1 >= -tol
            and r2 >= -tol
            and r1 <= self.bR1 + tol
            and r2 <= self.bR2 + tol
            and r1 + r2 <= self.sum_bound + tol
        )


def bounds_from_terms(t: MacMiTerms) -> RegionBounds:
    coop1 = min(t.a1, t.res1)
    coop2 = min(t.a2, t.res2)
    return RegionBounds(
        bR1=t.d1 + coop1,
        bR2=t.d2 + coop2,
        bSumA=t.d12 + t.res12,
        bSumB=t.d12 + coop1 + coop2,
        fbCost=t.fb_cost,
    )


# Common information of a block.  The tilde version (previous block) carries
# the quantized output; the current-block version does not, because the
# receiver's own quantization of this block's output is not available when
# this block's fresh data is decoded.
COMMON = ("W", "V1", "V2")
TILDE_COMMON = ("tW", "tV1", "tV2", "tY12")


def term_queries(present=None, common=COMMON, tilde_common=TILDE_COMMON):
    """Map each term name to its ``(A, B, C)`` variable sets.

    Variables not in ``present`` (e.g. the private feedback descriptions in
    common-feedback mode) are dropped from every set; a term whose first or
    second set becomes empty is identically zero.
    """
    S, tS = tuple(common), tuple(tilde_common)
    q = {
        "tFB1": (("Y12",), ("Y",), ("W", "X1")),
        "tFB2": (("Y12",), ("Y",), ("W", "X2")),
        "tFBa": (("Y",), ("Y1",), ("Y12", "X1", "W")),
        "tFBb": (("Y",), ("Y2",), ("Y12", "X2", "W")),
        "d1": (("X1",), ("Y",), S + ("U1", "U2", "X2")),
        "d2": (("X2",), ("Y",), S + ("U1", "U2", "X1")),
        "d12": (("X1", "X2"), ("Y",), S + ("U1", "U2")),
        "a1": (("U1",), ("Y2", "Y12"), tS + ("tY2", "tU2", "tX2", "W", "V2", "U2", "X2")),
        "a2": (("U2",), ("Y1", "Y12"), tS + ("tY1", "tU1", "tX1", "W", "V1", "U1", "X1")),
        "bW": (("W",), ("Y",), ("tW", "tY")),
        "bU1": (("U1",), ("Y",), ("W", "V1", "V2", "U2")),
        "bU2": (("U2",), ("Y",), ("W", "V1", "V2", "U1")),
        "bV1": (("V1",), ("Y",), ("tY",) + tS + ("tY1", "tY2", "tU2", "W", "V2")),
        "bV2": (("V2",), ("Y",), ("tY",) + tS + ("tY1", "tY2", "tU1", "W", "V1")),
        "bU12": (("U1", "U2"), ("Y",), ("W", "V1", "V2")),
        "bV12": (("V1", "V2"), ("Y",), ("tY",) + tS + ("tY1", "tY2", "W")),
    }
    out = {}
    for name, sets in q.items():
        # a variable may appear in both the tilde common tuple and the extras
        sets = tuple(tuple(dict.fromkeys(s)) for s in sets)
        if present is not None:
            sets = tuple(tuple(v for v in s if v in present) for s in sets)
        out[name] = sets
    return out


def evaluate_terms(mi, present=None, **kw) -> MacMiTerms:
    """Build :class:`MacMiTerms` from a ``mi(a, b, c)`` callable."""
    vals = {}
    for name, (a, b, c) in term_queries(present, **kw).items():
        vals[name] = mi(a, b, c) if a and b else 0.0
    return MacMiTerms(**vals)
