"""Evaluate the achievable region for finite-alphabet MACs and user kernels.

The joint law spans two consecutive blocks.  The previous block (names
prefixed ``t``) is generated by the single-block chain; linkage kernels then
draw the current resolution pair (V1, V2) from the previous block's common
information and cooperative codewords, and the current block reuses the same
chain with that pair plugged in.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

import numpy as np

from .info import (
    NORM_TOL,
    FactorKernel,
    JointPmf,
    assemble_joint,
    cond_mi_discrete,
    marginalize,
)
from .terms import C_TOL, MacMiTerms, RegionBounds, bounds_from_terms, evaluate_terms

CONSISTENCY_TOL = 1e-9
BOUNDARY_BAND = 1e-6

BLOCK_VARS = ("W", "V1", "V2", "U1", "U2", "X1", "X2", "Y", "Y12", "Y1", "Y2")
TILDE_S = ("tW", "tV1", "tV2", "tY12")

# role -> (outputs, parents) in the current-block namespace
CHAIN = {
    "W": (("W",), ()),
    "V": (("V1", "V2"), ()),
    "U1": (("U1",), ("W", "V1")),
    "U2": (("U2",), ("W", "V2")),
    "X1": (("X1",), ("W", "U1", "V1")),
    "X2": (("X2",), ("W", "U2", "V2")),
    "Y": (("Y",), ("X1", "X2")),
    "Y12": (("Y12",), ("Y", "W")),
    "Y1": (("Y1",), ("W", "Y", "Y12")),
    "Y2": (("Y2",), ("W", "Y", "Y12")),
}
LINKS = {
    "link1": (("V1",), TILDE_S + ("tU1",)),
    "link2": (("V2",), TILDE_S + ("tU2",)),
}


def tilde(name: str) -> str:
    return "t" + name


@dataclass(frozen=True)
class ChannelSpec:
    """Channel law P(Y | X1, X2) as a table of shape (|X1|, |X2|, |Y|)."""

    kernel: FactorKernel

    @classmethod
    def from_table(cls, table) -> "ChannelSpec":
        return cls(FactorKernel(("Y",), ("X1", "X2"), np.asarray(table, dtype=float)))

    @property
    def cards(self) -> tuple[int, int, int]:
        return self.kernel.table.shape


@dataclass(frozen=True)
class AuxKernels:
    """Auxiliary kernels, keyed by role (see ``CHAIN`` and ``LINKS``)."""

    kernels: dict = field(default_factory=dict)

    def __getitem__(self, role) -> FactorKernel:
        return self.kernels[role]

    @classmethod
    def from_kernels(cls, kernels) -> "AuxKernels":
        """Identify each kernel's role from its output names."""
        by_out = {outs: role for role, (outs, _) in {**CHAIN, **LINKS}.items() if role != "Y"}
        found = {}
        for k in kernels:
            role = by_out.get(k.outputs)
            if role is None:
                raise ValueError(f"no auxiliary kernel produces {k.outputs}")
            if role in found:
                raise ValueError(f"kernel for {k.outputs} given twice")
            found[role] = k
        return cls(found)


@dataclass
class Check:
    name: str
    passed: bool
    deviation: float
    detail: str = ""


@dataclass
class ValidationReport:
    checks: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    def add(self, name, passed, deviation, detail=""):
        self.checks.append(Check(name, bool(passed), float(deviation), detail))

    def as_dict(self):
        return {
            "ok": self.ok,
            "checks": [
                {"name": c.name, "passed": c.passed, "deviation": c.deviation, "detail": c.detail}
                for c in self.checks
            ],
        }


def _block_kernels(c: ChannelSpec, k: AuxKernels, prefix: str, with_v: bool):
    ren = (lambda n: prefix + n) if prefix else (lambda n: n)
    out = []
    for role in CHAIN:
        if role == "V" and not with_v:
            continue
        kern = c.kernel if role == "Y" else k[role]
        out.append(kern.renamed(ren))
    return out


def _tilde_joint(c, k):
    return assemble_joint(_block_kernels(c, k, "t", True))


def induced_v_marginal(c: ChannelSpec, k: AuxKernels) -> np.ndarray:
    """Law of (V1, V2) produced by the linkage kernels from the previous block."""
    src = marginalize(_tilde_joint(c, k), TILDE_S + ("tU1", "tU2"))
    j = assemble_joint([
        _as_prior(src),
        k["link1"], k["link2"],
    ])
    return marginalize(j, ("V1", "V2")).probs


def consistent_v_prior(c: ChannelSpec, k: AuxKernels) -> np.ndarray:
    """Return the P(V1, V2) that the linkage kernels reproduce.

    The induced law is linear in the declared one, so the consistent prior
    is the stationary vector of that linear map.  ``k["V"]`` is ignored.
    """
    shape = k["link1"].output_cards + k["link2"].output_cards
    n = int(np.prod(shape))
    cols = []
    for j in range(n):
        e = np.zeros(n)
        e[j] = 1.0
        kk = AuxKernels({**k.kernels, "V": FactorKernel(("V1", "V2"), (), e.reshape(shape))})
        cols.append(induced_v_marginal(c, kk).ravel())
    T = np.column_stack(cols)
    w, vecs = np.linalg.eig(T)
    v = np.real(vecs[:, np.argmin(np.abs(w - 1.0))])
    v = np.clip(v / v.sum(), 0.0, None)
    return (v / v.sum()).reshape(shape)


def _as_prior(p: JointPmf) -> FactorKernel:
    return FactorKernel(p.names, (), p.probs)


def validate(c: ChannelSpec, k: AuxKernels) -> ValidationReport:
    """Check normalization, structure and the block-consistency condition."""
    rep = ValidationReport()
    expected = {**CHAIN, **LINKS}
    for role, (outs, parents) in expected.items():
        kern = c.kernel if role == "Y" else k.kernels.get(role)
        if kern is None:
            rep.add(f"present:{role}", False, float("inf"), "kernel missing")
            continue
        if kern.outputs != outs or set(kern.parents) != set(parents):
            rep.add(f"structure:{role}", False, float("inf"),
                    f"expected P({','.join(outs)}|{','.join(parents)})")
            continue
        dev = kern.normalization_error
        rep.add(f"normalized:{role}", dev <= NORM_TOL, dev)
    if not rep.ok:
        return rep

    # cardinalities must agree between producers and consumers
    cards = {}
    for role, (outs, _) in expected.items():
        kern = c.kernel if role == "Y" else k[role]
        for n, card in zip(kern.outputs, kern.output_cards):
            cards.setdefault(n, card)
    bad = []
    for role in expected:
        kern = c.kernel if role == "Y" else k[role]
        for n, card in zip(kern.parents, kern.parent_cards):
            base = n[1:] if n.startswith("t") else n
            if cards.get(base) != card:
                bad.append(f"{role}:{n}")
    rep.add("cardinalities", not bad, float(len(bad)), ", ".join(bad))
    if bad:
        return rep

    induced = induced_v_marginal(c, k)
    tv = 0.5 * float(np.abs(induced - k["V"].table).sum())
    rep.add("v_consistency", tv <= CONSISTENCY_TOL, tv,
            "total variation between induced and declared P(V1,V2)")
    return rep


def assemble_two_block_joint(c: ChannelSpec, k: AuxKernels) -> JointPmf:
    """22-variable joint over the previous and current block."""
    kernels = _block_kernels(c, k, "t", True)
    kernels += [k["link1"], k["link2"]]
    kernels += _block_kernels(c, k, "", False)
    return assemble_joint(kernels)


def single_block_joint(c: ChannelSpec, k: AuxKernels) -> JointPmf:
    return assemble_joint(_block_kernels(c, k, "", True))


def theorem_terms(joint: JointPmf, **kw) -> MacMiTerms:
    return evaluate_terms(lambda a, b, c: cond_mi_discrete(joint, a, b, c), **kw)


def independent_block_bounds(joint: JointPmf) -> RegionBounds:
    """Region for an empty resolution pair, from a single-block joint."""
    def mi(a, b, c=()):
        return cond_mi_discrete(joint, a, b, c)

    fb = (max(mi("Y12", "Y", ("W", "X1")), mi("Y12", "Y", ("W", "X2")))
          + mi("Y", "Y1", ("Y12", "X1", "W")) + mi("Y", "Y2", ("Y12", "X2", "W")))
    iw = mi("W", "Y")
    coop1 = min(mi("U1", "Y", ("W", "U2")) + iw, mi("U1", ("Y2", "Y12"), ("W", "X2")))
    coop2 = min(mi("U2", "Y", ("W", "U1")) + iw, mi("U2", ("Y1", "Y12"), ("W", "X1")))
    return RegionBounds(
        bR1=mi("X1", "Y", ("W", "U1", "X2")) + coop1,
        bR2=mi("X2", "Y", ("W", "U2", "X1")) + coop2,
        bSumA=mi(("X1", "X2"), "Y"),
        bSumB=mi(("X1", "X2"), "Y", ("W", "U1", "U2")) + coop1 + coop2,
        fbCost=fb,
    )


# ---------------------------------------------------------------------------
# rate splitting


@dataclass(frozen=True)
class RateSplitWitness:
    r1p: float
    r2p: float
    r0: float
    r0_degenerate: bool = False


def inner_feasible(t: MacMiTerms, R1: float, R2: float, Rfb: float,
                   tol: float = C_TOL) -> RateSplitWitness | None:
    """Find a rate split (R1', R2') for the nine split conditions.

    Returns ``None`` when the system is infeasible.  Inequalities are taken
    non-strictly with tolerance ``tol``.
    """
    if R1 < -tol or R2 < -tol:
        raise ValueError("rates must be nonnegative")
    if Rfb < t.fb_cost - tol:
        return None
    lo1, hi1 = max(0.0, R1 - t.d1), min(t.a1, t.res1, R1)
    lo2, hi2 = max(0.0, R2 - t.d2), min(t.a2, t.res2, R2)
    if lo1 > hi1 + tol or lo2 > hi2 + tol:
        return None
    hi1, hi2 = max(hi1, lo1), max(hi2, lo2)
    s_lo = max(lo1 + lo2, R1 + R2 - t.d12)
    s_hi = min(hi1 + hi2, t.res12)
    if s_lo > s_hi + tol:
        return None
    s = min(max(s_lo, lo1 + lo2), hi1 + hi2)
    r1 = max(lo1, min(hi1, s - lo2))
    r2 = min(max(s - r1, lo2), hi2)
    r0 = t.bW / 2
    return RateSplitWitness(r1, r2, r0, r0_degenerate=t.bW <= 0)


def split_violations(t: MacMiTerms, R1, R2, Rfb, w: RateSplitWitness) -> dict[str, float]:
    """Amount by which each split condition is violated (<= 0 means satisfied)."""
    return {
        "fb": t.fb_cost - Rfb,
        "fresh1": (R1 - w.r1p) - t.d1,
        "fresh2": (R2 - w.r2p) - t.d2,
        "fresh12": (R1 - w.r1p) + (R2 - w.r2p) - t.d12,
        "cross1": w.r1p - t.a1,
        "cross2": w.r2p - t.a2,
        "res1": w.r1p - t.res1,
        "res2": w.r2p - t.res2,
        "res12": w.r1p + w.r2p - t.res12,
        "split1": w.r1p - R1,
        "split2": w.r2p - R2,
        "nonneg1": -w.r1p,
        "nonneg2": -w.r2p,
        "r0": w.r0 - t.bW,
    }


@dataclass
class EquivalenceReport:
    samples: int
    boundary: int
    disagreements: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.disagreements

    def as_dict(self):
        return {"samples": self.samples, "boundary": self.boundary,
                "disagreements": [list(d) for d in self.disagreements]}


def region_equivalence_check(t: MacMiTerms, Rfb: float, samples: int = 10_000,
                             seed: int = 0, band: float = BOUNDARY_BAND) -> EquivalenceReport:
    """Compare bound membership with rate-split feasibility on random points."""
    if t.d1 + t.d2 < t.d12 - C_TOL:
        raise ValueError("terms violate d1 + d2 >= d12")
    b = bounds_from_terms(t)
    rng = random.Random(seed)
    pad = 0.05 * max(b.bR1, b.bR2) + 1e-3
    fb_ok = Rfb >= b.fbCost - C_TOL
    rep = EquivalenceReport(samples, 0)
    for _ in range(samples):
        r1 = rng.uniform(0.0, b.bR1 + pad)
        r2 = rng.uniform(0.0, b.bR2 + pad)
        slack = min(abs(b.bR1 - r1), abs(b.bR2 - r2), abs(b.bSumA - r1 - r2),
                    abs(b.bSumB - r1 - r2), abs(Rfb - b.fbCost))
        outer = fb_ok and b.contains(r1, r2)
        inner = inner_feasible(t, r1, r2, Rfb) is not None
        if slack < band:
            rep.boundary += 1
            continue
        if outer != inner:
            rep.disagreements.append((r1, r2, outer, inner))
    return rep
