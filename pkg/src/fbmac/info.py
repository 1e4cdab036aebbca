"""Exact information measures over two substrates.

Discrete joints are dense probability tables (one array axis per named
variable).  Gaussian variables are linear combinations of independent
zero-mean unit-variance base coordinates, so every covariance question
reduces to linear algebra on coefficient rows.

All quantities are in bits.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    DuplicateName,
    InfiniteMutualInformation,
    NotNormalized,
    OverlappingSets,
    SizeGuardExceeded,
    UnknownParent,
    UnknownVariable,
)

MAX_CELLS = 2**26
NORM_TOL = 1e-12
RANK_TOL = 1e-9
CORR_LIMIT = 1.0 - 1e-12


def _check_size(cards: Iterable[int]) -> None:
    size = 1
    for c in cards:
        size *= int(c)
    if size > MAX_CELLS:
        raise SizeGuardExceeded(f"{size} cells exceeds the limit of {MAX_CELLS}")


def _as_names(vs) -> tuple[str, ...]:
    if isinstance(vs, str):
        return (vs,)
    names = tuple(vs)
    if len(set(names)) != len(names):
        raise DuplicateName(f"duplicate names in {names}")
    return names


def _check_disjoint(*sets: tuple[str, ...]) -> None:
    seen: set[str] = set()
    for s in sets:
        overlap = seen.intersection(s)
        if overlap:
            raise OverlappingSets(f"variable sets overlap on {sorted(overlap)}")
        seen.update(s)


# ---------------------------------------------------------------------------
# discrete substrate


@dataclass(frozen=True)
class JointPmf:
    """Dense joint pmf; ``probs.shape`` gives the cardinalities in axis order."""

    names: tuple[str, ...]
    probs: np.ndarray

    def __post_init__(self):
        names = _as_names(self.names)
        probs = np.asarray(self.probs, dtype=float)
        if probs.ndim != len(names):
            raise ValueError(f"{len(names)} names for a {probs.ndim}-d table")
        _check_size(probs.shape)
        if np.any(probs < 0):
            raise NotNormalized("negative probability")
        total = probs.sum()
        if abs(total - 1.0) > NORM_TOL * max(1.0, probs.size**0.5):
            raise NotNormalized(f"probabilities sum to {total!r}")
        object.__setattr__(self, "names", names)
        object.__setattr__(self, "probs", probs)

    @property
    def axes(self) -> list[tuple[str, int]]:
        return list(zip(self.names, self.probs.shape))

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise UnknownVariable(name) from None

    def card(self, name: str) -> int:
        return self.probs.shape[self.index(name)]


@dataclass(frozen=True)
class FactorKernel:
    """Conditional table P(outputs | parents).

    ``table`` has shape ``parent_cards + output_cards``; every slice over the
    output axes must sum to one.  That is checked when the kernel is used, so
    malformed kernels can still be carried into a validation report.
    """

    outputs: tuple[str, ...]
    parents: tuple[str, ...]
    table: np.ndarray

    def __post_init__(self):
        outputs = _as_names(self.outputs)
        parents = _as_names(self.parents)
        _check_disjoint(outputs, parents)
        table = np.asarray(self.table, dtype=float)
        if table.ndim != len(outputs) + len(parents):
            raise ValueError(
                f"kernel over {outputs} given {parents} needs a "
                f"{len(outputs) + len(parents)}-d table, got {table.ndim}-d"
            )
        object.__setattr__(self, "outputs", outputs)
        object.__setattr__(self, "parents", parents)
        object.__setattr__(self, "table", table)

    @property
    def normalization_error(self) -> float:
        """Worst deviation of a conditional slice from summing to one.

        Negative entries count as infinitely wrong.
        """
        if np.any(self.table < 0):
            return float("inf")
        out_axes = tuple(range(len(self.parents), self.table.ndim))
        sums = self.table.sum(axis=out_axes) if out_axes else np.ones(())
        return float(np.max(np.abs(sums - 1.0))) if sums.size else 0.0

    def renamed(self, mapping) -> "FactorKernel":
        return FactorKernel(
            tuple(mapping(n) for n in self.outputs),
            tuple(mapping(n) for n in self.parents),
            self.table,
        )

    @property
    def parent_cards(self) -> tuple[int, ...]:
        return self.table.shape[: len(self.parents)]

    @property
    def output_cards(self) -> tuple[int, ...]:
        return self.table.shape[len(self.parents):]


def assemble_joint(kernels: Sequence[FactorKernel]) -> JointPmf:
    """Multiply kernels in topological order into one dense joint."""
    names: list[str] = []
    joint = np.ones(())
    for k in kernels:
        dev = k.normalization_error
        if dev > NORM_TOL:
            raise NotNormalized(f"kernel for {k.outputs} off by {dev:.3e}")
        for p, c in zip(k.parents, k.parent_cards):
            if p not in names:
                raise UnknownParent(f"{k.outputs} depends on {p!r} before it exists")
            if joint.shape[names.index(p)] != c:
                raise ValueError(f"cardinality mismatch for parent {p!r}")
        clash = set(k.outputs).intersection(names)
        if clash:
            raise DuplicateName(f"{sorted(clash)} already produced")
        _check_size(joint.shape + k.output_cards)

        # reorder parent axes to follow joint order, then broadcast
        order = sorted(range(len(k.parents)), key=lambda i: names.index(k.parents[i]))
        n_out = len(k.outputs)
        table = np.transpose(k.table, order + list(range(len(k.parents), k.table.ndim)))
        shape = [joint.shape[j] if n in k.parents else 1 for j, n in enumerate(names)]
        table = table.reshape(shape + list(k.output_cards))
        joint = joint.reshape(joint.shape + (1,) * n_out) * table
        names.extend(k.outputs)
    return JointPmf(tuple(names), joint)


def marginalize(p: JointPmf, keep) -> JointPmf:
    keep = _as_names(keep)
    idx = [p.index(n) for n in keep]
    drop = tuple(i for i in range(len(p.names)) if i not in idx)
    m = p.probs.sum(axis=drop) if drop else p.probs
    # remaining axes are in p's order; permute into keep's order
    kept_sorted = sorted(idx)
    m = np.transpose(m, [kept_sorted.index(i) for i in idx])
    return JointPmf(keep, m)


def _marginal_array(p: JointPmf, names: tuple[str, ...]) -> np.ndarray:
    idx = sorted(p.index(n) for n in names)
    drop = tuple(i for i in range(len(p.names)) if i not in idx)
    return p.probs.sum(axis=drop) if drop else p.probs


def entropy(p: JointPmf, a) -> float:
    """H(A) in bits, with 0 log 0 = 0."""
    m = _marginal_array(p, _as_names(a)).ravel()
    m = m[m > 0]
    return max(0.0, float(-np.sum(m * np.log2(m))))


def cond_mi_discrete(p: JointPmf, a, b, c=()) -> float:
    """I(A;B|C) = H(AC) + H(BC) - H(C) - H(ABC)."""
    a, b, c = _as_names(a), _as_names(b), _as_names(c)
    _check_disjoint(a, b, c)
    # work on the (much smaller) marginal over A, B, C in joint axis order,
    # which also makes the result exactly symmetric in A and B
    union = tuple(sorted(a + b + c, key=p.index))
    sub = JointPmf(union, _marginal_array(p, union))
    val = (entropy(sub, a + c) + entropy(sub, b + c)) - entropy(sub, c) - entropy(sub, union)
    return max(0.0, val)


# ---------------------------------------------------------------------------
# linear-Gaussian substrate


@dataclass(frozen=True)
class LinearGaussianSystem:
    """Named variables as coefficient rows over iid N(0, 1) base coordinates."""

    names: tuple[str, ...] = ()
    coeffs: np.ndarray = field(default_factory=lambda: np.zeros((0, 0)))

    @property
    def dim(self) -> int:
        return self.coeffs.shape[1]

    def __contains__(self, name: str) -> bool:
        return name in self.names

    def row(self, name: str) -> np.ndarray:
        try:
            return self.coeffs[self.names.index(name)]
        except ValueError:
            raise UnknownVariable(name) from None

    def rows(self, names) -> np.ndarray:
        names = _as_names(names)
        if not names:
            return np.zeros((0, self.dim))
        return np.vstack([self.row(n) for n in names])

    def cov(self, names) -> np.ndarray:
        g = self.rows(names)
        return g @ g.T


def add_variable(
    s: LinearGaussianSystem,
    name: str,
    combination: Sequence[tuple[str, float]] = (),
    fresh_noise_variance: float = 0.0,
) -> LinearGaussianSystem:
    """Return a new system with ``name = sum(coef * var) + fresh noise``."""
    if name in s.names:
        raise DuplicateName(name)
    if fresh_noise_variance < 0:
        raise ValueError("fresh_noise_variance must be nonnegative")
    row = np.zeros(s.dim)
    for ref, coef in combination:
        row = row + coef * s.row(ref)
    coeffs = s.coeffs
    if fresh_noise_variance > 0:
        coeffs = np.hstack([coeffs, np.zeros((coeffs.shape[0], 1))])
        row = np.append(row, np.sqrt(fresh_noise_variance))
    coeffs = np.vstack([coeffs, row[None, :]])
    return LinearGaussianSystem(s.names + (name,), coeffs)


def _row_basis(m: np.ndarray, tol: float) -> np.ndarray:
    if m.shape[0] == 0:
        return m
    _, sv, vt = np.linalg.svd(m, full_matrices=False)
    return vt[sv > tol]


def cond_mi_gaussian(s: LinearGaussianSystem, a, b, c=()) -> float:
    """I(A;B|C) from the canonical correlations of the residual row spaces.

    Rows of A and B are projected off span(C); the cosines of the principal
    angles between what remains are the canonical correlations.  Works for
    singular covariances, where log-det ratios break down.
    """
    a, b, c = _as_names(a), _as_names(b), _as_names(c)
    _check_disjoint(a, b, c)
    ga, gb, gc = s.rows(a), s.rows(b), s.rows(c)
    scale = max(
        (float(np.max(np.linalg.norm(g, axis=1))) for g in (ga, gb, gc) if g.shape[0]),
        default=0.0,
    )
    if scale == 0.0:
        return 0.0
    tol = RANK_TOL * scale
    qc = _row_basis(gc, tol)
    if qc.shape[0]:
        ga = ga - (ga @ qc.T) @ qc
        gb = gb - (gb @ qc.T) @ qc
    qa, qb = _row_basis(ga, tol), _row_basis(gb, tol)
    if qa.shape[0] == 0 or qb.shape[0] == 0:
        return 0.0
    rho = np.linalg.svd(qa @ qb.T, compute_uv=False)
    if rho.size and rho[0] >= CORR_LIMIT:
        raise InfiniteMutualInformation(
            f"I({','.join(a)};{','.join(b)}|{','.join(c)}) diverges (rho={rho[0]!r})"
        )
    return max(0.0, float(-0.5 * np.sum(np.log1p(-(rho**2))) / np.log(2.0)))
