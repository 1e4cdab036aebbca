"""Self-checks: closed form vs. covariance oracle, and bound membership vs.
rate-split feasibility on random discrete instances."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .discrete import assemble_two_block_joint, region_equivalence_check, theorem_terms
from .gaussian import closed_form_bounds, oracle_bounds
from .sampling import random_discrete_instance, random_scheme_params

# a mix of alphabet shapes keeps the 22-variable joint small enough to be quick
DISCRETE_SHAPES = (
    {},
    {"Y1": 1, "Y2": 1},
    {"W": 1, "Y": 3},
    {"V1": 3, "V2": 1, "Y1": 1, "Y2": 1},
    {"U1": 3, "Y12": 3, "Y1": 1, "Y2": 1},
)


@dataclass
class AgreementSummary:
    samples: int = 0
    max_delta: float = 0.0
    worst: object = None
    per_field: dict = field(default_factory=dict)

    def ok(self, tol: float) -> bool:
        return self.max_delta <= tol


def agreement_suite(n: int = 1000, seed: int = 0) -> AgreementSummary:
    """Half the draws in common-feedback mode, half with private descriptions."""
    rng = np.random.default_rng(seed)
    out = AgreementSummary()
    for i in range(n):
        p = random_scheme_params(rng, common_feedback=(i % 2 == 0))
        cf = closed_form_bounds(p)
        _, ob = oracle_bounds(p)
        for name, v in cf.as_dict().items():
            d = abs(v - getattr(ob, name))
            out.per_field[name] = max(out.per_field.get(name, 0.0), d)
            if d > out.max_delta:
                out.max_delta, out.worst = d, p
        out.samples += 1
    return out


def discrete_term_vectors(n: int, seed: int = 0):
    rng = np.random.default_rng(seed)
    for i in range(n):
        c, k = random_discrete_instance(rng, DISCRETE_SHAPES[i % len(DISCRETE_SHAPES)])
        yield theorem_terms(assemble_two_block_joint(c, k))


@dataclass
class EquivalenceSummary:
    instances: int = 0
    samples: int = 0
    boundary: int = 0
    disagreements: int = 0

    @property
    def ok(self) -> bool:
        return self.disagreements == 0


def equivalence_suite(instances: int = 50, samples: int = 10_000, seed: int = 0,
                      Rfb: float = float("inf")) -> EquivalenceSummary:
    out = EquivalenceSummary()
    for i, t in enumerate(discrete_term_vectors(instances, seed)):
        rep = region_equivalence_check(t, Rfb, samples, seed=seed + i)
        out.instances += 1
        out.samples += rep.samples
        out.boundary += rep.boundary
        out.disagreements += len(rep.disagreements)
    return out
