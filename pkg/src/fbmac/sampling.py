"""Seeded random instances for agreement and equivalence checks."""

from __future__ import annotations

import math

import numpy as np

from .discrete import CHAIN, LINKS, AuxKernels, ChannelSpec, consistent_v_prior
from .gaussian import INF, SchemeParams, lambda_max
from .info import FactorKernel


def random_scheme_params(rng: np.random.Generator, common_feedback: bool = True,
                         Rfb: float = INF) -> SchemeParams:
    """Uniform draw over the admissible Gaussian parameter set."""
    a = rng.uniform()
    b = rng.uniform() * (1 - a)
    th = rng.uniform()
    P = rng.uniform(0.1, 10.0)
    s2 = rng.uniform(0.2, 3.0)
    s12 = math.exp(rng.uniform(-3.0, 2.0))
    if common_feedback:
        s1 = s2p = INF
    else:
        s1, s2p = (math.exp(x) for x in rng.uniform(-2.0, 2.0, size=2))
    p = SchemeParams(P, s2, a, b, th, 0.0, s12, s1, s2p, Rfb)
    return p.with_(lam=float(rng.uniform(-1.0, lambda_max(p))))


def _random_kernel(rng, outputs, parents, parent_cards, output_cards, conc=1.0):
    rows = int(np.prod(parent_cards)) if parent_cards else 1
    t = rng.dirichlet(conc * np.ones(int(np.prod(output_cards))), size=rows)
    return FactorKernel(outputs, parents, t.reshape(tuple(parent_cards) + tuple(output_cards)))


def random_discrete_instance(rng: np.random.Generator, cards: dict | None = None,
                             conc: float = 1.0) -> tuple[ChannelSpec, AuxKernels]:
    """Random channel and auxiliary kernels with a consistent P(V1, V2).

    ``cards`` overrides the default (all binary) alphabet sizes by name.
    """
    cd = {n: 2 for n in ("W", "V1", "V2", "U1", "U2", "X1", "X2", "Y", "Y12", "Y1", "Y2")}
    cd.update(cards or {})
    spec = {**CHAIN, **LINKS}
    kernels = {}
    for role, (outs, parents) in spec.items():
        pc = [cd[p.lstrip("t")] for p in parents]
        oc = [cd[o] for o in outs]
        kernels[role] = _random_kernel(rng, outs, parents, pc, oc, conc)
    channel = ChannelSpec(kernels.pop("Y"))
    k = AuxKernels(kernels)
    prior = consistent_v_prior(channel, k)
    return channel, AuxKernels({**kernels, "V": FactorKernel(("V1", "V2"), (), prior)})


def degenerate_instance(channel_table, px1, px2) -> tuple[ChannelSpec, AuxKernels]:
    """All auxiliaries constant; inputs drawn from ``px1`` and ``px2``.

    This is the no-feedback configuration: the region collapses to the
    classical pentagon of the product input law.
    """
    ch = ChannelSpec.from_table(channel_table)
    n1, n2, ny = ch.cards
    one = np.ones(1)
    ks = [
        FactorKernel(("W",), (), one),
        FactorKernel(("V1", "V2"), (), np.ones((1, 1))),
        FactorKernel(("U1",), ("W", "V1"), np.ones((1, 1, 1))),
        FactorKernel(("U2",), ("W", "V2"), np.ones((1, 1, 1))),
        FactorKernel(("X1",), ("W", "U1", "V1"), np.asarray(px1, float).reshape(1, 1, 1, n1)),
        FactorKernel(("X2",), ("W", "U2", "V2"), np.asarray(px2, float).reshape(1, 1, 1, n2)),
        FactorKernel(("Y12",), ("Y", "W"), np.ones((ny, 1, 1))),
        FactorKernel(("Y1",), ("W", "Y", "Y12"), np.ones((1, ny, 1, 1))),
        FactorKernel(("Y2",), ("W", "Y", "Y12"), np.ones((1, ny, 1, 1))),
        FactorKernel(("V1",), ("tW", "tV1", "tV2", "tY12", "tU1"), np.ones((1,) * 6)),
        FactorKernel(("V2",), ("tW", "tV1", "tV2", "tY12", "tU2"), np.ones((1,) * 6)),
    ]
    return ch, AuxKernels.from_kernels(ks)
