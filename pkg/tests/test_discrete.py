import numpy as np
import pytest

from fbmac.discrete import (
    AuxKernels,
    ChannelSpec,
    assemble_two_block_joint,
    consistent_v_prior,
    independent_block_bounds,
    induced_v_marginal,
    inner_feasible,
    region_equivalence_check,
    single_block_joint,
    split_violations,
    theorem_terms,
    validate,
)
from fbmac.info import FactorKernel, cond_mi_discrete, marginalize
from fbmac.sampling import degenerate_instance, random_discrete_instance
from fbmac.terms import MacMiTerms, RegionBounds, bounds_from_terms

XOR = [[[1, 0], [0, 1]], [[0, 1], [1, 0]]]
ADDER = [[[1, 0, 0], [0, 1, 0]], [[0, 1, 0], [0, 0, 1]]]
UNIFORM = [0.5, 0.5]

BLOCK = ("W", "V1", "V2", "U1", "U2", "X1", "X2", "Y", "Y12", "Y1", "Y2")


def terms(**kw):
    base = {n: 0.0 for n in MacMiTerms.__dataclass_fields__}
    base.update(kw)
    return MacMiTerms(**base)


def pentagon_terms():
    return terms(d1=1.0, d2=1.0, d12=1.5)


def with_kernel(k: AuxKernels, role: str, kernel: FactorKernel) -> AuxKernels:
    return AuxKernels({**k.kernels, role: kernel})


def binary_instance(seed=0, cards=None):
    return random_discrete_instance(np.random.default_rng(seed), cards)


# ---------------------------------------------------------------------------
# validation


def test_degenerate_instance_valid():
    rep = validate(*degenerate_instance(XOR, UNIFORM, UNIFORM))
    assert rep.ok
    assert any(c.name == "v_consistency" for c in rep.checks)


def test_random_instance_valid():
    c, k = binary_instance(1)
    assert validate(c, k).ok


def test_condition_ignoring_links_consistent():
    c, k = binary_instance(2)
    rng = np.random.default_rng(2)
    p1, p2 = rng.dirichlet([1, 1]), rng.dirichlet([1, 1])
    shape = (2,) * 5
    links = {
        "link1": FactorKernel(("V1",), k["link1"].parents, np.broadcast_to(p1, shape + (2,))),
        "link2": FactorKernel(("V2",), k["link2"].parents, np.broadcast_to(p2, shape + (2,))),
        "V": FactorKernel(("V1", "V2"), (), np.outer(p1, p2)),
    }
    k2 = AuxKernels({**k.kernels, **links})
    rep = validate(c, k2)
    assert rep.ok
    np.testing.assert_allclose(induced_v_marginal(c, k2), np.outer(p1, p2), atol=1e-14)


def _copy_link(k, u1_kernel=None):
    # V1 copies the previous U1, V2 is a fair coin; declared P(V1,V2) uniform
    t = np.zeros((2,) * 5 + (2,))
    t[..., 0, 0] = 1.0
    t[..., 1, 1] = 1.0
    kernels = {**k.kernels,
               "link1": FactorKernel(("V1",), k["link1"].parents, t),
               "link2": FactorKernel(("V2",), k["link2"].parents, np.full((2,) * 6, 0.5)),
               "V": FactorKernel(("V1", "V2"), (), np.full((2, 2), 0.25))}
    if u1_kernel is not None:
        kernels["U1"] = u1_kernel
    return AuxKernels(kernels)


@pytest.mark.parametrize("uniform_u1", [False, True])
def test_point_mass_link_consistency(uniform_u1):
    c, k = binary_instance(3)
    u1 = FactorKernel(("U1",), ("W", "V1"), np.full((2, 2, 2), 0.5)) if uniform_u1 else None
    k2 = _copy_link(k, u1)
    rep = validate(c, k2)
    # brute force: the induced V1 law is the previous block's U1 marginal
    pu1 = marginalize(single_block_joint(c, k2), ["U1"]).probs
    tv = 0.5 * np.abs(pu1 - 0.5).sum()
    check = [ch for ch in rep.checks if ch.name == "v_consistency"][0]
    assert check.deviation == pytest.approx(tv, abs=1e-12)
    assert check.passed == (tv <= 1e-9)
    assert check.passed == uniform_u1


def test_validation_reports_bad_normalization():
    c, k = binary_instance(4)
    bad = FactorKernel(("U1",), ("W", "V1"), np.full((2, 2, 2), 0.6))
    rep = validate(c, with_kernel(k, "U1", bad))
    assert not rep.ok
    assert [ch for ch in rep.checks if ch.name == "normalized:U1"][0].deviation == pytest.approx(0.2)


def test_validation_reports_missing_kernel():
    c, k = binary_instance(5)
    kernels = dict(k.kernels)
    del kernels["link2"]
    rep = validate(c, AuxKernels(kernels))
    assert not rep.ok


def test_consistent_prior_is_fixed_point():
    c, k = binary_instance(6, {"V1": 3})
    np.testing.assert_allclose(induced_v_marginal(c, k), consistent_v_prior(c, k), atol=1e-12)


# ---------------------------------------------------------------------------
# two-block joint


def test_two_block_joint_normalized():
    j = assemble_two_block_joint(*binary_instance(7))
    assert len(j.names) == 22
    assert j.probs.size == 2**22
    assert j.probs.sum() == pytest.approx(1.0, abs=1e-10)


def test_block_marginals_agree():
    j = assemble_two_block_joint(*binary_instance(8))
    cur = marginalize(j, list(BLOCK)).probs
    prev = marginalize(j, ["t" + n for n in BLOCK]).probs
    np.testing.assert_allclose(cur, prev, atol=1e-10)


def test_singleton_v_decouples_blocks():
    c, k = binary_instance(9, {"V1": 1, "V2": 1})
    j = assemble_two_block_joint(c, k)
    tilde = [n for n in j.names if n.startswith("t")]
    plain = [n for n in j.names if not n.startswith("t")]
    a = marginalize(j, tilde).probs
    b = marginalize(j, plain).probs
    prod = np.multiply.outer(a, b)
    np.testing.assert_allclose(marginalize(j, tilde + plain).probs, prod, atol=1e-10)
    # and the region then matches the independent-block evaluation
    tb = bounds_from_terms(theorem_terms(j))
    ib = independent_block_bounds(single_block_joint(c, k))
    assert tb.bSumA >= ib.bSumA - 1e-10


# ---------------------------------------------------------------------------
# theorem terms


def test_xor_nofb_terms():
    t = theorem_terms(assemble_two_block_joint(*degenerate_instance(XOR, UNIFORM, UNIFORM)))
    assert t.d1 == pytest.approx(1.0, abs=1e-12)
    assert t.d12 == pytest.approx(1.0, abs=1e-12)
    for n in ("a1", "a2", "bW", "bU1", "bU2", "bV1", "bV2", "bU12", "bV12"):
        assert getattr(t, n) == pytest.approx(0.0, abs=1e-12)
    b = bounds_from_terms(t)
    assert (b.bR1, b.bR2, b.sum_bound) == pytest.approx((1.0, 1.0, 1.0), abs=1e-12)


def test_adder_nofb_sum():
    t = theorem_terms(assemble_two_block_joint(*degenerate_instance(ADDER, UNIFORM, UNIFORM)))
    assert t.d12 == pytest.approx(1.5, abs=1e-12)


def test_inputs_equal_auxiliaries_collapse():
    # U_i = X_i with everything else constant: the cooperative parts carry all
    # data but nothing can be decoded at the other transmitter, so the
    # individual bounds vanish
    c, k = degenerate_instance(XOR, UNIFORM, UNIFORM)
    u1 = FactorKernel(("U1",), ("W", "V1"), np.full((1, 1, 2), 0.5))
    u2 = FactorKernel(("U2",), ("W", "V2"), np.full((1, 1, 2), 0.5))
    x1 = FactorKernel(("X1",), ("W", "U1", "V1"), np.eye(2).reshape(1, 2, 1, 2))
    x2 = FactorKernel(("X2",), ("W", "U2", "V2"), np.eye(2).reshape(1, 2, 1, 2))
    k2 = AuxKernels({**k.kernels, "U1": u1, "U2": u2, "X1": x1, "X2": x2,
                     "link1": FactorKernel(("V1",), k["link1"].parents, np.ones((1, 1, 1, 1, 2, 1))),
                     "link2": FactorKernel(("V2",), k["link2"].parents, np.ones((1, 1, 1, 1, 2, 1)))})
    assert validate(c, k2).ok
    t = theorem_terms(assemble_two_block_joint(c, k2))
    assert t.d1 == pytest.approx(0.0, abs=1e-12)
    assert t.a1 == pytest.approx(0.0, abs=1e-12)
    assert t.bU12 == pytest.approx(1.0, abs=1e-12)
    assert bounds_from_terms(t).bR1 == pytest.approx(0.0, abs=1e-12)


def test_fresh_terms_subadditive_on_random_instances():
    for seed in range(6):
        t = theorem_terms(assemble_two_block_joint(*binary_instance(seed)))
        assert t.d1 + t.d2 >= t.d12 - 1e-10
        assert all(v >= 0 for v in t.as_dict().values())


def test_common_conditioning_excludes_feedback_description():
    # d1 conditions on the common tuple (W, V1, V2) only
    c, k = binary_instance(12)
    j = assemble_two_block_joint(c, k)
    t = theorem_terms(j)
    ref = cond_mi_discrete(j, "X1", "Y", ("W", "V1", "V2", "U1", "U2", "X2"))
    assert t.d1 == pytest.approx(ref, abs=1e-12)


# ---------------------------------------------------------------------------
# bounds and rate splitting


def test_bounds_plugin():
    b = bounds_from_terms(pentagon_terms())
    assert b == RegionBounds(1.0, 1.0, 1.5, 1.5, 0.0)
    t = terms(d1=1.0, d2=1.0, d12=1.5, a1=0.1, bW=0.3)
    assert bounds_from_terms(t).bR1 == pytest.approx(1.1)


def test_inner_feasible_examples():
    t = pentagon_terms()
    w = inner_feasible(t, 0.9, 0.5, 0.0)
    assert w is not None and (w.r1p, w.r2p, w.r0) == (0.0, 0.0, 0.0)
    assert inner_feasible(t, 0.9, 0.7, 0.0) is None
    w = inner_feasible(t, 0.0, 0.0, 0.0)
    assert w is not None and (w.r1p, w.r2p) == (0.0, 0.0)
    assert inner_feasible(terms(tFB1=1.0), 0.0, 0.0, 0.5) is None


def test_witness_satisfies_split_conditions():
    rng = np.random.default_rng(0)
    t = terms(d1=0.6, d2=0.5, d12=0.9, a1=0.4, a2=0.3, bW=0.1, bU1=0.2, bU2=0.1,
              bV1=0.05, bV2=0.05, bU12=0.25, bV12=0.1, tFB1=0.3)
    for _ in range(2000):
        r1, r2 = rng.uniform(0, 1.2, size=2)
        w = inner_feasible(t, r1, r2, 1.0)
        if w is not None:
            assert max(split_violations(t, r1, r2, 1.0, w).values()) <= 1e-9


def test_equivalence_on_pentagon():
    rep = region_equivalence_check(pentagon_terms(), 0.0, samples=5000)
    assert rep.ok and rep.samples == 5000


def test_equivalence_on_real_instances():
    for seed in range(3):
        t = theorem_terms(assemble_two_block_joint(*binary_instance(20 + seed)))
        assert region_equivalence_check(t, float("inf"), samples=3000, seed=seed).ok


def test_equivalence_rejects_superadditive_terms():
    with pytest.raises(ValueError):
        region_equivalence_check(terms(d1=0.2, d2=0.2, d12=1.0), 0.0)


def test_channel_from_table():
    ch = ChannelSpec.from_table(ADDER)
    assert ch.cards == (2, 2, 3)
