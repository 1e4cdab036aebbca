import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import entropy as scipy_entropy

from fbmac.errors import (
    DuplicateName,
    InfiniteMutualInformation,
    NotNormalized,
    OverlappingSets,
    SizeGuardExceeded,
    UnknownParent,
    UnknownVariable,
)
from fbmac.info import (
    FactorKernel,
    JointPmf,
    LinearGaussianSystem,
    add_variable,
    assemble_joint,
    cond_mi_discrete,
    cond_mi_gaussian,
    entropy,
    marginalize,
)

BIT = np.array([0.5, 0.5])


def z_channel_joint():
    px = FactorKernel(("X",), (), BIT)
    # input 1 flips to 0 with probability 0.3
    py = FactorKernel(("Y",), ("X",), np.array([[1.0, 0.0], [0.3, 0.7]]))
    return assemble_joint([px, py])


def two_input_joint(fn, ny):
    table = np.zeros((2, 2, ny))
    for x1 in range(2):
        for x2 in range(2):
            table[x1, x2, fn(x1, x2)] = 1.0
    return assemble_joint([
        FactorKernel(("X1",), (), BIT),
        FactorKernel(("X2",), (), BIT),
        FactorKernel(("Y",), ("X1", "X2"), table),
    ])


# ---------------------------------------------------------------------------
# assembly and marginals


def test_independent_bits_uniform():
    p = assemble_joint([FactorKernel(("A",), (), BIT), FactorKernel(("B",), (), BIT)])
    np.testing.assert_allclose(p.probs, np.full((2, 2), 0.25))


def test_z_channel_cell():
    p = z_channel_joint()
    assert p.probs[1, 0] == pytest.approx(0.15, abs=1e-15)
    assert p.probs.sum() == pytest.approx(1.0, abs=1e-12)


def test_marginalize():
    p = assemble_joint([FactorKernel(("A",), (), BIT), FactorKernel(("B",), (), BIT)])
    np.testing.assert_allclose(marginalize(p, ["A"]).probs, BIT)
    full = marginalize(p, ["A", "B"])
    np.testing.assert_array_equal(full.probs, p.probs)
    assert marginalize(z_channel_joint(), ["Y"]).probs[1] == pytest.approx(0.35, abs=1e-15)


def test_marginalize_reorders():
    p = z_channel_joint()
    q = marginalize(p, ["Y", "X"])
    np.testing.assert_array_equal(q.probs, p.probs.T)


def test_assembly_errors():
    a = FactorKernel(("A",), (), BIT)
    with pytest.raises(UnknownParent):
        assemble_joint([FactorKernel(("B",), ("A",), np.eye(2))])
    with pytest.raises(DuplicateName):
        assemble_joint([a, a])
    with pytest.raises(NotNormalized):
        assemble_joint([FactorKernel(("A",), (), np.array([0.5, 0.6]))])
    with pytest.raises(NotNormalized):
        assemble_joint([FactorKernel(("A",), (), np.array([1.5, -0.5]))])
    with pytest.raises(ValueError):
        assemble_joint([a, FactorKernel(("B",), ("A",), np.ones((3, 1)))])


def test_size_guard():
    ks = [FactorKernel((f"A{i}",), (), np.full(8, 1 / 8)) for i in range(9)]
    with pytest.raises(SizeGuardExceeded):
        assemble_joint(ks)


def test_unknown_and_overlapping_names():
    p = z_channel_joint()
    with pytest.raises(UnknownVariable):
        entropy(p, "Q")
    with pytest.raises(OverlappingSets):
        cond_mi_discrete(p, "X", "Y", "X")


def test_jointpmf_rejects_unnormalized():
    with pytest.raises(NotNormalized):
        JointPmf(("A",), np.array([0.2, 0.2]))


# ---------------------------------------------------------------------------
# entropy and mutual information


def test_entropy_examples():
    p = assemble_joint([FactorKernel(("A",), (), BIT)])
    assert entropy(p, "A") == pytest.approx(1.0, abs=1e-15)
    d = assemble_joint([FactorKernel(("A",), (), np.array([1.0, 0.0]))])
    assert entropy(d, "A") == 0.0
    b = assemble_joint([FactorKernel(("A",), (), np.array([0.89, 0.11]))])
    ref = scipy_entropy([0.89, 0.11], base=2)
    assert entropy(b, "A") == pytest.approx(ref, abs=1e-14)
    assert entropy(b, "A") == pytest.approx(0.49991, abs=1e-5)


def test_xor_and_adder():
    xor = two_input_joint(lambda a, b: a ^ b, 2)
    assert cond_mi_discrete(xor, "X1", "Y", "X2") == pytest.approx(1.0, abs=1e-12)
    assert cond_mi_discrete(xor, "X1", "Y") == pytest.approx(0.0, abs=1e-12)
    adder = two_input_joint(lambda a, b: a + b, 3)
    assert cond_mi_discrete(adder, ("X1", "X2"), "Y") == pytest.approx(1.5, abs=1e-12)


def test_independent_gives_zero():
    p = assemble_joint([FactorKernel((n,), (), BIT) for n in "ABC"])
    assert cond_mi_discrete(p, "A", ("B",), "C") == 0.0


def _random_joint(seed, shape=(2, 3, 2, 2)):
    rng = np.random.default_rng(seed)
    t = rng.dirichlet(np.ones(int(np.prod(shape)))).reshape(shape)
    return JointPmf(("A", "B", "C", "D"), t)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_mi_symmetry(seed):
    p = _random_joint(seed)
    assert cond_mi_discrete(p, "A", "B", "C") == cond_mi_discrete(p, "B", "A", "C")
    assert cond_mi_discrete(p, ("A", "D"), "B") == cond_mi_discrete(p, "B", ("D", "A"))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_mi_chain_rule(seed):
    p = _random_joint(seed)
    lhs = cond_mi_discrete(p, "A", ("B", "C"), "D")
    rhs = cond_mi_discrete(p, "A", "B", "D") + cond_mi_discrete(p, "A", "C", ("B", "D"))
    assert lhs == pytest.approx(rhs, abs=1e-10)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_data_processing(seed):
    rng = np.random.default_rng(seed)
    ks = [
        FactorKernel(("A",), (), rng.dirichlet(np.ones(3))),
        FactorKernel(("B",), ("A",), rng.dirichlet(np.ones(3), size=3)),
        FactorKernel(("C",), ("B",), rng.dirichlet(np.ones(2), size=3)),
    ]
    p = assemble_joint(ks)
    assert cond_mi_discrete(p, "A", "C") <= cond_mi_discrete(p, "A", "B") + 1e-12
    assert cond_mi_discrete(p, "A", "C", "B") == pytest.approx(0.0, abs=1e-12)


# ---------------------------------------------------------------------------
# Gaussian substrate


def test_add_variable_moments():
    s = add_variable(LinearGaussianSystem(), "X", (), 5.0)
    assert s.cov("X")[0, 0] == pytest.approx(5.0)
    s = add_variable(s, "Y", [("X", 1.0)], 2.0)
    c = s.cov(("X", "Y"))
    np.testing.assert_allclose(c, [[5.0, 5.0], [5.0, 7.0]])
    assert s.dim == 2
    with pytest.raises(DuplicateName):
        add_variable(s, "X")
    with pytest.raises(UnknownVariable):
        add_variable(s, "Z", [("Q", 1.0)])


def test_gaussian_mi_examples():
    s = add_variable(LinearGaussianSystem(), "X", (), 1.0)
    s = add_variable(s, "N", (), 1.0)
    assert cond_mi_gaussian(s, "X", "N") == 0.0
    s = add_variable(s, "Y", [("X", 1.0), ("N", 1.0)])
    assert cond_mi_gaussian(s, "X", "Y") == pytest.approx(0.5, abs=1e-14)
    s = add_variable(s, "Xcopy", [("X", 1.0)])
    with pytest.raises(InfiniteMutualInformation):
        cond_mi_gaussian(s, "X", "Xcopy")
    # knowing the noise makes Y reveal X exactly
    with pytest.raises(InfiniteMutualInformation):
        cond_mi_gaussian(s, "X", "Y", "N")


def _random_system(rng, n=5, k=7):
    return LinearGaussianSystem(tuple("ABCDE"[:n]), rng.normal(size=(n, k)))


def _logdet_mi(s, a, b, c):
    # independent reference: entropies from log-determinants
    def h(names):
        return 0.0 if not names else 0.5 * np.linalg.slogdet(s.cov(names))[1]

    return (h(a + c) + h(b + c) - h(c) - h(a + b + c)) / math.log(2)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_gaussian_mi_matches_logdet(seed):
    s = _random_system(np.random.default_rng(seed))
    for a, b, c in [(("A",), ("B",), ()), (("A", "B"), ("C",), ("D",)), (("E",), ("A", "D"), ("B", "C"))]:
        assert cond_mi_gaussian(s, a, b, c) == pytest.approx(_logdet_mi(s, a, b, c), abs=1e-9)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6))
def test_gaussian_mi_invariant_to_conditioning_basis(seed):
    rng = np.random.default_rng(seed)
    s = _random_system(rng)
    base = cond_mi_gaussian(s, "A", "B", ("C", "D"))
    m = rng.normal(size=(2, 2)) + 2 * np.eye(2)
    s2 = add_variable(s, "F", [("C", m[0, 0]), ("D", m[0, 1])])
    s2 = add_variable(s2, "G", [("C", m[1, 0]), ("D", m[1, 1])])
    assert cond_mi_gaussian(s2, "A", "B", ("F", "G")) == pytest.approx(base, abs=1e-9)
    assert cond_mi_gaussian(s2, "A", "B", ("C", "D", "F")) == pytest.approx(base, abs=1e-9)


def test_gaussian_matches_fine_quantization():
    # X ~ N(0,1), Y = X + N(0,1): a fine discretization approaches 0.5 bits
    edges = np.linspace(-8, 8, 401)
    centers = 0.5 * (edges[1:] + edges[:-1])
    dx = edges[1] - edges[0]
    px = np.exp(-centers**2 / 2)
    px /= px.sum()
    py_x = np.exp(-(centers[None, :] - centers[:, None]) ** 2 / 2)
    py_x /= py_x.sum(axis=1, keepdims=True)
    p = assemble_joint([FactorKernel(("X",), (), px), FactorKernel(("Y",), ("X",), py_x)])
    assert dx < 0.05
    assert cond_mi_discrete(p, "X", "Y") == pytest.approx(0.5, abs=0.02)
