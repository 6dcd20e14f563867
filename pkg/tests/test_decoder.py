import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from nbldpc_relay.codes import ParityCheckMatrix, TannerGraph, build_mother_code
from nbldpc_relay.decoder import (
    DegenerateLikelihood,
    convolve_direct,
    decode,
    gf_convolve,
    init_priors,
    wht,
)
from nbldpc_relay.gf import field_build
from nbldpc_relay.rate_adapt import RepetitionScheme, mr_extend
from oracles import convolve_ref, map_marginals

GF4 = field_build(2)
GF8 = field_build(3, 0b1011)
GF16 = field_build(4)


def tree_code_gf4(seed=0):
    """Cycle-free toy: check 0 touches v0,v1,v2 and check 1 touches v2,v3."""
    rng = np.random.default_rng(seed)
    labels = rng.integers(1, 4, size=5)
    return ParityCheckMatrix(
        n_checks=2,
        n_vars=4,
        rows=np.array([0, 0, 0, 1, 1]),
        cols=np.array([0, 1, 2, 2, 3]),
        labels=labels,
        field=GF4,
        dv=1,
        dc=3,
    )


def test_wht_delta_and_uniform():
    delta = np.zeros(8)
    delta[0] = 1.0
    assert np.allclose(wht(delta), np.ones(8))
    uniform = np.full(8, 1 / 8)
    spectrum = wht(uniform)
    assert spectrum[0] == pytest.approx(1.0)
    assert np.allclose(spectrum[1:], 0.0)


def test_wht_bad_length():
    with pytest.raises(ValueError):
        wht(np.ones(6))


@given(arrays(np.float64, 8, elements=st.floats(0, 1)))
@settings(max_examples=100, deadline=None)
def test_wht_involution(p):
    assert np.allclose(wht(wht(p)), 8 * p, atol=1e-12)


def test_convolution_theorem_matches_direct_oracle():
    rng = np.random.default_rng(2)
    for _ in range(20):
        p = rng.random(8)
        q = rng.random(8)
        via_wht = wht(wht(p) * wht(q)) / 8
        assert np.allclose(via_wht, convolve_ref(p, q, 8), atol=1e-12)


def test_gf_convolve_identity_and_deltas():
    rng = np.random.default_rng(3)
    p = rng.random(4)
    p /= p.sum()
    delta0 = np.zeros(4)
    delta0[0] = 1.0
    assert np.allclose(gf_convolve(p, delta0), p, atol=1e-14)
    for a in range(4):
        for b in range(4):
            da = np.zeros(4)
            da[a] = 1.0
            db = np.zeros(4)
            db[b] = 1.0
            out = gf_convolve(da, db)
            assert out[a ^ b] == pytest.approx(1.0, abs=1e-12)


def test_gf_convolve_matches_reference_gf4():
    rng = np.random.default_rng(4)
    for _ in range(30):
        p1 = rng.random(4)
        p2 = rng.random(4)
        assert np.allclose(gf_convolve(p1, p2), convolve_ref(p1, p2, 4), atol=1e-12)
        assert np.allclose(convolve_direct(p1, p2), convolve_ref(p1, p2, 4), atol=1e-12)


@given(
    arrays(np.float64, 8, elements=st.floats(0.01, 1)),
    arrays(np.float64, 8, elements=st.floats(0.01, 1)),
)
@settings(max_examples=50, deadline=None)
def test_gf_convolve_commutes(p, q):
    assert np.allclose(gf_convolve(p, q), gf_convolve(q, p), atol=1e-10)


def test_init_priors_punctured_uniform():
    like = np.random.default_rng(0).random((6, 8))
    mask = np.array([True, False, False, True, False, False])
    priors = init_priors(like, GF8, punctured_mask=mask)
    assert np.allclose(priors[mask], 1 / 8)
    assert np.allclose(priors.sum(axis=1), 1.0)


def test_init_priors_noiseless_delta():
    like = np.zeros((3, 8))
    like[np.arange(3), [1, 5, 7]] = 1.0
    priors = init_priors(like, GF8)
    assert np.array_equal(np.argmax(priors, axis=1), [1, 5, 7])
    assert np.allclose(priors.max(axis=1), 1.0)


def test_init_priors_mr_product_collapses_to_delta():
    # broadcast uniform, repeat block a delta at r*x: the product recovers x
    n = 4
    scheme = mr_extend(n, 2, GF8, seed=9)
    x = np.array([3, 0, 6, 2])
    bc = np.ones((n, 8))
    mac = np.zeros((1, n, 8))
    sent = GF8.mul_vec(scheme.block_coefficients(2), x)
    mac[0, np.arange(n), sent] = 1.0
    priors = init_priors(bc, GF8, scheme=scheme, mac_likelihoods=mac)
    assert np.array_equal(np.argmax(priors, axis=1), x)
    assert np.allclose(priors.max(axis=1), 1.0)


def test_init_priors_degenerate():
    like = np.zeros((2, 8))
    like[0, 1] = 1.0
    with pytest.raises(DegenerateLikelihood):
        init_priors(like, GF8)


def test_decode_delta_priors_exit_iteration_zero():
    code = build_mother_code(6, 2, 3, GF4, seed=3)
    x = code.encoder.encode([1, 3])
    priors = np.full((6, 4), 1e-12)
    priors[np.arange(6), x] = 1.0
    result = decode(priors, TannerGraph(code.h))
    assert result.syndrome_ok
    assert result.iterations_used == 0
    assert np.array_equal(result.estimate, x)


def test_bp_equals_exact_map_on_tree():
    h = tree_code_gf4()
    graph = TannerGraph(h)
    rng = np.random.default_rng(6)
    worst = 0.0
    for _ in range(100):
        priors = rng.random((4, 4)) + 1e-3
        priors /= priors.sum(axis=1, keepdims=True)
        exact = map_marginals(h.to_dense(), GF4, priors)
        result = decode(priors, graph, max_iterations=8, early_stop=False)
        tv = 0.5 * np.abs(result.posteriors - exact).sum(axis=1).max()
        worst = max(worst, tv)
    assert worst < 1e-9


def test_wht_and_direct_paths_agree_on_gf16_code():
    code = build_mother_code(32, 2, 4, GF16, seed=5)
    graph = TannerGraph(code.h)
    rng = np.random.default_rng(7)
    for _ in range(5):
        u = rng.integers(0, 16, size=code.k)
        x = code.encoder.encode(u)
        noisy = rng.random((32, 16)) * 0.05
        noisy[np.arange(32), x] += 1.0
        priors = noisy / noisy.sum(axis=1, keepdims=True)
        res_wht = decode(priors, graph, max_iterations=30, conv="wht", trace=True)
        res_dir = decode(priors, graph, max_iterations=30, conv="direct", trace=True)
        assert np.array_equal(res_wht.estimate, res_dir.estimate)
        assert res_wht.iterations_used == res_dir.iterations_used
        for a, b in zip(res_wht.trace, res_dir.trace):
            assert np.abs(a - b).max() < 1e-10


def test_messages_normalised_every_iteration():
    code = build_mother_code(12, 2, 3, GF8, seed=2)
    graph = TannerGraph(code.h)
    rng = np.random.default_rng(8)
    priors = rng.random((12, 8))
    priors /= priors.sum(axis=1, keepdims=True)
    result = decode(priors, graph, max_iterations=5, early_stop=False, trace=True)
    for msgs in result.trace:
        assert np.all(msgs >= 0)
        assert np.allclose(msgs.sum(axis=1), 1.0, atol=1e-9)
    assert np.allclose(result.posteriors.sum(axis=1), 1.0, atol=1e-9)


def test_decode_reports_failure_at_cap():
    code = build_mother_code(12, 2, 3, GF8, seed=2)
    graph = TannerGraph(code.h)
    rng = np.random.default_rng(9)
    priors = rng.random((12, 8))  # junk channel: decoding should not certify
    priors /= priors.sum(axis=1, keepdims=True)
    result = decode(priors, graph, max_iterations=3)
    assert result.iterations_used <= 3
    assert result.syndrome_ok == graph.syndrome_ok(result.estimate)
