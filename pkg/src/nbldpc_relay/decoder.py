"""Belief propagation over GF(2^m) with transform-domain check updates.

Messages are length-2^m probability vectors.  A check node permutes each
incoming vector by its edge label, convolves all but one of them over the
additive group of the field (a pointwise product in the Walsh-Hadamard
domain), and permutes back.  A variable node multiplies its channel prior
with all but one incoming check message.  The flooding schedule runs all
checks, then all variables, testing the syndrome of the tentative decision
every iteration.

Two check-update backends are provided: the transform path used everywhere,
and a direct O(4^m) convolution used to cross-check it on small fields.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .codes import TannerGraph
from .gf import GaloisField
from .rate_adapt import RepetitionScheme

#: smallest value a message entry may take before renormalisation
MESSAGE_FLOOR = 1e-300

_hadamard_cache: dict[int, np.ndarray] = {}


class DegenerateLikelihood(ValueError):
    """A position's likelihood vector sums to zero; no prior can be formed."""


def _hadamard(n: int) -> np.ndarray:
    mat = _hadamard_cache.get(n)
    if mat is None:
        mat = np.array([[1.0]])
        while mat.shape[0] < n:
            mat = np.block([[mat, mat], [mat, -mat]])
        _hadamard_cache[n] = mat
    return mat


def wht(p) -> np.ndarray:
    """Walsh-Hadamard transform along the last axis; wht(wht(p)) = len * p."""
    p = np.asarray(p, dtype=np.float64)
    n = p.shape[-1]
    if n & (n - 1) or n == 0:
        raise ValueError(f"length {n} is not a power of two")
    if n <= 4096:
        return p @ _hadamard(n)
    out = p.copy()
    h = 1
    while h < n:
        block = out.reshape(-1, n // (2 * h), 2, h)
        top = block[:, :, 0, :].copy()
        bot = block[:, :, 1, :]
        np.add(top, bot, out=block[:, :, 0, :])
        np.subtract(top, bot, out=bot)
        h *= 2
    return out


def gf_convolve(p1, p2) -> np.ndarray:
    """Convolution over the additive group: out(x) = sum_{y^z=x} p1(y) p2(z)."""
    p1 = np.asarray(p1, dtype=np.float64)
    p2 = np.asarray(p2, dtype=np.float64)
    if p1.shape != p2.shape:
        raise ValueError("operands must share a field")
    n = p1.shape[-1]
    return wht(wht(p1) * wht(p2)) / n


def convolve_direct(a, b) -> np.ndarray:
    """Direct quadratic-cost convolution; the reference path for cross-checks."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    q = a.shape[-1]
    out = np.zeros_like(a)
    idx = np.arange(q)
    for x in range(q):
        out[..., x] = (a * b[..., x ^ idx]).sum(axis=-1)
    return out


def init_priors(
    bc_likelihoods,
    field: GaloisField,
    punctured_mask=None,
    scheme: RepetitionScheme | None = None,
    mac_likelihoods=None,
) -> np.ndarray:
    """Per-position priors from channel likelihoods.

    Punctured positions get the uniform vector.  With a repetition scheme the
    prior of position v multiplies the broadcast likelihood with, for each
    repeat block t, the likelihood of the repeat symbol evaluated at
    r_{tN+v} * x.  All outputs are normalised to unit mass.
    """
    pri = np.array(bc_likelihoods, dtype=np.float64)
    if pri.ndim != 2 or pri.shape[1] != field.order:
        raise ValueError(f"likelihood array must be (N, {field.order})")
    if np.any(pri < 0):
        raise DegenerateLikelihood("negative likelihood entry")
    if np.any(pri.sum(axis=1) == 0):
        raise DegenerateLikelihood("a broadcast position has all-zero likelihood")
    n = pri.shape[0]
    if punctured_mask is not None:
        pri[np.asarray(punctured_mask, dtype=bool)] = 1.0
    if scheme is not None and scheme.t_reps > 1:
        if mac_likelihoods is None:
            raise ValueError("repetition scheme given without repeat likelihoods")
        mac = np.asarray(mac_likelihoods, dtype=np.float64)
        if mac.shape != (scheme.t_reps - 1, n, field.order):
            raise ValueError(
                f"repeat likelihoods must be {(scheme.t_reps - 1, n, field.order)}"
            )
        if np.any(mac < 0):
            raise DegenerateLikelihood("negative likelihood entry")
        xs = np.arange(field.order, dtype=np.int64)
        for t in range(2, scheme.t_reps + 1):
            coeffs = scheme.block_coefficients(t)
            perm = field.mul_vec(coeffs[:, None], xs[None, :])
            pri *= np.take_along_axis(mac[t - 2], perm, axis=1)
    sums = pri.sum(axis=1, keepdims=True)
    if np.any(sums == 0):
        raise DegenerateLikelihood("a position's combined likelihood has zero mass")
    return pri / sums


@dataclass
class DecodeResult:
    estimate: np.ndarray
    iterations_used: int
    syndrome_ok: bool
    posteriors: np.ndarray
    trace: list | None = None

    @property
    def posterior_max(self) -> np.ndarray:
        return self.posteriors.max(axis=1)


def decode(
    priors,
    graph: TannerGraph,
    max_iterations: int = 500,
    conv: str = "wht",
    early_stop: bool = True,
    trace: bool = False,
) -> DecodeResult:
    """Flooding BP; stops on a zero syndrome or after max_iterations."""
    if conv not in ("wht", "direct"):
        raise ValueError(f"unknown convolution backend {conv!r}")
    prior = np.array(priors, dtype=np.float64)
    if prior.shape != (graph.n_vars, graph.q):
        raise ValueError(f"priors must be {(graph.n_vars, graph.q)}")
    _floor_normalize(prior)

    posteriors = prior.copy()
    estimate = np.argmax(posteriors, axis=1)
    if early_stop and graph.syndrome_ok(estimate):
        return DecodeResult(estimate, 0, True, posteriors, [] if trace else None)

    p_vc = prior[graph.edge_var]
    traced = [] if trace else None
    for iteration in range(1, max_iterations + 1):
        p_cv = _check_phase(graph, p_vc, conv)
        if trace:
            traced.append(p_cv.copy())
        p_vc = _variable_phase(graph, prior, p_cv)
        posteriors = _posteriors(graph, prior, p_cv)
        estimate = np.argmax(posteriors, axis=1)
        if early_stop and graph.syndrome_ok(estimate):
            return DecodeResult(estimate, iteration, True, posteriors, traced)
    return DecodeResult(
        estimate, max_iterations, graph.syndrome_ok(estimate), posteriors, traced
    )


def _floor_normalize(msgs) -> None:
    np.maximum(msgs, MESSAGE_FLOOR, out=msgs)
    msgs /= msgs.sum(axis=-1, keepdims=True)


def _check_phase(graph, p_vc, conv):
    permuted = np.take_along_axis(p_vc, graph.in_perm, axis=1)
    combined = np.empty_like(permuted)
    if conv == "wht":
        spectra = wht(permuted)
        for _, _, eidx in graph.check_groups:
            combined[eidx.ravel()] = _exclusive_product(spectra[eidx]).reshape(
                -1, graph.q
            )
        combined = wht(combined) / graph.q
        np.maximum(combined, 0.0, out=combined)  # fp round-trip residue only
    else:
        for _, _, eidx in graph.check_groups:
            combined[eidx.ravel()] = _exclusive_convolve(permuted[eidx]).reshape(
                -1, graph.q
            )
        np.maximum(combined, 0.0, out=combined)
    p_cv = np.take_along_axis(combined, graph.out_perm, axis=1)
    _floor_normalize(p_cv)
    return p_cv


def _variable_phase(graph, prior, p_cv):
    p_vc = np.empty_like(p_cv)
    for _, nodes, eidx in graph.var_groups:
        block = _exclusive_product(p_cv[eidx])
        block *= prior[nodes][:, None, :]
        p_vc[eidx.ravel()] = block.reshape(-1, graph.q)
    _floor_normalize(p_vc)
    return p_vc


def _posteriors(graph, prior, p_cv):
    post = prior.copy()
    for _, nodes, eidx in graph.var_groups:
        post[nodes] *= p_cv[eidx].prod(axis=1)
    _floor_normalize(post)
    return post


def _exclusive_product(block):
    """All-but-one products along axis 1 of a (nodes, degree, q) block."""
    deg = block.shape[1]
    pre = np.empty_like(block)
    suf = np.empty_like(block)
    pre[:, 0] = 1.0
    for i in range(1, deg):
        np.multiply(pre[:, i - 1], block[:, i - 1], out=pre[:, i])
    suf[:, deg - 1] = 1.0
    for i in range(deg - 2, -1, -1):
        np.multiply(suf[:, i + 1], block[:, i + 1], out=suf[:, i])
    return pre * suf


def _exclusive_convolve(block):
    """All-but-one direct convolutions along axis 1 of a (nodes, degree, q) block."""
    nodes, deg, q = block.shape
    delta = np.zeros(q)
    delta[0] = 1.0
    pre = np.empty_like(block)
    suf = np.empty_like(block)
    pre[:, 0] = delta
    for i in range(1, deg):
        pre[:, i] = convolve_direct(pre[:, i - 1], block[:, i - 1])
    suf[:, deg - 1] = delta
    for i in range(deg - 2, -1, -1):
        suf[:, i] = convolve_direct(suf[:, i + 1], block[:, i + 1])
    out = np.empty_like(block)
    for i in range(deg):
        out[:, i] = convolve_direct(pre[:, i], suf[:, i])
    return out
