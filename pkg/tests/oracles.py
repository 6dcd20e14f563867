"""Independent brute-force reference implementations used to pin expected values.

Everything here is deliberately naive (bit fiddling, double loops, exhaustive
enumeration) and shares no code with the library paths it checks.
"""

import itertools

import numpy as np


def polymul_mod(a: int, b: int, poly: int, m: int) -> int:
    """Carry-less polynomial product of a and b reduced modulo poly."""
    acc = 0
    while b:
        if b & 1:
            acc ^= a
        b >>= 1
        a <<= 1
        if a >> m & 1:
            a ^= poly
    return acc


def polyinv_mod(a: int, poly: int, m: int) -> int:
    """Inverse by exhaustive search over the nonzero symbols."""
    for c in range(1, 1 << m):
        if polymul_mod(a, c, poly, m) == 1:
            return c
    raise ValueError(f"{a} has no inverse mod {poly:#x}")


def brute_null_space(h_dense, field):
    """All vectors x over the field with H x = 0, by full enumeration."""
    h = np.asarray(h_dense)
    n = h.shape[1]
    words = []
    for vec in itertools.product(range(field.order), repeat=n):
        x = np.array(vec, dtype=np.int64)
        synd = 0
        for row in h:
            s = 0
            for hij, xj in zip(row, x):
                s ^= polymul_mod(int(hij), int(xj), field.poly, field.m)
            synd |= s
        if synd == 0:
            words.append(vec)
    return set(words)


def convolve_ref(p1, p2, q: int):
    """(p1 (*) p2)(x) = sum over y+z=x of p1(y) p2(z), double loop."""
    out = np.zeros(q)
    for y in range(q):
        for z in range(q):
            out[y ^ z] += p1[y] * p2[z]
    return out


def map_marginals(h_dense, field, priors):
    """Exact per-symbol posterior marginals via exhaustive codeword enumeration."""
    codewords = sorted(brute_null_space(h_dense, field))
    n = len(codewords[0])
    marg = np.zeros((n, field.order))
    for cw in codewords:
        w = 1.0
        for v, sym in enumerate(cw):
            w *= priors[v][sym]
        for v, sym in enumerate(cw):
            marg[v, sym] += w
    marg /= marg.sum(axis=1, keepdims=True)
    return marg


def erasure_recovery_steps(check_adj, punctured):
    """Recovery iteration of each punctured node under erasure message passing.

    check_adj: list of variable-index lists, one per check.  A punctured node
    becomes known at step k if some check sees all its other neighbours known
    by step k-1.  Returns {node: step} for everything recoverable.
    """
    known_at = {}
    unknown = set(punctured)
    step = 0
    while unknown:
        step += 1
        recovered = set()
        for members in check_adj:
            miss = [v for v in members if v in unknown]
            if len(miss) == 1:
                recovered.add(miss[0])
        if not recovered:
            break  # remaining nodes unrecoverable
        for v in recovered:
            known_at[v] = step
        unknown -= recovered
    return known_at


def gaussian_bit_likelihood(y: float, amplitude: float, bit: int) -> float:
    """Density of y for a BPSK bit (0 -> +amplitude, 1 -> -amplitude), unit noise."""
    s = amplitude if bit == 0 else -amplitude
    return float(np.exp(-0.5 * (y - s) ** 2) / np.sqrt(2.0 * np.pi))
