"""Information-theoretic baselines and Monte Carlo density evolution.

Rates are fixed points of R = C(2R * Eb/N0) because the energy axis is
normalised per information bit.  The relay bound is the max-min of the
two-mode decode-and-forward expression, optimised by grid search over the
time-sharing factor t, the MAC correlation r, the broadcast power share a,
and the source share b of MAC power, with the budget always spent exactly.

The decoding threshold of the coded system is estimated by sampling message
populations on the cycle-free ensemble: check updates draw d_c-1 messages
with fresh uniform nonzero labels, variable updates draw d_v-1 messages and
a fresh channel prior with fresh repeat coefficients.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from .channel import DEFAULT_POWER_WEIGHTS, PowerAllocation, RelayGeometry, snr_normalize
from .decoder import wht
from .gf import GaloisField


class BracketInvalid(ValueError):
    """The search bracket does not straddle the convergence boundary."""


def gaussian_capacity(snr: float):
    """Shannon formula log2(1 + SNR)."""
    snr = np.asarray(snr, dtype=np.float64)
    if np.any(snr < 0):
        raise ValueError("SNR must be nonnegative")
    out = np.log1p(snr) / math.log(2.0)
    return float(out) if out.ndim == 0 else out


def _c_real(snr):
    """Capacity per real channel use under the unit-variance normalisation."""
    return 0.5 * np.log1p(snr) / math.log(2.0)


@dataclass(frozen=True)
class RatePoint:
    ebn0_db: float
    rate: float
    t: float | None = None
    r: float | None = None
    bc_share: float | None = None
    mac_source_share: float | None = None
    power: PowerAllocation | None = None


def direct_rate(ebn0_db: float, tol: float = 1e-9, rate_cap: float = 20.0) -> RatePoint:
    """Largest R with R = C_real(2 R Eb/N0), by bisection; 0 below the limit."""
    e = 10.0 ** (ebn0_db / 10.0)

    def gap(rate):
        return _c_real(2.0 * rate * e) - rate

    lo = tol
    if gap(lo) <= 0:  # below the -1.59 dB limit the only fixed point is 0
        return RatePoint(ebn0_db=ebn0_db, rate=0.0)
    hi = rate_cap
    while gap(hi) > 0:
        hi *= 2
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if gap(mid) > 0:
            lo = mid
        else:
            hi = mid
    return RatePoint(ebn0_db=ebn0_db, rate=0.5 * (lo + hi), t=1.0)


def _split_powers(total, t, bc_share, mac_source_share):
    """Powers spending exactly `total`: a to BC, the rest split b/(1-b) in MAC."""
    p_s_bc = bc_share * total / t if t > 0 else 0.0
    mac = (1.0 - bc_share) * total / (1.0 - t) if t < 1 else 0.0
    return p_s_bc, mac_source_share * mac, (1.0 - mac_source_share) * mac


def _mac_factors(geometry, b_grid, r_grid):
    """Per-(b, r) SNR factors of the two MAC-mode capacity arguments."""
    g_rd = geometry.gain_rd
    bb, rr = np.meshgrid(b_grid, r_grid, indexing="ij")
    bb = bb.ravel()
    rr = rr.ravel()
    x_factor = (1.0 - rr**2) * bb
    z_factor = bb + g_rd * (1.0 - bb) + 2.0 * rr * np.sqrt(g_rd * bb * (1.0 - bb))
    return bb, rr, x_factor, z_factor


def _cell_rate(geometry, power, t, a, b, r):
    """min of the two decode-and-forward mode sums for a single cell."""
    g_sr = geometry.gain_sr
    g_rd = geometry.gain_rd
    tp = 1.0 - t
    p_bc = a * power / t if t > 0 else 0.0
    p_mac = (1.0 - a) * power / tp if tp > 0 else 0.0
    x = (1.0 - r**2) * b * p_mac
    z = (b + g_rd * (1.0 - b) + 2.0 * r * math.sqrt(g_rd * b * (1.0 - b))) * p_mac
    first = t * _c_real(g_sr * p_bc) + tp * _c_real(x)
    second = t * _c_real(p_bc) + tp * _c_real(z)
    return float(min(first, second))


def _best_cell(geometry, power, t_grid, a_grid, b_grid, r_grid):
    """Maximise the max-min rate over the parameter grid at a fixed budget.

    For every (t, b, r) the objective is concave in the broadcast share a
    (capacities of linear powers), so the a axis is searched by discrete
    ternary section instead of a full scan.
    """
    g_sr = geometry.gain_sr
    bb, rr, x_factor, z_factor = _mac_factors(geometry, b_grid, r_grid)
    best_val, best_witness = -np.inf, None

    # boundary time shares: t = 0 forces a = 0, t = 1 forces a = 1
    if t_grid[0] == 0.0 and a_grid[0] == 0.0:
        rates = np.minimum(_c_real(x_factor * power), _c_real(z_factor * power))
        j = int(np.argmax(rates))
        if rates[j] > best_val:
            best_val = float(rates[j])
            best_witness = (0.0, 0.0, float(bb[j]), float(rr[j]))
    if t_grid[-1] == 1.0 and a_grid[-1] == 1.0:
        val = min(_c_real(g_sr * power), _c_real(power))
        if val > best_val:
            best_val = float(val)
            best_witness = (1.0, 1.0, float(b_grid[0]), float(r_grid[0]))

    tv = t_grid[(t_grid > 0.0) & (t_grid < 1.0)]
    if len(tv) == 0 or power <= 0:
        return best_val, best_witness
    n_t, n_a, n_cells = len(tv), len(a_grid), len(bb)
    t_col = tv[:, None]
    p_bc = a_grid[None, :] * power / t_col          # (T, A)
    p_mac = (1.0 - a_grid[None, :]) * power / (1.0 - t_col)
    term_w = t_col * _c_real(g_sr * p_bc)
    term_y = t_col * _c_real(p_bc)
    t_rows = np.arange(n_t)[:, None]
    tp_col = 1.0 - t_col

    def evaluate(a_idx):
        pm = p_mac[t_rows, a_idx]
        first = term_w[t_rows, a_idx] + tp_col * _c_real(x_factor[None, :] * pm)
        second = term_y[t_rows, a_idx] + tp_col * _c_real(z_factor[None, :] * pm)
        return np.minimum(first, second)

    lo = np.zeros((n_t, n_cells), dtype=np.int64)
    hi = np.full((n_t, n_cells), n_a - 1, dtype=np.int64)
    while True:
        gap = hi - lo
        if gap.max() <= 2:
            break
        third = gap // 3
        m1 = lo + third
        m2 = hi - third
        go_right = evaluate(m1) < evaluate(m2)
        lo = np.where(go_right & (gap > 2), m1 + 1, lo)
        hi = np.where(~go_right & (gap > 2), m2, hi)
    vals = evaluate(lo)
    arg = lo
    for off in (1, 2):
        cand = np.minimum(lo + off, hi)
        cv = evaluate(cand)
        take = cv > vals
        vals = np.where(take, cv, vals)
        arg = np.where(take, cand, arg)
    flat = int(np.argmax(vals))
    ti, j = np.unravel_index(flat, vals.shape)
    if vals[ti, j] > best_val:
        best_val = float(vals[ti, j])
        best_witness = (
            float(tv[ti]),
            float(a_grid[arg[ti, j]]),
            float(bb[j]),
            float(rr[j]),
        )
    return best_val, best_witness


def _witness_fixed_point(geometry, e_lin, t, a, b, r, tol=1e-12):
    """Rate fixed point of one parameter cell, solved to machine precision."""

    def cell(rate):
        return _cell_rate(geometry, 2.0 * rate * e_lin, t, a, b, r)

    lo, hi = 0.0, 1.0
    while cell(hi) > hi:
        hi *= 2
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if cell(mid) > mid:
            lo = mid
        else:
            hi = mid
        if hi - lo < tol:
            break
    return 0.5 * (lo + hi)


def df_achievable_rate(
    geometry: RelayGeometry,
    ebn0_db: float,
    step: float = 0.01,
    refine_step: float = 0.001,
    tol: float = 3e-6,
    rate_bracket: tuple[float, float] | None = None,
) -> RatePoint:
    """Decode-and-forward max-min rate with grid-optimised witnesses.

    Bisects the fixed point of R = sup_cells min{...}(P = 2 R Eb/N0) against
    the full parameter grid, then repeats the bisection on a refined grid
    around the incumbent so the reported witnesses land on the fine grid.
    """
    e = 10.0 ** (ebn0_db / 10.0)
    grid = np.round(np.arange(0.0, 1.0 + 1e-12, step), 10)

    def bisect(grids, lo, hi, tolerance):
        tg, ag, bg, rg = grids

        def sup_rate(rate):
            return _best_cell(geometry, 2.0 * rate * e, tg, ag, bg, rg)

        val, witness = sup_rate(hi)
        while val > hi:  # widen until infeasible
            hi *= 2
            val, witness = sup_rate(hi)
        best = None
        while hi - lo > tolerance:
            mid = 0.5 * (lo + hi)
            val, witness = sup_rate(mid)
            if val > mid:
                lo, best = mid, witness
            else:
                hi = mid
        return lo, hi, best

    lo, hi = (0.0, 4.0) if rate_bracket is None else rate_bracket
    lo, hi, witness = bisect((grid, grid, grid, grid), lo, hi, tol)
    if witness is None:
        return RatePoint(ebn0_db=ebn0_db, rate=0.0)

    def local(center):
        lo_edge = max(0.0, center - step)
        hi_edge = min(1.0, center + step)
        return np.round(np.arange(lo_edge, hi_edge + 1e-12, refine_step), 10)

    t0, a0, b0, r0 = witness
    grids = (local(t0), local(a0), local(b0), local(r0))
    lo, hi, fine = bisect(grids, max(0.0, lo - step), hi + step, 1e-10)
    if fine is not None:
        witness = fine
    t, a, b, r = witness
    best_rate = _witness_fixed_point(geometry, e, t, a, b, r)
    power_total = 2.0 * best_rate * e
    p_bc, p_smac, p_rmac = _split_powers(power_total, t, a, b)
    power = PowerAllocation(
        total=power_total, t=t, p_s_bc=p_bc, p_s_mac=p_smac, p_r_mac=p_rmac
    )
    return RatePoint(
        ebn0_db=ebn0_db,
        rate=best_rate,
        t=t,
        r=r,
        bc_share=a,
        mac_source_share=b,
        power=power,
    )


def relay_rate_limit(
    geometry: RelayGeometry,
    target_rate: float,
    lo_db: float = -12.0,
    hi_db: float = 6.0,
    tol_db: float = 0.01,
    step: float = 0.01,
) -> float:
    """Eb/N0 where the achievable rate crosses target_rate, by bisection."""
    def achieves(db):
        return df_achievable_rate(geometry, db, step=step).rate >= target_rate

    if achieves(lo_db) or not achieves(hi_db):
        raise BracketInvalid(f"[{lo_db}, {hi_db}] dB does not straddle rate {target_rate}")
    lo, hi = lo_db, hi_db
    while hi - lo > tol_db:
        mid = 0.5 * (lo + hi)
        if achieves(mid):
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


# -- Monte Carlo density evolution ---------------------------------------------


@dataclass
class DensityEvolutionResult:
    converged: bool
    residual_error_rate: float
    iterations: int
    trajectory: list = dc_field(default_factory=list)


@dataclass
class ThresholdEstimate:
    ebn0_db: float
    band: tuple[float, float]
    population: int
    iteration_cap: int
    residual_criterion: float
    trace: list  # (ebn0_db, converged) pairs in evaluation order


def _sample_priors(rng, field, amp_bc, amp_mac, t_reps, population):
    """Fresh destination priors for the zero symbol with fresh repeat coefficients."""
    q = field.order
    m = field.m
    bits = field.bits_table.astype(bool)  # (q, m)
    y = rng.normal(amp_bc, 1.0, size=(population, m))
    log0 = -0.5 * (y[:, None, :] - amp_bc) ** 2
    log1 = -0.5 * (y[:, None, :] + amp_bc) ** 2
    logp = np.where(bits[None, :, :], log1, log0).sum(axis=2)
    for _ in range(t_reps - 1):
        y = rng.normal(amp_mac, 1.0, size=(population, m))
        l0 = -0.5 * (y[:, None, :] - amp_mac) ** 2
        l1 = -0.5 * (y[:, None, :] + amp_mac) ** 2
        block = np.where(bits[None, :, :], l1, l0).sum(axis=2)  # (pop, q) over sent symbol
        coeffs = rng.integers(1, q, size=population)
        perm = field.mul_vec(coeffs[:, None], np.arange(q)[None, :])
        logp += np.take_along_axis(block, perm, axis=1)
    logp -= logp.max(axis=1, keepdims=True)
    priors = np.exp(logp)
    priors /= priors.sum(axis=1, keepdims=True)
    return priors


def _permute_by_labels(msgs, labels, field):
    perm = field.mul_vec(labels[:, None], np.arange(field.order)[None, :])
    return np.take_along_axis(msgs, perm, axis=1)


def mc_density_evolution(
    dv: int,
    dc: int,
    t_reps: int,
    field: GaloisField,
    amp_bc: float,
    amp_mac: float,
    population: int = 10_000,
    iteration_cap: int = 500,
    seed: int = 0,
    residual_criterion: float = 1e-3,
) -> DensityEvolutionResult:
    """Symbol-error trajectory of the cycle-free ensemble at one operating point."""
    if population < 1_000:
        raise ValueError("population below 1000 gives meaningless error rates")
    rng = np.random.default_rng(seed)
    q = field.order
    inv = np.array([0] + [field.inv(s) for s in range(1, q)], dtype=np.int64)
    v2c = _sample_priors(rng, field, amp_bc, amp_mac, t_reps, population)
    trajectory = []
    for iteration in range(1, iteration_cap + 1):
        # check update: convolve d_c - 1 permuted draws, permute out
        spectrum = np.ones_like(v2c)
        for _ in range(dc - 1):
            draws = v2c[rng.integers(0, population, size=population)]
            labels = rng.integers(1, q, size=population)
            spectrum *= wht(_permute_by_labels(draws, inv[labels], field))
        c2v = wht(spectrum) / q
        np.maximum(c2v, 0.0, out=c2v)
        out_labels = rng.integers(1, q, size=population)
        c2v = _permute_by_labels(c2v, out_labels, field)
        c2v = np.maximum(c2v, 1e-300)
        c2v /= c2v.sum(axis=1, keepdims=True)
        # variable update: fresh prior times d_v - 1 draws
        priors = _sample_priors(rng, field, amp_bc, amp_mac, t_reps, population)
        v2c = priors.copy()
        for _ in range(dv - 1):
            v2c *= c2v[rng.integers(0, population, size=population)]
        v2c = np.maximum(v2c, 1e-300)
        v2c /= v2c.sum(axis=1, keepdims=True)
        # tentative-decision population: prior times d_v draws
        post = _sample_priors(rng, field, amp_bc, amp_mac, t_reps, population)
        for _ in range(dv):
            post *= c2v[rng.integers(0, population, size=population)]
        ser = float(np.mean(np.argmax(post, axis=1) != 0))
        trajectory.append(ser)
        if ser < residual_criterion:
            return DensityEvolutionResult(True, ser, iteration, trajectory)
    return DensityEvolutionResult(False, trajectory[-1], iteration_cap, trajectory)


def de_amplitudes(geometry: RelayGeometry, rate: float, ebn0_db: float, t_reps: int,
                  weights=DEFAULT_POWER_WEIGHTS) -> tuple[float, float]:
    """Broadcast and combined-MAC amplitudes seen by the destination decoder."""
    total = snr_normalize(rate, ebn0_db)
    power = PowerAllocation.from_weights(total, 1.0 / t_reps, weights)
    amp_bc = geometry.h_sd * math.sqrt(power.p_s_bc)
    amp_mac = geometry.h_sd * math.sqrt(power.p_s_mac) + geometry.h_rd * math.sqrt(
        power.p_r_mac
    )
    return amp_bc, amp_mac


def threshold_search(
    evaluate,
    bracket: tuple[float, float],
    tol_db: float = 0.1,
    population: int = 10_000,
    iteration_cap: int = 500,
    residual_criterion: float = 1e-3,
) -> ThresholdEstimate:
    """Bisect the convergence boundary of `evaluate(ebn0_db) -> DensityEvolutionResult`."""
    lo, hi = bracket
    trace = []

    def run(db):
        result = evaluate(db)
        trace.append((db, result.converged))
        return result.converged

    lo_conv = run(lo)
    hi_conv = run(hi)
    if lo_conv or not hi_conv:
        raise BracketInvalid(
            f"bracket ({lo}, {hi}) dB: low endpoint converged={lo_conv}, "
            f"high endpoint converged={hi_conv}"
        )
    while hi - lo > tol_db:
        mid = 0.5 * (lo + hi)
        if run(mid):
            hi = mid
        else:
            lo = mid
    return ThresholdEstimate(
        ebn0_db=0.5 * (lo + hi),
        band=(lo, hi),
        population=population,
        iteration_cap=iteration_cap,
        residual_criterion=residual_criterion,
        trace=trace,
    )
