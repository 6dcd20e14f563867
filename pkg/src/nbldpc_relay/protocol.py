"""One full decode-and-forward frame over the half-duplex relay channel.

Broadcast mode: the source encodes with the mother code, drops any punctured
parity symbols, and transmits BPSK to relay and destination.  The relay
decodes and, in MAC mode, both source and relay transmit the multiplicative
repeats of their (true resp. estimated) codewords with shared coefficients.
The destination folds broadcast and MAC observations into per-symbol priors
and runs belief propagation on the same Tanner graph the relay used.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .channel import (
    DEFAULT_POWER_WEIGHTS,
    PowerAllocation,
    RelayGeometry,
    channel_likelihoods,
    mac_superpose,
    modulate,
    snr_normalize,
    transmit,
)
from .codes import MotherCode, TannerGraph
from .decoder import decode, init_priors
from .gf import GaloisField
from .rate_adapt import (
    PunctureSchedule,
    RepetitionScheme,
    extension_symbols,
    mr_extend,
    recoverable_order,
)


@dataclass
class RelaySystem:
    """Everything one frame needs; immutable in use and shared across workers."""

    code: MotherCode
    graph: TannerGraph
    scheme: RepetitionScheme
    geometry: RelayGeometry
    power: PowerAllocation
    max_iterations: int = 500
    puncture: PunctureSchedule | None = None
    n_punctured: int = 0

    def __post_init__(self):
        if self.scheme.mother_n != self.code.n:
            raise ValueError("repetition scheme length does not match the code")
        if self.graph.h is not self.code.h:
            raise ValueError("graph must be built from the system's code")
        if abs(self.power.t - 1.0 / self.scheme.t_reps) > 1e-12:
            raise ValueError("time sharing must satisfy t = 1/T")
        if self.n_punctured:
            if self.puncture is None:
                raise ValueError("n_punctured set without a puncture schedule")
            self.bc_mask = self.puncture.mask(self.code.n, self.n_punctured)
        else:
            self.bc_mask = np.zeros(self.code.n, dtype=bool)

    @property
    def field(self) -> GaloisField:
        return self.code.field

    @property
    def t_reps(self) -> int:
        return self.scheme.t_reps

    @property
    def n_bc_symbols(self) -> int:
        return self.code.n - self.n_punctured

    @property
    def n_mac_symbols(self) -> int:
        return (self.t_reps - 1) * self.n_bc_symbols

    @property
    def transmitted_symbols(self) -> int:
        return self.n_bc_symbols + self.n_mac_symbols

    @property
    def rate_bc(self) -> Fraction:
        return Fraction(self.code.k, self.n_bc_symbols)

    @property
    def overall_rate(self) -> Fraction:
        return Fraction(self.code.k, self.transmitted_symbols)

    @property
    def info_bits(self) -> int:
        return self.code.k * self.field.m


@dataclass
class TrialOutcome:
    relay_syndrome_ok: bool
    dest_syndrome_ok: bool
    relay_symbol_errors: int
    relay_bit_errors: int
    dest_symbol_errors: int
    dest_bit_errors: int
    relay_iterations: int
    dest_iterations: int

    @property
    def dest_frame_error(self) -> bool:
        return self.dest_bit_errors > 0

    @property
    def relay_frame_error(self) -> bool:
        return self.relay_bit_errors > 0


def run_frame(
    system: RelaySystem,
    info,
    seed,
    noise_std: float = 1.0,
    force_relay_uniform: bool = False,
) -> TrialOutcome:
    """Simulate one frame; decoding failure is data, never an exception."""
    field = system.field
    rng = np.random.default_rng(seed)
    info = np.asarray(info, dtype=np.int64)
    x = system.code.encoder.encode(info)
    keep = ~system.bc_mask

    # broadcast mode
    bc_bits = field.syms_to_bits(x[keep])
    s_bc = modulate(bc_bits, system.power.p_s_bc)
    y_relay = transmit(s_bc, system.geometry.h_sr, rng, noise_std, mode="bc_relay")
    y_dest_bc = transmit(s_bc, system.geometry.h_sd, rng, noise_std, mode="bc_dest")

    # relay decoding
    amp_sr = system.geometry.h_sr * math.sqrt(system.power.p_s_bc)
    relay_like = _expand_bc_likelihoods(
        y_relay.samples, amp_sr, field, keep, system.code.n
    )
    if force_relay_uniform:
        relay_like = np.ones_like(relay_like)
    relay_priors = init_priors(relay_like, field, punctured_mask=system.bc_mask)
    relay_result = decode(relay_priors, system.graph, system.max_iterations)
    x_hat_relay = relay_result.estimate

    # MAC mode: multiplicative repeats with shared coefficients
    dest_mac_like = None
    if system.t_reps > 1:
        ext_source = extension_symbols(x, system.scheme, system.bc_mask)
        ext_relay = extension_symbols(x_hat_relay, system.scheme, system.bc_mask)
        s_mac_source = modulate(field.syms_to_bits(ext_source), system.power.p_s_mac)
        s_mac_relay = modulate(field.syms_to_bits(ext_relay), system.power.p_r_mac)
        y_dest_mac = mac_superpose(
            s_mac_source, s_mac_relay, system.geometry, rng, noise_std
        )
        # the destination assumes both MAC signals carry the same bits
        amp_mac = system.geometry.h_sd * math.sqrt(
            system.power.p_s_mac
        ) + system.geometry.h_rd * math.sqrt(system.power.p_r_mac)
        mac_rows = channel_likelihoods(y_dest_mac.samples, amp_mac, field)
        dest_mac_like = np.ones(
            (system.t_reps - 1, system.code.n, field.order), dtype=np.float64
        )
        dest_mac_like[:, keep, :] = mac_rows.reshape(
            system.t_reps - 1, system.n_bc_symbols, field.order
        )

    # destination decoding on the same graph object
    amp_sd = system.geometry.h_sd * math.sqrt(system.power.p_s_bc)
    dest_like = _expand_bc_likelihoods(
        y_dest_bc.samples, amp_sd, field, keep, system.code.n
    )
    dest_priors = init_priors(
        dest_like,
        field,
        punctured_mask=system.bc_mask,
        scheme=system.scheme if system.t_reps > 1 else None,
        mac_likelihoods=dest_mac_like,
    )
    dest_result = decode(dest_priors, system.graph, system.max_iterations)

    relay_info = system.code.encoder.extract_info(x_hat_relay)
    dest_info = system.code.encoder.extract_info(dest_result.estimate)
    return TrialOutcome(
        relay_syndrome_ok=relay_result.syndrome_ok,
        dest_syndrome_ok=dest_result.syndrome_ok,
        relay_symbol_errors=int(np.count_nonzero(relay_info != info)),
        relay_bit_errors=_bit_errors(relay_info, info, field),
        dest_symbol_errors=int(np.count_nonzero(dest_info != info)),
        dest_bit_errors=_bit_errors(dest_info, info, field),
        relay_iterations=relay_result.iterations_used,
        dest_iterations=dest_result.iterations_used,
    )


def _expand_bc_likelihoods(samples, amplitude, field, keep, n_vars):
    rows = channel_likelihoods(samples, amplitude, field)
    like = np.ones((n_vars, field.order), dtype=np.float64)
    like[keep] = rows
    return like


def _bit_errors(a, b, field) -> int:
    return int(field.bits_table[np.asarray(a) ^ np.asarray(b)].sum())


def build_relay_system(
    code: MotherCode,
    t_reps: int,
    mr_seed: int,
    geometry: RelayGeometry,
    ebn0_db: float,
    weights=DEFAULT_POWER_WEIGHTS,
    max_iterations: int = 500,
    n_punctured: int = 0,
    graph: TannerGraph | None = None,
    scheme: RepetitionScheme | None = None,
    puncture: PunctureSchedule | None = None,
) -> RelaySystem:
    """Wire a full system at one Eb/N0 point; heavy pieces may be passed in."""
    if graph is None:
        graph = TannerGraph(code.h)
    if scheme is None:
        scheme = mr_extend(code.n, t_reps, code.field, mr_seed)
    if n_punctured and puncture is None:
        puncture = recoverable_order(code.h, code.encoder.parity_positions)
    rate = Fraction(code.k, t_reps * (code.n - n_punctured))
    total = snr_normalize(float(rate), ebn0_db)
    power = PowerAllocation.from_weights(total, 1.0 / t_reps, weights)
    return RelaySystem(
        code=code,
        graph=graph,
        scheme=scheme,
        geometry=geometry,
        power=power,
        max_iterations=max_iterations,
        puncture=puncture,
        n_punctured=n_punctured,
    )


def decoder_cost_report(system: RelaySystem) -> dict:
    """Graph sizes and per-iteration work at the two decoders.

    The relay and destination share one Tanner graph, so everything but the
    prior computation is identical; the destination's prior folds in the T-1
    repeat observations.
    """
    g = system.graph
    per_iteration = {
        "transforms": 2 * g.n_edges,
        "transform_length": g.q,
        "message_multiplies": int(
            sum(deg * len(nodes) for deg, nodes, _ in g.check_groups)
            + sum(deg * len(nodes) for deg, nodes, _ in g.var_groups)
        ),
    }
    def node_report(prior_terms):
        return {
            "variable_nodes": g.n_vars,
            "check_nodes": g.n_checks,
            "edges": g.n_edges,
            "per_iteration": dict(per_iteration),
            "prior_terms_per_symbol": prior_terms,
        }

    return {
        "relay": node_report(1),
        "destination": node_report(system.t_reps),
        "same_graph_object": True,
    }
