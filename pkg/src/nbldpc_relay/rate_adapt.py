"""Rate adaptation: multiplicative repetition down, recoverable-step puncturing up.

Repetition appends T-1 blocks of the mother codeword, each symbol scaled by a
random nonzero coefficient; the rate drops from R to R/T.  Puncturing removes
parity symbols from transmission in ascending order of the number of erasure
iterations needed to win them back.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .codes import ParityCheckMatrix
from .gf import GaloisField


@dataclass(frozen=True)
class RepetitionScheme:
    """Coefficients r_v for v = 1..T*N with r_v = 1 on the mother block."""

    t_reps: int
    coefficients: np.ndarray
    field: GaloisField
    seed: int | None = None

    def __post_init__(self):
        if np.any(self.coefficients == 0):
            raise ValueError("repetition coefficients must be nonzero")
        if np.any(self.coefficients[: self.mother_n] != 1):
            raise ValueError("mother-block coefficients must equal 1")

    @property
    def mother_n(self) -> int:
        return len(self.coefficients) // self.t_reps

    def rate_of(self, mother_rate) -> Fraction:
        return Fraction(mother_rate) / self.t_reps

    def block_coefficients(self, t: int) -> np.ndarray:
        """Coefficients of repeat block t (t = 1 is the mother block itself)."""
        n = self.mother_n
        return self.coefficients[(t - 1) * n : t * n]


def mr_extend(mother_n: int, t_reps: int, field: GaloisField, seed: int) -> RepetitionScheme:
    if t_reps < 1:
        raise ValueError(f"repetition parameter {t_reps} must be >= 1")
    rng = np.random.default_rng(seed)
    coeffs = np.ones(t_reps * mother_n, dtype=np.int64)
    if t_reps > 1:
        coeffs[mother_n:] = rng.integers(1, field.order, size=(t_reps - 1) * mother_n)
    return RepetitionScheme(t_reps=t_reps, coefficients=coeffs, field=field, seed=seed)


def mr_encode(codeword, scheme: RepetitionScheme) -> np.ndarray:
    """Full repeated word: position (t-1)N+v carries r_{(t-1)N+v} * x_v."""
    x = np.asarray(codeword, dtype=np.int64)
    if x.shape != (scheme.mother_n,):
        raise ValueError(f"expected {scheme.mother_n} symbols, got {x.shape}")
    return scheme.field.mul_vec(scheme.coefficients, np.tile(x, scheme.t_reps))


def extension_symbols(codeword, scheme: RepetitionScheme, punctured_mask=None) -> np.ndarray:
    """The repeat blocks t = 2..T only, restricted to unpunctured positions."""
    x = np.asarray(codeword, dtype=np.int64)
    keep = (
        np.ones(scheme.mother_n, dtype=bool)
        if punctured_mask is None
        else ~np.asarray(punctured_mask, dtype=bool)
    )
    blocks = [
        scheme.field.mul_vec(scheme.block_coefficients(t)[keep], x[keep])
        for t in range(2, scheme.t_reps + 1)
    ]
    if not blocks:
        return np.zeros(0, dtype=np.int64)
    return np.concatenate(blocks)


@dataclass(frozen=True)
class PunctureSchedule:
    """Variable indices in puncturing order with their recoverable-step labels."""

    order: np.ndarray
    steps: np.ndarray

    def __post_init__(self):
        if len(set(self.order.tolist())) != len(self.order):
            raise ValueError("puncture positions must be unique")
        if np.any(np.diff(self.steps) < 0):
            raise ValueError("recoverable steps must be non-decreasing")

    def __len__(self) -> int:
        return len(self.order)

    def mask(self, n_vars: int, n_punctured: int) -> np.ndarray:
        if n_punctured > len(self.order):
            raise ValueError(
                f"cannot puncture {n_punctured} symbols, schedule has {len(self.order)}"
            )
        mask = np.zeros(n_vars, dtype=bool)
        mask[self.order[:n_punctured]] = True
        return mask


def recoverable_order(h: ParityCheckMatrix, candidates=None) -> PunctureSchedule:
    """Greedy puncturing order by ascending recoverable step.

    A node joins step k when one of its checks has every other neighbour either
    unpunctured or already punctured at a step below k; the unpunctured
    neighbours of that certificate check are then pinned so later rounds cannot
    take them.  Ties inside a step resolve to the lowest variable index.
    candidates defaults to every variable node; pass the encoder's parity
    positions to keep information symbols transmitted.
    """
    check_adj = h.check_adjacency()
    var_adj = h.var_adjacency()
    pool = sorted(range(h.n_vars) if candidates is None else set(int(c) for c in candidates))
    step_of: dict[int, int] = {}
    protected: set[int] = set()
    step = 0
    while True:
        step += 1
        selected = []
        for v in pool:
            if v in step_of or v in protected:
                continue
            certificate = None
            for c in var_adj[v]:
                if all(
                    u == v or u not in step_of or step_of[u] < step
                    for u in check_adj[c]
                ):
                    certificate = c
                    break
            if certificate is None:
                continue
            step_of[v] = step
            selected.append(v)
            for u in check_adj[certificate]:
                if u != v and u not in step_of:
                    protected.add(u)
        if not selected:
            break
    ordered = sorted(step_of, key=lambda v: (step_of[v], v))
    return PunctureSchedule(
        order=np.array(ordered, dtype=np.int64),
        steps=np.array([step_of[v] for v in ordered], dtype=np.int64),
    )


def apply_puncture(codeword, schedule: PunctureSchedule, n_punctured: int):
    """Drop the first n_punctured scheduled positions from transmission.

    Returns (transmitted symbols in original order, boolean mask of punctured
    positions); the mask drives the uniform prior initialisation at the decoder.
    """
    x = np.asarray(codeword, dtype=np.int64)
    mask = schedule.mask(len(x), n_punctured)
    return x[~mask], mask
