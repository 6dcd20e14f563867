"""Regular parity-check matrices over GF(2^m), encoders, and persistence.

Construction is progressive-edge-growth style: edges are placed greedily so
that no 4-cycle is created (girth at least 6) while keeping row and column
weights exactly (d_v, d_c).  Edge labels are drawn uniformly from the nonzero
field symbols.  Encoding goes through a cached systematic form obtained by
Gaussian elimination over the field.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

import numpy as np

from .gf import GaloisField


class BadParameters(ValueError):
    pass


class GirthUnachievable(RuntimeError):
    pass


class RankDeficient(RuntimeError):
    def __init__(self, rank: int, rows: int):
        super().__init__(f"parity-check matrix has rank {rank} < {rows}")
        self.rank = rank
        self.rows = rows


@dataclass(frozen=True)
class ParityCheckMatrix:
    """Sparse M x N matrix over GF(2^m): entries are (row, col, nonzero symbol)."""

    n_checks: int
    n_vars: int
    rows: np.ndarray    # edge -> check index
    cols: np.ndarray    # edge -> variable index
    labels: np.ndarray  # edge -> nonzero symbol
    field: GaloisField
    dv: int
    dc: int

    def __post_init__(self):
        if np.any(self.labels == 0):
            raise BadParameters("zero entries are not stored explicitly")
        pairs = set(zip(self.rows.tolist(), self.cols.tolist()))
        if len(pairs) != len(self.rows):
            raise BadParameters("duplicate (row, col) entry")

    @property
    def n_edges(self) -> int:
        return len(self.rows)

    def to_dense(self) -> np.ndarray:
        h = np.zeros((self.n_checks, self.n_vars), dtype=np.int64)
        h[self.rows, self.cols] = self.labels
        return h

    def check_adjacency(self) -> list[list[int]]:
        adj = [[] for _ in range(self.n_checks)]
        order = np.lexsort((self.cols, self.rows))
        for e in order:
            adj[self.rows[e]].append(int(self.cols[e]))
        return adj

    def var_adjacency(self) -> list[list[int]]:
        adj = [[] for _ in range(self.n_vars)]
        order = np.lexsort((self.rows, self.cols))
        for e in order:
            adj[self.cols[e]].append(int(self.rows[e]))
        return adj


def construct_regular(
    n_vars: int,
    dv: int,
    dc: int,
    field: GaloisField,
    seed: int,
    max_attempts: int = 50,
) -> ParityCheckMatrix:
    """(dv, dc)-regular matrix with girth >= 6 and uniform nonzero labels.

    Deterministic for a fixed (parameters, seed).  Raises BadParameters when
    n_vars*dv is not divisible by dc and GirthUnachievable when no 4-cycle-free
    placement is found within the attempt budget.
    """
    if dv < 1 or dc < 2:
        raise BadParameters(f"degrees ({dv}, {dc}) out of range")
    if (n_vars * dv) % dc != 0:
        raise BadParameters(f"N*dv = {n_vars * dv} not divisible by dc = {dc}")
    n_checks = n_vars * dv // dc
    if n_checks < dv:
        raise BadParameters("too few checks to give each column distinct rows")
    rng = np.random.default_rng(seed)
    for _ in range(max_attempts):
        placement = _peg_placement(n_vars, dv, dc, n_checks, rng)
        if placement is None:
            continue
        rows, cols = placement
        labels = rng.integers(1, field.order, size=len(rows))
        return ParityCheckMatrix(
            n_checks=n_checks,
            n_vars=n_vars,
            rows=np.asarray(rows, dtype=np.int64),
            cols=np.asarray(cols, dtype=np.int64),
            labels=labels.astype(np.int64),
            field=field,
            dv=dv,
            dc=dc,
        )
    raise GirthUnachievable(
        f"no girth-6 ({dv},{dc}) placement with N={n_vars} in {max_attempts} attempts"
    )


def _peg_placement(n_vars, dv, dc, n_checks, rng):
    var_checks = [[] for _ in range(n_vars)]   # checks already attached to v
    check_vars = [[] for _ in range(n_checks)]
    degree = np.zeros(n_checks, dtype=np.int64)
    for v in range(n_vars):
        for _ in range(dv):
            # any check sharing another variable with one of v's checks would
            # close a 4-cycle, as would a repeated check
            banned = set(var_checks[v])
            for c in var_checks[v]:
                for u in check_vars[c]:
                    banned.update(var_checks[u])
            candidates = [
                c for c in range(n_checks) if degree[c] < dc and c not in banned
            ]
            if not candidates:
                return None
            lowest = min(degree[c] for c in candidates)
            pool = [c for c in candidates if degree[c] == lowest]
            c = int(pool[rng.integers(len(pool))])
            var_checks[v].append(c)
            check_vars[c].append(v)
            degree[c] += 1
    rows, cols = [], []
    for c in range(n_checks):
        for v in sorted(check_vars[c]):
            rows.append(c)
            cols.append(v)
    return rows, cols


def girth(h: ParityCheckMatrix) -> int:
    """Shortest cycle length of the Tanner graph by BFS from every variable node."""
    var_adj = h.var_adjacency()
    check_adj = h.check_adjacency()
    best = np.inf
    for root in range(h.n_vars):
        # nodes: variables 0..N-1, checks N..N+M-1
        dist = {("v", root): 0}
        parent = {("v", root): None}
        queue = [("v", root)]
        while queue:
            kind, idx = queue.pop(0)
            d = dist[(kind, idx)]
            if 2 * d >= best:
                break
            neigh = (
                [("c", c) for c in var_adj[idx]]
                if kind == "v"
                else [("v", v) for v in check_adj[idx]]
            )
            for node in neigh:
                if node == parent[(kind, idx)]:
                    continue
                if node in dist:
                    best = min(best, d + dist[node] + 1)
                else:
                    dist[node] = d + 1
                    parent[node] = (kind, idx)
                    queue.append(node)
    return int(best) if np.isfinite(best) else 0


@dataclass(frozen=True)
class Encoder:
    """Systematic encoder for the null space of a full-rank parity-check matrix."""

    h: ParityCheckMatrix
    info_positions: np.ndarray    # K columns carrying information symbols
    parity_positions: np.ndarray  # M pivot columns
    parity_table: np.ndarray      # (M, K) coefficients: parity = table . info

    @property
    def k(self) -> int:
        return len(self.info_positions)

    @property
    def n(self) -> int:
        return self.h.n_vars

    def encode(self, info) -> np.ndarray:
        info = np.asarray(info, dtype=np.int64)
        if info.shape != (self.k,):
            raise ValueError(f"expected {self.k} information symbols, got {info.shape}")
        x = np.zeros(self.n, dtype=np.int64)
        x[self.info_positions] = info
        if self.k:
            x[self.parity_positions] = self.h.field.matvec(self.parity_table, info)
        return x

    def extract_info(self, codeword) -> np.ndarray:
        return np.asarray(codeword, dtype=np.int64)[self.info_positions]


def derive_encoder(h: ParityCheckMatrix) -> Encoder:
    """Gaussian elimination over the field; raises RankDeficient with the rank."""
    field = h.field
    a = h.to_dense()
    m, n = a.shape
    pivots = []
    row = 0
    for col in range(n):
        sel = None
        for r in range(row, m):
            if a[r, col] != 0:
                sel = r
                break
        if sel is None:
            continue
        if sel != row:
            a[[row, sel]] = a[[sel, row]]
        a[row] = field.mul_vec(field.inv(int(a[row, col])), a[row])
        for r in range(m):
            if r != row and a[r, col] != 0:
                a[r] ^= field.mul_vec(int(a[r, col]), a[row])
        pivots.append(col)
        row += 1
        if row == m:
            break
    if row < m:
        raise RankDeficient(rank=row, rows=m)
    parity_positions = np.array(pivots, dtype=np.int64)
    info_positions = np.array(
        [c for c in range(n) if c not in set(pivots)], dtype=np.int64
    )
    # row i reads: x[pivot_i] + sum_j table[i, j] * x[info_j] = 0
    parity_table = a[:, info_positions]
    return Encoder(
        h=h,
        info_positions=info_positions,
        parity_positions=parity_positions,
        parity_table=parity_table,
    )


def check_syndrome(codeword, h: ParityCheckMatrix) -> bool:
    """True iff every parity-check equation holds."""
    x = np.asarray(codeword, dtype=np.int64)
    if x.shape != (h.n_vars,):
        raise ValueError(f"expected {h.n_vars} symbols, got {x.shape}")
    prods = h.field.mul_vec(h.labels, x[h.cols])
    synd = np.zeros(h.n_checks, dtype=np.int64)
    np.bitwise_xor.at(synd, h.rows, prods)
    return bool(np.all(synd == 0))


class TannerGraph:
    """Bipartite view of a parity-check matrix with message-passing layout.

    Edges are held in a canonical order (sorted by check, then variable) and
    grouped by node degree so that belief propagation can gather each group
    into a dense (nodes, degree, 2^m) block.  The label permutation tables map
    a probability vector p to p(h^-1 x) on the way into a check and to
    p(h x) on the way out.
    """

    def __init__(self, h: ParityCheckMatrix):
        self.h = h
        self.field = h.field
        self.n_vars = h.n_vars
        self.n_checks = h.n_checks
        order = np.lexsort((h.cols, h.rows))
        self.edge_check = h.rows[order]
        self.edge_var = h.cols[order]
        self.edge_label = h.labels[order]
        self.n_edges = len(order)
        q = self.field.order
        inv_labels = np.array(
            [self.field.inv(int(lab)) for lab in self.edge_label], dtype=np.int64
        )
        xs = np.arange(q, dtype=np.int64)
        self.in_perm = self.field.mul_vec(inv_labels[:, None], xs[None, :])
        self.out_perm = self.field.mul_vec(self.edge_label[:, None], xs[None, :])
        self.check_groups = _degree_groups(self.edge_check, self.n_checks)
        self.var_groups = _degree_groups(self.edge_var, self.n_vars)

    @property
    def q(self) -> int:
        return self.field.order

    def syndrome_ok(self, estimate) -> bool:
        return check_syndrome(estimate, self.h)


def _degree_groups(node_of_edge, n_nodes):
    """Group nodes by degree: [(degree, node_ids, edge_index_matrix), ...]."""
    edges_of = [[] for _ in range(n_nodes)]
    for e, node in enumerate(node_of_edge):
        edges_of[node].append(e)
    by_degree = {}
    for node, edges in enumerate(edges_of):
        by_degree.setdefault(len(edges), []).append((node, edges))
    groups = []
    for deg in sorted(by_degree):
        if deg == 0:
            continue
        nodes = np.array([node for node, _ in by_degree[deg]], dtype=np.int64)
        eidx = np.array([edges for _, edges in by_degree[deg]], dtype=np.int64)
        groups.append((deg, nodes, eidx))
    return groups


@dataclass
class MotherCode:
    """A parity-check matrix bundled with its encoder; built once, shared."""

    h: ParityCheckMatrix
    encoder: Encoder

    @property
    def n(self) -> int:
        return self.h.n_vars

    @property
    def k(self) -> int:
        return self.encoder.k

    @property
    def field(self) -> GaloisField:
        return self.h.field


def build_mother_code(
    n_vars: int, dv: int, dc: int, field: GaloisField, seed: int, max_redraws: int = 20
) -> MotherCode:
    """Construct a regular code, redrawing with bumped seeds if H is rank deficient."""
    last = None
    for offset in range(max_redraws):
        h = construct_regular(n_vars, dv, dc, field, seed + offset)
        try:
            return MotherCode(h=h, encoder=derive_encoder(h))
        except RankDeficient as exc:
            last = exc
    raise RankDeficient(last.rank, last.rows)


# -- persistence ---------------------------------------------------------------
#
# Text format, one matrix per file:
#   line 1: N M dv dc m poly
#   next N lines: the dv check indices of each variable (1-based, ascending)
#   next M lines: the dc variable indices of each check (1-based, ascending)
#   next M lines: the labels of each check's entries, aligned with the line above


def save_matrix(h: ParityCheckMatrix, path) -> None:
    var_adj = h.var_adjacency()
    check_adj = h.check_adjacency()
    dense = h.to_dense()
    lines = [f"{h.n_vars} {h.n_checks} {h.dv} {h.dc} {h.field.m} {h.field.poly}"]
    for v in range(h.n_vars):
        lines.append(" ".join(str(c + 1) for c in var_adj[v]))
    for c in range(h.n_checks):
        lines.append(" ".join(str(v + 1) for v in check_adj[c]))
    for c in range(h.n_checks):
        lines.append(" ".join(str(int(dense[c, v])) for v in check_adj[c]))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def load_matrix(path) -> ParityCheckMatrix:
    with open(path) as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    n, m, dv, dc, deg, poly = (int(t) for t in lines[0].split())
    field = GaloisField(deg, poly)
    var_lines = lines[1 : 1 + n]
    check_lines = lines[1 + n : 1 + n + m]
    label_lines = lines[1 + n + m : 1 + n + 2 * m]
    if len(label_lines) != m:
        raise ValueError("truncated matrix file")
    rows, cols, labels = [], [], []
    for c, (vs, ls) in enumerate(zip(check_lines, label_lines)):
        for v, lab in zip(vs.split(), ls.split()):
            rows.append(c)
            cols.append(int(v) - 1)
            labels.append(int(lab))
    h = ParityCheckMatrix(
        n_checks=m,
        n_vars=n,
        rows=np.asarray(rows, dtype=np.int64),
        cols=np.asarray(cols, dtype=np.int64),
        labels=np.asarray(labels, dtype=np.int64),
        field=field,
        dv=dv,
        dc=dc,
    )
    # the variable-side section must describe the same edge set
    want = [[c + 1 for c in adj] for adj in h.var_adjacency()]
    got = [[int(t) for t in ln.split()] for ln in var_lines]
    if want != got:
        raise ValueError("inconsistent adjacency sections in matrix file")
    return h
