"""Spin-model / loop-model equivalences checked by enumerating both sides.

Multiplicative constants are derived from the high-temperature expansion and
stated next to each check; the loop side is always the one normalised to 1 on
the empty configuration.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

import numpy as np

from ..lattice import LatticeTorus, enumerate_loop_configs, graph_cyclomatic_number, mask_to_indices
from .core import OracleError, bit_table

MAPPINGS = ("ising-dual", "rbim", "face-cubic", "mixed-cubic")


@dataclass(frozen=True)
class EquivalenceReport:
    lhs: float
    rhs: float
    relative_error: float
    mapping: str
    lattice: dict | None = None
    params: dict | None = None

    @classmethod
    def make(cls, lhs, rhs, mapping, lattice=None, **params):
        err = abs(lhs - rhs) / max(abs(lhs), 1e-300)
        if lhs == rhs:
            err = 0.0
        return cls(float(lhs), float(rhs), float(err), mapping,
                   lattice.descriptor if lattice is not None else None, params)

    def to_json(self) -> str:
        return json.dumps(asdict(self))


def _fsum(x) -> float:
    return math.fsum(np.asarray(x, dtype=float).ravel().tolist())


def _loop_sum(lattice, t, N, winding, cap=24):
    out = []
    for L in enumerate_loop_configs(lattice, winding=winding, dedup=True, cap=cap):
        n = L.length
        if n == 0:
            out.append(1.0)
        elif t != 0:
            out.append(t ** n * N ** graph_cyclomatic_number(lattice, L.mask))
    return math.fsum(out)


# ---------------------------------------------------------------------------


def ising_dual_check(lattice: LatticeTorus, beta: float) -> EquivalenceReport:
    """Honeycomb loops with t = tanh(beta) against Ising spins on the dual triangular lattice.

    Triangular spins live on the hexagons and couple across every honeycomb
    edge with e^{-2 beta_dual} = tanh(beta).  Each loop configuration is the
    domain-wall set of exactly two spin configurations, and the all-up energy
    is factored out, so rhs = sum_tau e^{beta_dual (sum tau tau - E)} / 2.
    """
    if lattice.kind != "honeycomb":
        raise OracleError("ising_dual_check needs a honeycomb lattice")
    if beta < 0:
        raise OracleError("beta must be non-negative")
    t = math.tanh(beta)
    lhs = _loop_sum(lattice, t, 1.0, winding=False)
    F, E = lattice.n_faces, lattice.n_edges
    if F > 24:
        raise OracleError("too many spins for the dual enumeration")
    tau = 1 - 2 * bit_table(F).astype(np.int64)
    f1, f2 = lattice.edge_faces[:, 0], lattice.edge_faces[:, 1]
    bond_sum = (tau[:, f1] * tau[:, f2]).sum(axis=1)
    if beta == 0:
        boltz = (bond_sum == E).astype(float)  # beta_dual = infinity
    else:
        beta_dual = -0.5 * math.log(t)
        boltz = np.exp(beta_dual * (bond_sum - E))
    rhs = _fsum(boltz) / 2
    return EquivalenceReport.make(lhs, rhs, "ising-dual", lattice, beta=beta)


# ---------------------------------------------------------------------------


def _boundary_vertices(lattice, edge_mask: int) -> frozenset:
    par = np.zeros(lattice.n_vertices, dtype=np.int64)
    e = mask_to_indices(edge_mask)
    if len(e):
        np.add.at(par, lattice.edges[e].ravel(), 1)
    return frozenset(np.flatnonzero(par % 2).tolist())


def _edge_mask(edges) -> int:
    m = 0
    for e in edges:
        m ^= 1 << int(e)
    return m


def chain_distribution(lattice: LatticeTorus, p: float) -> dict:
    """Z_a for every anyon configuration a: total probability of error chains with boundary a."""
    n = lattice.n_edges
    if n > 22:
        raise OracleError(f"{n} qubits exceed the chain enumeration cap")
    bits = bit_table(n)
    k = bits.sum(axis=1)
    prob = (p ** k) * ((1 - p) ** (n - k))
    inc = np.zeros((n, lattice.n_vertices), dtype=np.int64)
    for e, (a, b) in enumerate(lattice.edges):
        inc[e, a] ^= 1
        inc[e, b] ^= 1
    synd = (bits.astype(np.int64) @ inc) % 2
    key = synd @ (1 << np.arange(lattice.n_vertices, dtype=np.int64))
    order = np.argsort(key, kind="stable")
    key, prob = key[order], prob[order]
    cuts = np.flatnonzero(np.diff(key)) + 1
    out = {}
    for ks, ps in zip(np.split(key, cuts), np.split(prob, cuts)):
        verts = frozenset(np.flatnonzero((int(ks[0]) >> np.arange(lattice.n_vertices)) & 1).tolist())
        out[verts] = _fsum(ps)
    return out


def rbim_check(lattice: LatticeTorus, anyons, reference_chain, p: float) -> EquivalenceReport:
    """Error-chain probability Z_a against the random-bond Ising model.

    Qubits sit on edges of a square torus, anyons on vertices, Ising spins on
    plaquettes.  With e^{-2 beta} = p / (1 - p) and eta_e = -1 on the chain,
    every chain homologous to E_ref is E_ref + boundary(sigma) for exactly two
    sigma, so one homology class contributes
    (p (1 - p))^{n/2} / 2 * sum_sigma e^{beta sum eta sigma sigma}.
    The four classes are summed by shifting E_ref with the reference windings.
    """
    if lattice.kind != "square":
        raise OracleError("rbim_check works on the square toric lattice")
    if not 0 <= p <= 1:
        raise OracleError("p must lie in [0, 1]")
    a = frozenset(int(v) for v in anyons)
    ref = _edge_mask(reference_chain)
    if _boundary_vertices(lattice, ref) != a:
        raise OracleError("boundary of the reference chain differs from the anyon configuration")
    n, F = lattice.n_edges, lattice.n_faces
    lhs = chain_distribution(lattice, p).get(a, 0.0)

    sig = 1 - 2 * bit_table(F).astype(np.int64)
    f1, f2 = lattice.edge_faces[:, 0], lattice.edge_faces[:, 1]
    ss = sig[:, f1] * sig[:, f2]
    w0, w1 = lattice.windings
    parts = []
    for shift in (0, w0, w1, w0 ^ w1):
        chain = ref ^ shift
        eta = np.ones(n, dtype=np.int64)
        eta[mask_to_indices(chain)] = -1
        energy = ss @ eta
        if p == 0:
            # beta -> infinity: only sigma with every bond satisfied survive
            parts.append(_fsum(energy == n) / 2)
        elif p == 1:
            parts.append(_fsum(energy == -n) / 2)
        else:
            beta = -0.5 * math.log(p / (1 - p))
            log_pref = 0.5 * n * math.log(p * (1 - p)) - math.log(2)
            parts.append(_fsum(np.exp(log_pref + beta * energy)))
    rhs = math.fsum(parts)
    return EquivalenceReport.make(lhs, rhs, "rbim", lattice, p=p, anyons=sorted(a))


# ---------------------------------------------------------------------------


def _face_cubic_dot(si, sj):
    # states s in [0, 2N): unit vector (-1)^(s % 2) e_{s // 2}
    same_axis = (si // 2) == (sj // 2)
    return np.where(same_axis, np.where(si == sj, 1.0, -1.0), 0.0)


def face_cubic_check(lattice: LatticeTorus, t: float, N: int, chunk: int = 1 << 18) -> EquivalenceReport:
    """Face-cubic spins with bond weights 1 + tN S.S against t^|L| N^C(L) loops.

    Expanding the product gives (2N)^V times the loop sum over all even
    subgraphs (winding ones included), with C the cyclomatic number.
    """
    if lattice.kind != "square":
        raise OracleError("face_cubic_check works on the square lattice")
    if int(N) != N or not 1 <= N <= 4:
        raise OracleError("N must be an integer in 1..4")
    if t < 0 or t * N > 1 + 1e-15:
        raise OracleError("weights turn negative for t > 1/N")
    N = int(N)
    V, q = lattice.n_vertices, 2 * N
    total = q ** V
    if total > 1 << 26:
        raise OracleError("too many spin configurations")
    a, b = lattice.edges[:, 0], lattice.edges[:, 1]
    parts = []
    for start in range(0, total, chunk):
        k = np.arange(start, min(total, start + chunk), dtype=np.int64)
        s = (k[:, None] // q ** np.arange(V, dtype=np.int64)) % q
        w = np.prod(1.0 + t * N * _face_cubic_dot(s[:, a], s[:, b]), axis=1)
        parts.append(_fsum(w))
    lhs = math.fsum(parts) / float(q) ** V
    rhs = _loop_sum(lattice, t, N, winding=True)
    return EquivalenceReport.make(lhs, rhs, "face-cubic", lattice, t=t, N=N)


def mixed_cubic_check(lattice: LatticeTorus, t: float, N: int) -> EquivalenceReport:
    """Face-cubic spins on A, corner-cubic spins sigma / sqrt(N) on B, bond weight 1 + tN S_A.S_B.

    Expanding gives (2N)^|A| 2^(N|B|) times the honeycomb loop sum over all
    even subgraphs.  The B spins are summed vertex by vertex for each A
    configuration, which is the same finite sum reorganised.
    """
    if lattice.kind != "honeycomb":
        raise OracleError("mixed_cubic_check works on the honeycomb lattice")
    if int(N) != N or not 1 <= N <= 4:
        raise OracleError("N must be an integer in 1..4")
    if t < 0 or t * math.sqrt(N) > 1 + 1e-15:
        raise OracleError("weights turn negative for t > 1/sqrt(N)")
    N = int(N)
    nA = lattice.n_vertices // 2
    q = 2 * N
    if q ** nA > 1 << 24:
        raise OracleError("too many spin configurations")
    k = np.arange(q ** nA, dtype=np.int64)
    sA = (k[:, None] // q ** np.arange(nA, dtype=np.int64)) % q  # A site 2c -> column c
    axis, sign = sA // 2, 1.0 - 2.0 * (sA % 2)
    corners = 1 - 2 * bit_table(N).astype(np.int64)  # (2^N, N)
    # incoming A neighbours of each B site (edges are oriented A -> B)
    nbrs = [[] for _ in range(nA)]
    for a, b in lattice.edges:
        nbrs[b // 2].append(a // 2)
    logw = np.zeros(len(k))
    coef = t * N / math.sqrt(N)
    for b in range(nA):
        acc = np.zeros(len(k))
        for sigma in corners:
            w = np.ones(len(k))
            for a in nbrs[b]:
                w *= 1.0 + coef * sign[:, a] * sigma[axis[:, a]]
            acc += w
        with np.errstate(divide="ignore"):
            logw += np.log(acc)
    lhs = _fsum(np.exp(logw - nA * math.log(q) - nA * N * math.log(2)))
    rhs = _loop_sum(lattice, t, N, winding=True)
    return EquivalenceReport.make(lhs, rhs, "mixed-cubic", lattice, t=t, N=N)
