"""Quantum-double overlaps on planar triangular patches.

A patch is an ``nx`` x ``ny`` grid of vertices with horizontal, vertical and
diagonal bonds, all oriented towards increasing coordinates.  Every triangle
is acyclic: its bonds are ``a->b``, ``b->c`` and ``a->c`` and the flux-free
condition reads ``g_ab g_bc = g_ac``.  ``X_g`` multiplies a bond from the left.

Brute-force overlaps are exact ratios of integer counts of flat connections.
Two independent counters are provided:

* ``enumerate``: free bonds of a spanning comb take every value in G, the
  remaining bonds follow by propagating triangle constraints;
* ``contract``: flat connections are written as ``g_st = h_s h_t^-1`` and the
  count becomes a sum over vertex labels, contracted as a tensor network with
  exact integer arithmetic.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from string import ascii_letters

import numpy as np

from .groups import GroupError, GroupTable
from .lattice import BranchingError, OpenChainError, mask_to_indices, shadow_mask


class PatchError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class FluxFreePatch:
    nx: int
    ny: int
    edges: np.ndarray  # (E, 2) oriented
    edge_kind: np.ndarray  # 0 horizontal, 1 vertical, 2 diagonal
    triangles: np.ndarray  # (T, 3) bonds (a->b, b->c, a->c)
    triangle_vertices: np.ndarray  # (T, 3) vertices (a, b, c)
    free_edges: tuple
    order: tuple  # (triangle, slot) pairs; slot is the bond determined by that triangle

    @property
    def n_vertices(self) -> int:
        return self.nx * self.ny

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def vertex(self, i: int, j: int) -> int:
        return j * self.nx + i

    def interior_vertices(self) -> list:
        return [self.vertex(i, j) for j in range(1, self.ny - 1) for i in range(1, self.nx - 1)]

    def edge_index(self, a: int, b: int) -> int:
        hit = np.flatnonzero((self.edges[:, 0] == a) & (self.edges[:, 1] == b))
        if len(hit) != 1:
            raise PatchError(f"no bond {a}->{b}")
        return int(hit[0])


def build_patch(nx: int, ny: int) -> FluxFreePatch:
    if nx < 2 or ny < 2:
        raise PatchError("a patch needs at least 2x2 vertices")
    V = lambda i, j: j * nx + i
    edges, kind, eid = [], [], {}
    for j in range(ny):
        for i in range(nx):
            for k, (di, dj) in enumerate(((1, 0), (0, 1), (1, 1))):
                if i + di < nx and j + dj < ny:
                    eid[(V(i, j), V(i + di, j + dj))] = len(edges)
                    edges.append((V(i, j), V(i + di, j + dj)))
                    kind.append(k)
    tris, tverts = [], []
    for j in range(ny - 1):
        for i in range(nx - 1):
            a, c = V(i, j), V(i + 1, j + 1)
            for b in (V(i + 1, j), V(i, j + 1)):
                tris.append((eid[(a, b)], eid[(b, c)], eid[(a, c)]))
                tverts.append((a, b, c))
    edges = np.array(edges, dtype=np.int64)
    tris = np.array(tris, dtype=np.int64)
    # spanning comb: bottom row plus every vertical bond
    free = [eid[(V(i, 0), V(i + 1, 0))] for i in range(nx - 1)]
    free += [eid[(V(i, j), V(i, j + 1))] for j in range(ny - 1) for i in range(nx)]
    order = _propagation_order(len(edges), tris, free)
    return FluxFreePatch(nx, ny, edges, np.array(kind), tris, np.array(tverts, dtype=np.int64),
                         tuple(free), order)


def _propagation_order(E: int, tris: np.ndarray, free) -> tuple:
    known = np.zeros(E, dtype=bool)
    known[list(free)] = True
    order, pending = [], set(range(len(tris)))
    while pending:
        progress = False
        for t in sorted(pending):
            unk = [s for s in range(3) if not known[tris[t, s]]]
            if len(unk) == 0:
                pending.discard(t)
                progress = True
            elif len(unk) == 1:
                order.append((t, unk[0]))
                known[tris[t, unk[0]]] = True
                pending.discard(t)
                progress = True
        if not progress:
            raise PatchError("no propagation order exists for this choice of free bonds")
    if not known.all():
        raise PatchError("free bonds do not determine every bond")
    return tuple(order)


# ---------------------------------------------------------------------------
# red loops and their shadows


@dataclass(frozen=True, eq=False)
class PatchLoop:
    """Set of patch bonds carrying X_g (each crossed once by the red dual path)."""

    patch: FluxFreePatch
    mask: int

    @property
    def length(self) -> int:
        return self.mask.bit_count()


def vertex_loop(patch: FluxFreePatch, vertices) -> PatchLoop:
    """Red loop encircling a set of interior vertices (bonds with one end inside)."""
    inside = np.zeros(patch.n_vertices, dtype=bool)
    inside[list(vertices)] = True
    border = set(range(patch.n_vertices)) - set(patch.interior_vertices())
    if any(inside[v] for v in border):
        raise PatchError("loops must encircle interior vertices only")
    m = 0
    for e, (a, b) in enumerate(patch.edges):
        if inside[a] != inside[b]:
            m |= 1 << e
    return PatchLoop(patch, m)


def red_triangle_counts(L: PatchLoop) -> np.ndarray:
    red = np.array([(L.mask >> int(e)) & 1 for e in range(L.patch.n_edges)])
    return red[L.patch.triangles].sum(axis=1)


def patch_shadow(L: PatchLoop) -> int:
    return shadow_mask(L.patch.edges, L.patch.triangles, L.mask)


def cycle_rank(edges: np.ndarray, mask: int) -> int:
    idx = mask_to_indices(mask)
    if len(idx) == 0:
        return 0
    verts, inv = np.unique(edges[idx].ravel(), return_inverse=True)
    parent = list(range(len(verts)))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    comps = len(verts)
    for a, b in inv.reshape(-1, 2):
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb
            comps -= 1
    return len(idx) - len(verts) + comps


def overlap_closed_form(L, G: GroupTable, g) -> Fraction:
    """|[g]|^C / |[g]|^|shadow| as an exact rational; 0 for branched or open chains."""
    from .weights import weight_quantum_double_exact
    return weight_quantum_double_exact(L, G, g)


# ---------------------------------------------------------------------------
# brute force


def _check_involution(G: GroupTable, g) -> int:
    g = G.element(g)
    if not G.is_involution(g):
        raise GroupError(f"{G.labels[g]} is not an order-two element")
    return g


def _flat_assignments(patch: FluxFreePatch, G: GroupTable, chunk: int = 1 << 16):
    """Yield blocks of flat bond assignments, shape (n, E)."""
    nf = len(patch.free_edges)
    total = G.order ** nf
    m, inv = G.mult, G.inverse
    tri = patch.triangles
    for start in range(0, total, chunk):
        idx = np.arange(start, min(total, start + chunk), dtype=np.int64)
        vals = np.zeros((len(idx), patch.n_edges), dtype=np.int64)
        rem = idx.copy()
        for e in patch.free_edges:
            vals[:, e] = rem % G.order
            rem //= G.order
        for t, slot in patch.order:
            e0, e1, e2 = tri[t]
            if slot == 2:
                vals[:, e2] = m[vals[:, e0], vals[:, e1]]
            elif slot == 1:
                vals[:, e1] = m[inv[vals[:, e0]], vals[:, e2]]
            else:
                vals[:, e0] = m[vals[:, e2], inv[vals[:, e1]]]
        yield vals


def count_enumerate(patch: FluxFreePatch, G: GroupTable, g: int, red_mask: int = 0,
                    centraliser_mask: int = 0, cap: int = 20_000_000) -> tuple:
    """(numerator, denominator) by explicit enumeration of flat connections."""
    total = G.order ** len(patch.free_edges)
    if total > cap:
        raise PatchError(f"{total} flat connections exceed the enumeration cap")
    red = mask_to_indices(red_mask)
    cen = mask_to_indices(centraliser_mask)
    touched = [t for t in range(len(patch.triangles))
               if any((red_mask >> int(e)) & 1 for e in patch.triangles[t])]
    in_cent = np.zeros(G.order, dtype=bool)
    in_cent[list(G.centralizer(g))] = True
    num = 0
    for vals in _flat_assignments(patch, G):
        if len(red):
            vals[:, red] = G.mult[g, vals[:, red]]
        ok = np.ones(len(vals), dtype=bool)
        for t in touched:
            e0, e1, e2 = patch.triangles[t]
            ok &= G.mult[vals[:, e0], vals[:, e1]] == vals[:, e2]
        for e in cen:
            ok &= in_cent[vals[:, e]]
        num += int(ok.sum())
    return num, total


def count_contract(patch: FluxFreePatch, G: GroupTable, g: int, red_mask: int = 0,
                   centraliser_mask: int = 0) -> tuple:
    """(numerator, denominator) by an exact sum over vertex labels."""
    n = G.order
    m, inv = G.mult, G.inverse
    # bond value for labels (h_s, h_t): h_s h_t^-1
    bond = m[np.arange(n)[:, None], inv[None, :]]
    red = lambda e: (red_mask >> int(e)) & 1
    operands, subs = [], []
    letters = ascii_letters
    if patch.n_vertices > len(letters):
        raise PatchError("patch too large for the contraction counter")
    for t in range(len(patch.triangles)):
        e0, e1, e2 = patch.triangles[t]
        if not (red(e0) or red(e1) or red(e2)):
            continue
        a, b, c = patch.triangle_vertices[t]
        g0 = bond[:, :, None] * np.ones(n, dtype=np.int64)[None, None, :]  # h_a h_b^-1
        g1 = (bond[None, :, :] * np.ones(n, dtype=np.int64)[:, None, None])  # h_b h_c^-1
        g2 = (bond[:, None, :] * np.ones(n, dtype=np.int64)[None, :, None])  # h_a h_c^-1
        if red(e0):
            g0 = m[g, g0]
        if red(e1):
            g1 = m[g, g1]
        if red(e2):
            g2 = m[g, g2]
        operands.append((m[g0, g1] == g2).astype(np.int64))
        subs.append(letters[a] + letters[b] + letters[c])
    cent = np.zeros(n, dtype=np.int64)
    cent[list(G.centralizer(g))] = 1
    for e in mask_to_indices(centraliser_mask):
        s, t = patch.edges[e]
        operands.append(cent[bond])
        subs.append(letters[s] + letters[t])
    total = n ** patch.n_vertices
    if not operands:
        return total, total
    used = sorted(set("".join(subs)))
    free_vertices = patch.n_vertices - len(used)
    expr = ",".join(subs) + "->"
    path = np.einsum_path(expr, *operands, optimize="greedy")[0]
    val = np.einsum(expr, *operands, optimize=path)
    return int(val) * n ** free_vertices, total


def overlap_bruteforce(L: PatchLoop, G: GroupTable, g, method: str = "auto") -> Fraction:
    """<0| prod_{b in L} X_g,b |0> as an exact rational."""
    g = _check_involution(G, g)
    patch = L.patch
    if method == "auto":
        method = "enumerate" if G.order ** len(patch.free_edges) <= 2_000_000 else "contract"
    counter = {"enumerate": count_enumerate, "contract": count_contract}[method]
    num, den = counter(patch, G, g, red_mask=L.mask)
    return Fraction(num, den)


def projector_overlap(patch: FluxFreePatch, G: GroupTable, g, bonds_mask: int,
                      method: str = "auto") -> Fraction:
    """<0| prod_b P_g,b |0>: probability that the given bonds lie in the centraliser."""
    g = _check_involution(G, g)
    if method == "auto":
        method = "enumerate" if G.order ** len(patch.free_edges) <= 2_000_000 else "contract"
    counter = {"enumerate": count_enumerate, "contract": count_contract}[method]
    num, den = counter(patch, G, g, centraliser_mask=bonds_mask)
    return Fraction(num, den)


def closed_loops(patch: FluxFreePatch, limit: int | None = None) -> list:
    """All red loops encircling non-empty sets of interior vertices."""
    inner = patch.interior_vertices()
    out = []
    for bits in product((0, 1), repeat=len(inner)):
        S = [v for v, b in zip(inner, bits) if b]
        if S:
            out.append(vertex_loop(patch, S))
        if limit is not None and len(out) >= limit:
            break
    return out


# ---------------------------------------------------------------------------
# loop-model parameters


def qd_purity_params(G: GroupTable, g, p: float) -> tuple:
    """(t, N) of the square-lattice loop model describing tr(rho^2)."""
    if not 0 <= p <= 0.5:
        raise ValueError("p must lie in [0, 1/2]")
    d = G.class_size(g)
    return (p - p * p) / ((p * p - p + 0.5) * d * d), d * d


def qd_max_decoherence_params(G: GroupTable, g) -> tuple:
    """(t, N, regime) of the loop model for the largest eigenvalue at p = 1/2."""
    _check_involution(G, g)
    d = G.class_size(g)
    regime = "critical" if d == 2 else ("short-loop" if d >= 3 else "abelian")
    return 1.0 / d, d, regime


__all__ = [
    "BranchingError", "OpenChainError", "FluxFreePatch", "PatchLoop", "build_patch",
    "closed_loops", "count_contract", "count_enumerate", "cycle_rank", "overlap_bruteforce",
    "overlap_closed_form", "patch_shadow", "projector_overlap", "qd_max_decoherence_params",
    "qd_purity_params", "red_triangle_counts", "vertex_loop",
]
