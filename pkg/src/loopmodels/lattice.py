"""Periodic lattices and loop configurations with exact topological bookkeeping.

Conventions
-----------
Cells are indexed row-major, ``cell = j * lx + i`` with ``0 <= i < lx`` and
``0 <= j < ly``.  Per cell the objects are stored in a fixed sublattice order:

* square:     vertex ``c``; edges ``2c`` (horizontal, i -> i+1) and ``2c+1``
              (vertical, j -> j+1); plaquette ``c``.
* triangular: vertex ``c``; edges ``3c`` (i -> i+1), ``3c+1`` (j -> j+1) and
              ``3c+2`` (diagonal, (i,j) -> (i+1,j+1)); faces ``2c`` (lower-right
              triangle) and ``2c+1`` (upper-left triangle).  This is the square
              lattice with one diagonal per square.
* honeycomb:  vertices ``2c`` (A) and ``2c+1`` (B); edges ``3c + k`` for the
              x, y, z links of the B site of the cell, oriented A -> B::

                  x: A(i,j) - B(i,j)
                  y: A(i+1,j) - B(i,j)
                  z: A(i,j+1) - B(i,j)

              plaquette ``c`` is the hexagon B(i,j), A(i+1,j), B(i+1,j),
              A(i+1,j+1), B(i,j+1), A(i,j+1).

Edge orientation is fixed as listed; it only matters for the Majorana and
quantum-double sign bookkeeping.

A ``super-honeycomb-embedding`` lattice is a honeycomb torus with brick-wall
identification (j + ly ~ j with a shift of ly/2 cells along x).  Hexagons
are 3-coloured by ``(i - j) mod 3``; colour-0 hexagons are removed and become
the faces of a coarser honeycomb whose vertices are the remaining hexagons and
whose edges are the links joining two remaining hexagons.  Every A site owns
exactly one such link, so the edges of the coarse lattice are in one-to-one
correspondence with the A sublattice.  LoopConfigs of this kind live on the
coarse lattice; ``lattice.embedding`` keeps the map back to the honeycomb.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

KINDS = ("honeycomb", "square", "triangular", "super-honeycomb-embedding")

_A1 = np.array([1.0, 0.0])
_A2 = np.array([0.5, np.sqrt(3.0) / 2.0])
_DELTA = (_A1 + _A2) / 3.0


class LatticeError(ValueError):
    pass


def _mask_from_indices(indices) -> int:
    m = 0
    for e in indices:
        m ^= 1 << int(e)
    return m


def mask_to_indices(mask: int) -> np.ndarray:
    if mask == 0:
        return np.zeros(0, dtype=np.int64)
    nbytes = (mask.bit_length() + 7) // 8
    bits = np.unpackbits(np.frombuffer(mask.to_bytes(nbytes, "little"), np.uint8), bitorder="little")
    return np.flatnonzero(bits).astype(np.int64)


@dataclass(frozen=True)
class SuperEmbedding:
    """Map from the coarse (super-honeycomb) lattice to its parent honeycomb."""

    honeycomb: "LatticeTorus"
    hexagon_of_vertex: np.ndarray  # coarse vertex -> kept hexagon
    a_site_of_edge: np.ndarray  # coarse edge -> A site carrying the decohered Pauli
    link_of_edge: np.ndarray  # coarse edge -> honeycomb link crossed by the edge
    pauli_of_edge: np.ndarray  # 0, 1, 2 for sigma^x, sigma^y, sigma^z
    hexagon_of_face: np.ndarray  # coarse face -> removed hexagon at its centre
    face_column: np.ndarray  # x coordinate (in units of a1) of each removed hexagon


@dataclass(frozen=True, eq=False)
class LatticeTorus:
    kind: str
    lx: int
    ly: int
    n_vertices: int
    edges: np.ndarray  # (E, 2) oriented (src, tgt)
    edge_type: np.ndarray  # (E,)
    faces: tuple  # cyclic edge lists (with multiplicity)
    face_vertices: tuple  # cyclic vertex lists
    face_masks: tuple  # odd-multiplicity boundary of each face, as int bitsets
    edge_faces: np.ndarray  # (E, 2)
    positions: np.ndarray  # (V, 2) cartesian positions inside the fundamental domain
    windings: tuple  # two reference non-contractible cycles (int bitsets)
    embedding: SuperEmbedding | None = None
    twist: int = 0
    _vertex_edges: tuple = field(default=(), repr=False)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def n_faces(self) -> int:
        return len(self.faces)

    @property
    def descriptor(self) -> dict:
        return {"kind": self.kind, "lx": self.lx, "ly": self.ly}

    def vertex_edges(self, v: int) -> np.ndarray:
        return self._vertex_edges[v]

    def degree_array(self) -> np.ndarray:
        return np.array([len(x) for x in self._vertex_edges])

    def boundary_matrix(self) -> np.ndarray:
        """E x F matrix over GF(2) of the reduced face boundaries."""
        B = np.zeros((self.n_edges, self.n_faces), dtype=np.uint8)
        for f, m in enumerate(self.face_masks):
            B[mask_to_indices(m), f] = 1
        return B

    def __repr__(self) -> str:
        return (f"LatticeTorus({self.kind}, {self.lx}x{self.ly}, V={self.n_vertices}, "
                f"E={self.n_edges}, F={self.n_faces})")


# ---------------------------------------------------------------------------
# construction


def _finish(kind, lx, ly, n_vertices, edges, edge_type, faces, face_vertices, positions,
            windings, embedding=None, twist=0) -> LatticeTorus:
    edges = np.asarray(edges, dtype=np.int64)
    E = len(edges)
    face_masks = tuple(_mask_from_indices(f) for f in faces)
    edge_faces = -np.ones((E, 2), dtype=np.int64)
    fill = np.zeros(E, dtype=np.int64)
    for fi, f in enumerate(faces):
        for e in f:
            if fill[e] >= 2:
                raise LatticeError(f"edge {e} borders more than two faces")
            edge_faces[e, fill[e]] = fi
            fill[e] += 1
    if np.any(fill != 2):
        raise LatticeError("every edge must border exactly two faces")
    vertex_edges = [[] for _ in range(n_vertices)]
    for e, (a, b) in enumerate(edges):
        vertex_edges[a].append(e)
        vertex_edges[b].append(e)
    return LatticeTorus(
        kind=kind, lx=lx, ly=ly, n_vertices=n_vertices, edges=edges,
        edge_type=np.asarray(edge_type, dtype=np.int64),
        faces=tuple(np.asarray(f, dtype=np.int64) for f in faces),
        face_vertices=tuple(np.asarray(f, dtype=np.int64) for f in face_vertices),
        face_masks=face_masks, edge_faces=edge_faces,
        positions=np.asarray(positions, dtype=float), windings=tuple(windings),
        embedding=embedding, twist=twist,
        _vertex_edges=tuple(np.asarray(v, dtype=np.int64) for v in vertex_edges),
    )


def _square(lx, ly):
    cell = lambda i, j: (j % ly) * lx + (i % lx)
    edges, etype, faces, fverts, pos = [], [], [], [], []
    for j in range(ly):
        for i in range(lx):
            c = cell(i, j)
            edges += [(c, cell(i + 1, j)), (c, cell(i, j + 1))]
            etype += [0, 1]
            pos.append((i, j))
    for j in range(ly):
        for i in range(lx):
            faces.append([2 * cell(i, j), 2 * cell(i + 1, j) + 1, 2 * cell(i, j + 1), 2 * cell(i, j) + 1])
            fverts.append([cell(i, j), cell(i + 1, j), cell(i + 1, j + 1), cell(i, j + 1)])
    wx = _mask_from_indices(2 * cell(i, 0) for i in range(lx))
    wy = _mask_from_indices(2 * cell(0, j) + 1 for j in range(ly))
    return _finish("square", lx, ly, lx * ly, edges, etype, faces, fverts, pos, (wx, wy))


def _triangular(lx, ly):
    cell = lambda i, j: (j % ly) * lx + (i % lx)
    edges, etype, faces, fverts, pos = [], [], [], [], []
    for j in range(ly):
        for i in range(lx):
            c = cell(i, j)
            edges += [(c, cell(i + 1, j)), (c, cell(i, j + 1)), (c, cell(i + 1, j + 1))]
            etype += [0, 1, 2]
            pos.append((i, j))
    for j in range(ly):
        for i in range(lx):
            c = cell(i, j)
            faces.append([3 * c, 3 * cell(i + 1, j) + 1, 3 * c + 2])
            fverts.append([c, cell(i + 1, j), cell(i + 1, j + 1)])
            faces.append([3 * c + 2, 3 * cell(i, j + 1), 3 * c + 1])
            fverts.append([c, cell(i + 1, j + 1), cell(i, j + 1)])
    wx = _mask_from_indices(3 * cell(i, 0) for i in range(lx))
    wy = _mask_from_indices(3 * cell(0, j) + 1 for j in range(ly))
    return _finish("triangular", lx, ly, lx * ly, edges, etype, faces, fverts, pos, (wx, wy))


def _honeycomb(lx, ly, twist=0, kind="honeycomb"):
    def cell(i, j):
        k = j // ly
        return (j - k * ly) * lx + (i + k * twist) % lx

    A = lambda i, j: 2 * cell(i, j)
    B = lambda i, j: 2 * cell(i, j) + 1
    X = lambda i, j: 3 * cell(i, j)
    Y = lambda i, j: 3 * cell(i, j) + 1
    Z = lambda i, j: 3 * cell(i, j) + 2
    edges, etype, faces, fverts = [], [], [], []
    pos = np.zeros((2 * lx * ly, 2))
    for j in range(ly):
        for i in range(lx):
            edges += [(A(i, j), B(i, j)), (A(i + 1, j), B(i, j)), (A(i, j + 1), B(i, j))]
            etype += [0, 1, 2]
            R = i * _A1 + j * _A2
            pos[A(i, j)] = R
            pos[B(i, j)] = R + _DELTA
    for j in range(ly):
        for i in range(lx):
            faces.append([Y(i, j), X(i + 1, j), Z(i + 1, j), Y(i, j + 1), X(i, j + 1), Z(i, j)])
            fverts.append([B(i, j), A(i + 1, j), B(i + 1, j), A(i + 1, j + 1), B(i, j + 1), A(i, j + 1)])
    wx = _mask_from_indices([X(i, 0) for i in range(lx)] + [Y(i, 0) for i in range(lx)])
    wy_idx = [X(0, j) for j in range(ly)] + [Z(0, j) for j in range(ly)]
    if twist % lx:
        wy_idx += [X(i, 0) for i in range(twist % lx, lx)] + [Y(i, 0) for i in range(twist % lx, lx)]
    wy = _mask_from_indices(wy_idx)
    return _finish(kind, lx, ly, 2 * lx * ly, edges, etype, faces, fverts, pos, (wx, wy), twist=twist)


def _super_honeycomb(lx, ly):
    hc = _honeycomb(lx, ly, twist=ly // 2)
    colour = np.array([((c % lx) - (c // lx)) % 3 for c in range(lx * ly)])
    # a proper 3-colouring must survive the periodic identifications
    for e in range(hc.n_edges):
        f0, f1 = hc.edge_faces[e]
        if colour[f0] == colour[f1]:
            raise LatticeError("hexagon 3-colouring is inconsistent with these dimensions")
    kept = np.flatnonzero(colour != 0)
    removed = np.flatnonzero(colour == 0)
    vid = -np.ones(lx * ly, dtype=np.int64)
    vid[kept] = np.arange(len(kept))
    # coarse edges: one per A site, the link whose two hexagons are both kept
    a_site, link, pauli, cedges = [], [], [], []
    for c in range(lx * ly):
        a = 2 * c
        own = [e for e in hc.vertex_edges(a) if colour[hc.edge_faces[e, 0]] and colour[hc.edge_faces[e, 1]]]
        if len(own) != 1:
            raise LatticeError("super-honeycomb construction failed")
        e = own[0]
        a_site.append(a)
        link.append(e)
        pauli.append(int(hc.edge_type[e]))
        f0, f1 = hc.edge_faces[e]
        cedges.append((vid[f0], vid[f1]))
    link = np.array(link)
    edge_of_link = -np.ones(hc.n_edges, dtype=np.int64)
    edge_of_link[link] = np.arange(len(link))
    # coarse faces: the six spokes around a removed hexagon, in cyclic order
    faces, fverts = [], []
    for r in removed:
        verts = hc.face_vertices[r]
        spokes = []
        for v in verts:
            ext = [e for e in hc.vertex_edges(v) if r not in hc.edge_faces[e]]
            spokes.append(edge_of_link[ext[0]])
        faces.append(spokes)
        # the coarse vertices are the hexagons adjacent to r, between consecutive spokes
        fv = []
        for e in spokes:
            fv += [v for v in cedges[e] if v not in fv]
        fverts.append(fv)
    hpos = np.array([hc.positions[hc.face_vertices[f]].mean(axis=0) for f in range(hc.n_faces)])
    # x coordinate of a removed hexagon, with the vertical direction of the brick wall
    col = np.array([((r % lx) + (r // lx) * 0.5) % lx for r in removed])
    emb = SuperEmbedding(
        honeycomb=hc, hexagon_of_vertex=kept, a_site_of_edge=np.array(a_site),
        link_of_edge=link, pauli_of_edge=np.array(pauli), hexagon_of_face=removed,
        face_column=col,
    )
    lat = _finish("super-honeycomb-embedding", lx, ly, len(kept), cedges, pauli, faces, fverts,
                  hpos[kept], (0, 0), embedding=emb, twist=ly // 2)
    w = _noncontractible_basis(lat)
    return LatticeTorus(**{**lat.__dict__, "windings": w})


def build_lattice(kind: str, lx: int, ly: int) -> LatticeTorus:
    """Build a periodic lattice of ``lx`` x ``ly`` cells."""
    if kind not in KINDS:
        raise LatticeError(f"unknown lattice kind {kind!r}; expected one of {KINDS}")
    if int(lx) != lx or int(ly) != ly or lx < 1 or ly < 1:
        raise LatticeError(f"lattice dimensions must be positive integers, got {lx}x{ly}")
    lx, ly = int(lx), int(ly)
    if kind == "square":
        return _square(lx, ly)
    if kind == "triangular":
        return _triangular(lx, ly)
    if kind == "honeycomb":
        return _honeycomb(lx, ly)
    if lx % 6 or ly % 2:
        raise LatticeError(
            f"super-honeycomb-embedding needs lx divisible by 6 and ly even, got {lx}x{ly}")
    return _super_honeycomb(lx, ly)


# ---------------------------------------------------------------------------
# GF(2) helpers


def _reduce(vec: int, basis: dict) -> int:
    while vec:
        top = vec.bit_length() - 1
        if top not in basis:
            return vec
        vec ^= basis[top]
    return 0


def _insert(vec: int, basis: dict) -> bool:
    vec = _reduce(vec, basis)
    if vec == 0:
        return False
    basis[vec.bit_length() - 1] = vec
    return True


def boundary_span(lattice: LatticeTorus) -> dict:
    basis: dict = {}
    for m in lattice.face_masks:
        _insert(m, basis)
    return basis


def cycle_basis(lattice: LatticeTorus) -> list:
    """Fundamental cycles of a spanning forest (a basis of the even subgraphs)."""
    parent = list(range(lattice.n_vertices))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    tree = [[] for _ in range(lattice.n_vertices)]
    extra = []
    for e, (a, b) in enumerate(lattice.edges):
        ra, rb = find(a), find(b)
        if ra == rb:
            extra.append(e)
        else:
            parent[ra] = rb
            tree[a].append((b, e))
            tree[b].append((a, e))

    def path(a, b):
        # BFS in the forest
        prev = {a: None}
        queue = [a]
        while queue:
            x = queue.pop()
            if x == b:
                break
            for y, e in tree[x]:
                if y not in prev:
                    prev[y] = (x, e)
                    queue.append(y)
        m, x = 0, b
        while prev[x] is not None:
            x, e = prev[x]
            m ^= 1 << e
        return m

    return [path(*lattice.edges[e]) ^ (1 << e) for e in extra]


def _noncontractible_basis(lattice: LatticeTorus) -> tuple:
    span = boundary_span(lattice)
    out = []
    for c in sorted(cycle_basis(lattice), key=lambda m: m.bit_count()):
        if _insert(c, span):
            out.append(c)
        if len(out) == 2:
            break
    while len(out) < 2:
        out.append(0)
    return tuple(out)


def homology_class(lattice: LatticeTorus, mask: int) -> tuple:
    """Winding parities of a closed configuration w.r.t. the reference cycles.

    Returns (a, b) with mask = boundary + a*w0 + b*w1.
    """
    span = boundary_span(lattice)
    if _reduce(mask, span) == 0:
        return (0, 0)
    w0, w1 = lattice.windings
    for a, b in ((1, 0), (0, 1), (1, 1)):
        if _reduce(mask ^ (w0 if a else 0) ^ (w1 if b else 0), span) == 0:
            return (a, b)
    raise LatticeError("configuration is not closed")


# ---------------------------------------------------------------------------
# loop configurations


@dataclass(frozen=True)
class LoopConfig:
    lattice: LatticeTorus = field(compare=False, hash=False)
    mask: int = 0

    @classmethod
    def from_edges(cls, lattice: LatticeTorus, edges: Sequence[int]) -> "LoopConfig":
        return cls(lattice, _mask_from_indices(edges))

    @property
    def edges(self) -> np.ndarray:
        return mask_to_indices(self.mask)

    @property
    def length(self) -> int:
        return self.mask.bit_count()

    def __len__(self) -> int:
        return self.length

    def __xor__(self, other: "LoopConfig") -> "LoopConfig":
        return LoopConfig(self.lattice, self.mask ^ other.mask)

    def odd_vertices(self) -> np.ndarray:
        par = np.zeros(self.lattice.n_vertices, dtype=np.int64)
        e = self.edges
        if len(e):
            ends = self.lattice.edges[e].ravel()
            np.add.at(par, ends, 1)
        return np.flatnonzero(par % 2)

    def is_closed(self) -> bool:
        return len(self.odd_vertices()) == 0

    def to_json(self) -> str:
        return json.dumps({"lattice": self.lattice.descriptor, "edges": self.edges.tolist()})

    @classmethod
    def from_json(cls, text: str, lattice: LatticeTorus | None = None) -> "LoopConfig":
        d = json.loads(text)
        desc = d["lattice"]
        if lattice is None:
            lattice = build_lattice(desc["kind"], desc["lx"], desc["ly"])
        elif lattice.descriptor != desc:
            raise LatticeError(f"descriptor {desc} does not match {lattice.descriptor}")
        return cls.from_edges(lattice, d["edges"])


@dataclass(frozen=True)
class PlaquetteSpins:
    lattice: LatticeTorus = field(compare=False, hash=False)
    sigma: tuple = ()

    @classmethod
    def zeros(cls, lattice):
        return cls(lattice, (0,) * lattice.n_faces)

    @classmethod
    def from_faces(cls, lattice, faces):
        s = [0] * lattice.n_faces
        for f in faces:
            s[f] ^= 1
        return cls(lattice, tuple(s))


def boundary(spins: PlaquetteSpins) -> LoopConfig:
    m = 0
    for f, s in enumerate(spins.sigma):
        if s:
            m ^= spins.lattice.face_masks[f]
    return LoopConfig(spins.lattice, m)


def _require_closed(L: LoopConfig):
    if not L.is_closed():
        raise LatticeError("loop configuration is not closed (odd-degree vertices present)")


def _component_stats(lattice: LatticeTorus, edges: np.ndarray) -> tuple:
    """(number of touched vertices, number of connected components)."""
    if len(edges) == 0:
        return 0, 0
    ends = lattice.edges[edges]
    verts, inv = np.unique(ends.ravel(), return_inverse=True)
    parent = list(range(len(verts)))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    comps = len(verts)
    inv = inv.reshape(-1, 2)
    for a, b in inv:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb
            comps -= 1
    return len(verts), comps


def components(L: LoopConfig) -> int:
    _require_closed(L)
    return _component_stats(L.lattice, L.edges)[1]


def graph_cyclomatic_number(lattice: LatticeTorus, mask: int) -> int:
    """Cycle rank E - V + components of an arbitrary edge subset."""
    e = mask_to_indices(mask)
    v, c = _component_stats(lattice, e)
    return len(e) - v + c


def cyclomatic_number(L: LoopConfig) -> int:
    _require_closed(L)
    return graph_cyclomatic_number(L.lattice, L.mask)


def enumerate_loop_configs(lattice: LatticeTorus, winding: bool = False, dedup: bool = False,
                           cap: int = 24) -> Iterator[LoopConfig]:
    """Stream the loop configurations generated by plaquette spins.

    With ``dedup`` every distinct edge set is produced once; otherwise one
    configuration per plaquette assignment (times four winding sectors when
    ``winding`` is set) is produced in Gray-code order.
    """
    F = lattice.n_faces
    if F > cap:
        raise LatticeError(f"{F} plaquettes exceed the enumeration cap {cap}")
    shifts = [0]
    if winding:
        w0, w1 = lattice.windings
        shifts = [0, w0, w1, w0 ^ w1]
    seen = set()
    m = 0
    masks = lattice.face_masks
    for k in range(1 << F):
        if k:
            m ^= masks[(k & -k).bit_length() - 1]
        for s in shifts:
            x = m ^ s
            if dedup:
                if x in seen:
                    continue
                seen.add(x)
            yield LoopConfig(lattice, x)


def interior_faces(L: LoopConfig) -> np.ndarray | None:
    """Plaquette set whose boundary is L, or None when L winds the torus.

    Of the two complementary fillings the smaller one is returned (ties go to
    the lexicographically smaller index set).
    """
    lat = L.lattice
    sigma = -np.ones(lat.n_faces, dtype=np.int64)
    in_L = np.zeros(lat.n_edges, dtype=np.int64)
    in_L[L.edges] = 1
    # adjacency across every edge; self-adjacent faces are consistent by construction
    nbrs = [[] for _ in range(lat.n_faces)]
    for e, (f0, f1) in enumerate(lat.edge_faces):
        nbrs[f0].append((f1, e))
        nbrs[f1].append((f0, e))
    sigma[0] = 0
    stack = [0]
    while stack:
        f = stack.pop()
        for g, e in nbrs[f]:
            val = sigma[f] ^ in_L[e]
            if f == g:
                if in_L[e] and lat.face_masks[f] >> int(e) & 1:
                    return None
                continue
            if sigma[g] < 0:
                sigma[g] = val
                stack.append(g)
            elif sigma[g] != val:
                return None
    ones = np.flatnonzero(sigma == 1)
    zeros = np.flatnonzero(sigma == 0)
    if len(zeros) < len(ones) or (len(zeros) == len(ones) and tuple(zeros) < tuple(ones)):
        ones = zeros
    m = 0
    for f in ones:
        m ^= lat.face_masks[f]
    if m != L.mask:
        return None
    return ones


# ---------------------------------------------------------------------------
# quantum-double shadow


class BranchingError(LatticeError):
    pass


class OpenChainError(LatticeError):
    pass


def triangle_shadow_bond(edges: np.ndarray, tri: Sequence[int], red: Sequence[int]) -> int | None:
    """Bond of a triangle that must commute with g when two of its bonds carry X_g.

    ``X_g`` acts as left multiplication on the oriented bond variable.  Walking
    around the triangle, the flux condition picks up ``g`` to the left of every
    forward bond and to the right of every backward bond; the condition survives
    iff the word between the two ``g`` letters lies in the centraliser.  An
    empty word (both bonds leave the same vertex) imposes nothing.
    """
    e0, e1, e2 = tri
    walk = []  # (edge, forward?)
    v0 = edges[e0][0]
    v = v0
    remaining = [e0, e1, e2]
    while remaining:
        for e in remaining:
            s, t = edges[e]
            if s == v:
                walk.append((e, True))
                v = t
                remaining.remove(e)
                break
            if t == v:
                walk.append((e, False))
                v = s
                remaining.remove(e)
                break
        else:  # pragma: no cover - triangles are always closed walks
            raise LatticeError("face is not a closed walk")
    # letters: for forward bond "g h", for backward bond "h^-1 g"
    letters = []
    for e, fwd in walk:
        if e in red:
            letters += [("g", None), ("h", e)] if fwd else [("h", e), ("g", None)]
        else:
            letters.append(("h", e))
    gpos = [k for k, x in enumerate(letters) if x[0] == "g"]
    between = [x[1] for x in letters[gpos[0] + 1:gpos[1]]]
    outside = [x[1] for x in letters[gpos[1] + 1:] + letters[:gpos[0]]]
    # the word on either side is in the centraliser iff the other side is
    for side in (between, outside):
        if len(side) == 0:
            return None
        if len(side) == 1:
            return side[0]
    raise LatticeError("unreachable triangle configuration")  # pragma: no cover


def shadow_mask(edges: np.ndarray, triangles: Sequence[Sequence[int]], red_mask: int) -> int:
    """Set of bonds constrained to the centraliser by a closed red flux loop."""
    out = 0
    for tri in triangles:
        red = [e for e in tri if red_mask >> int(e) & 1]
        if len(red) == 3:
            raise BranchingError("three flux segments meet inside one triangle")
        if len(red) == 1:
            raise OpenChainError("flux chain ends inside a triangle")
        if len(red) == 2:
            b = triangle_shadow_bond(edges, tri, red)
            if b is not None:
                out |= 1 << int(b)
    return out


def shadow(L: LoopConfig) -> LoopConfig:
    """Green shadow on the square lattice of a red loop on the triangular lattice.

    ``L`` is given as a set of triangular-lattice bonds (each bond is crossed by
    one edge of the dual honeycomb).  The result lives on the square lattice of
    the same dimensions: triangular bond ``3c`` maps to square bond ``2c`` and
    ``3c+1`` to ``2c+1``.  Diagonals never appear in the shadow.
    """
    lat = L.lattice
    if lat.kind != "triangular":
        raise LatticeError("shadow expects a loop given on the triangular lattice")
    m = shadow_mask(lat.edges, lat.faces, L.mask)
    sq = build_lattice("square", lat.lx, lat.ly)
    out = 0
    for e in mask_to_indices(m):
        c, k = divmod(int(e), 3)
        if k == 2:  # pragma: no cover - guaranteed by the acyclic orientation
            raise LatticeError("diagonal bond in shadow")
        out |= 1 << (2 * c + k)
    return LoopConfig(sq, out)


def cocycle(lattice: LatticeTorus, parities: tuple) -> int:
    """Edge set crossing no face an odd number of times, with prescribed
    intersection parities against the two reference winding cycles."""
    rows = []  # (row bitmask, rhs)
    for m in lattice.face_masks:
        rows.append((m, 0))
    for w, b in zip(lattice.windings, parities):
        rows.append((w, int(b) & 1))
    pivots: dict = {}
    for r, b in rows:
        for top in sorted(pivots, reverse=True):
            if r >> top & 1:
                pr, pb = pivots[top]
                r ^= pr
                b ^= pb
        if r == 0:
            if b:
                raise LatticeError("inconsistent cocycle constraints")
            continue
        top = r.bit_length() - 1
        # keep the pivot rows fully reduced
        for k, (pr, pb) in list(pivots.items()):
            if pr >> top & 1:
                pivots[k] = (pr ^ r, pb ^ b)
        pivots[top] = (r, b)
    sol = 0
    for top, (r, b) in pivots.items():
        if b:
            sol |= 1 << top
    return sol
