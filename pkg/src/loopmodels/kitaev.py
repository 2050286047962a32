"""Gaussian-fermion evaluation of loop weights for the gapped Kitaev honeycomb phase.

Spins are written as ``sigma^a_j = i b^a_j c_j`` and the gauge ``u_jk = i b_j b_k``
is fixed on every link (j in sublattice A).  A link bilinear then reads
``sigma^a_j sigma^a_k = -i u_jk c_j c_k``.  The quadratic Hamiltonian is
stored as a real antisymmetric matrix ``M`` with ``H = (i/4) c^T M c``.

Boundary sectors are gauge classes: ``u = -1`` on a cocycle whose parity
against the reference x- and y-winding cycles of the honeycomb selects
antiperiodic (odd) or periodic (even) fermion hopping in that direction.
Both nearest- and next-nearest-neighbour terms inherit the same link
variables, so the flux through every hexagon stays zero in every sector.

Majorana ``c_v`` has the index of honeycomb vertex ``v``.
"""
from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass

import numpy as np

from .lattice import (
    LatticeError, LatticeTorus, LoopConfig, build_lattice, cocycle, interior_faces,
    mask_to_indices,
)
from .pfaffian import pfaffian, pfaffian_abs_log

log = logging.getLogger(__name__)

SECTORS = ("periodic", "antiperiodic")


def _eps(a: int, b: int, c: int) -> int:
    return {(0, 1, 2): 1, (1, 2, 0): 1, (2, 0, 1): 1,
            (0, 2, 1): -1, (2, 1, 0): -1, (1, 0, 2): -1}[(a, b, c)]


def _sector_bits(sector) -> tuple:
    out = []
    for s in sector:
        if s not in SECTORS:
            raise ValueError(f"unknown boundary sector {s!r}")
        out.append(int(s == "antiperiodic"))
    return tuple(out)


@dataclass(frozen=True, eq=False)
class MajoranaHamiltonian:
    lattice: LatticeTorus  # honeycomb
    J: float
    kappa: float
    sector: tuple
    u: np.ndarray  # +-1 per link
    M: np.ndarray  # real antisymmetric, H = (i/4) c^T M c

    @property
    def size(self) -> int:
        return self.M.shape[0]


@dataclass(frozen=True, eq=False)
class CovarianceMatrix:
    G: np.ndarray
    energy: float
    gap: float

    def check(self, tol: float = 1e-8) -> None:
        G = self.G
        if np.max(np.abs(G + G.T)) > 1e-10:
            raise AssertionError("covariance is not antisymmetric")
        if np.max(np.abs(G @ G + np.eye(len(G)))) > tol:
            raise AssertionError("G^2 != -1: not a pure Gaussian state")


@dataclass(frozen=True)
class MembraneWeight:
    mask: int
    interior: tuple
    value: float
    sign_sigma: int
    pfaffian_abs: float
    log_abs: float


def honeycomb_for(lx: int, ly: int, twist: int | None = None) -> LatticeTorus:
    """Brick-wall honeycomb torus used throughout this module (twist ly/2)."""
    from .lattice import _honeycomb
    return _honeycomb(lx, ly, twist=ly // 2 if twist is None else twist)


def build_hamiltonian(lx: int, ly: int, J: float = 1.0, kappa: float = 0.2,
                      sector=("antiperiodic", "periodic"),
                      lattice: LatticeTorus | None = None) -> MajoranaHamiltonian:
    if lattice is None:
        if lx % 2 or ly % 2:
            raise LatticeError(f"Kitaev torus needs even dimensions, got {lx}x{ly}")
        lattice = honeycomb_for(lx, ly)
    lat = lattice
    bits = _sector_bits(sector)
    S = cocycle(lat, bits)
    E = lat.n_edges
    u = np.ones(E)
    u[mask_to_indices(S)] = -1.0
    n = lat.n_vertices
    M = np.zeros((n, n))

    def add(j, k, r):  # term i r c_j c_k
        M[j, k] += 2 * r
        M[k, j] -= 2 * r

    # J sigma sigma = -i J u c_a c_b
    for e, (a, b) in enumerate(lat.edges):
        add(a, b, -J * u[e])
    if kappa:
        for k in range(n):
            inc = lat.vertex_edges(k)
            for x in range(3):
                for y in range(x + 1, 3):
                    e1, e2 = inc[x], inc[y]
                    j = lat.edges[e1][0] + lat.edges[e1][1] - k
                    l = lat.edges[e2][0] + lat.edges[e2][1] - k
                    al, ga = int(lat.edge_type[e1]), int(lat.edge_type[e2])
                    be = 3 - al - ga
                    s1 = 1 if j % 2 == 0 else -1  # c_j c_k ordering vs A-first
                    s2 = 1 if k % 2 == 0 else -1
                    add(j, l, kappa * _eps(al, ga, be) * u[e1] * u[e2] * s1 * s2)
    return MajoranaHamiltonian(lat, float(J), float(kappa), tuple(sector), u, M)


def ground_covariance(H: MajoranaHamiltonian, gap_tol: float = 1e-10) -> CovarianceMatrix:
    """G = i U sign(E) U^dagger from the spectrum of the Hermitian matrix i M."""
    E, U = np.linalg.eigh(1j * H.M)
    gap = float(np.min(np.abs(E)))
    if gap < gap_tol:
        warnings.warn(f"gapless sector {H.sector}: min |E| = {gap:.2e}", RuntimeWarning)
    G = (1j * (U * np.sign(E)) @ U.conj().T).real
    G = 0.5 * (G - G.T)
    return CovarianceMatrix(G, energy=-0.25 * float(np.sum(np.abs(E))), gap=gap)


def sector_energies(lx: int, ly: int, J: float = 1.0, kappa: float = 0.2) -> dict:
    out = {}
    for sx in SECTORS:
        for sy in SECTORS:
            H = build_hamiltonian(lx, ly, J, kappa, (sx, sy))
            E = np.linalg.eigvalsh(1j * H.M)
            out[(sx, sy)] = -0.25 * float(np.sum(np.abs(E)))
    return out


def ground_state(lx: int, ly: int, J: float = 1.0, kappa: float = 0.2, sector="auto"):
    """(H, G) in the requested sector, or in the lowest-energy one for ``auto``."""
    if sector == "auto":
        en = sector_energies(lx, ly, J, kappa)
        sector = min(en, key=en.get)
    H = build_hamiltonian(lx, ly, J, kappa, sector)
    return H, ground_covariance(H)


# ---------------------------------------------------------------------------
# membranes on the super-honeycomb


@dataclass(frozen=True, eq=False)
class MembraneData:
    """Per coarse face: the Majorana pairs (A site, B site) and link signs of its membrane."""

    super_lattice: LatticeTorus
    pairs: np.ndarray  # (F, 3, 2)
    links: np.ndarray  # (F, 3)


def membrane_data(super_lattice: LatticeTorus) -> MembraneData:
    emb = super_lattice.embedding
    if emb is None:
        raise LatticeError("membrane weights need a super-honeycomb-embedding lattice")
    hc = emb.honeycomb
    F = super_lattice.n_faces
    pairs = np.zeros((F, 3, 2), dtype=np.int64)
    links = np.zeros((F, 3), dtype=np.int64)
    for f, r in enumerate(emb.hexagon_of_face):
        bs = [v for v in hc.face_vertices[r] if v % 2 == 1]
        for k, v in enumerate(bs):
            e = [e for e in hc.vertex_edges(v) if r not in hc.edge_faces[e]][0]
            a = int(hc.edges[e][0])
            pairs[f, k] = (a, v)
            links[f, k] = e
    return MembraneData(super_lattice, pairs, links)


def _perm_sign(seq: np.ndarray) -> int:
    """Sign of the permutation sorting ``seq`` (distinct entries)."""
    order = np.argsort(seq, kind="stable")
    seen = np.zeros(len(seq), dtype=bool)
    sign = 1
    for s in range(len(seq)):
        if seen[s]:
            continue
        L = 0
        x = s
        while not seen[x]:
            seen[x] = True
            x = order[x]
            L += 1
        if L % 2 == 0:
            sign = -sign
    return sign


def membrane_weight(G, L: LoopConfig, md: MembraneData | None = None,
                    u: np.ndarray | None = None, faces=None) -> MembraneWeight:
    """f(L) = sigma(L) Pf(G|interior) for a contractible configuration.

    ``faces`` overrides the interior (used for strips bounded by winding loops).
    """
    G = G.G if isinstance(G, CovarianceMatrix) else G
    if md is None:
        md = membrane_data(L.lattice)
    if faces is None:
        faces = interior_faces(L)
        if faces is None:
            raise LatticeError("configuration is not contractible; use double_wilson_estimator")
    faces = np.asarray(faces, dtype=np.int64)
    nI = len(faces)
    if nI == 0:
        return MembraneWeight(L.mask, (), 1.0, 1, 1.0, 0.0)
    seq = md.pairs[faces].reshape(-1)
    idx = np.sort(seq)
    if len(np.unique(idx)) != len(idx):  # pragma: no cover - disjointness is structural
        raise LatticeError("Majorana appears twice in a membrane")
    uprod = 1.0 if u is None else float(np.prod(u[md.links[faces].reshape(-1)]))
    sign = (-1) ** (3 * nI) * int(uprod) * _perm_sign(seq)
    pf = pfaffian(G[np.ix_(idx, idx)])
    val = sign * pf
    la = np.log(abs(pf)) if pf != 0 else -np.inf
    return MembraneWeight(L.mask, tuple(int(f) for f in faces), float(val), int(np.sign(val) or 1),
                          abs(pf), float(la))


def log_abs_membrane(G: np.ndarray, md: MembraneData, faces) -> float:
    """log|Pf(G|interior)| only; the Monte Carlo weight never needs the sign."""
    if len(faces) == 0:
        return 0.0
    idx = np.sort(md.pairs[np.asarray(faces)].reshape(-1))
    return pfaffian_abs_log(G[np.ix_(idx, idx)])


# ---------------------------------------------------------------------------
# weight extraction


def strip_faces(super_lattice: LatticeTorus, x0: float, D: float) -> np.ndarray:
    """Coarse faces whose centre has x-coordinate in [x0, x0 + D) modulo lx."""
    col = super_lattice.embedding.face_column
    rel = (col - x0) % super_lattice.lx
    return np.flatnonzero(rel < D - 1e-9)


@dataclass(frozen=True)
class DoubleWilson:
    lx: int
    ly: int
    D: float
    value: float
    loop_lengths: tuple
    n_faces: int


def double_wilson_estimator(G, super_lattice: LatticeTorus, D: float | None = None,
                            x0: float = 0.0, u: np.ndarray | None = None,
                            xi: float | None = None) -> DoubleWilson:
    """Expectation of two parallel y-winding loops bounding a strip of width D."""
    G = G.G if isinstance(G, CovarianceMatrix) else G
    lat = super_lattice
    D = lat.lx / 2 if D is None else D
    if xi is not None and D < 3 * xi:
        warnings.warn(f"strip width {D} is below 3 correlation lengths ({xi})", RuntimeWarning)
    faces = strip_faces(lat, x0, D)
    md = membrane_data(lat)
    m = 0
    for f in faces:
        m ^= lat.face_masks[f]
    L = LoopConfig(lat, m)
    w = membrane_weight(G, L, md, u=u, faces=faces)
    lengths = tuple(sorted(_component_lengths(L)))
    return DoubleWilson(lat.lx, lat.ly, float(D), w.value, lengths, len(faces))


def _component_lengths(L: LoopConfig) -> list:
    lat = L.lattice
    edges = [int(e) for e in L.edges]
    parent = {}

    def find(x):
        while parent.setdefault(x, x) != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for e in edges:
        a, b = lat.edges[e]
        parent[find(a)] = find(b)
    out: dict = {}
    for e in edges:
        r = find(lat.edges[e][0])
        out[r] = out.get(r, 0) + 1
    return list(out.values())


def chain_faces(super_lattice: LatticeTorus, n: int, start: tuple = (0, 0)) -> np.ndarray:
    """n coarse faces in a straight row along a1 + a2 (each shares a spoke with the next)."""
    emb = super_lattice.embedding
    hc = emb.honeycomb
    lx, ly = super_lattice.lx, super_lattice.ly
    fid = -np.ones(hc.n_faces, dtype=np.int64)
    fid[emb.hexagon_of_face] = np.arange(len(emb.hexagon_of_face))
    i0, j0 = start
    out = []
    for k in range(n):
        i, j = i0 + k, j0 + k
        w = j // ly
        j -= w * ly
        i = (i + w * hc.twist) % lx
        f = fid[j * lx + i]
        if f < 0:
            raise LatticeError(f"hexagon ({i},{j}) is not a coarse face")
        out.append(f)
    return np.array(out)


@dataclass(frozen=True)
class TensionFit:
    t_int: float
    amplitude: float
    residual: float
    lengths: tuple
    values: tuple


def contractible_tension(G, super_lattice: LatticeTorus, u: np.ndarray | None = None,
                         n_max: int = 8) -> TensionFit:
    """Exponential fit of |f(L)| against |L| for straight chains of 1..n_max coarse faces."""
    md = membrane_data(super_lattice)
    xs, ys = [], []
    for n in range(1, n_max + 1):
        faces = chain_faces(super_lattice, n)
        m = 0
        for f in faces:
            m ^= super_lattice.face_masks[f]
        L = LoopConfig(super_lattice, m)
        w = membrane_weight(G, L, md, u=u, faces=faces)
        xs.append(L.length)
        ys.append(abs(w.value))
    x, y = np.array(xs, float), np.log(ys)
    slope, icpt = np.polyfit(x, y, 1)
    resid = float(np.sqrt(np.mean((y - slope * x - icpt) ** 2)))
    return TensionFit(float(np.exp(slope)), float(np.exp(icpt)), resid, tuple(xs), tuple(ys))


@dataclass(frozen=True)
class WeightExtraction:
    kappa: float
    lx: int
    ly_list: tuple
    N_est: tuple  # W(ly)/sqrt(W(2 ly)) for every ly whose double is available
    t_int: float  # from contractible chains on the largest torus
    t_int_winding: float  # from the ly dependence of sqrt(W)
    fit_residual: float
    loop_length: tuple
    W2: tuple
    flagged: bool

    @property
    def N_mean(self) -> float:
        return float(np.mean(self.N_est))


def extract_loop_weight(lx: int = 24, ly_list=(2, 4, 6, 8, 10, 12), kappa: float = 0.2,
                        J: float = 1.0, sector=("antiperiodic", "periodic"),
                        resid_tol: float = 0.05, chain_max: int = 8) -> WeightExtraction:
    """Loop weight from W(ly)/sqrt(W(2 ly)); tension from contractible chains.

    W(ly) is the double y-winding loop expectation at strip width lx/2; it
    approximates f(single loop)^2, so the ratio cancels the tension.
    """
    W2, lengths = {}, {}
    t_fit = None
    for ly in sorted(set(ly_list)):
        sup = build_lattice("super-honeycomb-embedding", lx, ly)
        H = build_hamiltonian(lx, ly, J, kappa, sector, lattice=sup.embedding.honeycomb)
        C = ground_covariance(H)
        dw = double_wilson_estimator(C, sup, u=H.u)
        W2[ly] = dw.value
        lengths[ly] = dw.loop_lengths[0]
        log.info("ly=%d  W2=%.6g  loop lengths %s", ly, dw.value, dw.loop_lengths)
        if ly == max(ly_list):
            t_fit = contractible_tension(C, sup, u=H.u, n_max=chain_max)
    lys = sorted(W2)
    N = tuple(float(W2[l] / np.sqrt(W2[2 * l])) for l in lys if 2 * l in W2)
    x = np.array([lengths[l] for l in lys], dtype=float)
    y = 0.5 * np.log(np.abs([W2[l] for l in lys]))
    slope = np.polyfit(x, y, 1)[0] if len(x) > 1 else np.nan
    return WeightExtraction(float(kappa), lx, tuple(lys), N, t_fit.t_int, float(np.exp(slope)),
                            t_fit.residual, tuple(lengths[l] for l in lys),
                            tuple(float(W2[l]) for l in lys), t_fit.residual > resid_tol)


def t_ext_from_p(p: float) -> float:
    return 2 * p * (1 - p) / (p * p + (1 - p) ** 2)


# ---------------------------------------------------------------------------
# weights for the Monte Carlo engine


@dataclass(frozen=True, eq=False)
class FermionicWeight:
    """W(L) = t_ext^|L| |f(L)|^power; power 1 samples the deformed wavefunction, 2 the purity."""

    G: np.ndarray
    md: MembraneData
    power: int = 1
    t_ext: float = 1.0

    @property
    def lattice(self) -> LatticeTorus:
        return self.md.super_lattice

    def log_weight_faces(self, faces, length: int) -> float:
        if length and self.t_ext == 0:
            return -np.inf
        lt = length * np.log(self.t_ext) if length else 0.0
        return lt + self.power * log_abs_membrane(self.G, self.md, faces)

    def log_weight_sigma(self, sigma: np.ndarray, length: int) -> float:
        """Weight of the boundary of a plaquette-spin state, using the smaller filling."""
        on = np.flatnonzero(sigma)
        faces = on if 2 * len(on) <= len(sigma) else np.flatnonzero(sigma == 0)
        return self.log_weight_faces(faces, length)

    def log_weight(self, L: LoopConfig) -> tuple:
        faces = interior_faces(L)
        if faces is None:
            raise LatticeError("fermionic weights are defined for contractible configurations only")
        return 1.0, float(self.log_weight_faces(faces, L.length))


def kitaev_weight_model(G, super_lattice: LatticeTorus, variant: str = "wavefunction",
                        t_ext: float = 1.0, p: float | None = None):
    """WeightModel wrapping the membrane weight; the purity variant squares it.

    For the purity variant ``p`` (if given) fixes t_ext = 2p(1-p)/(p^2+(1-p)^2).
    """
    from .weights import WeightModel
    G = G.G if isinstance(G, CovarianceMatrix) else np.asarray(G)
    if variant not in ("wavefunction", "purity"):
        raise ValueError("variant must be 'wavefunction' or 'purity'")
    if p is not None:
        t_ext = t_ext_from_p(p)
    if not 0 <= t_ext <= 1:
        raise ValueError("t_ext must lie in [0, 1]")
    fw = FermionicWeight(G, membrane_data(super_lattice), 1 if variant == "wavefunction" else 2,
                         float(t_ext))
    return WeightModel("fermionic", fermion=fw)


def purity_tension(t_int: float, t_ext: float) -> dict:
    """Effective tension of the squared weight under both conventions in use."""
    return {"t_int*t_ext": t_int * t_ext, "t_int^2*t_ext": t_int ** 2 * t_ext}
