import math

import numpy as np
import pytest
import scipy.sparse as sp
from scipy.sparse.linalg import eigsh

from loopmodels import kitaev
from loopmodels.kitaev import (
    build_hamiltonian, ground_covariance, honeycomb_for, kitaev_weight_model, membrane_weight,
    sector_energies, t_ext_from_p,
)
from loopmodels.lattice import (
    LatticeError, LoopConfig, PlaquetteSpins, boundary, build_lattice,
)
from loopmodels.pfaffian import pfaffian


@pytest.mark.parametrize("size", [(6, 4), (12, 6), (24, 12)])
def test_covariance_is_pure(size):
    C = ground_covariance(build_hamiltonian(*size))
    G = C.G
    assert np.max(np.abs(G + G.T)) < 1e-12
    assert np.max(np.abs(G @ G + np.eye(len(G)))) < 1e-8
    C.check()


def test_sector_energies_pick_ground_state():
    e = sector_energies(6, 4)
    assert len(e) == 4
    H, C = kitaev.ground_state(6, 4)
    assert C.energy == pytest.approx(min(e.values()), abs=1e-10)
    assert H.sector == min(e, key=e.get)


def _pauli(idx, D, ops):
    flip, phase = 0, np.ones(D, complex)
    for s, a in ops:
        bit = (idx >> s) & 1
        if a == 0:
            flip |= 1 << s
        elif a == 1:
            flip |= 1 << s
            phase = phase * 1j * (1 - 2 * bit)
        else:
            phase = phase * (1 - 2 * bit)
    return sp.csr_matrix((phase, (idx ^ flip, idx)), shape=(D, D))


def test_link_strings_against_exact_diagonalisation():
    # 12 spins on a twisted 3x2 honeycomb torus; spin ground state from sparse ED
    lx, ly, J, kappa = 3, 2, 1.0, 0.2
    lat = honeycomb_for(lx, ly, twist=1)
    n = lat.n_vertices
    D = 2 ** n
    idx = np.arange(D)
    H = sp.csr_matrix((D, D), dtype=complex)
    for e, (a, b) in enumerate(lat.edges):
        t = int(lat.edge_type[e])
        H = H + J * _pauli(idx, D, [(a, t), (b, t)])
    for k in range(n):
        inc = lat.vertex_edges(k)
        for x in range(3):
            for y in range(x + 1, 3):
                e1, e2 = inc[x], inc[y]
                j, l = lat.edges[e1].sum() - k, lat.edges[e2].sum() - k
                al, ga = int(lat.edge_type[e1]), int(lat.edge_type[e2])
                H = H + kappa * _pauli(idx, D, [(int(j), al), (int(k), 3 - al - ga), (int(l), ga)])
    w, v = eigsh(H, k=2, which="SA")
    psi = v[:, np.argmin(w)]
    Hm = build_hamiltonian(lx, ly, J, kappa, ("periodic", "antiperiodic"), lattice=lat)
    C = ground_covariance(Hm)
    assert C.energy == pytest.approx(w.min(), abs=1e-8)

    rng = np.random.default_rng(0)
    for _ in range(30):
        used, links = set(), []
        for e in rng.permutation(lat.n_edges):
            a, b = lat.edges[e]
            if a in used or b in used:
                continue
            links.append(e)
            used |= {a, b}
            if len(links) == rng.integers(1, 5):
                break
        ops = []
        for e in links:
            a, b = lat.edges[e]
            t = int(lat.edge_type[e])
            ops += [(int(a), t), (int(b), t)]
        exact = (psi.conj() @ (_pauli(idx, D, ops) @ psi)).real
        seq = np.array([x for e in links for x in lat.edges[e]])
        srt = np.sort(seq)
        f = ((-1) ** len(links) * np.prod(Hm.u[links]) * kitaev._perm_sign(seq)
             * pfaffian(C.G[np.ix_(srt, srt)]))
        assert exact == pytest.approx(f, abs=1e-8)


def test_weight_extraction():
    w = kitaev.extract_loop_weight(24, (2, 4, 6, 8, 10, 12), 0.2)
    assert all(1.36 <= n <= 1.47 for n in w.N_est)
    assert 0.60 <= w.t_int <= 0.70
    assert not w.flagged


def test_membrane_weight_decays_with_size():
    sup = build_lattice("super-honeycomb-embedding", 12, 12)
    C = ground_covariance(build_hamiltonian(12, 12, lattice=sup.embedding.honeycomb))
    one = membrane_weight(C, boundary(PlaquetteSpins.from_faces(sup, [0])))
    assert 0 < abs(one.value) < 1
    two = membrane_weight(C, boundary(PlaquetteSpins.from_faces(sup, [0, 1])))
    assert abs(two.value) < abs(one.value)
    with pytest.raises(LatticeError):
        membrane_weight(C, LoopConfig(sup, sup.windings[0]))


def test_fermionic_weight_model():
    sup = build_lattice("super-honeycomb-embedding", 6, 6)
    C = ground_covariance(build_hamiltonian(6, 6, lattice=sup.embedding.honeycomb))
    L = boundary(PlaquetteSpins.from_faces(sup, [2]))
    mw = membrane_weight(C, L)
    wf = kitaev_weight_model(C, sup, "wavefunction", t_ext=0.8)
    pu = kitaev_weight_model(C, sup, "purity", p=0.5)
    assert wf(L) == pytest.approx(0.8 ** L.length * abs(mw.value))
    assert pu(L) == pytest.approx(mw.value ** 2)
    with pytest.raises(ValueError):
        kitaev_weight_model(C, sup, "entropy")


def test_t_ext_from_p():
    assert t_ext_from_p(0.0) == 0.0 and t_ext_from_p(0.5) == 1.0
    p = 0.178
    assert t_ext_from_p(p) == pytest.approx(2 * p * (1 - p) / (p * p + (1 - p) ** 2))
