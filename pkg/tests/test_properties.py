"""Property-based checks of the structural invariants."""
import math
from functools import lru_cache

import numpy as np
from hypothesis import example, given, settings
from hypothesis import strategies as st

from loopmodels import kitaev
from loopmodels.cli import ExperimentSpec
from loopmodels.groups import build_group
from loopmodels.lattice import (
    LoopConfig, PlaquetteSpins, boundary, build_lattice, components, cyclomatic_number,
    graph_cyclomatic_number, interior_faces,
)
from loopmodels.oracle import partition_function
from loopmodels.oracle.spectra import eta_spectrum_maximal
from loopmodels.pfaffian import slog_pfaffian
from loopmodels.weights import (
    WeightModel, decoherence_factor, topological, weight_purity, weight_quantum_double, weight_signed,
    weight_topological,
)

KINDS = ["honeycomb", "square", "triangular"]


@lru_cache(maxsize=None)
def lattice(kind, lx, ly):
    return build_lattice(kind, lx, ly)


@lru_cache(maxsize=None)
def kitaev_state(lx, ly):
    sup = build_lattice("super-honeycomb-embedding", lx, ly)
    H = kitaev.build_hamiltonian(lx, ly, lattice=sup.embedding.honeycomb)
    return sup, H, kitaev.ground_covariance(H)


def spins(lat, draw):
    return draw(st.lists(st.integers(0, 1), min_size=lat.n_faces, max_size=lat.n_faces))


@st.composite
def spin_pair(draw):
    lat = lattice(draw(st.sampled_from(KINDS)), draw(st.integers(2, 5)), draw(st.integers(2, 5)))
    return lat, spins(lat, draw), spins(lat, draw)


@given(spin_pair())
def test_boundary_is_homomorphism(data):
    lat, a, b = data
    xa = PlaquetteSpins(lat, tuple(a))
    xb = PlaquetteSpins(lat, tuple(b))
    xab = PlaquetteSpins(lat, tuple(i ^ j for i, j in zip(a, b)))
    assert boundary(xab) == boundary(xa) ^ boundary(xb)
    assert boundary(xab).is_closed()


def _complement_regions(lat, mask):
    """Connected regions of faces after cutting along the edges of mask."""
    parent = list(range(lat.n_faces))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for e, (f0, f1) in enumerate(lat.edge_faces):
        if not (mask >> e) & 1:
            parent[find(f0)] = find(f1)
    return len({find(f) for f in range(lat.n_faces)})


@given(st.sampled_from(["square", "honeycomb"]),
       st.sets(st.tuples(st.integers(0, 3), st.integers(0, 3)), max_size=16))
def test_cyclomatic_counts_bounded_regions(kind, cells):
    # faces inside a 4x4 block of an 8x8 torus: the loop sits in a disk, so Euler applies
    lat = lattice(kind, 8, 8)
    faces = [j * 8 + i for i, j in cells]
    L = boundary(PlaquetteSpins.from_faces(lat, faces))
    C = cyclomatic_number(L)
    V = len(np.unique(lat.edges[L.edges])) if L.length else 0
    assert C == L.length - V + components(L)
    assert C == _complement_regions(lat, L.mask) - 1


@given(st.sets(st.integers(0, 35), max_size=18))
def test_trivalent_cyclomatic_is_components(faces):
    lat = lattice("honeycomb", 6, 6)
    L = boundary(PlaquetteSpins.from_faces(lat, sorted(faces)))
    assert cyclomatic_number(L) == components(L)


@st.composite
def loop(draw, kind="honeycomb"):
    lat = lattice(kind, 6, 6)
    faces = draw(st.sets(st.integers(0, lat.n_faces - 1), max_size=10))
    return boundary(PlaquetteSpins.from_faces(lat, sorted(faces)))


tensions = st.floats(0.0, 1.0)
loop_weights = st.floats(0.1, 3.0)


@given(loop(), tensions)
def test_unit_loop_weight_is_ising(L, t):
    assert weight_topological(L, t, 1.0) == t ** L.length


@given(st.integers(0, 35), st.integers(0, 35), tensions, loop_weights)
def test_factorisation_of_disjoint_loops(f1, f2, t, N):
    lat = lattice("honeycomb", 6, 6)
    a = LoopConfig(lat, lat.face_masks[f1])
    b = LoopConfig(lat, lat.face_masks[f2])
    va = set(lat.edges[a.edges].ravel())
    vb = set(lat.edges[b.edges].ravel())
    if va & vb:
        return
    lhs = weight_topological(a ^ b, t, N)
    assert math.isclose(lhs, weight_topological(a, t, N) * weight_topological(b, t, N),
                        rel_tol=1e-12, abs_tol=1e-300)


@given(loop(), st.data(), tensions, loop_weights)
def test_signed_weight_magnitude(L, data, t, N):
    eta = data.draw(st.lists(st.sampled_from([-1, 1]), min_size=L.lattice.n_edges,
                             max_size=L.lattice.n_edges))
    assert abs(weight_signed(L, eta, t, N)) == weight_topological(L, t, N)


@given(loop(), st.floats(0.0, 0.5), tensions, loop_weights)
def test_purity_weight_formula(L, p, t, d):
    want = decoherence_factor(p) ** L.length * weight_topological(L, t, d) ** 2
    assert math.isclose(weight_purity(L, p, t, d), want, rel_tol=1e-12, abs_tol=1e-300)


@given(st.sets(st.integers(0, 15), max_size=8))
def test_z2_quantum_double_is_indicator(vertices):
    lat = lattice("triangular", 4, 4)
    m = 0
    for v in vertices:
        for e in lat.vertex_edges(v):
            m ^= 1 << int(e)
    L = LoopConfig(lat, m)
    assert weight_quantum_double(L, build_group("Z2"), 1) == 1.0
    assert WeightModel("quantum-double", group=build_group("Z2"), g=1)(L) == 1.0


@settings(max_examples=200)
@given(st.integers(1, 12), st.integers(0, 2 ** 32 - 1))
def test_pfaffian_squared_is_determinant(half, seed):
    rng = np.random.default_rng(seed)
    A = rng.normal(size=(2 * half, 2 * half))
    A = A - A.T
    s, la = slog_pfaffian(A)
    sd, ld = np.linalg.slogdet(A)
    assert s != 0 and sd > 0
    assert abs(math.exp(2 * la - ld) - 1) <= 1e-9


@given(st.sampled_from(["Z2", "Z5", "S3", "D4", "D6", "S4"]))
def test_group_axioms(name):
    G = build_group(name)
    m = G.mult
    n = G.order
    a, b, c = np.meshgrid(np.arange(n), np.arange(n), np.arange(n), indexing="ij")
    assert np.array_equal(m[m[a, b], c], m[a, m[b, c]])
    e = G.identity
    assert np.all(m[np.arange(n), G.inverse] == e)
    for g in range(n):
        assert G.class_size(g) * len(G.centralizer(g)) == n


@settings(max_examples=30, deadline=None)
@given(st.sets(st.integers(0, 47), max_size=6))
def test_membrane_weight_bounds(faces):
    sup, H, C = kitaev_state(12, 12)
    L = boundary(PlaquetteSpins.from_faces(sup, sorted(faces)))
    w = kitaev.membrane_weight(C, L, u=H.u)
    if L.length == 0:
        assert w.value == 1.0
        return
    assert abs(w.value) <= 1 + 1e-12
    idx = np.sort(kitaev.membrane_data(sup).pairs[list(w.interior)].reshape(-1))
    det = np.linalg.det(C.G[np.ix_(idx, idx)])
    assert math.isclose(w.value ** 2, det, rel_tol=1e-6)


def test_membrane_factorises_for_distant_loops():
    sup, H, C = kitaev_state(24, 12)
    a, b = 0, None
    ca = sup.embedding.face_column[a]
    for f in range(sup.n_faces):
        if abs(((sup.embedding.face_column[f] - ca + 12) % 24) - 12) >= 10:
            b = f
            break
    fa = kitaev.membrane_weight(C, boundary(PlaquetteSpins.from_faces(sup, [a])), u=H.u).value
    fb = kitaev.membrane_weight(C, boundary(PlaquetteSpins.from_faces(sup, [b])), u=H.u).value
    fab = kitaev.membrane_weight(C, boundary(PlaquetteSpins.from_faces(sup, [a, b])), u=H.u).value
    assert math.isclose(abs(fab), abs(fa * fb), rel_tol=0.02)


def test_double_wilson_stable_in_strip_width():
    sup, H, C = kitaev_state(24, 4)
    vals = [kitaev.double_wilson_estimator(C, sup, D=D, u=H.u).value for D in range(10, 15)]
    assert max(vals) / min(vals) - 1 < 0.02


@given(st.floats(0.05, 1.0), st.floats(0.5, 2.0))
@example(0.1514132604463002, 0.5)  # vertex-star patterns tie with the clean one
@settings(max_examples=10, deadline=None)
def test_eta_spectrum_top_is_clean_model(t, d):
    lat = lattice("honeycomb", 2, 2)
    r = eta_spectrum_maximal(lat, t, d)
    label, top = r.eigenvalues[0]
    assert label == 0
    assert top == max(r.values)
    clean = partition_function(lat, topological(t, d)) / 2 ** lat.n_edges
    assert math.isclose(top, clean, rel_tol=1e-13)


json_scalars = st.one_of(st.integers(-10 ** 6, 10 ** 6),
                         st.floats(allow_nan=False, allow_infinity=False),
                         st.text(max_size=8), st.booleans())


@given(st.sampled_from(["oracle-check", "mc-scan", "kitaev-mc", "spectrum"]),
       st.dictionaries(st.text(min_size=1, max_size=6),
                       st.one_of(json_scalars, st.lists(json_scalars, max_size=4)), max_size=5),
       st.integers(0, 2 ** 63 - 1), st.sampled_from(["fixed", "per-task"]), st.integers(1, 8))
def test_spec_roundtrip(command, params, seed, policy, workers):
    spec = ExperimentSpec(command, params, "out", seed, policy, workers)
    assert ExperimentSpec.from_json(spec.to_json()) == spec
