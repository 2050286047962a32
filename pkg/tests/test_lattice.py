import numpy as np
import pytest

from loopmodels.lattice import (
    LatticeError, LoopConfig, PlaquetteSpins, boundary, build_lattice, components,
    cyclomatic_number, enumerate_loop_configs, homology_class, interior_faces,
)

COUNTS = {  # (V, E, F) per unit cell
    "honeycomb": (2, 3, 1),
    "square": (1, 2, 1),
    "triangular": (1, 3, 2),
}
DEGREE = {"honeycomb": 3, "square": 4, "triangular": 6}


@pytest.mark.parametrize("kind", sorted(COUNTS))
@pytest.mark.parametrize("size", [(2, 2), (3, 2), (4, 5)])
def test_counts_and_euler(kind, size):
    lat = build_lattice(kind, *size)
    c = size[0] * size[1]
    v, e, f = COUNTS[kind]
    assert (lat.n_vertices, lat.n_edges, lat.n_faces) == (v * c, e * c, f * c)
    assert lat.n_vertices - lat.n_edges + lat.n_faces == 0
    assert np.all(lat.degree_array() == DEGREE[kind])


@pytest.mark.parametrize("kind", sorted(COUNTS))
def test_faces_are_closed_and_sum_to_zero(kind):
    lat = build_lattice(kind, 3, 3)
    total = 0
    for m in lat.face_masks:
        assert LoopConfig(lat, m).is_closed()
        total ^= m
    assert total == 0


@pytest.mark.parametrize("kind", sorted(COUNTS))
def test_windings(kind):
    lat = build_lattice(kind, 3, 4)
    w0, w1 = lat.windings
    assert LoopConfig(lat, w0).is_closed() and LoopConfig(lat, w1).is_closed()
    assert homology_class(lat, w0) == (1, 0)
    assert homology_class(lat, w1) == (0, 1)
    assert homology_class(lat, w0 ^ w1 ^ lat.face_masks[0]) == (1, 1)
    assert homology_class(lat, lat.face_masks[2]) == (0, 0)


def test_homology_rejects_open():
    lat = build_lattice("square", 3, 3)
    with pytest.raises(LatticeError):
        homology_class(lat, 1)


@pytest.mark.parametrize("kind", ["honeycomb", "square"])
def test_enumeration_counts(kind):
    lat = build_lattice(kind, 2, 3)
    F = lat.n_faces
    assert sum(1 for _ in enumerate_loop_configs(lat)) == 2 ** F
    assert sum(1 for _ in enumerate_loop_configs(lat, dedup=True)) == 2 ** (F - 1)
    assert sum(1 for _ in enumerate_loop_configs(lat, winding=True, dedup=True)) == 2 ** (F + 1)


def test_enumeration_cap():
    with pytest.raises(LatticeError):
        next(enumerate_loop_configs(build_lattice("square", 5, 5), cap=24))


def test_single_face_topology():
    for kind in ("honeycomb", "square"):
        lat = build_lattice(kind, 3, 3)
        L = LoopConfig(lat, lat.face_masks[4])
        assert components(L) == 1 and cyclomatic_number(L) == 1


def test_square_touching_faces():
    # two diagonal plaquettes share a vertex: one component, two enclosed faces
    lat = build_lattice("square", 4, 4)
    L = boundary(PlaquetteSpins.from_faces(lat, [0, 5]))
    assert components(L) == 1
    assert cyclomatic_number(L) == 2


def test_open_config_has_no_topology():
    lat = build_lattice("square", 3, 3)
    with pytest.raises(LatticeError):
        components(LoopConfig(lat, 1))


def test_xor_and_json():
    lat = build_lattice("honeycomb", 3, 2)
    a = LoopConfig(lat, lat.face_masks[0])
    b = LoopConfig(lat, lat.face_masks[1])
    c = a ^ b
    assert c.length == 10
    back = LoopConfig.from_json(c.to_json())
    assert back.mask == c.mask and back.lattice.descriptor == lat.descriptor
    with pytest.raises(LatticeError):
        LoopConfig.from_json(c.to_json(), build_lattice("honeycomb", 2, 2))


def test_interior_faces():
    lat = build_lattice("honeycomb", 4, 4)
    S = [0, 1, 5]
    L = boundary(PlaquetteSpins.from_faces(lat, S))
    assert sorted(interior_faces(L).tolist()) == S
    assert interior_faces(LoopConfig(lat, lat.windings[0])) is None


@pytest.mark.parametrize("size", [(6, 2), (6, 4), (12, 6)])
def test_super_honeycomb(size):
    sup = build_lattice("super-honeycomb-embedding", *size)
    c = size[0] * size[1]
    assert (sup.n_vertices, sup.n_edges, sup.n_faces) == (2 * c // 3, c, c // 3)
    assert np.all(sup.degree_array() == 3)
    emb = sup.embedding
    assert sorted(emb.a_site_of_edge.tolist()) == list(range(0, 2 * c, 2))
    assert len(set(emb.hexagon_of_face.tolist())) == sup.n_faces


@pytest.mark.parametrize("size", [(5, 2), (6, 3), (4, 4)])
def test_super_honeycomb_divisibility(size):
    with pytest.raises(LatticeError):
        build_lattice("super-honeycomb-embedding", *size)


def test_unknown_kind():
    with pytest.raises(LatticeError):
        build_lattice("kagome", 2, 2)
