from fractions import Fraction

import numpy as np
import pytest

from loopmodels.groups import (
    GroupError, anyon_datum, build_group, dump_table, load_table, order_two_elements,
)
from loopmodels.quantum_double import (
    BranchingError, PatchError, build_patch, closed_loops, count_contract, count_enumerate,
    overlap_bruteforce, overlap_closed_form, projector_overlap, qd_max_decoherence_params,
    qd_purity_params, vertex_loop, PatchLoop,
)

GROUPS = ["Z2", "Z3", "Z4", "S3", "D4", "D5", "S4"]


@pytest.mark.parametrize("name", GROUPS)
def test_orbit_stabiliser(name):
    G = build_group(name)
    G.validate()
    for g in range(G.order):
        assert G.class_size(g) * len(G.centralizer(g)) == G.order


def test_s3_data():
    S3 = build_group("S3")
    assert S3.order == 6
    assert sorted(len(c) for c in S3.classes) == [1, 2, 3]
    a = anyon_datum(S3, "(12)")
    assert a.class_size == 3 and a.quantum_dimension == 3 and len(a.centralizer) == 2
    assert [x[1] for x in order_two_elements(S3)] == [3]


def test_table_roundtrip():
    G = build_group("D4")
    H = load_table(dump_table(G), "D4")
    assert np.array_equal(G.mult, H.mult) and G.labels == H.labels


def test_bad_tables():
    with pytest.raises(GroupError):
        load_table("2\n0 1\n0 1\n")
    with pytest.raises(GroupError):
        build_group("Q8")


def _loops(patch, n):
    return closed_loops(patch, limit=n)


@pytest.mark.parametrize("name,g", [("S3", "(12)"), ("Z2", 1)])
def test_closed_form_equals_bruteforce(name, g):
    G = build_group(name)
    patch = build_patch(4, 4)
    loops = _loops(patch, 15)
    assert len(loops) == 15
    for L in loops:
        bf = overlap_bruteforce(L, G, g)
        assert bf == overlap_closed_form(L, G, g)
        assert isinstance(bf, Fraction)


def test_counters_agree():
    G = build_group("S3")
    g = G.element("(12)")
    patch = build_patch(3, 3)
    L = vertex_loop(patch, [patch.vertex(1, 1)])
    a = Fraction(*count_enumerate(patch, G, g, red_mask=L.mask))
    b = Fraction(*count_contract(patch, G, g, red_mask=L.mask))
    assert a == b == overlap_closed_form(L, G, g)


def test_z2_loops_are_free():
    Z2 = build_group("Z2")
    for L in _loops(build_patch(4, 4), 6):
        assert overlap_bruteforce(L, Z2, 1) == 1


def test_open_chain_vanishes():
    G = build_group("S3")
    patch = build_patch(4, 4)
    L = vertex_loop(patch, [patch.vertex(1, 1)])
    e = int(np.flatnonzero([(L.mask >> k) & 1 for k in range(patch.n_edges)])[0])
    open_chain = PatchLoop(patch, L.mask & ~(1 << e))
    assert overlap_bruteforce(open_chain, G, "(12)") == 0
    assert overlap_closed_form(open_chain, G, "(12)") == 0


def test_branched_chain_vanishes():
    G = build_group("S3")
    patch = build_patch(4, 4)
    a = vertex_loop(patch, [patch.vertex(1, 1)])
    b = vertex_loop(patch, [patch.vertex(2, 1)])
    branched = PatchLoop(patch, a.mask | b.mask)
    assert overlap_bruteforce(branched, G, "(12)") == 0
    assert overlap_closed_form(branched, G, "(12)") == 0


def test_redundant_last_projector():
    # dropping any single shadow bond from the projector product leaves the overlap unchanged
    from loopmodels.quantum_double import patch_shadow
    G = build_group("S3")
    patch = build_patch(4, 4)
    L = vertex_loop(patch, [patch.vertex(1, 1), patch.vertex(2, 1)])
    S = patch_shadow(L)
    full = projector_overlap(patch, G, "(12)", S)
    assert full == overlap_bruteforce(L, G, "(12)")
    for e in range(patch.n_edges):
        if S >> e & 1:
            assert projector_overlap(patch, G, "(12)", S & ~(1 << e)) == full


def test_loop_must_be_interior():
    patch = build_patch(3, 3)
    with pytest.raises(PatchError):
        vertex_loop(patch, [patch.vertex(0, 0)])


def test_non_involution_rejected():
    with pytest.raises(GroupError):
        overlap_bruteforce(vertex_loop(build_patch(3, 3), [4]), build_group("Z3"), 1)


def test_regime_labels():
    assert qd_max_decoherence_params(build_group("Z2"), 1)[2] == "abelian"
    assert qd_max_decoherence_params(build_group("S3"), "(12)")[2] == "short-loop"
    t, N = qd_purity_params(build_group("S3"), "(12)", 0.5)
    assert N == 9 and t == pytest.approx(1 / 9)
