import math
from fractions import Fraction

import pytest

from loopmodels.groups import build_group
from loopmodels.lattice import LoopConfig, PlaquetteSpins, boundary, build_lattice
from loopmodels.weights import (
    WeightModel, decoherence_factor, eta_sign, purity, renyi_summand, signed, topological,
    weight_abelian, weight_purity, weight_quantum_double_exact, weight_signed, weight_topological,
)


def _two_hexagons():
    lat = build_lattice("honeycomb", 4, 4)
    return lat, boundary(PlaquetteSpins.from_faces(lat, [0, 10]))


def test_topological_weight():
    lat, L = _two_hexagons()
    assert weight_topological(L, 0.5, 2.0) == pytest.approx(0.5 ** 12 * 4)
    s, lw = topological(0.5, 2.0).log_weight(L)
    assert s == 1.0 and lw == pytest.approx(12 * math.log(0.5) + 2 * math.log(2))
    assert topological(0.0, 2.0)(L) == 0.0
    assert topological(0.0, 2.0)(LoopConfig(lat, 0)) == 1.0


def test_abelian_indicator():
    lat, L = _two_hexagons()
    assert weight_abelian(L) == 1
    assert WeightModel("abelian-indicator")(LoopConfig(lat, 1)) == 0.0


def test_purity_weight():
    lat, L = _two_hexagons()
    p, t, d = 0.2, 0.7, math.sqrt(2)
    want = decoherence_factor(p) ** 12 * weight_topological(L, t, d) ** 2
    assert weight_purity(L, p, t, d) == pytest.approx(want)
    assert purity(p, t, d)(L) == pytest.approx(want)
    assert decoherence_factor(0.5) == 1.0 and decoherence_factor(0.0) == 0.0


def test_signed_weight():
    lat, L = _two_hexagons()
    eta = [1] * lat.n_edges
    eta[int(L.edges[0])] = -1
    assert eta_sign(L, eta) == -1
    assert weight_signed(L, eta, 0.5, 2.0) == -weight_topological(L, 0.5, 2.0)
    assert signed(eta, 0.5, 2.0).log_weight(L)[0] == -1.0
    with pytest.raises(ValueError):
        eta_sign(L, [1, -1])


def test_renyi_summand():
    lat, L = _two_hexagons()
    assert renyi_summand([L, L], 0.5, 2.0) == pytest.approx(weight_topological(L, 0.5, 2.0) ** 2)
    with pytest.raises(ValueError):
        renyi_summand([L, LoopConfig(lat, 0)], 0.5, 2.0)


def test_model_validation():
    with pytest.raises(ValueError):
        WeightModel("bogus")
    with pytest.raises(ValueError):
        topological(0.5, 0.0)
    with pytest.raises(ValueError):
        purity(0.7, 0.5, 1.0)


def test_quantum_double_weight_on_torus():
    lat = build_lattice("triangular", 4, 4)
    # red loop around one vertex: the six bonds touching it
    v = 5
    L = LoopConfig.from_edges(lat, [e for e in range(lat.n_edges) if v in lat.edges[e]])
    S3 = build_group("S3")
    w = weight_quantum_double_exact(L, S3, "(12)")
    assert isinstance(w, Fraction) and 0 < w < 1
    Z2 = build_group("Z2")
    assert weight_quantum_double_exact(L, Z2, 1) == 1
    assert weight_quantum_double_exact(LoopConfig(lat, 1), S3, "(12)") == 0
