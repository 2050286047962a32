import math
from fractions import Fraction

import numpy as np
import pytest

from loopmodels import oracle
from loopmodels.lattice import LoopConfig, build_lattice
from loopmodels.oracle import OracleError, partition_function, string_correlator
from loopmodels.oracle.spectra import eta_spectrum_maximal
from loopmodels.weights import topological

TOL = 1e-10


@pytest.mark.parametrize("size", [(2, 2), (3, 3)])
@pytest.mark.parametrize("beta", [0.0, 0.3, 0.8, 2.0])
def test_ising_dual(size, beta):
    r = oracle.ising_dual_check(build_lattice("honeycomb", *size), beta)
    assert r.relative_error < TOL


def test_ising_dual_needs_honeycomb():
    with pytest.raises(OracleError):
        oracle.ising_dual_check(build_lattice("square", 2, 2), 0.3)


def _single_edge_chain(lat, e):
    a, b = (int(v) for v in lat.edges[e])
    return [a, b], [e]


@pytest.mark.parametrize("size", [(2, 2), (3, 3)])
@pytest.mark.parametrize("p", [0.0, 0.05, 0.2, 0.5, 1.0])
def test_rbim(size, p):
    lat = build_lattice("square", *size)
    anyons, chain = _single_edge_chain(lat, 0)
    assert oracle.rbim_check(lat, anyons, chain, p).relative_error < TOL
    assert oracle.rbim_check(lat, [], [], p).relative_error < TOL


def test_rbim_rejects_wrong_chain():
    lat = build_lattice("square", 2, 2)
    with pytest.raises(OracleError):
        oracle.rbim_check(lat, [0, 3], [0], 0.1)


@pytest.mark.parametrize("N,size", [(1, (2, 2)), (1, (3, 3)), (2, (2, 2)), (2, (3, 3)),
                                    (3, (2, 2))])
@pytest.mark.parametrize("frac", [0.2, 0.9])
def test_face_cubic(N, size, frac):
    lat = build_lattice("square", *size)
    assert oracle.face_cubic_check(lat, frac / N, N).relative_error < TOL


def test_face_cubic_rejects_negative_weights():
    with pytest.raises(OracleError):
        oracle.face_cubic_check(build_lattice("square", 2, 2), 0.5, 3)


@pytest.mark.parametrize("N", [1, 2])
@pytest.mark.parametrize("size", [(2, 2), (3, 3)])
def test_mixed_cubic(N, size):
    lat = build_lattice("honeycomb", *size)
    t = 0.9 / math.sqrt(N)
    assert oracle.mixed_cubic_check(lat, t, N).relative_error < TOL


def test_report_json_roundtrip():
    import json
    r = oracle.ising_dual_check(build_lattice("honeycomb", 2, 2), 0.5)
    d = json.loads(r.to_json())
    assert d["mapping"] and d["relative_error"] == r.relative_error


def test_partition_function_known_value():
    lat = build_lattice("honeycomb", 2, 2)
    z = partition_function(lat, topological(0.3, 2.0))
    assert z == pytest.approx(1.00661932, abs=5e-9)


def test_single_hexagon():
    lat = build_lattice("honeycomb", 2, 2)
    hexagon = [LoopConfig(lat, 0), LoopConfig(lat, lat.face_masks[0])]
    for t, N in [(0.5, 2.0), (0.3, 1.0), (0.9, math.sqrt(2))]:
        z = partition_function(lat, topological(t, N), configs=hexagon)
        assert z == pytest.approx(1 + t ** 6 * N, rel=1e-14)


def test_zero_tension_and_empty_sum():
    lat = build_lattice("honeycomb", 2, 2)
    assert partition_function(lat, topological(0.0, 2.0)) == 1.0


def test_string_correlator_needs_distinct_endpoints():
    lat = build_lattice("honeycomb", 2, 2)
    with pytest.raises(OracleError):
        string_correlator(lat, topological(0.4, 1.0), 0, 0)


def test_string_correlator_decays_with_tension():
    lat = build_lattice("honeycomb", 3, 3)
    a = string_correlator(lat, topological(0.3, 1.0), 0, 1)
    b = string_correlator(lat, topological(0.6, 1.0), 0, 1)
    assert 0 < a < b < 1


def test_cap_is_enforced():
    with pytest.raises(Exception):
        partition_function(build_lattice("square", 6, 6), topological(0.3, 1.0))


@pytest.mark.parametrize("p", [0.0, 0.1, 0.25, 0.5])
def test_toric_spectrum_two_ways(p):
    r = oracle.toric_code_spectrum(build_lattice("square", 2, 2), p)
    assert r.max_deviation <= TOL
    r.check()


def test_toric_spectrum_entropy_grows():
    lat = build_lattice("square", 2, 2)
    s = [oracle.toric_code_spectrum(lat, p).entropy for p in (0.0, 0.1, 0.25, 0.5)]
    assert s[0] == 0.0
    assert all(a < b for a, b in zip(s, s[1:]))


def test_toric_spectrum_rejects():
    with pytest.raises(OracleError):
        oracle.toric_code_spectrum(build_lattice("square", 3, 3), 0.1)
    with pytest.raises(OracleError):
        oracle.toric_code_spectrum(build_lattice("square", 2, 2), 0.7)


def test_eta_spectrum_normalised():
    lat = build_lattice("honeycomb", 2, 2)
    r = eta_spectrum_maximal(lat, 1 / math.sqrt(2), math.sqrt(2))
    v = r.values
    assert math.fsum(v.tolist()) == pytest.approx(1.0, abs=1e-12)
    clean = partition_function(lat, topological(1 / math.sqrt(2), math.sqrt(2)))
    assert dict(r.eigenvalues)[0] == pytest.approx(clean / 2 ** lat.n_edges, rel=1e-13)


def _random_instance(rng, n=3, k=2):
    dim = 2 ** n
    psi = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    phi = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    from loopmodels.cli import random_commuting_paulis
    return psi / np.linalg.norm(psi), phi / np.linalg.norm(phi), random_commuting_paulis(n, k, rng)


def test_fidelity_projector_formula_random():
    rng = np.random.default_rng(5)
    for _ in range(50):
        psi, phi, ops = _random_instance(rng, n=int(rng.integers(2, 5)), k=int(rng.integers(1, 3)))
        f = oracle.fidelity_projector_formula(psi, phi, ops)
        assert oracle.data_processing_check(psi, phi, ops)
        assert 0 <= f <= 1 + 1e-12


def test_fidelity_direct_pure_states():
    rng = np.random.default_rng(0)
    psi, phi, _ = _random_instance(rng)
    rho, sig = np.outer(psi, psi.conj()), np.outer(phi, phi.conj())
    assert oracle.fidelity_direct(rho, sig) == pytest.approx(abs(np.vdot(psi, phi)) ** 2, abs=1e-9)
    assert oracle.fidelity_direct(rho, rho) == pytest.approx(1.0, abs=1e-9)


def test_fidelity_rejects_anticommuting():
    X = np.array([[0, 1], [1, 0]], dtype=complex)
    Z = np.diag([1.0, -1.0]).astype(complex)
    psi = np.array([1, 0], dtype=complex)
    with pytest.raises(OracleError):
        oracle.fidelity_projector_formula(psi, psi, [X, Z])
