"""Spectra of decohered toric-code states, by state vectors and by loop sums."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..lattice import LatticeTorus, enumerate_loop_configs, graph_cyclomatic_number
from .core import OracleError, bit_table
from .equivalence import chain_distribution

anyon_chain_weights = chain_distribution

MAX_QUBITS = 12
MAX_ETA_SITES = 20


@dataclass
class SpectrumResult:
    eigenvalues: list  # (label, probability), descending
    entropy: float
    reference: np.ndarray | None = field(default=None, repr=False)  # independent spectrum, same order
    max_deviation: float = 0.0

    @property
    def values(self) -> np.ndarray:
        return np.array([v for _, v in self.eigenvalues])

    def check(self, tol: float = 1e-10) -> None:
        v = self.values
        if v.min(initial=0.0) < -1e-12:
            raise OracleError("negative eigenvalue")
        if abs(math.fsum(v.tolist()) - 1) > tol:
            raise OracleError(f"eigenvalues sum to {math.fsum(v.tolist())}")


def entropy(values) -> float:
    v = np.asarray(values, dtype=float)
    v = v[v > 0]
    return float(-math.fsum((v * np.log(v)).tolist())) + 0.0


def toric_code_spectrum(lattice: LatticeTorus, p: float) -> SpectrumResult:
    """Exact spectrum of the toric code under independent X noise of rate p.

    Qubits live on the edges of a square torus.  The initial state is the
    ground state that is +1 for every star (Z type), plaquette (X type) and
    X-type logical, i.e. the uniform superposition of all closed edge sets in
    the Z basis.  The density matrix is built from the state vectors and
    diagonalised; independently the weights Z_a of error chains grouped by
    their boundary a are enumerated.  Both multisets are compared.
    """
    if lattice.kind != "square":
        raise OracleError("toric_code_spectrum needs a square torus")
    n = lattice.n_edges
    if n > MAX_QUBITS:
        raise OracleError(f"{n} qubits exceed the dense cap of {MAX_QUBITS}")
    if not 0 <= p <= 0.5:
        raise OracleError("p must lie in [0, 1/2]")
    dim = 1 << n
    psi = np.zeros(dim)
    for L in enumerate_loop_configs(lattice, winding=True, dedup=True, cap=MAX_QUBITS):
        psi[L.mask] = 1.0
    psi /= np.linalg.norm(psi)
    idx = np.arange(dim)
    k = bit_table(n).sum(axis=1)
    amp = np.sqrt((p ** k) * ((1 - p) ** (n - k)))
    A = psi[idx[:, None] ^ idx[None, :]] * amp[None, :]  # column E is sqrt(p_E) X_E psi
    rho = A @ A.T
    ev = np.sort(np.linalg.eigvalsh(rho))[::-1]

    za = chain_distribution(lattice, p)
    items = sorted(((tuple(sorted(a)), v) for a, v in za.items() if v > 0), key=lambda x: -x[1])
    ref = np.zeros(dim)
    ref[:len(items)] = [v for _, v in items]
    dev = float(np.max(np.abs(ev - ref)))
    res = SpectrumResult(items, entropy([v for _, v in items]), ev, dev)
    return res


def fwht(x: np.ndarray) -> np.ndarray:
    """Unnormalised Walsh-Hadamard transform: y[s] = sum_m x[m] (-1)^popcount(s & m)."""
    y = np.array(x, dtype=float)
    n = y.size
    h = 1
    while h < n:
        y = y.reshape(-1, 2, h)
        y = np.stack((y[:, 0] + y[:, 1], y[:, 0] - y[:, 1]), axis=1).reshape(n)
        h *= 2
    return y


def eta_spectrum_maximal(lattice: LatticeTorus, t_a: float, d_a: float,
                         winding: bool = False) -> SpectrumResult:
    """Z_eta = 2^-n sum_L prod_{e in L} eta_e t_a^|L| d_a^C(L) for every sign pattern eta.

    Labels are integer bitmasks with bit e set when eta_e = -1.  The all-plus
    pattern reproduces the clean loop model.
    """
    n = lattice.n_edges
    if n > MAX_ETA_SITES:
        raise OracleError(f"{n} decohered sites exceed the cap of {MAX_ETA_SITES}")
    w = np.zeros(1 << n)
    for L in enumerate_loop_configs(lattice, winding=winding, dedup=True, cap=MAX_ETA_SITES):
        m = L.length
        w[L.mask] = 1.0 if m == 0 else t_a ** m * d_a ** graph_cyclomatic_number(lattice, L.mask)
    z = fwht(w) / (1 << n)
    clean = math.fsum(w.tolist()) / (1 << n)
    z[0] = clean  # identical summation with all signs +, kept bit-exact
    # weights are non-negative, so no sign pattern beats the clean one; gauge-
    # equivalent patterns (vertex stars) tie with it exactly and keep label order
    z = np.minimum(z, clean)
    order = np.argsort(-np.round(z / clean, 12), kind="stable")
    items = [(int(s), float(z[s])) for s in order]
    return SpectrumResult(items, entropy(z))
