"""Loop weights f(L) and partition-function summands.

Every weight is available in linear space and as ``(sign, log|w|)``; the
Monte Carlo engine only uses the latter.  Summands are normalised so that
the empty configuration contributes exactly 1.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Sequence

import numpy as np

from .groups import GroupError, GroupTable
from .lattice import (
    BranchingError, LatticeError, LoopConfig, OpenChainError, cyclomatic_number, shadow,
)

VARIANTS = ("abelian-indicator", "topological", "signed-eta", "purity", "quantum-double",
            "fermionic")


def _log(x: float) -> float:
    return -math.inf if x == 0 else math.log(x)


def decoherence_factor(p: float) -> float:
    """Per-edge factor (p - p^2) / (p^2 - p + 1/2) of uncorrelated noise."""
    return (p - p * p) / (p * p - p + 0.5)


def weight_abelian(L: LoopConfig) -> int:
    return int(L.is_closed())


def log_weight_topological(L: LoopConfig, t: float, N: float) -> tuple:
    C = cyclomatic_number(L)
    if L.length and t == 0:
        return 0.0, -math.inf
    return 1.0, L.length * _log(t) + C * math.log(N) if L.length else C * math.log(N)


def weight_topological(L: LoopConfig, t: float, N: float) -> float:
    return t ** L.length * N ** cyclomatic_number(L)


def weight_purity(L: LoopConfig, p: float, t_a: float, d_a: float) -> float:
    if not 0 <= p <= 0.5:
        raise ValueError("p must lie in [0, 1/2]")
    C = cyclomatic_number(L)
    return decoherence_factor(p) ** L.length * t_a ** (2 * L.length) * d_a ** (2 * C)


def eta_sign(L: LoopConfig, eta: Sequence[int]) -> int:
    eta = np.asarray(eta)
    if len(eta) != L.lattice.n_edges:
        raise ValueError("eta must carry one sign per decohered site (edge)")
    return int(np.prod(eta[L.edges])) if L.length else 1


def weight_signed(L: LoopConfig, eta: Sequence[int], t_a: float, d_a: float) -> float:
    return eta_sign(L, eta) * weight_topological(L, t_a, d_a)


def renyi_summand(loops: Sequence[LoopConfig], t_a: float, d_a: float) -> float:
    if len(loops) < 2:
        raise ValueError("need at least two replicas")
    x = 0
    for L in loops:
        x ^= L.mask
    if x:
        raise ValueError("replica configurations must XOR to the empty set")
    out = 1.0
    for L in loops:
        out *= weight_topological(L, t_a, d_a)
    return out


# ---------------------------------------------------------------------------
# quantum doubles


def _qd_shadow(L):
    """(shadow mask, edge array) for a torus or patch loop; raises on forbidden chains."""
    from .quantum_double import PatchLoop, patch_shadow
    if isinstance(L, PatchLoop):
        return patch_shadow(L), L.patch.edges
    S = shadow(L)
    return S.mask, S.lattice.edges


def weight_quantum_double_exact(L, G: GroupTable, g) -> Fraction:
    from .quantum_double import cycle_rank
    g = G.element(g)
    if not G.is_involution(g):
        raise GroupError(f"{G.labels[g]} is not an order-two element")
    try:
        m, edges = _qd_shadow(L)
    except (BranchingError, OpenChainError):
        return Fraction(0)
    d = G.class_size(g)
    C = cycle_rank(edges, m)
    return Fraction(d) ** C / Fraction(d) ** m.bit_count()


def weight_quantum_double(L, G: GroupTable, g) -> float:
    return float(weight_quantum_double_exact(L, G, g))


# ---------------------------------------------------------------------------
# model objects


@dataclass(frozen=True)
class WeightModel:
    variant: str
    t: float = 1.0
    N: float = 1.0
    p: float = 0.0
    eta: tuple | None = None
    group: Any = field(default=None, compare=False)
    g: Any = None
    fermion: Any = field(default=None, compare=False)  # see kitaev.FermionicWeight

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown weight variant {self.variant!r}")
        if self.N <= 0 or self.t < 0:
            raise ValueError("need N > 0 and t >= 0")
        if not 0 <= self.p <= 0.5:
            raise ValueError("p must lie in [0, 1/2]")
        if self.eta is not None and any(e not in (-1, 1) for e in self.eta):
            raise ValueError("eta entries must be +-1")

    def log_weight(self, L: LoopConfig) -> tuple:
        v = self.variant
        if v == "abelian-indicator":
            return (1.0, 0.0) if L.is_closed() else (0.0, -math.inf)
        if v == "topological":
            return log_weight_topological(L, self.t, self.N)
        if v == "signed-eta":
            s, lw = log_weight_topological(L, self.t, self.N)
            return s * eta_sign(L, self.eta), lw
        if v == "purity":
            s, lw = log_weight_topological(L, self.t, self.N)
            return s, 2 * lw + L.length * _log(decoherence_factor(self.p))
        if v == "quantum-double":
            w = weight_quantum_double(L, self.group, self.g)
            return (1.0, math.log(w)) if w else (0.0, -math.inf)
        return self.fermion.log_weight(L)

    def __call__(self, L: LoopConfig) -> float:
        s, lw = self.log_weight(L)
        return 0.0 if s == 0 else s * math.exp(lw)

    # loop-model parameters seen by the Monte Carlo kernel: weight t_eff^|L| N_eff^C
    def loop_parameters(self) -> tuple:
        if self.variant == "topological":
            return self.t, self.N
        if self.variant == "purity":
            return decoherence_factor(self.p) * self.t ** 2, self.N ** 2
        raise LatticeError(f"variant {self.variant} is not a plain loop model")


def topological(t: float, N: float) -> WeightModel:
    return WeightModel("topological", t=t, N=N)


def purity(p: float, t_a: float, d_a: float) -> WeightModel:
    return WeightModel("purity", t=t_a, N=d_a, p=p)


def signed(eta, t_a: float, d_a: float) -> WeightModel:
    return WeightModel("signed-eta", t=t_a, N=d_a, eta=tuple(int(e) for e in eta))
