"""Partition functions and string correlators by summing over every loop configuration."""
from __future__ import annotations

import math
from collections import deque
from typing import Iterable

import numpy as np

from ..lattice import LatticeError, LatticeTorus, LoopConfig, enumerate_loop_configs, graph_cyclomatic_number
from ..weights import WeightModel


class OracleError(ValueError):
    pass


def _configs(lattice, winding, cap):
    try:
        return list(enumerate_loop_configs(lattice, winding=winding, dedup=True, cap=cap))
    except LatticeError as exc:
        raise OracleError(str(exc)) from exc


def partition_function(lattice: LatticeTorus, model: WeightModel, winding: bool = False,
                       cap: int = 24, configs: Iterable[LoopConfig] | None = None) -> float:
    """Sum of model weights over all distinct loop configurations.

    Only contractible configurations (plaquette boundaries) enter unless
    ``winding`` is set.  ``configs`` overrides the enumeration.
    """
    if configs is None:
        configs = _configs(lattice, winding, cap)
    return math.fsum(model(L) for L in configs)


def _shortest_path(lattice: LatticeTorus, x: int, y: int) -> int:
    prev = {x: None}
    q = deque([x])
    while q:
        v = q.popleft()
        if v == y:
            break
        for e in lattice.vertex_edges(v):
            a, b = lattice.edges[e]
            w = a + b - v
            if w not in prev:
                prev[w] = (v, int(e))
                q.append(w)
    if y not in prev:
        raise OracleError(f"no path between {x} and {y}")
    m, v = 0, y
    while prev[v] is not None:
        v, e = prev[v]
        m ^= 1 << e
    return m


def _open_weight(lattice, mask, t, N):
    n = mask.bit_count()
    if n and t == 0:
        return 0.0
    return t ** n * N ** graph_cyclomatic_number(lattice, mask)


def string_correlator(lattice: LatticeTorus, model: WeightModel, x: int, x2: int,
                      cap: int = 24) -> float:
    """Weight of configurations with a single open string from vertex x to x2,
    relative to the closed-sector partition function (topological weights only)."""
    if x == x2:
        raise OracleError("string endpoints must differ")
    if model.variant != "topological":
        raise OracleError("string correlator is defined for the topological weight")
    configs = _configs(lattice, False, cap)
    p = _shortest_path(lattice, x, x2)
    t, N = model.t, model.N
    num = math.fsum(_open_weight(lattice, L.mask ^ p, t, N) for L in configs)
    den = math.fsum(_open_weight(lattice, L.mask, t, N) for L in configs)
    return num / den


def bit_table(n: int, start: int = 0, stop: int | None = None) -> np.ndarray:
    """Rows k in [start, stop) expanded into n bits (uint8)."""
    stop = (1 << n) if stop is None else stop
    k = np.arange(start, stop, dtype=np.int64)
    return ((k[:, None] >> np.arange(n)) & 1).astype(np.uint8)
