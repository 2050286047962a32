"""Finite groups as multiplication tables, with conjugacy data for flux anyons."""
from __future__ import annotations

import re
from dataclasses import dataclass
from functools import cached_property
from itertools import permutations

import numpy as np


class GroupError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class GroupTable:
    name: str
    mult: np.ndarray  # mult[a, b] = index of a*b
    labels: tuple

    def __post_init__(self):
        n = self.mult.shape[0]
        if self.mult.shape != (n, n) or len(self.labels) != n:
            raise GroupError("inconsistent table shape")

    @property
    def order(self) -> int:
        return self.mult.shape[0]

    @cached_property
    def identity(self) -> int:
        ids = [e for e in range(self.order) if np.all(self.mult[e] == np.arange(self.order))
               and np.all(self.mult[:, e] == np.arange(self.order))]
        if len(ids) != 1:
            raise GroupError("table has no two-sided identity")
        return ids[0]

    @cached_property
    def inverse(self) -> np.ndarray:
        e = self.identity
        inv = np.full(self.order, -1)
        for a in range(self.order):
            hits = np.flatnonzero(self.mult[a] == e)
            if len(hits) != 1 or self.mult[hits[0], a] != e:
                raise GroupError(f"element {self.labels[a]} has no inverse")
            inv[a] = hits[0]
        return inv

    def element(self, label) -> int:
        if isinstance(label, (int, np.integer)):
            return int(label)
        key = _normalise_label(label)
        for i, l in enumerate(self.labels):
            if _normalise_label(l) == key:
                return i
        raise GroupError(f"{label!r} is not an element of {self.name}")

    def validate(self) -> None:
        n = self.order
        m = self.mult
        if m.min() < 0 or m.max() >= n:
            raise GroupError("table entries out of range")
        for row in m:
            if len(set(row.tolist())) != n:
                raise GroupError("table rows must be permutations (Latin square)")
        # associativity, exhaustive: (ab)c == a(bc)
        if not np.array_equal(_assoc_left(m), _assoc_right(m)):
            raise GroupError("table is not associative")
        _ = self.inverse

    def conj(self, h: int, g: int) -> int:
        """h g h^-1"""
        return int(self.mult[self.mult[h, g], self.inverse[h]])

    @cached_property
    def classes(self) -> tuple:
        seen, out = set(), []
        for g in range(self.order):
            if g in seen:
                continue
            c = sorted({self.conj(h, g) for h in range(self.order)})
            seen.update(c)
            out.append(tuple(c))
        return tuple(out)

    def conjugacy_class(self, g) -> tuple:
        g = self.element(g)
        return next(c for c in self.classes if g in c)

    def class_size(self, g) -> int:
        return len(self.conjugacy_class(g))

    def centralizer(self, g) -> tuple:
        g = self.element(g)
        return tuple(h for h in range(self.order) if self.mult[h, g] == self.mult[g, h])

    def is_involution(self, g) -> bool:
        g = self.element(g)
        return g != self.identity and self.mult[g, g] == self.identity


def _assoc_left(m):
    # [(a b) c] for all a, b, c
    return m[m[:, :, None], np.arange(m.shape[0])[None, None, :]]


def _assoc_right(m):
    return m[np.arange(m.shape[0])[:, None, None], m[None, :, :]]


def _normalise_label(label: str) -> str:
    return re.sub(r"[\s,]", "", str(label))


@dataclass(frozen=True)
class AnyonDatum:
    flux: int
    conjugacy_class: tuple
    class_size: int
    centralizer: tuple
    quantum_dimension: int  # flux-only anyon: |[g]| times a one-dimensional charge


def anyon_datum(G: GroupTable, g) -> AnyonDatum:
    g = G.element(g)
    c = G.conjugacy_class(g)
    return AnyonDatum(g, c, len(c), G.centralizer(g), len(c))


def order_two_elements(G: GroupTable) -> list:
    """Involution classes as (representative label, class size, members)."""
    out = []
    for c in G.classes:
        if G.is_involution(c[0]):
            out.append((G.labels[c[0]], len(c), c))
    return out


# ---------------------------------------------------------------------------
# constructors


def _from_elements(name, elems, compose, label):
    index = {e: i for i, e in enumerate(elems)}
    n = len(elems)
    mult = np.zeros((n, n), dtype=np.int64)
    for i, a in enumerate(elems):
        for j, b in enumerate(elems):
            mult[i, j] = index[compose(a, b)]
    return GroupTable(name, mult, tuple(label(e) for e in elems))


def cyclic(n: int) -> GroupTable:
    return _from_elements(f"Z{n}", list(range(n)), lambda a, b: (a + b) % n, str)


def _cycle_label(p: tuple) -> str:
    seen, cycles = set(), []
    for s in range(len(p)):
        if s in seen or p[s] == s:
            seen.add(s)
            continue
        c, x = [], s
        while x not in seen:
            seen.add(x)
            c.append(x + 1)
            x = p[x]
        cycles.append("(" + "".join(map(str, c)) + ")")
    return "".join(cycles) or "e"


def symmetric(n: int) -> GroupTable:
    elems = sorted(permutations(range(n)))
    # (a b)(i) = a(b(i))
    return _from_elements(f"S{n}", elems, lambda a, b: tuple(a[b[i]] for i in range(n)), _cycle_label)


def dihedral(n: int) -> GroupTable:
    """Symmetries of the n-gon, order 2n; elements (k, s) mean r^k s^s."""
    elems = [(k, s) for s in (0, 1) for k in range(n)]

    def compose(a, b):
        (k1, s1), (k2, s2) = a, b
        return ((k1 + (-k2 if s1 else k2)) % n, s1 ^ s2)

    def label(e):
        k, s = e
        if k == 0 and s == 0:
            return "e"
        return ("r" + (str(k) if k > 1 else "") if k else "") + ("s" if s else "")

    return _from_elements(f"D{n}", elems, compose, label)


def build_group(name: str) -> GroupTable:
    m = re.fullmatch(r"([ZSD])(\d+)", name.strip())
    if not m:
        raise GroupError(f"unknown group {name!r}; use Zn, Sn or Dn")
    kind, n = m.group(1), int(m.group(2))
    if n < 1 or (kind == "S" and n > 5) or (kind == "D" and n < 2):
        raise GroupError(f"unsupported group {name!r}")
    return {"Z": cyclic, "S": symmetric, "D": dihedral}[kind](n)


def load_table(text: str, name: str = "custom") -> GroupTable:
    """Parse ``order`` on the first line followed by ``order`` rows of indices.

    An optional second line starting with ``labels:`` names the elements.
    """
    lines = [l.split("#")[0].strip() for l in text.splitlines()]
    lines = [l for l in lines if l]
    n = int(lines[0])
    labels = tuple(str(i) for i in range(n))
    rows = lines[1:]
    if rows and rows[0].startswith("labels:"):
        labels = tuple(rows[0][len("labels:"):].split())
        rows = rows[1:]
    if len(rows) != n:
        raise GroupError(f"expected {n} rows, got {len(rows)}")
    mult = np.array([[int(x) for x in r.replace(",", " ").split()] for r in rows], dtype=np.int64)
    G = GroupTable(name, mult, labels)
    G.validate()
    return G


def dump_table(G: GroupTable) -> str:
    out = [str(G.order), "labels: " + " ".join(G.labels)]
    out += [" ".join(map(str, row)) for row in G.mult]
    return "\n".join(out) + "\n"
