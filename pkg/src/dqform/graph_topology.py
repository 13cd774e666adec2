"""Directed graphs, the three experiment topologies and their real Laplacians.

Arc ``(i, j)`` means agent ``i`` senses agent ``j``; node ids are 1-based.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from dqform.errors import DqFormError, TooSmall

TOPOLOGIES = ("cycle", "star", "grid")


@dataclass(frozen=True)
class DiGraph:
    n: int
    arcs: Tuple[Tuple[int, int], ...]

    def __post_init__(self):
        arcs = tuple((int(a), int(b)) for a, b in self.arcs)
        object.__setattr__(self, "arcs", arcs)
        if len(set(arcs)) != len(arcs):
            raise DqFormError("duplicate arcs")
        for tail, head in arcs:
            if tail == head:
                raise DqFormError(f"self-loop at node {tail}")
            if not (1 <= tail <= self.n and 1 <= head <= self.n):
                raise DqFormError(f"arc {(tail, head)} outside [1, {self.n}]")

    def out_degrees(self) -> np.ndarray:
        d = np.zeros(self.n, dtype=np.int64)
        for tail, _ in self.arcs:
            d[tail - 1] += 1
        return d

    def with_reversed(self) -> "DiGraph":
        """Add every missing reversed arc, keeping the original arcs first."""
        seen = set(self.arcs)
        extra = [(h, t) for t, h in self.arcs if (h, t) not in seen]
        return DiGraph(self.n, self.arcs + tuple(extra))


def gen_cycle(n: int, directed: bool = True) -> DiGraph:
    if n < 3:
        raise TooSmall(f"cycle needs n >= 3, got {n}")
    arcs = [(i, i + 1) for i in range(1, n)] + [(n, 1)]
    g = DiGraph(n, tuple(arcs))
    return g if directed else g.with_reversed()


def gen_star(n0: int, directed: bool = True) -> DiGraph:
    """Core ``n0``-cycle plus ``n0`` branch nodes; ``2*n0`` nodes in total.

    Branch node ``n0+i`` senses the two core nodes ``i`` and ``i+1`` (wrapping
    to 1), so the core cycle carries the sensing sink.
    """
    if n0 < 3:
        raise TooSmall(f"star needs n0 >= 3, got {n0}")
    arcs = [(i, i + 1) for i in range(1, n0)] + [(n0, 1)]
    for i in range(1, n0 + 1):
        arcs.append((n0 + i, i))
        arcs.append((n0 + i, i % n0 + 1))
    g = DiGraph(2 * n0, tuple(arcs))
    return g if directed else g.with_reversed()


def gen_grid(n0: int, directed: bool = True) -> DiGraph:
    """Row-major ``n0 x n0`` lattice; arcs point right and down."""
    if n0 < 2:
        raise TooSmall(f"grid needs n0 >= 2, got {n0}")
    arcs = []
    for r in range(n0):
        for c in range(n0):
            v = r * n0 + c + 1
            if c < n0 - 1:
                arcs.append((v, v + 1))
            if r < n0 - 1:
                arcs.append((v, v + n0))
    g = DiGraph(n0 * n0, tuple(arcs))
    return g if directed else g.with_reversed()


def topology_size_param(kind: str, n: int) -> int:
    """Map a total node count to the generator parameter (n, n0 or side)."""
    if kind == "cycle":
        return n
    if kind == "star":
        if n % 2:
            raise TooSmall(f"star needs an even node count, got {n}")
        return n // 2
    if kind == "grid":
        side = int(round(n ** 0.5))
        if side * side != n:
            raise TooSmall(f"grid needs a square node count, got {n}")
        return side
    raise DqFormError(f"unknown topology {kind!r}")


def make_topology(kind: str, n: int, directed: bool = True) -> DiGraph:
    """Build a topology by total node count ``n``."""
    p = topology_size_param(kind, n)
    return {"cycle": gen_cycle, "star": gen_star, "grid": gen_grid}[kind](p, directed)


def underlying_laplacian(g: DiGraph) -> np.ndarray:
    """``L = D - A`` with out-degree diagonal, built in integers then cast."""
    L = np.zeros((g.n, g.n), dtype=np.int64)
    for tail, head in g.arcs:
        L[tail - 1, head - 1] -= 1
        L[tail - 1, tail - 1] += 1
    return L.astype(float)


def has_sensing_sink(g: DiGraph) -> bool:
    """True iff some node is reachable along arcs from every node.

    Equivalent to the reversed graph having a directed spanning tree.
    """
    if g.n == 0:
        return False
    incoming = [[] for _ in range(g.n)]
    for tail, head in g.arcs:
        incoming[head - 1].append(tail - 1)
    for root in range(g.n):
        seen = {root}
        queue = deque([root])
        while queue:
            v = queue.popleft()
            for u in incoming[v]:
                if u not in seen:
                    seen.add(u)
                    queue.append(u)
        if len(seen) == g.n:
            return True
    return False


def has_simple_zero(g: DiGraph, tol: float = 1e-8) -> bool:
    """Simple zero eigenvalue of ``L`` with the rest in the open right half plane.

    Decided from the spectrum, cross-checked against :func:`has_sensing_sink`.
    """
    from dqform.spectral import eigenvalues

    ev = eigenvalues(underlying_laplacian(g))
    algebraic = bool(abs(ev[0]) <= tol and (g.n == 1 or ev[1].real > tol))
    reach = has_sensing_sink(g)
    if algebraic != reach:
        raise AssertionError(
            f"spectral test ({algebraic}) disagrees with reachability test ({reach})"
        )
    return algebraic


def write_graph(g: DiGraph) -> str:
    lines = [f"n {g.n}"] + [f"{t} {h}" for t, h in g.arcs]
    return "\n".join(lines) + "\n"


def read_graph(text: str) -> DiGraph:
    rows = [ln.split() for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    if not rows or rows[0][0] != "n" or len(rows[0]) != 2:
        raise DqFormError("graph file must start with 'n <count>'")
    n = int(rows[0][1])
    return DiGraph(n, tuple((int(a), int(b)) for a, b in rows[1:]))
