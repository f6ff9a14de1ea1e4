"""Reduction of phi_a modulo 2^n for parameters of good reduction.

States of P^1(Z/2^n) are ``[x:1]`` for x in Z/2^n and ``[1:y]`` for even y,
encoded as integers: ``x`` for the first kind and ``2^n + y/2`` for the
second, which gives 3 * 2^(n-1) states.
"""

from __future__ import annotations

from dataclasses import dataclass

from .dynamics import CaseTag, as_param, classify
from .errors import CaseMismatch

MAX_LEVEL = 16


def _residue(p, n: int) -> int:
    q = p.a.fraction if p.a.is_exact else p.a.rational()
    m = 1 << n
    return q.numerator * pow(q.denominator, -1, m) % m


def _normalize(x: int, y: int, n: int) -> int:
    m = 1 << n
    if y & 1:
        return x * pow(y, -1, m) % m
    return m + (y * pow(x, -1, m) % m) // 2


def label(state: int, n: int) -> str:
    m = 1 << n
    if state < m:
        return f"[{state}:1]"
    return f"[1:{2 * (state - m)}]"


def coords(state: int, n: int) -> tuple[int, int]:
    m = 1 << n
    return (state, 1) if state < m else (1, 2 * (state - m))


def successor_table(a, n: int) -> list[int]:
    """phi([x:y]) = [a x^2 + y^2 : x y] on every state of level n."""
    p = as_param(a)
    if classify(p) != CaseTag.GOOD_REDUCTION:
        raise CaseMismatch("finite levels are built for |a| = 1 only")
    if not 1 <= n <= MAX_LEVEL:
        raise ValueError(f"level must lie in 1..{MAX_LEVEL}")
    m = 1 << n
    r = _residue(p, n)
    out = []
    for s in range(m + m // 2):
        x, y = coords(s, n)
        out.append(_normalize((r * x * x + y * y) % m, (x * y) % m, n))
    return out


def project(state: int, n: int) -> int:
    """Reduction of a level-n state to level n-1."""
    half = 1 << (n - 1)
    x, y = coords(state, n)
    if y == 1:
        return x % half
    return half + (y % half) // 2


def functional_graph(succ: list[int]) -> tuple[list[tuple[int, ...]], list[int], list[int]]:
    """Cycles, the cycle index reached by each state, and each state's tail length."""
    N = len(succ)
    cycle_of = [-1] * N
    depth = [-1] * N
    on_stack = [-1] * N
    cycles: list[tuple[int, ...]] = []
    for start in range(N):
        if depth[start] >= 0:
            continue
        path = []
        s = start
        while depth[s] < 0 and on_stack[s] < 0:
            on_stack[s] = len(path)
            path.append(s)
            s = succ[s]
        if depth[s] < 0:
            # closed a new cycle at position on_stack[s]
            k = on_stack[s]
            cyc = tuple(path[k:])
            for c in cyc:
                depth[c], cycle_of[c] = 0, len(cycles)
            cycles.append(cyc)
            path = path[:k]
        for t in reversed(path):
            nxt = succ[t]
            depth[t], cycle_of[t] = depth[nxt] + 1, cycle_of[nxt]
        for t in path:
            on_stack[t] = -1
    return cycles, cycle_of, depth


@dataclass(frozen=True)
class LevelDynamics:
    level: int
    successor: tuple[int, ...]
    cycles: tuple[tuple[int, ...], ...]
    cycle_of: tuple[int, ...]
    depth: tuple[int, ...]

    @property
    def state_count(self) -> int:
        return len(self.successor)

    @property
    def cycle_lengths(self) -> list[int]:
        return [len(c) for c in self.cycles]

    def tree_depths(self) -> list[int]:
        """Longest tail feeding into each cycle."""
        out = [0] * len(self.cycles)
        for c, d in zip(self.cycle_of, self.depth):
            out[c] = max(out[c], d)
        return out

    def label(self, state: int) -> str:
        return label(state, self.level)

    def to_dict(self, adjacency: bool = True) -> dict:
        n = self.level
        d = {
            "level": n,
            "states": self.state_count,
            "cycles": [
                {"length": len(c), "depth": t, "members": [label(s, n) for s in c]}
                for c, t in zip(self.cycles, self.tree_depths())
            ],
        }
        if adjacency:
            d["successor"] = {label(s, n): label(t, n) for s, t in enumerate(self.successor)}
        return d


def finite_level_dynamics(a, n: int) -> LevelDynamics:
    succ = successor_table(a, n)
    cycles, cycle_of, depth = functional_graph(succ)
    return LevelDynamics(n, tuple(succ), tuple(cycles), tuple(cycle_of), tuple(depth))


def check_projection(a, n: int) -> bool:
    """pi(phi_n(s)) = phi_{n-1}(pi(s)) for every state s of level n >= 2."""
    hi, lo = successor_table(a, n), successor_table(a, n - 1)
    return all(project(hi[s], n) == lo[project(s, n)] for s in range(len(hi)))


def check_cycle_cover(a, n: int) -> bool:
    """Each level-n cycle projects onto a whole level-(n-1) cycle."""
    hi, lo = finite_level_dynamics(a, n), finite_level_dynamics(a, n - 1)
    for cyc in hi.cycles:
        image = {project(s, n) for s in cyc}
        target = lo.cycles[lo.cycle_of[project(cyc[0], n)]]
        if lo.depth[project(cyc[0], n)] != 0 or image != set(target):
            return False
    return True
