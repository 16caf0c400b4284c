"""Büchi emptiness of a finite symbolic state space by the greatest fixpoint of Post+ over accepting states."""

from __future__ import annotations

import time
from collections import deque
from dataclasses import dataclass
from typing import Hashable, Protocol


class Timeout(Exception):
    pass


class SymbolicSpace(Protocol):
    def initial(self) -> Hashable: ...

    def successors(self, state) -> set: ...

    def is_accepting(self, state) -> bool: ...


@dataclass
class Stats:
    visited: int = 0
    iterations: int = 0
    peak_frontier: int = 0
    seconds: float = 0.0


class Explorer:
    """Memoises successor sets so the fixpoint iterations walk an explicit graph."""

    def __init__(self, space, timeout: float | None = None, subsume: bool = False):
        self.space = space
        self.deadline = None if timeout is None else time.monotonic() + timeout
        self.subsume = subsume and hasattr(space, "subsumes")
        self.succ = {}
        self.stats = Stats()

    def successors(self, s) -> set:
        hit = self.succ.get(s)
        if hit is None:
            if self.deadline is not None and time.monotonic() > self.deadline:
                raise Timeout()
            hit = self.succ[s] = frozenset(self.space.successors(s))
            self.stats.visited = len(self.succ)
        return hit

    def closure(self, seed, include_seed: bool) -> set:
        seen = set(seed) if include_seed else set()
        kept = {}  # discrete part -> states, for subsumption
        if self.subsume:
            for s in seen:
                kept.setdefault(s[:-1], []).append(s)
        frontier = deque(seed)
        expanded = set()
        while frontier:
            self.stats.peak_frontier = max(self.stats.peak_frontier, len(frontier))
            s = frontier.popleft()
            if s in expanded:
                continue
            expanded.add(s)
            for t in self.successors(s):
                if t in seen:
                    if t not in expanded:
                        frontier.append(t)
                    continue
                if self.subsume:
                    bucket = kept.setdefault(t[:-1], [])
                    if any(self.space.subsumes(o, t) for o in bucket):
                        continue
                    bucket.append(t)
                seen.add(t)
                frontier.append(t)
        return seen


def post_star(space, seed, explorer: Explorer | None = None) -> set:
    ex = explorer or Explorer(space)
    return ex.closure(set(seed), True)


def post_plus(space, seed, explorer: Explorer | None = None) -> set:
    ex = explorer or Explorer(space)
    return ex.closure(set(seed), False)


def accepting_cycle(ex: Explorer, init) -> bool:
    """Depth-first search that stops at the first reachable cycle through an accepting state.

    Strongly connected components are tracked with a stack of roots; a back edge merges the roots above
    its target and the merged component is accepting if any of them was. When it returns False every
    reachable state has been expanded by `ex`. Successors are tried accepting first, then by the
    space's optional `rank` (smaller first)."""
    accepting = ex.space.is_accepting
    rank = getattr(ex.space, "rank", None)

    def ordered(s):
        succ = ex.successors(s)
        if rank is None:
            return iter(succ)
        return iter(sorted(succ, key=lambda t: (not accepting(t), rank(t))))

    num = {}
    done = set()
    roots = []  # [dfs number, component holds an accepting state]
    order = []
    path = []
    num[init] = 0
    roots.append([0, accepting(init)])
    order.append(init)
    path.append((init, ordered(init)))
    while path:
        s, it = path[-1]
        t = next(it, None)
        if t is not None:
            if t not in num:
                num[t] = len(num)
                roots.append([num[t], accepting(t)])
                order.append(t)
                path.append((t, ordered(t)))
            elif t not in done:
                acc = False
                while roots[-1][0] > num[t]:
                    acc |= roots.pop()[1]
                roots[-1][1] |= acc
                if roots[-1][1]:
                    return True
            continue
        path.pop()
        if roots[-1][0] == num[s]:
            roots.pop()
            while True:
                u = order.pop()
                done.add(u)
                if u == s:
                    break
    return False


def check(space, timeout: float | None = None, subsume: bool = False, early: bool = True) -> tuple:
    """(language empty?, stats).

    With `early`, reachable states are first explored depth-first and the search stops at the first
    accepting cycle, which already witnesses nonemptiness. The fixpoint then only runs on languages
    that turn out empty."""
    start = time.monotonic()
    ex = Explorer(space, timeout, subsume)
    try:
        if early and not ex.subsume:
            if accepting_cycle(ex, space.initial()):
                return False, ex.stats
            reach = set(ex.succ)
        else:
            reach = ex.closure({space.initial()}, True)
        d = {s for s in reach if space.is_accepting(s)}
        while True:
            ex.stats.iterations += 1
            nd = {s for s in ex.closure(d, False) if space.is_accepting(s)} & d
            if nd == d:
                break
            d = nd
    finally:
        ex.stats.seconds = time.monotonic() - start
    return not d, ex.stats


def gfp_empty(space, timeout: float | None = None) -> bool:
    return check(space, timeout)[0]
