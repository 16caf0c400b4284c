"""Zone abstraction of the marked product: DBMs over clock pairs (x_i, y_i) bracketing each copy.

Bounds are packed integers: (c, <) is 2c and (c, <=) is 2c+1, with INF for "no bound".
Clock 0 is the reference clock, then the TA clocks, then x_i and y_i for each pair i;
x_i is the smallest clock value of the copy and y_i the largest.
"""

from __future__ import annotations

import itertools
from typing import NamedTuple

from .ocata import Verdict
from .product import ModelError, Product

INF = 1 << 60
LE0 = 1  # (0, <=)


def bound(c: int, strict: bool = False) -> int:
    return 2 * c + (0 if strict else 1)


def add(e1: int, e2: int) -> int:
    if e1 >= INF or e2 >= INF:
        return INF
    return e1 + e2 - ((e1 | e2) & 1)


def unpack(e: int) -> tuple:
    """(constant, strict) of a packed bound; INF maps to (None, True)."""
    if e >= INF:
        return None, True
    return e >> 1, not (e & 1)


class Zone(NamedTuple):
    pairs: tuple  # (location, marker) per clock pair
    ta_loc: str | None
    ta_mark: bool
    untimed: tuple  # (location, marker) in reduced mode
    dbm: tuple  # row-major n*n packed bounds

    @property
    def size(self) -> int:
        return 1 + len(self.pairs) * 2 + self.nta

    @property
    def nta(self) -> int:
        n = int(round(len(self.dbm) ** 0.5))
        return n - 1 - 2 * len(self.pairs)


def matrix(z: Zone) -> list:
    n = int(round(len(z.dbm) ** 0.5))
    return [list(z.dbm[i * n : (i + 1) * n]) for i in range(n)]


def flatten(d) -> tuple:
    return tuple(itertools.chain.from_iterable(d))


def close(d) -> bool:
    """Floyd-Warshall in place; False when the zone is empty."""
    n = len(d)
    for k in range(n):
        dk = d[k]
        for i in range(n):
            dik = d[i][k]
            if dik >= INF:
                continue
            di = d[i]
            for j in range(n):
                e = add(dik, dk[j])
                if e < di[j]:
                    di[j] = e
        if d[k][k] < LE0:
            return False
    return all(d[i][i] >= LE0 for i in range(n))


def constrain(d, i: int, j: int, e: int) -> bool:
    """Add x_i - x_j <= e to a closed DBM, keeping it closed; False when it becomes empty."""
    if e >= d[i][j]:
        return True
    if add(e, d[j][i]) < LE0:
        return False
    d[i][j] = e
    n = len(d)
    for a in range(n):
        dai = d[a][i]
        if dai >= INF:
            continue
        via = add(dai, e)
        da = d[a]
        for b in range(n):
            cand = add(via, d[j][b])
            if cand < da[b]:
                da[b] = cand
    return True


def reset(d, i: int):
    n = len(d)
    for k in range(n):
        d[i][k] = d[0][k]
        d[k][i] = d[k][0]
    d[i][i] = LE0


def up(d):
    for i in range(1, len(d)):
        d[i][0] = INF


def apply_atom(d, clock: int, op: str, c: int) -> bool:
    if op == "<=":
        return constrain(d, clock, 0, bound(c))
    if op == "<":
        return constrain(d, clock, 0, bound(c, True))
    if op == ">=":
        return constrain(d, 0, clock, bound(-c))
    if op == ">":
        return constrain(d, 0, clock, bound(-c, True))
    raise ValueError(op)


def implied(d, clock: int, op: str, c: int) -> bool:
    """The closed DBM entails the atom on `clock`."""
    if op == "<=":
        return d[clock][0] <= bound(c)
    if op == "<":
        return d[clock][0] <= bound(c, True)
    if op == ">=":
        return d[0][clock] <= bound(-c)
    if op == ">":
        return d[0][clock] <= bound(-c, True)
    raise ValueError(op)


def free(d, i: int):
    """Forget every constraint on clock i except i >= 0; keeps a closed DBM closed."""
    for j in range(len(d)):
        if j != i:
            d[i][j] = INF
            d[j][i] = d[j][0]
    d[i][i] = LE0


def extrapolate_matrix(d, cmax: int):
    hi, lo = bound(cmax), bound(-cmax, True)
    changed = False
    for i, row in enumerate(d):
        for j, e in enumerate(row):
            if i == j:
                continue
            if e < INF and e > hi:
                row[j] = INF
                changed = True
            elif e < lo:
                row[j] = lo
                changed = True
    if changed:
        close(d)


def select(d, keep: list) -> list:
    return [[d[i][j] for j in keep] for i in keep]


def zero_matrix(n: int) -> list:
    return [[LE0] * n for _ in range(n)]


# ---------------------------------------------------------------- zone operations


def initial_zone(product: Product) -> Zone:
    a, b = product.a, product.b
    nta = len(b.clocks) if b is not None else 0
    ta_loc = b.initial if b is not None else None
    ta_mark = b.initial in b.accepting if b is not None else True
    if a.initial in product.ltl:
        pairs, untimed = (), ((a.initial, False),)
    else:
        pairs, untimed = ((a.initial, False),), ()
    n = 1 + nta + 2 * len(pairs)
    return Zone(pairs, ta_loc, ta_mark, untimed, flatten(zero_matrix(n)))


def post_time(z: Zone) -> Zone:
    d = matrix(z)
    up(d)
    return z._replace(dbm=flatten(d))


def extrapolate(z: Zone, cmax: int) -> Zone:
    d = matrix(z)
    extrapolate_matrix(d, cmax)
    return z._replace(dbm=flatten(d))


def zone_accepting(z: Zone) -> bool:
    return z.ta_mark and all(m for _, m in z.pairs) and all(m for _, m in z.untimed)


def zone_subsumes(z1: Zone, z2: Zone) -> bool:
    if z1[:4] != z2[:4]:
        return False
    return all(e2 <= e1 for e1, e2 in zip(z1.dbm, z2.dbm))


def zone_empty(z: Zone) -> bool:
    d = matrix(z)
    return not close(d)


def contains_point(z: Zone, values) -> bool:
    """values[k] is the value of clock k (values[0] must be 0)."""
    n = len(values)
    for i in range(n):
        for j in range(n):
            e = z.dbm[i * n + j]
            if e >= INF:
                continue
            c, strict = unpack(e)
            diff = values[i] - values[j]
            if diff > c or (strict and diff == c):
                return False
    return True


class ZoneEngine:
    """Discrete and time successors of zones for a marked product."""

    def __init__(self, product: Product):
        self.product = product
        self.a = product.a
        self.b = product.b
        self.k = product.k
        self.capacity = product.k // 2
        self.nta = len(self.b.clocks) if self.b is not None else 0
        self.cmax = product.cmax
        self.max_clocks = 0 if self.a.initial in product.ltl else 2
        for (loc, s), arcs in self.a.delta.items():
            for arc in arcs:
                if loc in product.ltl:
                    continue
                if arc.targets_keep - {loc}:
                    raise ModelError("zones need keep targets to stay in the source location")

    def xi(self, i: int) -> int:
        return 1 + self.nta + 2 * i

    def _dead(self, d, pairs) -> bool:
        p = self.product
        for i, (loc, _) in enumerate(pairs):
            t = p.dead.get(loc)
            if t is None:
                continue
            c, strict = unpack(d[0][self.xi(i) + 1])  # 0 - y <= c
            if c is None:
                continue
            low = -c
            if low > t[0] or (low == t[0] and (strict or t[1])):
                return True
        return False

    def _arcs(self, loc, letter):
        return [arc for arc in self.a.arcs(loc, letter) if arc.verdict is not Verdict.REJECT]

    def initial(self) -> Zone:
        return self.finish(post_time(initial_zone(self.product)))

    def finish(self, z: Zone) -> Zone:
        d = matrix(z)
        extrapolate_matrix(d, self.cmax)
        # clocks of copies in clock-blind locations are never read again; keep only 0 <= x <= y
        blind = self.product.blind
        for i, (loc, _) in enumerate(z.pairs):
            if loc in blind:
                x = self.xi(i)
                free(d, x)
                free(d, x + 1)
                constrain(d, x, x + 1, LE0)
        return z._replace(dbm=flatten(d))

    def post_discrete(self, z: Zone, letter: str) -> list:
        pairs, ta_mark, untimed = z.pairs, z.ta_mark, z.untimed
        if zone_accepting(z):
            pairs = tuple((l, False) for l, _ in pairs)
            untimed = tuple((l, False) for l, _ in untimed)
            ta_mark = False
        base = matrix(z)
        if self._dead(base, pairs):
            return []
        if self.b is not None:
            moves = [e for e in self.b.out(z.ta_loc, letter)]
        else:
            moves = [None]
        pair_opts = []
        for loc, _ in pairs:
            arcs = self._arcs(loc, letter)
            if not arcs:
                return []
            pair_opts.append(arcs)
        untimed_opts = []
        for loc, _ in untimed:
            arcs = self._arcs(loc, letter)
            if not arcs:
                return []
            untimed_opts.append(arcs)
        out = []
        for move in moves:
            d0 = [row[:] for row in base]
            if move is not None and not all(apply_atom(d0, 1 + i, op, c) for i, op, c in move.guard):
                continue
            # depth-first over per-pair arcs, pruning as soon as the guards empty the zone
            stack = [(0, d0, ())]
            while stack:
                i, d, pick = stack.pop()
                if i == len(pair_opts):
                    if self._dominated(d, pick, pair_opts):
                        continue
                    for upick in itertools.product(*untimed_opts):
                        out += self._combine(d, pairs, pick, untimed, upick, move, ta_mark)
                    continue
                x = self.xi(i)
                for arc in reversed(pair_opts[i]):
                    if not arc.guard:
                        stack.append((i + 1, d, pick + (arc,)))
                        continue
                    d1 = [row[:] for row in d]
                    if all(apply_atom(d1, x, g.op, g.bound) and apply_atom(d1, x + 1, g.op, g.bound) for g in arc.guard):
                        stack.append((i + 1, d1, pick + (arc,)))
        return out

    def _dominated(self, d, pick, pair_opts) -> bool:
        """Some pair could take an arc with strictly fewer targets that is enabled on the whole zone."""
        for i, arc in enumerate(pick):
            x = self.xi(i)
            for other in pair_opts[i]:
                if other is arc or not (other.targets_keep <= arc.targets_keep and other.targets_reset <= arc.targets_reset):
                    continue
                if other.targets_keep == arc.targets_keep and other.targets_reset == arc.targets_reset:
                    continue
                if all(implied(d, x, g.op, g.bound) and implied(d, x + 1, g.op, g.bound) for g in other.guard):
                    return True
        return False

    def _collapse_above(self, d, pairs) -> tuple:
        """Keep one pair per location among pairs no guard can tell apart (marker: conjunction).

        That covers pairs wholly above the location's constant, pairs of clock-blind locations and pairs
        the zone forces equal to an earlier pair of the same location."""
        first, drop, marks = {}, set(), {}
        limit = bound(-self.cmax, True)
        blind = self.product.blind
        for i, (loc, m) in enumerate(pairs):
            if loc in blind or d[0][self.xi(i)] <= limit:
                if loc in first:
                    drop.add(i)
                    marks[first[loc]] = marks[first[loc]] and m
                else:
                    first[loc] = i
                    marks[i] = m
        for i, (loc, m) in enumerate(pairs):
            if i in drop:
                continue
            x = self.xi(i)
            for j in range(i):
                y = self.xi(j)
                if j in drop or pairs[j][0] != loc:
                    continue
                if d[x][y] == d[y][x] == d[x + 1][y + 1] == d[y + 1][x + 1] == LE0:
                    drop.add(i)
                    marks[j] = marks.get(j, pairs[j][1]) and marks.get(i, m)
                    break
        if not drop:
            return d, pairs
        order = list(range(1 + self.nta))
        kept = []
        for i, (loc, m) in enumerate(pairs):
            if i in drop:
                continue
            order += [self.xi(i), self.xi(i) + 1]
            kept.append((loc, marks.get(i, m)))
        return select(d, order), kept

    def _combine(self, d, pairs, pick, untimed, upick, move, ta_mark) -> list:
        a, ltl = self.a, self.product.ltl
        accepting = a.accepting
        looping = [i for i, arc in enumerate(pick) if pairs[i][0] in arc.targets_keep]
        contrib = {}  # timed reset target -> markers of contributors
        present = {}  # untimed location -> marker
        sources = [(pairs[i][1], arc) for i, arc in enumerate(pick)] + [(m, arc) for (_, m), arc in zip(untimed, upick)]
        for m, arc in sources:
            for t in arc.targets_reset:
                if t in ltl:
                    present[t] = present.get(t, True) and m
                else:
                    contrib.setdefault(t, set()).add(m)
            for t in arc.targets_keep:
                if t in ltl:
                    present[t] = present.get(t, True) and m
        new_untimed = tuple(sorted((l, m or l in accepting) for l, m in present.items()))
        keep_pairs = []
        for i in looping:
            loc, m = pairs[i]
            keep_pairs.append([loc, m or loc in accepting, i])
        # each reset target either gets a fresh pair or merges into its smallest looping pair
        targets = sorted(contrib)
        options = []
        for t in targets:
            opts = [("fresh",)]
            same = [j for j, kp in enumerate(keep_pairs) if kp[0] == t]
            opts += [("merge", j, same) for j in same]
            options.append(opts)
        results = []
        for choice in itertools.product(*options):
            fresh = sum(1 for c in choice if c[0] == "fresh")
            if len(keep_pairs) + fresh > self.capacity:
                continue
            merged = [c[1] for c in choice if c[0] == "merge"]
            if len(set(merged)) != len(merged):
                continue
            dd = [row[:] for row in d]
            kp = [p[:] for p in keep_pairs]
            ok = True
            for t, c in zip(targets, choice):
                if c[0] != "merge":
                    continue
                j, same = c[1], c[2]
                xj = self.xi(kp[j][2])
                for o in same:
                    if o != j and not constrain(dd, xj, self.xi(kp[o][2]), LE0):
                        ok = False
                        break
                if not ok:
                    break
            if not ok:
                continue
            new_pairs = []
            for t, c in zip(targets, choice):
                pending = False in contrib[t]
                if c[0] == "merge":
                    p = kp[c[1]]
                    reset(dd, self.xi(p[2]))
                    p[1] = t in accepting or (p[1] and not pending)
                else:
                    new_pairs.append((t, t in accepting or not pending))
            if move is not None:
                for ci in move.reset:
                    reset(dd, 1 + ci)
            order = list(range(1 + self.nta))
            final_pairs = []
            for loc, m, i in kp:
                order += [self.xi(i), self.xi(i) + 1]
                final_pairs.append((loc, m))
            d2 = select(dd, order)
            for loc, m in new_pairs:
                n = len(d2)
                for row in d2:
                    row += [row[0], row[0]]
                d2.append(d2[0][:n] + [LE0, LE0])
                d2.append(d2[0][:n] + [LE0, LE0])
                d2[n][n] = d2[n][n + 1] = d2[n + 1][n] = d2[n + 1][n + 1] = LE0
                final_pairs.append((loc, m))
            d2, final_pairs = self._collapse_above(d2, final_pairs)
            if self._dead(d2, final_pairs):
                continue
            ta_loc = move.target if move is not None else None
            tm = ta_mark or (move is not None and move.target in self.b.accepting)
            if move is None:
                tm = True
            if 2 * len(final_pairs) > self.max_clocks:
                self.max_clocks = 2 * len(final_pairs)
            results.append(self.canonical(d2, final_pairs, ta_loc, tm, new_untimed))
        return results

    def canonical(self, d, pairs, ta_loc, ta_mark, untimed) -> Zone:
        """Order pairs by location, then by clock order within a location."""
        base = 1 + self.nta

        def key(i):
            loc, m = pairs[i]
            x = base + 2 * i
            below = sum(1 for j, (l2, _) in enumerate(pairs) if l2 == loc and j != i and d[base + 2 * j][x] <= LE0)
            return (loc, below, m, tuple(d[x]), tuple(row[x] for row in d))

        perm = sorted(range(len(pairs)), key=key)
        order = list(range(base)) + [base + 2 * i + k for i in perm for k in (0, 1)]
        d2 = select(d, order)
        return Zone(tuple(pairs[i] for i in perm), ta_loc, ta_mark, untimed, flatten(d2))

    def successors(self, z: Zone) -> set:
        out = set()
        for letter in self.product.alphabet:
            for nz in self.post_discrete(z, letter):
                out.add(self.finish(post_time(nz)))
        return out


class ZoneSpace:
    def __init__(self, product: Product):
        self.engine = ZoneEngine(product)

    def initial(self) -> Zone:
        return self.engine.initial()

    def successors(self, z: Zone) -> set:
        return self.engine.successors(z)

    def rank(self, z: Zone) -> int:
        return len(z.pairs)

    def is_accepting(self, z: Zone) -> bool:
        return zone_accepting(z)

    def subsumes(self, z1: Zone, z2: Zone) -> bool:
        return zone_subsumes(z1, z2)

    @property
    def max_clocks(self) -> int:
        return self.engine.max_clocks


def post_discrete(z: Zone, product: Product, letter: str | None = None) -> list:
    eng = ZoneEngine(product)
    letters = [letter] if letter is not None else product.alphabet
    return [nz for s in letters for nz in eng.post_discrete(z, s)]


def dump(z: Zone, names=None) -> str:
    names = names or (lambda loc: f"l{loc}")
    n = int(round(len(z.dbm) ** 0.5))
    nta = n - 1 - 2 * len(z.pairs)
    mark = lambda b: "T" if b else "F"
    clocks = ["0"] + [f"t{i + 1}" for i in range(nta)]
    for i in range(len(z.pairs)):
        clocks += [f"x{i + 1}", f"y{i + 1}"]
    lines = ["loc_a: " + " ".join(f"({names(l)},{mark(m)})" for l, m in z.pairs)]
    lines.append(f"loc_b: ({z.ta_loc},{mark(z.ta_mark)})")
    if z.untimed:
        lines.append("untimed: " + " ".join(f"({names(l)},{mark(m)})" for l, m in z.untimed))

    def cell(e):
        if e >= INF:
            return "inf"
        c, strict = unpack(e)
        return f"{'<' if strict else '<='}{c}"

    lines.append("      " + " ".join(f"{c:>6}" for c in clocks))
    for i in range(n):
        lines.append(f"{clocks[i]:>6}" + " ".join(f"{cell(z.dbm[i * n + j]):>6}" for j in range(n)))
    return "\n".join(lines)
