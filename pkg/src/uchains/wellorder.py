"""Navigable well-ordered sets of rationals.

Every well-ordered block of a symbolic real is compiled to a tree of nodes:

* ``Point`` - a single rational;
* ``Seq`` - finitely many nodes with disjoint, increasing hulls;
* ``Ladder`` - omega many nodes, child k lying in ``[t_k, t_{k+1})`` with
  ``t_k = b - (b - a)/(k + 1)``, accumulating at ``b`` from below.

All queries are exact.  ``last_below(t)`` describes the elements below ``t``:
``None`` if there are none, ``("max", q)`` if ``q`` is the greatest of them,
``("lim", s)`` if they have no greatest element and supremum ``s``.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache

from .ordinal import (
    ONE, ZERO, Ordinal, add, left_subtract, omega_power, ordinal,
)

MAX = "max"
LIM = "lim"


class Point:
    __slots__ = ("q",)

    def __init__(self, q: Fraction):
        self.q = q

    type = ONE

    @property
    def lo(self):
        return self.q

    def all_below(self, t):
        return self.q < t

    def contains(self, q):
        return q == self.q

    def count_lt(self, t):
        return ONE if self.q < t else ZERO

    def element_at(self, xi):
        return self.q

    def last_below(self, t):
        return (MAX, self.q) if self.q < t else None

    def last_full(self):
        return (MAX, self.q)


class Seq:
    __slots__ = ("children", "type", "lo")

    def __init__(self, children):
        self.children = tuple(children)
        total = ZERO
        for c in self.children:
            total = add(total, c.type)
        self.type = total
        self.lo = self.children[0].lo

    def all_below(self, t):
        return self.children[-1].all_below(t)

    def _find(self, q):
        # index of the last child whose hull starts at or below q
        idx = -1
        for i, c in enumerate(self.children):
            if c.lo <= q:
                idx = i
            else:
                break
        return idx

    def contains(self, q):
        i = self._find(q)
        return i >= 0 and self.children[i].contains(q)

    def count_lt(self, t):
        total = ZERO
        for c in self.children:
            if c.all_below(t):
                total = add(total, c.type)
            else:
                return add(total, c.count_lt(t))
        return total

    def element_at(self, xi):
        for c in self.children:
            if xi < c.type:
                return c.element_at(xi)
            xi = left_subtract(c.type, xi)
        raise IndexError("position beyond the order type")

    def last_below(self, t):
        for c in reversed(self.children):
            if c.all_below(t):
                return c.last_full()
            r = c.last_below(t)
            if r is not None:
                return r
        return None

    def last_full(self):
        return self.children[-1].last_full()


class Ladder:
    """Omega many children accumulating at ``b``.

    ``mode`` is ``"points"`` (child k is the point t_k), ``"succ"`` (child k is
    the canonical set of type w^param) or ``"limit"`` (child k has type
    w^(param[k]) for the fundamental sequence of the limit exponent param).
    """

    __slots__ = ("a", "b", "mode", "param", "type", "_children")

    def __init__(self, a: Fraction, b: Fraction, mode: str, param: Ordinal | None = None):
        self.a, self.b, self.mode, self.param = a, b, mode, param
        if mode == "points":
            self.type = omega_power(1)
        elif mode == "succ":
            self.type = omega_power(add(param, ONE))
        else:
            self.type = omega_power(param)
        self._children = {}

    @property
    def lo(self):
        return self.a

    def boundary(self, k: int) -> Fraction:
        return self.b - (self.b - self.a) / (k + 1)

    def index_of(self, t: Fraction) -> int:
        # requires a <= t < b
        r = (self.b - self.a) / (self.b - t)
        return int(r.numerator // r.denominator) - 1

    def child_type(self, k: int) -> Ordinal:
        if self.mode == "points":
            return ONE
        if self.mode == "succ":
            return omega_power(self.param)
        return omega_power(self.param.fundamental(k))

    def prefix(self, k: int) -> Ordinal:
        """Order type of children 0..k-1."""
        if k == 0:
            return ZERO
        if self.mode == "points":
            return ordinal(k)
        if self.mode == "succ":
            return omega_power(self.param, k)
        return omega_power(self.param.fundamental(k - 1))

    def child(self, k: int):
        c = self._children.get(k)
        if c is None:
            if self.mode == "points":
                c = Point(self.boundary(k))
            else:
                c = canonical_node(self.child_type(k), self.boundary(k), self.boundary(k + 1))
            if len(self._children) < 4096:
                self._children[k] = c
        return c

    def all_below(self, t):
        return self.b <= t

    def contains(self, q):
        if not (self.a <= q < self.b):
            return False
        return self.child(self.index_of(q)).contains(q)

    def count_lt(self, t):
        if t >= self.b:
            return self.type
        if t <= self.a:
            return ZERO
        k = self.index_of(t)
        return add(self.prefix(k), self.child(k).count_lt(t))

    def element_at(self, xi: Ordinal):
        if self.mode == "points":
            return self.boundary(int(xi))
        if self.mode == "succ":
            if xi.is_zero or xi.leading_exponent < self.param:
                return self.child(0).element_at(xi)
            e, k = xi.terms[0]
            rest = Ordinal(xi.terms[1:])
            return self.child(k).element_at(rest)
        k = 0
        while not xi < self.prefix(k + 1):
            k += 1
        return self.child(k).element_at(left_subtract(self.prefix(k), xi))

    def last_below(self, t):
        if t >= self.b:
            return (LIM, self.b)
        if t <= self.a:
            return None
        k = self.index_of(t)
        r = self.child(k).last_below(t)
        if r is not None:
            return r
        if k > 0:
            return self.child(k - 1).last_full()
        return None

    def last_full(self):
        return (LIM, self.b)


@lru_cache(maxsize=65536)
def canonical_node(mu: Ordinal, a: Fraction, b: Fraction):
    """Node for the canonical well-ordered set of type mu inside (a, b); None if mu = 0."""
    if mu.is_zero:
        return None
    exps = [e for e, k in mu.terms for _ in range(k)]
    if len(exps) > 1:
        m = len(exps)
        width = (b - a) / m
        return Seq(canonical_node(omega_power(e), a + width * j, a + width * (j + 1))
                   for j, e in enumerate(exps))
    e = exps[0]
    if e.is_zero:
        return Point((a + b) / 2)
    if e.is_successor:
        return Ladder(a, b, "succ", e.predecessor())
    return Ladder(a, b, "limit", e)


def last_below(node, t):
    return node.last_full() if t is None else node.last_below(t)


def count_lt(node, t):
    return node.type if t is None else node.count_lt(t)


def _coeff(c: Ordinal, E: Ordinal) -> int:
    return c.terms[0][1] if not c.is_zero and c.leading_exponent == E else 0


def _head(c: Ordinal, E: Ordinal) -> Ordinal:
    return Ordinal(tuple((e, k) for e, k in c.terms if not e < E))


def _tail(c: Ordinal, E: Ordinal) -> Ordinal:
    return Ordinal(tuple((e, k) for e, k in c.terms if e < E))


def sup_before(node, gamma: Ordinal) -> Fraction:
    """Supremum of the elements at positions below the limit position gamma."""
    if gamma < node.type:
        return node.last_below(node.element_at(gamma))[1]
    return node.last_full()[1]


def is_limit_of(node, p, E: Ordinal) -> bool:
    """Whether every interval [q, p) with q < p meets the node in type >= w^E."""
    if node.last_below(p) != (LIM, p):
        return False
    return not node.count_lt(p).terms[-1][0] < E


class UnionOrder:
    """Order analysis of a finite union of well-ordered nodes.

    ``span(lo, t)`` is the order type of the union inside ``[lo, t)`` (``None``
    for an open end).  Let w^E be the largest leading power among the nodes.
    A union of finitely many sets meets [q, p) in type >= w^E exactly when one
    of them does, so the points closing a w^E block of the union are those of
    the nodes.  With K of them, the last one at L, the span is
    w^E * K + span(L, t), and the second part has smaller leading power.
    """

    def __init__(self, nodes):
        self.nodes = tuple(n for n in nodes if n is not None)
        self._cache: dict = {}

    def contains(self, q) -> bool:
        return any(n.contains(q) for n in self.nodes)

    def count_lt(self, t) -> Ordinal:
        return self.span(None, t)

    def order_type(self) -> Ordinal:
        return self.span(None, None)

    def count_le(self, q) -> Ordinal:
        c = self.count_lt(q)
        return add(c, ONE) if self.contains(q) else c

    def _parts(self, lo, t):
        out = []
        for n in self.nodes:
            base = ZERO if lo is None else n.count_lt(lo)
            c = left_subtract(base, count_lt(n, t))
            if not c.is_zero:
                out.append((n, base, c))
        return out

    @staticmethod
    def _finite_points(parts):
        """The largest part, and the sorted points of the others missing from it."""
        big = max(parts, key=_size)
        extra = set()
        for n, base, c in parts:
            if n is big[0]:
                continue
            for i in range(int(c)):
                q = n.element_at(add(base, ordinal(i)))
                if not big[0].contains(q):
                    extra.add(q)
        return big, sorted(extra)

    @staticmethod
    def _limits(parts, E):
        """Closing points of w^E blocks: the busiest node's, plus the others' it lacks.

        Returns ``(big, extra)``: ``big = (node, start, k)`` has its points at
        the positions start + w^E*i for 1 <= i <= k; ``extra`` maps each
        remaining point to a (node, position) closing there.
        """
        rows = [(n, _head(base, E), _coeff(c, E)) for n, base, c in parts]
        rows = [r for r in rows if r[2]]
        big = max(rows, key=lambda r: r[2])
        extra = {}
        for n, start, k in rows:
            if n is big[0]:
                continue
            for i in range(1, k + 1):
                pos = add(start, omega_power(E, i))
                p = sup_before(n, pos)
                if p not in extra and not is_limit_of(big[0], p, E):
                    extra[p] = (n, pos)
        return big, extra

    def span(self, lo, t) -> Ordinal:
        key = (lo, t)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        parts = self._parts(lo, t)
        if not parts:
            out = ZERO
        elif len(parts) == 1:
            out = parts[0][2]
        else:
            E = max(c.leading_exponent for _, _, c in parts)
            if E.is_zero:
                big, extra = self._finite_points(parts)
                out = ordinal(int(big[2]) + len(extra))
            else:
                (n, start, k), extra = self._limits(parts, E)
                last = max([sup_before(n, add(start, omega_power(E, k)))] + list(extra))
                out = add(omega_power(E, k + len(extra)), self.span(last, t))
        self._cache[key] = out
        return out

    def element_at(self, xi: Ordinal, bound=None) -> Fraction:
        """The xi-th element (0-based) among the elements below ``bound``."""
        if not xi < self.count_lt(bound):
            raise IndexError(f"position {xi} beyond the order type")
        lo, t = None, bound
        while True:
            parts = self._parts(lo, t)
            if len(parts) == 1:
                n, base, _ = parts[0]
                return n.element_at(add(base, xi))
            E = max(c.leading_exponent for _, _, c in parts)
            if E.is_zero:
                (n, base, _), extra = self._finite_points(parts)
                before = 0
                for f in extra:
                    pos = int(left_subtract(base, n.count_lt(f))) + before
                    if pos == int(xi):
                        return f
                    if pos > int(xi):
                        break
                    before += 1
                return n.element_at(add(base, ordinal(int(xi) - before)))
            (n, start, k), extra = self._limits(parts, E)
            head = omega_power(E, k + len(extra))
            if not xi < head:
                lo = max([sup_before(n, add(start, omega_power(E, k)))] + list(extra))
                xi = left_subtract(head, xi)
                continue
            j = _coeff(xi, E)

            def nth(m):
                # m-th closing point (1-based) with a node and position closing there
                before = 0
                for f in sorted(extra):
                    hd = _head(n.count_lt(f), E)
                    r = _coeff(left_subtract(start, hd), E) + before + 1
                    if r == m:
                        return f, extra[f]
                    if r > m:
                        break
                    before += 1
                pos = add(start, omega_power(E, m - before))
                return sup_before(n, pos), (n, pos)

            a = lo if j == 0 else nth(j)[0]
            _, (m_node, pos) = nth(j + 1)
            xi = _tail(xi, E)
            t = self._cut_block(m_node, pos, a, xi)
            lo = a

    def _cut_block(self, node, pos, a, xi):
        """A point q of the node below its limit at ``pos`` with xi < span(a, q)."""
        e, k = pos.terms[-1]
        prev = Ordinal(pos.terms[:-1] + (((e, k - 1),) if k > 1 else ()))

        def point(m):
            step = omega_power(e.predecessor(), m) if e.is_successor else omega_power(e.fundamental(m))
            return node.element_at(add(prev, step))

        def enough(m):
            q = point(m)
            return (a is None or q > a) and xi < self.span(a, q)

        if not e.is_successor:
            m = 0
            while not enough(m):
                m += 1
            return point(m)
        hi = 1
        while not enough(hi):
            hi *= 2
        lo_m = hi // 2
        while lo_m + 1 < hi:
            mid = (lo_m + hi) // 2
            if enough(mid):
                hi = mid
            else:
                lo_m = mid
        return point(hi)


def _size(part):
    return part[2]
