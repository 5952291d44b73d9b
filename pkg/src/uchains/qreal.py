"""Rationals, symbolic reals and the binary sieve.

A :class:`SymbolicReal` is a finite description of a set ``Z`` of rationals.
It stands for the real whose sieve section is ``Z``: the fractional binary
expansion has 0 at every even position, and 0 at position ``2n + 1`` exactly
when the n-th rational of the fixed enumeration belongs to ``Z``.
"""

from __future__ import annotations

import bisect
import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Optional, Union

from .ordinal import (
    ZERO, Ordinal, format_ordinal, ordinal, parse_ordinal,
)
from .wellorder import Seq, Point, Ladder, UnionOrder, canonical_node

Rat = Fraction

__all__ = [
    "Rat", "rat", "format_rat", "rat_of_index", "index_of",
    "FinitePoints", "AscendingLadder", "DescendingLadder", "WOBlock",
    "SymbolicReal", "EMPTY_SET", "ALL_RATIONALS",
    "BinaryExpansion", "encode_real", "decode_sieve",
    "InitialSegmentReport", "EXCEEDS_BUDGET", "initial_segment",
    "canonical_wo_set", "parse_real", "QRealError", "InvalidIntervalError",
    "UnresolvableDigitError",
]


class QRealError(ValueError):
    pass


class InvalidIntervalError(QRealError):
    pass


class UnresolvableDigitError(QRealError):
    pass


def rat(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, str):
        return Fraction(value.strip())
    if isinstance(value, float):
        raise TypeError("floats are not exact; pass a string or Fraction")
    return Fraction(value)


def format_rat(q: Fraction) -> str:
    """Reduced ``num/den`` form, always with a denominator."""
    return f"{q.numerator}/{q.denominator}"


# -- the fixed enumeration of Q ----------------------------------------------
#
# Index 0 is 0.  Index n >= 1 takes k = (n + 1) // 2 and the k-th positive
# rational of the Calkin-Wilf sequence (1, 1/2, 2, 1/3, 3/2, ...), positive for
# odd n and negated for even n.


def _calkin_wilf(k: int) -> Fraction:
    a, b = 1, 1
    for bit in bin(k)[3:]:
        if bit == "0":
            b = a + b
        else:
            a = a + b
    return Fraction(a, b)


def _calkin_wilf_index(q: Fraction) -> int:
    a, b = q.numerator, q.denominator
    bits = []
    while (a, b) != (1, 1):
        if a < b:
            bits.append("0")
            b -= a
        else:
            bits.append("1")
            a -= b
    return int("1" + "".join(reversed(bits)), 2)


def rat_of_index(n: int) -> Fraction:
    if n < 0:
        raise QRealError(f"negative index {n}")
    if n == 0:
        return Fraction(0)
    q = _calkin_wilf((n + 1) // 2)
    return q if n % 2 else -q


def index_of(q) -> int:
    q = rat(q)
    if q == 0:
        return 0
    k = _calkin_wilf_index(abs(q))
    return 2 * k - 1 if q > 0 else 2 * k


# -- blocks --------------------------------------------------------------------


@dataclass(frozen=True)
class FinitePoints:
    points: tuple

    def __post_init__(self):
        pts = tuple(sorted(set(rat(p) for p in self.points)))
        object.__setattr__(self, "points", pts)

    well_ordered = True

    @property
    def finite(self) -> bool:
        return True

    def node(self):
        return Seq(Point(p) for p in self.points) if self.points else None

    def contains(self, q) -> bool:
        return q in self.points

    def to_expr(self) -> str:
        return "fin{" + ",".join(format_rat(p) for p in self.points) + "}"


@dataclass(frozen=True)
class AscendingLadder:
    """``{limit - (limit - start)/(k + 1) : k >= 0}``, order type w."""

    start: Fraction
    limit: Fraction

    def __post_init__(self):
        object.__setattr__(self, "start", rat(self.start))
        object.__setattr__(self, "limit", rat(self.limit))
        if not self.start < self.limit:
            raise InvalidIntervalError("ascending ladder needs start < limit")

    well_ordered = True
    finite = False

    def node(self):
        return _ladder_node(self.start, self.limit)

    def contains(self, q) -> bool:
        return self.node().contains(q)

    def to_expr(self) -> str:
        return f"asc({format_rat(self.start)},{format_rat(self.limit)})"


@lru_cache(maxsize=4096)
def _ladder_node(a, b):
    return Ladder(a, b, "points")


@dataclass(frozen=True)
class DescendingLadder:
    """``{limit + (start - limit)/(k + 1) : k >= 0}``, a descending w-sequence."""

    limit: Fraction
    start: Fraction

    def __post_init__(self):
        object.__setattr__(self, "start", rat(self.start))
        object.__setattr__(self, "limit", rat(self.limit))
        if not self.limit < self.start:
            raise InvalidIntervalError("descending ladder needs limit < start")

    well_ordered = False
    finite = False

    def point(self, k: int) -> Fraction:
        return self.limit + (self.start - self.limit) / (k + 1)

    def contains(self, q) -> bool:
        q = rat(q)
        if not (self.limit < q <= self.start):
            return False
        r = (self.start - self.limit) / (q - self.limit)
        return r.denominator == 1

    def largest_below(self, r) -> Optional[Fraction]:
        """Greatest ladder point strictly below r (None if there is none)."""
        if r <= self.limit:
            return None
        if r > self.start:
            return self.start
        ratio = (self.start - self.limit) / (r - self.limit)
        k = ratio.numerator // ratio.denominator
        return self.point(k)

    def to_expr(self) -> str:
        return f"desc({format_rat(self.limit)},{format_rat(self.start)})"


@dataclass(frozen=True)
class WOBlock:
    """The canonical well-ordered set of type ``mu`` inside ``(lo, hi)``."""

    mu: Ordinal
    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        object.__setattr__(self, "mu", parse_ordinal(self.mu))
        object.__setattr__(self, "lo", rat(self.lo))
        object.__setattr__(self, "hi", rat(self.hi))
        if not self.lo < self.hi and not self.mu.is_zero:
            raise InvalidIntervalError(f"empty interval ({self.lo}, {self.hi})")

    well_ordered = True

    @property
    def finite(self) -> bool:
        return self.mu.is_finite

    def node(self):
        return canonical_node(self.mu, self.lo, self.hi)

    def contains(self, q) -> bool:
        n = self.node()
        return n is not None and n.contains(q)

    def to_expr(self) -> str:
        return f"wo({format_ordinal(self.mu)},({format_rat(self.lo)},{format_rat(self.hi)}))"


Block = Union[FinitePoints, AscendingLadder, DescendingLadder, WOBlock]


def _block_points(b) -> list:
    n = b.node()
    if n is None:
        return []
    return [n.element_at(ordinal(i)) for i in range(int(n.type))]


# -- symbolic reals ------------------------------------------------------------


@dataclass(frozen=True)
class SymbolicReal:
    """Union of blocks; with ``complement`` set, Q minus that union."""

    blocks: tuple = ()
    complement: bool = False

    def __post_init__(self):
        object.__setattr__(self, "blocks", tuple(self.blocks))

    def __add__(self, other: "SymbolicReal") -> "SymbolicReal":
        if self.complement or other.complement:
            raise QRealError("unions with complemented sets are not supported")
        return SymbolicReal(self.blocks + other.blocks)

    def contains(self, q) -> bool:
        q = rat(q)
        inside = any(b.contains(q) for b in self.blocks)
        return inside != self.complement

    __contains__ = contains

    @property
    def is_finite_description(self) -> bool:
        return all(b.finite for b in self.blocks)

    def finite_points(self) -> list:
        """All members of the block union, when it is finite."""
        if not self.is_finite_description:
            raise QRealError("block union is infinite")
        pts = set()
        for b in self.blocks:
            if isinstance(b, FinitePoints):
                pts.update(b.points)
            else:
                pts.update(_block_points(b))
        return sorted(pts)

    def _union(self) -> UnionOrder:
        return _union_order(self)

    @property
    def cut(self) -> Optional[Fraction]:
        """Least limit of a descending block; the well-ordered part lies at or below it."""
        lims = [b.limit for b in self.blocks if isinstance(b, DescendingLadder)]
        return min(lims) if lims else None

    def some_between(self, p=None, r=None) -> Optional[Fraction]:
        """Some member of Z in the open interval (p, r); ``None`` bounds are infinite."""
        if self.complement:
            return self._fresh_between(p, r)
        best = None
        u = self._union()
        if u.nodes:
            c = ZERO if p is None else u.count_le(p)
            if c < u.count_lt(r):
                best = u.element_at(c, bound=r)
        if best is not None:
            return best
        for b in self.blocks:
            if isinstance(b, DescendingLadder):
                hi = b.start + 1 if r is None else r
                q = b.largest_below(hi)
                if q is not None and (p is None or q > p):
                    return q
        return None

    def _fresh_between(self, p, r) -> Optional[Fraction]:
        lo = Fraction(p) if p is not None else (Fraction(r) - 1 if r is not None else Fraction(0))
        hi = Fraction(r) if r is not None else lo + 2
        if p is None and r is None:
            lo, hi = Fraction(-1), Fraction(1)
        for den in (7919, 7927, 7933, 104729):
            for j in range(1, 50):
                q = lo + (hi - lo) * Fraction(j, den)
                if not any(b.contains(q) for b in self.blocks):
                    return q
        return None

    def nonempty_between(self, p=None, r=None) -> bool:
        return self.some_between(p, r) is not None

    def to_expr(self) -> str:
        inner = "+".join(b.to_expr() for b in self.blocks) or "empty"
        if self.complement:
            return "Q" if not self.blocks else f"co({inner})"
        return inner

    def __str__(self):
        return self.to_expr()

    def to_json(self) -> dict:
        out = []
        for b in self.blocks:
            if isinstance(b, FinitePoints):
                out.append({"kind": "fin", "points": [format_rat(p) for p in b.points]})
            elif isinstance(b, AscendingLadder):
                out.append({"kind": "asc", "start": format_rat(b.start), "limit": format_rat(b.limit)})
            elif isinstance(b, DescendingLadder):
                out.append({"kind": "desc", "limit": format_rat(b.limit), "start": format_rat(b.start)})
            else:
                out.append({"kind": "wo", "mu": format_ordinal(b.mu),
                            "interval": [format_rat(b.lo), format_rat(b.hi)]})
        return {"blocks": out, "complement": self.complement}

    @classmethod
    def from_json(cls, data: dict) -> "SymbolicReal":
        blocks = []
        for d in data["blocks"]:
            kind = d["kind"]
            if kind == "fin":
                blocks.append(FinitePoints(tuple(rat(p) for p in d["points"])))
            elif kind == "asc":
                blocks.append(AscendingLadder(rat(d["start"]), rat(d["limit"])))
            elif kind == "desc":
                blocks.append(DescendingLadder(rat(d["limit"]), rat(d["start"])))
            elif kind == "wo":
                lo, hi = d["interval"]
                blocks.append(WOBlock(parse_ordinal(d["mu"]), rat(lo), rat(hi)))
            else:
                raise QRealError(f"unknown block kind {kind!r}")
        return cls(tuple(blocks), bool(data.get("complement", False)))


EMPTY_SET = SymbolicReal()
ALL_RATIONALS = SymbolicReal((), complement=True)


@lru_cache(maxsize=4096)
def _union_order(z: SymbolicReal) -> UnionOrder:
    return UnionOrder(b.node() for b in z.blocks if b.well_ordered)


# -- well-ordered initial segment ----------------------------------------------


class _Exceeds:
    def __repr__(self):
        return "EXCEEDS_BUDGET"

    __str__ = __repr__


EXCEEDS_BUDGET = _Exceeds()


class WellOrderedPart:
    """W = {q in Z : {p in Z : p <= q} is well-ordered}, with order queries.

    Below the least descending limit ``c`` every member of Z comes from a
    well-ordered block, while any member above ``c`` has a descending ladder
    under it.  So W is the union of the well-ordered blocks cut at ``c``.
    """

    def __init__(self, z: SymbolicReal):
        self.z = z
        self.empty = z.complement
        self._u = z._union()
        self.cut = z.cut

    def contains(self, q) -> bool:
        if self.empty:
            return False
        q = rat(q)
        if self.cut is not None and q > self.cut:
            return False
        return self._u.contains(q)

    @property
    def order_type(self) -> Ordinal:
        if self.empty or not self._u.nodes:
            return ZERO
        if self.cut is None:
            return self._u.order_type()
        return self._u.count_le(self.cut)

    def element_at(self, xi) -> Optional[Fraction]:
        """The xi-th element of W in increasing order (0-based), or None."""
        xi = ordinal(xi)
        if not xi < self.order_type:
            return None
        return self._u.element_at(xi)

    def position(self, q) -> Optional[Ordinal]:
        """Ordinal position of q in W, or None if q is not in W."""
        if not self.contains(q):
            return None
        return self._u.count_lt(rat(q))

    def count_below(self, r) -> Ordinal:
        """Order type of the members of W below r."""
        if self.empty or not self._u.nodes:
            return ZERO
        r = rat(r)
        c = self._u.count_lt(r)
        total = self.order_type
        return c if c < total else total


@lru_cache(maxsize=8192)
def well_ordered_part(z: SymbolicReal) -> WellOrderedPart:
    return WellOrderedPart(z)


@dataclass(frozen=True)
class InitialSegmentReport:
    order_type: object  # Ordinal or EXCEEDS_BUDGET
    part: WellOrderedPart = field(repr=False, compare=False)

    def element_at(self, xi) -> Optional[Fraction]:
        return self.part.element_at(xi)

    @property
    def exact_type(self) -> Ordinal:
        return self.part.order_type


def initial_segment(z: SymbolicReal, budget=None) -> InitialSegmentReport:
    part = well_ordered_part(z)
    t = part.order_type
    if budget is not None and not t < parse_ordinal(budget):
        return InitialSegmentReport(EXCEEDS_BUDGET, part)
    return InitialSegmentReport(t, part)


def canonical_wo_set(mu, interval) -> SymbolicReal:
    mu = parse_ordinal(mu)
    lo, hi = (rat(v) for v in interval)
    if mu.is_zero:
        return EMPTY_SET
    if not lo < hi:
        raise InvalidIntervalError(f"empty interval ({lo}, {hi})")
    return SymbolicReal((WOBlock(mu, lo, hi),))


# -- the sieve -----------------------------------------------------------------


_TWO_THIRDS = Fraction(2, 3)


class BinaryExpansion:
    """Fractional binary expansion of a real in [0, 1).

    Three forms: ``exact`` is a rational (its canonical expansion, never ending
    in all ones); ``sparse = (indices, present)`` is the sieve value of a finite
    or co-finite section, kept symbolic because Calkin-Wilf indices grow fast;
    ``digit_fn`` answers individual positions lazily.
    """

    MAX_COMPARE_DIGITS = 1 << 14
    MAX_EXACT_INDEX = 1 << 20

    def __init__(self, exact: Optional[Fraction] = None,
                 digit_fn: Optional[Callable[[int], Optional[int]]] = None,
                 source: Optional[SymbolicReal] = None,
                 sparse: Optional[tuple] = None):
        if sum(v is not None for v in (exact, digit_fn, sparse)) != 1:
            raise QRealError("give exactly one of exact, sparse or digit_fn")
        self._exact = exact
        self._digit_fn = digit_fn
        self._sparse = None
        if sparse is not None:
            indices, present = sparse
            self._sparse = (tuple(sorted(set(indices))), bool(present))
        self.source = source

    @property
    def is_exact(self) -> bool:
        return self._digit_fn is None

    @property
    def exact(self) -> Optional[Fraction]:
        """The rational value, or None for a stream."""
        if self._exact is None and self._sparse is not None:
            indices, present = self._sparse
            if indices and indices[-1] > self.MAX_EXACT_INDEX:
                raise QRealError(f"exact value needs {2 * indices[-1] + 1} binary digits")
            self._exact = _value_from_indices(indices, present)
        return self._exact

    def __repr__(self):
        if self._sparse is not None:
            return f"BinaryExpansion(sieve of {self.source})"
        if self._exact is not None:
            return f"BinaryExpansion({self._exact})"
        return f"BinaryExpansion(stream of {self.source})"

    def digit(self, pos: int) -> int:
        """Digit at position pos >= 1 (weight 2**-pos)."""
        if pos < 1:
            raise QRealError("digit positions start at 1")
        if self._sparse is not None:
            if pos % 2 == 0:
                return 0
            indices, present = self._sparse
            hit = _contains_sorted(indices, (pos - 1) // 2)
            return int(hit != present)
        if self._exact is not None:
            num, den = self._exact.numerator, self._exact.denominator
            # floor(2 * frac(x * 2^(pos-1))); modular power keeps huge positions cheap
            rem = num % den * pow(2, pos - 1, den) % den
            return 1 if 2 * rem >= den else 0
        d = self._digit_fn(pos)
        if d not in (0, 1):
            raise UnresolvableDigitError(f"digit {pos} cannot be decided")
        return d

    def digits(self, n: int) -> str:
        return "".join(str(self.digit(i)) for i in range(1, n + 1))

    def compare(self, p: Fraction) -> int:
        """Sign of (x - p), exact."""
        p = rat(p)
        if self._sparse is not None:
            return _compare_sparse(*self._sparse, p)
        if self._exact is not None:
            return (self._exact > p) - (self._exact < p)
        if p < 0:
            return 1
        if p >= 1:
            return -1
        num, den = p.numerator, p.denominator
        for pos in range(1, self.MAX_COMPARE_DIGITS + 1):
            num *= 2
            pd = 1 if num >= den else 0
            num -= pd * den
            xd = self.digit(pos)
            if xd != pd:
                return 1 if xd > pd else -1
            if num == 0:
                # p is dyadic; x > p iff a later digit of x is 1
                for later in range(pos + 1, self.MAX_COMPARE_DIGITS + 1):
                    if self.digit(later):
                        return 1
                break
        raise UnresolvableDigitError(f"no difference from {p} within {self.MAX_COMPARE_DIGITS} digits")


def _contains_sorted(seq: tuple, n: int) -> bool:
    i = bisect.bisect_left(seq, n)
    return i < len(seq) and seq[i] == n


def _compare_sparse(indices: tuple, present: bool, p: Fraction) -> int:
    # x = 2/3 - sum t_n (present) or sum t_n, with t_n = 2^-(2n+1); the terms
    # from n on sum to between t_n and 4/3 t_n, which settles most comparisons early
    sign = -1 if present else 1
    d = (_TWO_THIRDS - p) if present else -p
    for n in indices:
        if d == 0:
            return sign
        if 2 * n + 1 > d.denominator.bit_length() + 2:
            # the remaining terms sum to less than 1/den(d) <= |d|
            return (d > 0) - (d < 0)
        t = Fraction(1, 1 << (2 * n + 1))
        lo, hi = (d - t * Fraction(4, 3), d - t) if present else (d + t, d + t * Fraction(4, 3))
        if lo > 0:
            return 1
        if hi < 0:
            return -1
        d += sign * t
    return (d > 0) - (d < 0)


def _value_from_indices(indices, present: bool) -> Fraction:
    s = sum((Fraction(1, 1 << (2 * n + 1)) for n in indices), Fraction(0))
    return _TWO_THIRDS - s if present else s


def encode_real(z: SymbolicReal) -> BinaryExpansion:
    """The real whose sieve section is z (digit 0 at 2n+1 iff the n-th rational is in z)."""
    if z.is_finite_description:
        idx = [index_of(q) for q in z.finite_points()]
        # finite z: ones everywhere odd except idx; co-finite: zeros except idx
        return BinaryExpansion(sparse=(idx, not z.complement), source=z)

    def digit(pos: int) -> int:
        if pos % 2 == 0:
            return 0
        return 0 if z.contains(rat_of_index((pos - 1) // 2)) else 1

    return BinaryExpansion(digit_fn=digit, source=z)


def decode_sieve(x, r) -> bool:
    """Is r in the sieve section of x?"""
    r = rat(r)
    if isinstance(x, SymbolicReal):
        return x.contains(r)
    if isinstance(x, Fraction):
        x = BinaryExpansion(exact=x - (x.numerator // x.denominator))
    return x.digit(2 * index_of(r) + 1) == 0


# -- expression syntax ---------------------------------------------------------


def _split_top(text: str, sep: str) -> list:
    parts, depth, cur = [], 0, []
    for ch in text:
        if ch in "({[":
            depth += 1
        elif ch in ")}]":
            depth -= 1
        if ch == sep and depth == 0:
            parts.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    parts.append("".join(cur))
    return parts


_CALL = re.compile(r"^\s*(wo|asc|desc|co|fin)\s*([({])(.*)([)}])\s*$", re.S)


def parse_real(text: str) -> SymbolicReal:
    """Parse ``wo(mu,(a,b))``, ``fin{...}``, ``asc(a,b)``, ``desc(limit,start)``,
    ``empty``, ``Q`` and ``co(expr)``, joined with ``+``."""
    text = text.strip()
    if text in ("", "empty"):
        return EMPTY_SET
    if text == "Q":
        return ALL_RATIONALS
    pieces = _split_top(text, "+")
    if len(pieces) > 1:
        out = EMPTY_SET
        for piece in pieces:
            out = out + parse_real(piece)
        return out
    m = _CALL.match(text)
    if not m:
        raise QRealError(f"cannot parse symbolic real {text!r}")
    name, body = m.group(1), m.group(3)
    if name == "co":
        inner = parse_real(body)
        return SymbolicReal(inner.blocks, complement=True)
    if name == "fin":
        pts = [rat(p) for p in body.split(",") if p.strip()]
        return SymbolicReal((FinitePoints(tuple(pts)),))
    if name in ("asc", "desc"):
        a, b = (rat(v) for v in body.split(","))
        block = AscendingLadder(a, b) if name == "asc" else DescendingLadder(a, b)
        return SymbolicReal((block,))
    args = _split_top(body, ",")
    if len(args) != 2:
        raise QRealError(f"wo needs (mu,(a,b)): {text!r}")
    mu = parse_ordinal(args[0])
    iv = args[1].strip()
    if not (iv.startswith("(") and iv.endswith(")")):
        raise QRealError(f"bad interval in {text!r}")
    lo, hi = (rat(v) for v in iv[1:-1].split(","))
    return canonical_wo_set(mu, (lo, hi))
