"""Ordinal notations below epsilon_0 in Cantor normal form.

An :class:`Ordinal` is a tuple of ``(exponent, coefficient)`` terms with
strictly decreasing exponents and positive coefficients.  Exponents are
themselves ordinals, so the notation nests.  Text syntax is ``w^{E}*k + ...``,
for example ``w^2*3+w+5`` or ``w^{w+1}``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import IntEnum
from typing import Iterable, Iterator, Sequence, Union

__all__ = [
    "Ordinal",
    "OrdinalError",
    "InvalidOrdinalError",
    "EmptyDomainError",
    "InsufficientEnumerationError",
    "Cmp",
    "ZERO",
    "ONE",
    "OMEGA",
    "ordinal",
    "normalize",
    "compare",
    "add",
    "left_subtract",
    "omega_power",
    "enumerate_below",
    "iter_below",
    "parse_ordinal",
    "format_ordinal",
    "enumeration_index",
    "fold_sum",
    "ChainPosition",
    "LengthAudit",
    "interleaved_length",
]


class OrdinalError(ValueError):
    pass


class InvalidOrdinalError(OrdinalError):
    pass


class EmptyDomainError(OrdinalError):
    pass


class InsufficientEnumerationError(OrdinalError):
    pass


class Cmp(IntEnum):
    LT = -1
    EQ = 0
    GT = 1


OrdLike = Union["Ordinal", int]


@dataclass(frozen=True, eq=False)
class Ordinal:
    terms: tuple = ()

    # identity and hashing are structural; CNF is unique so this is ordinal equality
    def __eq__(self, other):
        if isinstance(other, int) and not isinstance(other, bool):
            other = ordinal(other)
        if not isinstance(other, Ordinal):
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        return hash(self.terms)

    def __lt__(self, other):
        return compare(self, other) is Cmp.LT

    def __le__(self, other):
        return compare(self, other) is not Cmp.GT

    def __gt__(self, other):
        return compare(self, other) is Cmp.GT

    def __ge__(self, other):
        return compare(self, other) is not Cmp.LT

    def __add__(self, other):
        if isinstance(other, (Ordinal, int)):
            return add(self, other)
        return NotImplemented

    def __radd__(self, other):
        if isinstance(other, int):
            return add(other, self)
        return NotImplemented

    def __bool__(self):
        return bool(self.terms)

    def __str__(self):
        return format_ordinal(self)

    def __repr__(self):
        return f"Ordinal({format_ordinal(self)!r})"

    # -- structure ---------------------------------------------------------

    @property
    def is_zero(self) -> bool:
        return not self.terms

    @property
    def is_finite(self) -> bool:
        return not self.terms or (len(self.terms) == 1 and self.terms[0][0].is_zero)

    @property
    def is_successor(self) -> bool:
        return bool(self.terms) and self.terms[-1][0].is_zero

    @property
    def is_limit(self) -> bool:
        return bool(self.terms) and not self.terms[-1][0].is_zero

    @property
    def finite_part(self) -> int:
        if self.terms and self.terms[-1][0].is_zero:
            return self.terms[-1][1]
        return 0

    @property
    def limit_part(self) -> "Ordinal":
        if self.is_successor:
            return Ordinal(self.terms[:-1])
        return self

    @property
    def leading_exponent(self) -> "Ordinal":
        if not self.terms:
            raise InvalidOrdinalError("0 has no leading exponent")
        return self.terms[0][0]

    @property
    def last_exponent(self) -> "Ordinal":
        if not self.terms:
            raise InvalidOrdinalError("0 has no last exponent")
        return self.terms[-1][0]

    def __int__(self):
        if not self.is_finite:
            raise InvalidOrdinalError(f"{self} is infinite")
        return self.finite_part

    def predecessor(self) -> "Ordinal":
        if not self.is_successor:
            raise InvalidOrdinalError(f"{self} is not a successor")
        e, k = self.terms[-1]
        rest = self.terms[:-1]
        return Ordinal(rest + ((e, k - 1),) if k > 1 else rest)

    def succ(self) -> "Ordinal":
        return add(self, ONE)

    def fundamental(self, k: int) -> "Ordinal":
        """k-th member of the standard fundamental sequence of a limit ordinal."""
        if not self.is_limit:
            raise InvalidOrdinalError(f"{self} is not a limit")
        e, c = self.terms[-1]
        head = Ordinal(self.terms[:-1] + (((e, c - 1),) if c > 1 else ()))
        if e.is_successor:
            return add(head, omega_power(e.predecessor(), k + 1))
        return add(head, omega_power(e.fundamental(k)))

    def omega_times(self) -> "Ordinal":
        """Left multiplication by omega: w * self."""
        return Ordinal(tuple((add(ONE, e), k) for e, k in self.terms))

    def divmod_omega(self) -> tuple["Ordinal", int]:
        """Split self = w*q + m with m finite."""
        q = []
        for e, k in self.terms:
            if e.is_zero:
                continue
            q.append((e.predecessor() if e.is_finite else e, k))
        return Ordinal(tuple(q)), self.finite_part


def ordinal(value: OrdLike) -> Ordinal:
    if isinstance(value, Ordinal):
        return value
    if isinstance(value, bool) or not isinstance(value, int):
        raise TypeError(f"cannot make an ordinal from {value!r}")
    if value < 0:
        raise InvalidOrdinalError(f"negative ordinal {value}")
    return ZERO if value == 0 else Ordinal(((ZERO, value),))


def omega_power(exponent: OrdLike, coefficient: int = 1) -> Ordinal:
    if coefficient < 0:
        raise InvalidOrdinalError("negative coefficient")
    if coefficient == 0:
        return ZERO
    return Ordinal(((ordinal(exponent), coefficient),))


def compare(a: OrdLike, b: OrdLike) -> Cmp:
    a, b = ordinal(a), ordinal(b)
    for (ea, ka), (eb, kb) in zip(a.terms, b.terms):
        c = compare(ea, eb)
        if c is not Cmp.EQ:
            return c
        if ka != kb:
            return Cmp.LT if ka < kb else Cmp.GT
    la, lb = len(a.terms), len(b.terms)
    if la == lb:
        return Cmp.EQ
    return Cmp.LT if la < lb else Cmp.GT


def add(a: OrdLike, b: OrdLike) -> Ordinal:
    a, b = ordinal(a), ordinal(b)
    if not b.terms:
        return a
    eb, kb = b.terms[0]
    head = []
    for e, k in a.terms:
        c = compare(e, eb)
        if c is Cmp.GT:
            head.append((e, k))
        elif c is Cmp.EQ:
            kb += k
            break
        else:
            break
    return Ordinal(tuple(head) + ((eb, kb),) + b.terms[1:])


def left_subtract(a: OrdLike, b: OrdLike) -> Ordinal:
    """The unique d with a + d == b; requires a <= b."""
    a, b = ordinal(a), ordinal(b)
    if a > b:
        raise InvalidOrdinalError(f"{a} > {b}")
    i = 0
    while i < len(a.terms) and a.terms[i] == b.terms[i]:
        i += 1
    if i == len(a.terms):
        return Ordinal(b.terms[i:])
    ea, ka = a.terms[i]
    eb, kb = b.terms[i]
    if compare(ea, eb) is Cmp.LT:
        return Ordinal(b.terms[i:])
    return Ordinal(((eb, kb - ka),) + b.terms[i + 1:])


def normalize(raw_terms: Iterable[tuple[OrdLike, int]]) -> Ordinal:
    """Sum w^e * k over the raw terms left to right, yielding CNF."""
    total = ZERO
    for e, k in raw_terms:
        if k < 0:
            raise InvalidOrdinalError(f"negative coefficient {k}")
        total = add(total, omega_power(e, k))
    return total


ZERO = Ordinal(())
ONE = Ordinal(((ZERO, 1),))
OMEGA = Ordinal(((ONE, 1),))


# -- text syntax -------------------------------------------------------------


def _format_exponent(e: Ordinal) -> str:
    s = format_ordinal(e)
    if e.is_finite or e == OMEGA:
        return s
    return "{" + s + "}"


def format_ordinal(a: Ordinal) -> str:
    if not a.terms:
        return "0"
    parts = []
    for e, k in a.terms:
        if e.is_zero:
            parts.append(str(k))
            continue
        base = "w" if e == ONE else f"w^{_format_exponent(e)}"
        parts.append(base if k == 1 else f"{base}*{k}")
    return "+".join(parts)


_TOKEN = re.compile(r"\s*(\d+|[wω]|\^|\*|\+|\{|\}|\(|\))")


def _tokenize(text: str) -> list[str]:
    pos, out = 0, []
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise InvalidOrdinalError(f"bad ordinal syntax at {pos}: {text!r}")
        tok = m.group(1)
        out.append("w" if tok == "ω" else tok)
        pos = m.end()
    return out


class _Parser:
    def __init__(self, tokens):
        self.toks = tokens
        self.i = 0

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else None

    def take(self, expect=None):
        tok = self.peek()
        if tok is None or (expect is not None and tok != expect):
            raise InvalidOrdinalError(f"expected {expect or 'token'}, got {tok!r}")
        self.i += 1
        return tok

    def sum(self) -> Ordinal:
        total = self.term()
        while self.peek() == "+":
            self.take("+")
            total = add(total, self.term())
        return total

    def term(self) -> Ordinal:
        tok = self.peek()
        if tok is not None and tok.isdigit():
            base = ordinal(int(self.take()))
        elif tok == "w":
            self.take()
            exp = ONE
            if self.peek() == "^":
                self.take()
                nxt = self.peek()
                if nxt in ("{", "("):
                    self.take()
                    exp = self.sum()
                    self.take("}" if nxt == "{" else ")")
                elif nxt == "w":
                    self.take()
                    exp = OMEGA
                else:
                    exp = ordinal(int(self.take()))
            base = omega_power(exp)
        elif tok in ("{", "("):
            close = "}" if tok == "{" else ")"
            self.take()
            base = self.sum()
            self.take(close)
        else:
            raise InvalidOrdinalError(f"unexpected token {tok!r}")
        if self.peek() == "*":
            self.take()
            k = int(self.take())
            if base.is_finite:
                return ordinal(int(base) * k)
            if len(base.terms) != 1:
                raise InvalidOrdinalError("only w^E*k and n*k products are supported")
            return omega_power(base.terms[0][0], base.terms[0][1] * k)
        return base


def parse_ordinal(text: str | int | Ordinal) -> Ordinal:
    if isinstance(text, (Ordinal, int)):
        return ordinal(text)
    toks = _tokenize(text)
    if not toks:
        raise InvalidOrdinalError("empty ordinal text")
    p = _Parser(toks)
    result = p.sum()
    if p.peek() is not None:
        raise InvalidOrdinalError(f"trailing input in {text!r}")
    return result


# -- enumeration of smaller ordinals ----------------------------------------


def _notations_of_weight(w: int) -> tuple[Ordinal, ...]:
    return _WEIGHT_CACHE.setdefault(w, tuple(_gen_weight(w)))


_WEIGHT_CACHE: dict[int, tuple[Ordinal, ...]] = {}


def _gen_weight(w: int) -> Iterator[Ordinal]:
    # weight(0) = 0; weight(sum w^e*k) = sum(k + weight(e) + [e > 0])
    if w == 0:
        yield ZERO
        return
    for first_w in range(1, w + 1):
        for head in _single_terms(first_w):
            for tail in _gen_weight(w - first_w):
                if not tail.terms or compare(tail.terms[0][0], head[0]) is Cmp.LT:
                    yield Ordinal((head,) + tail.terms)


def _single_terms(w: int) -> Iterator[tuple[Ordinal, int]]:
    yield (ZERO, w)
    for ew in range(0, w):
        for k in range(1, w - ew):
            if ew + k + 1 != w:
                continue
            for e in _notations_of_weight(ew):
                if not e.is_zero:
                    yield (e, k)


def _below_by_weight(mu: Ordinal) -> Iterator[Ordinal]:
    w = 0
    while True:
        for nu in sorted(_notations_of_weight(w)):
            if nu < mu:
                yield nu
        w += 1


def iter_below(mu: OrdLike) -> Iterator[Ordinal]:
    """Deterministic omega-indexed enumeration of {nu : nu < mu}.

    Ordinals below w^w are dovetailed as w*nu' + n, stage s emitting the pairs
    (prefix index i, finite part n) with max(i, n) == s ordered by (n, i).
    Larger mu fall back to enumerating notations by weight.
    """
    mu = ordinal(mu)
    if mu.is_zero:
        raise EmptyDomainError("no ordinals below 0")
    if mu.is_finite:
        yield from (ordinal(n) for n in range(int(mu)))
        return
    if not mu.leading_exponent.is_finite:
        yield from _below_by_weight(mu)
        return
    delta, m = mu.divmod_omega()
    prefix_bound = delta.succ() if m else delta
    prefixes: list[Ordinal] = []
    prefix_iter = iter_below(prefix_bound)
    prefix_done = False
    s = 0
    while True:
        while not prefix_done and len(prefixes) <= s:
            try:
                prefixes.append(next(prefix_iter))
            except StopIteration:
                prefix_done = True
        pairs = [(i, s) for i in range(min(s, len(prefixes)))]
        pairs += [(s, n) for n in range(s + 1)] if s < len(prefixes) else []
        pairs.sort(key=lambda p: (p[1], p[0]))
        for i, n in pairs:
            p = prefixes[i]
            if m and p == delta and n >= m:
                continue
            yield add(p.omega_times(), n)
        s += 1


def enumerate_below(mu: OrdLike, n: int) -> list[Ordinal]:
    """First n terms of :func:`iter_below`; fewer if mu is finite and exhausted."""
    mu = ordinal(mu)
    if mu.is_zero:
        raise EmptyDomainError("no ordinals below 0")
    out = []
    it = iter_below(mu)
    for _ in range(n):
        try:
            out.append(next(it))
        except StopIteration:
            break
    return out


def enumeration_index(mu: OrdLike, nu: OrdLike, limit: int = 10**6) -> int:
    """Position of nu in the enumeration of mu (searches up to ``limit`` steps)."""
    mu, nu = ordinal(mu), ordinal(nu)
    if not nu < mu:
        raise InvalidOrdinalError(f"{nu} is not below {mu}")
    for i, x in enumerate(iter_below(mu)):
        if x == nu:
            return i
        if i >= limit:
            break
    raise InsufficientEnumerationError(f"{nu} not reached within {limit} steps")


def fold_sum(terms: Sequence[OrdLike]) -> Ordinal:
    total = ZERO
    for t in terms:
        total = add(total, t)
    return total


# -- length bookkeeping for interleaved chains -------------------------------


@dataclass(frozen=True)
class ChainPosition:
    """Source of a chain position: the U-element of a step, or an insertion."""

    step: int
    alpha: Ordinal | None = None  # None marks the U-element

    @property
    def kind(self) -> str:
        return "U" if self.alpha is None else "inserted"

    def __str__(self):
        if self.alpha is None:
            return f"U@{self.step}"
        return f"inserted({self.alpha})@{self.step}"


class LengthAudit:
    """Partial sums of (1 + nu_xi) and the position map they induce.

    ``nus`` may be a finite sequence or an iterator.  With ``pad_zeros`` an
    exhausted source continues with nu = 0, i.e. empty insertions.
    """

    MAX_STEPS = 200_000

    def __init__(self, target: OrdLike, nus: Iterable[OrdLike], *, pad_zeros: bool = False):
        self.target = ordinal(target)
        self._source = iter(nus)
        self._pad = pad_zeros
        self._nus: list[Ordinal] = []
        self._sums: list[Ordinal] = [ZERO]

    @property
    def nus(self) -> tuple[Ordinal, ...]:
        return tuple(self._nus)

    @property
    def partial_sums(self) -> tuple[Ordinal, ...]:
        """Sums after each materialized step (s_1, s_2, ...)."""
        return tuple(self._sums[1:])

    def _extend(self) -> bool:
        try:
            nu = ordinal(next(self._source))
        except StopIteration:
            if not self._pad:
                return False
            nu = ZERO
        self._nus.append(nu)
        self._sums.append(add(self._sums[-1], add(ONE, nu)))
        return True

    def _reach(self, p: Ordinal) -> int:
        # smallest step index xi with sums[xi + 1] > p
        xi = 0
        while True:
            while xi + 1 >= len(self._sums):
                if len(self._nus) >= self.MAX_STEPS or not self._extend():
                    raise InsufficientEnumerationError(
                        f"position {p} not reached after {len(self._nus)} steps")
            if self._sums[xi + 1] > p:
                return xi
            xi += 1

    def locate(self, p: OrdLike) -> ChainPosition:
        p = ordinal(p)
        if not p < self.target:
            raise InvalidOrdinalError(f"position {p} is not below {self.target}")
        xi = self._reach(p)
        start = self._sums[xi]
        if p == start:
            return ChainPosition(xi)
        return ChainPosition(xi, left_subtract(add(start, ONE), p))

    def position_of(self, pos: ChainPosition) -> Ordinal:
        while pos.step + 1 >= len(self._sums):
            if not self._extend():
                raise InsufficientEnumerationError(f"step {pos.step} unavailable")
        start = self._sums[pos.step]
        if pos.alpha is None:
            return start
        if not pos.alpha < self._nus[pos.step]:
            raise InvalidOrdinalError(f"{pos} exceeds nu = {self._nus[pos.step]}")
        return add(add(start, ONE), pos.alpha)

    def nu(self, step: int) -> Ordinal:
        while step >= len(self._nus):
            if not self._extend():
                raise InsufficientEnumerationError(f"step {step} unavailable")
        return self._nus[step]

    def cut_step(self, max_steps: int | None = None) -> int | None:
        """First step whose partial sum reaches the target, if one exists within reach."""
        limit = self.MAX_STEPS if max_steps is None else max_steps
        i = 1
        while True:
            if i > limit:
                return None
            while i >= len(self._sums):
                if not self._extend():
                    return None
            if self._sums[i] >= self.target:
                return i
            i += 1

    @property
    def pre_cut_total(self) -> Ordinal | None:
        """Partial sum at the cut step (mu' before the tail is dropped)."""
        i = self.cut_step(max_steps=2_000)
        return None if i is None else self._sums[i]

    def to_json(self, steps: int | None = None) -> dict:
        if steps is not None:
            while len(self._nus) < steps and self._extend():
                pass
        total = self.pre_cut_total
        n = len(self._nus) if steps is None else steps
        return {
            "target": str(self.target),
            "nus": [str(v) for v in self._nus[:n]],
            "partial_sums": [str(s) for s in self._sums[1:n + 1]],
            "pre_cut_total": None if total is None else str(total),
        }


def interleaved_length(nus: Sequence[OrdLike], cut: OrdLike) -> LengthAudit:
    """Audit of sum(1 + nu) over a finite prefix, cut at ``cut``."""
    audit = LengthAudit(cut, list(nus))
    if audit.target.is_zero:
        return audit
    if audit.cut_step() is None:
        total = audit._sums[-1]
        raise InsufficientEnumerationError(
            f"prefix sums to {total}, which does not reach {audit.target}")
    return audit
