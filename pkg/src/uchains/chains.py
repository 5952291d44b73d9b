"""Uniform sets U_xi, projections D_xi, and well-ordered chains under the below relation.

A uniform set is described twice: by a semantic tag evaluated directly on the
well-ordered part of a symbolic real, and by a structural multicode evaluated
through the generic Borel-code interpreter.  The two must agree.

Tags:

* ``UTag(xi)``: x -> the xi-th element of the well-ordered part W of G_x;
* ``Restricted(base, level)``: base restricted to D_level;
* ``Shifted(base, xi)``: base pulled back into (U_xi(x), U_xi+1(x)) by h_inv;
* ``Trimmed(base)``: base, marking a position kept after the tail cut.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Optional, Union as TUnion

from .borelcode import (
    BorelMultiCode, Constructor, DigitCells, Family, Leaf, OrdinalsBelow,
    RationalTriples, RationalsBelow, Ref, Var, conj, eval_multicode,
    multicode_from_json, multicode_to_json, neg, register_constructor, register_param_type,
)
from .ordinal import (
    OMEGA, ZERO, ChainPosition, LengthAudit, Ordinal,
    format_ordinal, iter_below, ordinal, parse_ordinal,
)
from .qreal import SymbolicReal, format_rat, index_of, rat, well_ordered_part

__all__ = [
    "UTag", "Restricted", "Shifted", "Trimmed", "UniformSet", "ProjectionDescriptor",
    "Chain", "build_U", "build_D", "derived_E", "section_value", "in_D", "below",
    "below_via_middle", "restrict_to_D", "h_map", "h_inv", "shift_between",
    "build_chain", "Verdict", "ChainError", "UniformityViolationError",
    "ProjectionMismatchError", "DomainError", "DIRECT", "INTERLEAVED",
    "chain_to_json", "chain_from_json", "set_to_json", "set_from_json", "tag_to_json",
    "tag_from_json", "sieve_code",
]

DIRECT = "direct"
INTERLEAVED = "interleaved"


class ChainError(ValueError):
    pass


class UniformityViolationError(ChainError):
    pass


class ProjectionMismatchError(ChainError):
    pass


class DomainError(ChainError):
    pass


# -- semantic tags -------------------------------------------------------------


@dataclass(frozen=True)
class UTag:
    xi: Ordinal


@dataclass(frozen=True)
class Restricted:
    base: object
    level: Ordinal


@dataclass(frozen=True)
class Shifted:
    base: object
    xi: Ordinal


@dataclass(frozen=True)
class Trimmed:
    base: object


SetTag = TUnion[UTag, Restricted, Shifted, Trimmed]


def tag_to_json(tag) -> dict:
    if isinstance(tag, UTag):
        return {"U": format_ordinal(tag.xi)}
    if isinstance(tag, Restricted):
        return {"restricted": {"base": tag_to_json(tag.base), "level": format_ordinal(tag.level)}}
    if isinstance(tag, Shifted):
        return {"shifted": {"base": tag_to_json(tag.base), "xi": format_ordinal(tag.xi)}}
    if isinstance(tag, Trimmed):
        return {"trimmed": tag_to_json(tag.base)}
    raise ChainError(f"not a set tag: {tag!r}")


def tag_from_json(d) -> SetTag:
    if not isinstance(d, dict) or len(d) != 1:
        raise ChainError(f"bad set tag {d!r}")
    (k, v), = d.items()
    if k == "U":
        return UTag(parse_ordinal(v))
    if k == "restricted":
        return Restricted(tag_from_json(v["base"]), parse_ordinal(v["level"]))
    if k == "shifted":
        return Shifted(tag_from_json(v["base"]), parse_ordinal(v["xi"]))
    if k == "trimmed":
        return Trimmed(tag_from_json(v))
    raise ChainError(f"unknown set tag {k!r}")


register_param_type("set", (UTag, Restricted, Shifted, Trimmed), tag_to_json, tag_from_json)


@dataclass(frozen=True, order=False)
class ProjectionDescriptor:
    """The projection equals D_xi."""

    xi: Ordinal

    def __str__(self):
        return f"D({format_ordinal(self.xi)})"

    def includes(self, other: "ProjectionDescriptor") -> bool:
        """pr(other) within pr(self)."""
        return not other.xi < self.xi


def projection_of(tag) -> ProjectionDescriptor:
    if isinstance(tag, UTag):
        return ProjectionDescriptor(tag.xi)
    if isinstance(tag, Restricted):
        z = projection_of(tag.base).xi
        return ProjectionDescriptor(tag.level if z < tag.level else z)
    if isinstance(tag, Shifted):
        z = projection_of(tag.base).xi
        if z < tag.xi.succ():
            raise ProjectionMismatchError(
                f"projection D({format_ordinal(z)}) is not inside D({format_ordinal(tag.xi.succ())})")
        return ProjectionDescriptor(z)
    if isinstance(tag, Trimmed):
        return projection_of(tag.base)
    raise ChainError(f"not a set tag: {tag!r}")


# -- the order-preserving map of (u, v) onto the line --------------------------


def h_map(u, v, y) -> Fraction:
    u, v, y = rat(u), rat(v), rat(y)
    if not u < y < v:
        raise DomainError(f"{format_rat(y)} is not inside ({format_rat(u)}, {format_rat(v)})")
    c = (u + v) / 2
    if y >= c:
        return (y - c) / (v - y)
    return (y - c) / (y - u)


def h_inv(u, v, t) -> Fraction:
    u, v, t = rat(u), rat(v), rat(t)
    if not u < v:
        raise DomainError("empty interval")
    c = (u + v) / 2
    if t >= 0:
        # t = (y - c)/(v - y)
        return (c + t * v) / (1 + t)
    # t = (y - c)/(y - u), t < 0
    return (c - t * u) / (1 - t)


# -- semantics -----------------------------------------------------------------


def in_D(xi, x: SymbolicReal) -> bool:
    return parse_ordinal(xi) < well_ordered_part(x).order_type


@lru_cache(maxsize=1 << 18)
def _value(tag, x: SymbolicReal) -> Optional[Fraction]:
    w = well_ordered_part(x)
    if isinstance(tag, UTag):
        return w.element_at(tag.xi)
    if isinstance(tag, Restricted):
        v = _value(tag.base, x)
        return v if v is not None and in_D(tag.level, x) else None
    if isinstance(tag, Shifted):
        q = _value(tag.base, x)
        if q is None:
            return None
        u, v = w.element_at(tag.xi), w.element_at(tag.xi.succ())
        if u is None or v is None:
            return None
        return h_inv(u, v, q)
    if isinstance(tag, Trimmed):
        return _value(tag.base, x)
    raise ChainError(f"not a set tag: {tag!r}")


# -- structural codes ----------------------------------------------------------


def sieve_code(r) -> Ref:
    return Ref("G", {"r": rat(r)})


def _section_ref(tag, r) -> Ref:
    if isinstance(tag, UTag):
        return Ref("U", {"xi": tag.xi, "r": r})
    if isinstance(tag, Restricted):
        return Ref("Q", {"base": tag.base, "level": tag.level, "r": r})
    if isinstance(tag, Shifted):
        return Ref("S", {"base": tag.base, "xi": tag.xi, "r": r})
    if isinstance(tag, Trimmed):
        return _section_ref(tag.base, r)
    raise ChainError(f"not a set tag: {tag!r}")


def _cell(a: dict):
    # dyadic cell [(2j+d)/2^k, (2j+d+1)/2^k) of [0, 1)
    k, d, j = a["k"], a["d"], a["j"]
    lo = Fraction(2 * j + d, 1 << k)
    hi = lo + Fraction(1, 1 << k)
    return conj(Leaf(((Fraction(-1), lo),)), neg(Leaf(((Fraction(-1), hi),))))


def _G(a: dict):
    # r in G_x iff digit 2n+1 of x is 0, i.e. x lies in no cell with that digit 1
    pos = 2 * index_of(a["r"]) + 1
    return Family(DigitCells(pos, 1), Ref("cell", {"k": pos, "d": 1, "j": Var("j")}))


def _U(a: dict):
    xi, r = a["xi"], a["r"]
    g = sieve_code(r)
    if xi.is_zero:
        # r in G_x and no q < r in G_x
        return conj(g, Family(RationalsBelow(r), Ref("G", {"r": Var("i")})))
    if xi.is_successor:
        # some q < r is the predecessor point, with nothing of G_x in between
        gap = Family(RationalsBelow(r), Ref("Ugap", {"eta": xi.predecessor(), "r": r, "q": Var("i")}))
        return conj(g, neg(gap))
    # every eta < xi has its point below r, and every q < r in G_x is such a point
    missing = Family(OrdinalsBelow(xi), Ref("Umiss", {"eta": Var("i"), "r": r}))
    stray = Family(RationalsBelow(r), Ref("Gstray", {"xi": xi, "q": Var("i")}))
    return conj(g, missing, stray)


def _Ugap(a: dict):
    eta, r, q = a["eta"], a["r"], a["q"]
    return conj(Ref("U", {"xi": eta, "r": q}),
                Family(RationalsBelow(r, q), Ref("G", {"r": Var("i")})))


def _Umiss(a: dict):
    return Family(RationalsBelow(a["r"]), Ref("U", {"xi": a["eta"], "r": Var("i")}))


def _Gstray(a: dict):
    return conj(sieve_code(a["q"]),
                Family(OrdinalsBelow(a["xi"]), Ref("U", {"xi": Var("i"), "r": a["q"]})))


def _D(a: dict):
    return neg(Family(RationalsBelow(None), Ref("U", {"xi": a["xi"], "r": Var("i")})))


def _E(a: dict):
    return conj(Ref("D", {"xi": a["xi"]}), neg(Ref("D", {"xi": a["xi"].succ()})))


def _Q(a: dict):
    return conj(_section_ref(a["base"], a["r"]), Ref("D", {"xi": a["level"]}))


def _S(a: dict):
    return neg(Family(RationalTriples(a["r"]), Ref("Striple", {
        "base": a["base"], "xi": a["xi"], "r": a["r"], "u": Var("u"), "v": Var("v")})))


def _Striple(a: dict):
    xi, u, v = a["xi"], a["u"], a["v"]
    return conj(Ref("U", {"xi": xi, "r": u}), Ref("U", {"xi": xi.succ(), "r": v}),
                _section_ref(a["base"], h_map(u, v, a["r"])))


# witness candidates for infinite sections; each list covers every index at
# which the family child can contain x


def _w(x):
    return well_ordered_part(x)


def _rb(kind):
    return kind.lower, kind.bound


def _cand_G(kind, a, x):
    q = x.some_between(*_rb(kind))
    return [] if q is None else [{"i": q}]


def _cand_U(kind, a, x):
    w = _w(x)
    if isinstance(kind, RationalsBelow):
        q = w.element_at(a["xi"])
        return [] if q is None else [{"i": q}]
    if isinstance(kind, OrdinalsBelow):
        eta = w.position(a["r"])
        return [] if eta is None else [{"i": eta}]
    return []


def _cand_Ugap(kind, a, x):
    q = _w(x).element_at(a["eta"])
    return [] if q is None else [{"i": q}]


def _cand_Umiss(kind, a, x):
    return [{"i": _w(x).count_below(a["r"])}]


def _cand_Gstray(kind, a, x):
    # a member of G_x below r outside {U_eta(x) : eta < xi}
    w = _w(x)
    out = []
    q = w.element_at(a["xi"])
    if q is not None:
        out.append({"i": q})
    lower = None if x.complement else w.cut
    if x.complement or lower is not None:
        q = x.some_between(lower, kind.bound)
        if q is not None:
            out.append({"i": q})
    return out


def _cand_Striple(kind, a, x):
    w = _w(x)
    u, v = w.element_at(a["xi"]), w.element_at(a["xi"].succ())
    return [] if u is None or v is None else [{"u": u, "v": v}]


for _ctor in (
    Constructor("cell", _cell),
    Constructor("G", _G, _cand_G),
    Constructor("U", _U, _cand_U),
    Constructor("Ugap", _Ugap, _cand_Ugap),
    Constructor("Umiss", _Umiss, _cand_Umiss),
    Constructor("Gstray", _Gstray, _cand_Gstray),
    Constructor("D", _D),
    Constructor("E", _E),
    Constructor("Q", _Q),
    Constructor("S", _S),
    Constructor("Striple", _Striple, _cand_Striple),
):
    register_constructor(_ctor)


# -- uniform sets --------------------------------------------------------------


@dataclass(frozen=True)
class UniformSet:
    semantic: object
    proj: ProjectionDescriptor

    @property
    def multicode(self) -> BorelMultiCode:
        ref = _section_ref(self.semantic, Fraction(0))
        params = tuple((k, v) for k, v in ref.params if k != "r")
        return BorelMultiCode(ref.name, params)

    def value(self, x: SymbolicReal) -> Optional[Fraction]:
        return _value(self.semantic, x)

    def contains(self, x: SymbolicReal, r) -> bool:
        return eval_multicode(self.multicode, x, r)

    def __str__(self):
        return _tag_str(self.semantic)


def _tag_str(tag) -> str:
    if isinstance(tag, UTag):
        return f"U[{format_ordinal(tag.xi)}]"
    if isinstance(tag, Restricted):
        return f"Q({_tag_str(tag.base)}|D[{format_ordinal(tag.level)}])"
    if isinstance(tag, Shifted):
        return f"S[{format_ordinal(tag.xi)}]({_tag_str(tag.base)})"
    return f"T({_tag_str(tag.base)})"


def _make(tag) -> UniformSet:
    return UniformSet(tag, projection_of(tag))


def build_U(xi) -> UniformSet:
    return _make(UTag(parse_ordinal(xi)))


def build_D(xi) -> Ref:
    return Ref("D", {"xi": parse_ordinal(xi)})


def derived_E(xi) -> Ref:
    return Ref("E", {"xi": parse_ordinal(xi)})


def restrict_to_D(F: UniformSet, level) -> UniformSet:
    return _make(Restricted(F.semantic, parse_ordinal(level)))


def shift_between(Q: UniformSet, xi) -> UniformSet:
    return _make(Shifted(Q.semantic, parse_ordinal(xi)))


def trim(P: UniformSet) -> UniformSet:
    return _make(Trimmed(P.semantic))


def section_value(P: UniformSet, x: SymbolicReal, window: Iterable = ()) -> Optional[Fraction]:
    """The unique r with (x, r) in P, or None.

    Every rational of ``window`` is also checked against the multicode; a
    second witness raises, as does a multicode that misses the value.
    """
    v = P.value(x)
    if v is not None and not P.contains(x, v):
        raise UniformityViolationError(f"{P} at {x}: multicode misses the value {format_rat(v)}")
    for r in window:
        r = rat(r)
        if r != v and P.contains(x, r):
            raise UniformityViolationError(
                f"{P} at {x}: second witness {format_rat(r)}"
                + ("" if v is None else f" besides {format_rat(v)}"))
    return v


# -- the below relation --------------------------------------------------------


@dataclass(frozen=True)
class Verdict:
    status: str  # "holds" | "fails" | "vacuous"
    witness: Optional[SymbolicReal] = None
    detail: str = ""

    @property
    def ok(self) -> bool:
        return self.status != "fails"


def below(P: UniformSet, Q: UniformSet, probes: Iterable[SymbolicReal]) -> Verdict:
    # (1): projections are D-sets, so they are always comparable
    shared = 0
    for x in probes:
        p, q = P.value(x), Q.value(x)
        if p is None or q is None:
            continue
        shared += 1
        if not p < q:
            return Verdict("fails", x, f"{P}(x)={format_rat(p)} is not below {Q}(x)={format_rat(q)}")
    return Verdict("holds" if shared else "vacuous")


def below_via_middle(P: UniformSet, U: UniformSet, Q: UniformSet) -> bool:
    """P below Q from P below U below Q when a projection sits inside pr U."""
    return U.proj.includes(P.proj) or U.proj.includes(Q.proj)


# -- chains --------------------------------------------------------------------


class Chain:
    """An ordinal-indexed family of uniform sets.

    Direct chains are (U_xi)_{xi < mu}.  Interleaved chains put, between U_xi
    and U_xi+1, the shifted restriction of a sub-chain of length nu_xi, for a
    fixed enumeration (nu_xi) of the ordinals below mu, cut at mu.
    """

    def __init__(self, length: Ordinal, strategy: str):
        self.length = length
        self.strategy = strategy
        self.audit: Optional[LengthAudit] = None
        self._subs: dict = {}
        self._cache: dict = {}
        self._cut = False
        if strategy == INTERLEAVED:
            self.audit = LengthAudit(length, iter_below(length), pad_zeros=True)
            total = self.audit.pre_cut_total
            self._cut = total is not None and total != length
        elif strategy != DIRECT:
            raise ChainError(f"unknown strategy {strategy!r}")

    def __repr__(self):
        return f"Chain({format_ordinal(self.length)}, {self.strategy})"

    def source(self, pos) -> ChainPosition:
        pos = ordinal(pos)
        if not pos < self.length:
            raise IndexError(f"position {format_ordinal(pos)} beyond the chain length")
        if self.audit is None:
            return ChainPosition(pos)
        return self.audit.locate(pos)

    def sub_chain(self, step: int) -> "Chain":
        ch = self._subs.get(step)
        if ch is None:
            ch = build_chain(self.audit.nu(step), _sub_strategy(self.audit.nu(step)))
            self._subs[step] = ch
        return ch

    def at(self, pos) -> UniformSet:
        pos = ordinal(pos)
        hit = self._cache.get(pos)
        if hit is not None:
            return hit
        src = self.source(pos)
        if self.audit is None:
            out = build_U(src.step)
        elif src.kind == "U":
            out = build_U(src.step)
        else:
            step = ordinal(src.step)
            inner = self.sub_chain(src.step).at(src.alpha)
            out = shift_between(restrict_to_D(inner, step.succ()), step)
        if self._cut:
            out = trim(out)
        self._cache[pos] = out
        return out

    def positions(self, count: int) -> list:
        """First ``count`` positions of a fixed enumeration of the positions below the length."""
        out = []
        for p in iter_below(self.length):
            out.append(p)
            if len(out) >= count:
                break
        return out


def _sub_strategy(nu: Ordinal) -> str:
    # sub-chains within the U-budget are built directly
    return DIRECT if not nu > OMEGA else INTERLEAVED


@lru_cache(maxsize=256)
def _build(mu: Ordinal, strategy: str) -> Chain:
    return Chain(mu, strategy)


def build_chain(mu, strategy: str = DIRECT) -> Chain:
    mu = parse_ordinal(mu)
    if mu.is_zero:
        raise ChainError("chains have positive length")
    strategy = strategy.lower()
    ch = _build(mu, strategy)
    if ch.audit is not None:
        ch.audit.locate(ZERO)  # raises InsufficientEnumerationError early
    return ch


# -- serialization -------------------------------------------------------------


def set_to_json(P: UniformSet) -> dict:
    return {"semantic": tag_to_json(P.semantic), "proj": {"D": format_ordinal(P.proj.xi)},
            "multicode": multicode_to_json(P.multicode)}


def set_from_json(d: dict) -> UniformSet:
    P = _make(tag_from_json(d["semantic"]))
    if format_ordinal(P.proj.xi) != d["proj"]["D"]:
        raise ChainError("projection descriptor does not match the semantic tag")
    if multicode_from_json(d["multicode"]) != P.multicode:
        raise ChainError("multicode does not match the semantic tag")
    return P


def chain_to_json(chain: Chain, positions: Optional[Iterable] = None, audit_steps: int = 16) -> dict:
    if positions is None:
        positions = chain.positions(16)
    positions = sorted(set(ordinal(p) for p in positions))
    return {
        "length": format_ordinal(chain.length),
        "strategy": chain.strategy,
        "audit": None if chain.audit is None else chain.audit.to_json(audit_steps),
        "elements": [{"position": format_ordinal(p), "set": set_to_json(chain.at(p))}
                     for p in positions],
    }


def chain_from_json(d: dict) -> tuple:
    """Rebuild a chain; returns (chain, positions) after checking every stored element."""
    chain = build_chain(d["length"], d["strategy"])
    positions = []
    for e in d["elements"]:
        p = parse_ordinal(e["position"])
        if set_from_json(e["set"]) != chain.at(p):
            raise ChainError(f"stored element at {e['position']} differs from the rebuilt chain")
        positions.append(p)
    if d.get("audit") is not None and chain.audit.to_json(
            len(d["audit"].get("partial_sums", []))) != d["audit"]:
        raise ChainError("stored audit differs from the rebuilt chain")
    return chain, positions
