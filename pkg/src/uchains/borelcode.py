"""Borel codes as symbolically finite well-founded trees.

Every node denotes the complement of the union of its children:

* ``Leaf(intervals)`` - the line minus the listed open rational intervals;
* ``Union(children)`` - the line minus the union of the children;
* ``Family(kind, child)`` - the line minus a countable union of instances of
  the template ``child``, one per index of ``kind``;
* ``Ref(name, params)`` - a named code, expanded on demand by a registered
  :class:`Constructor`.

Family indices are bound to template variables (``Var``).  Each family kind
decides membership in its union by testing finitely many candidate indices;
the candidates are exhaustive for finite sections and supplied by the child's
constructor otherwise.
"""

from __future__ import annotations

import json
import sys
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Any, Callable, Iterable, Optional

from .ordinal import ONE, ZERO, Ordinal, add, format_ordinal, ordinal, parse_ordinal
from .qreal import (
    BinaryExpansion, SymbolicReal, encode_real, format_rat, rat,
)

__all__ = [
    "Leaf", "Union", "Family", "Ref", "Var", "RationalsBelow", "OrdinalsBelow",
    "RationalTriples", "DigitCells", "BorelMultiCode", "Constructor",
    "register_constructor", "register_param_type", "FULL", "EMPTY", "neg", "conj",
    "eval_code", "eval_multicode", "rank", "expand", "materialize",
    "serialize", "deserialize", "CodeError", "InvalidCodeError", "CodeParseError",
]

sys.setrecursionlimit(max(sys.getrecursionlimit(), 20000))


class CodeError(ValueError):
    pass


class InvalidCodeError(CodeError):
    pass


class CodeParseError(CodeError):
    def __init__(self, message: str, position: Any = None):
        super().__init__(f"{message} (at {position})" if position is not None else message)
        self.position = position


# -- nodes ---------------------------------------------------------------------


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Leaf:
    intervals: tuple = ()

    def __post_init__(self):
        iv = tuple(sorted(set((rat(p), rat(q)) for p, q in self.intervals)))
        object.__setattr__(self, "intervals", iv)


@dataclass(frozen=True)
class Union:
    children: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "children", tuple(self.children))


@dataclass(frozen=True)
class Ref:
    name: str
    params: tuple = ()

    def __post_init__(self):
        p = self.params
        if isinstance(p, dict):
            p = p.items()
        object.__setattr__(self, "params", tuple(sorted(p)))

    @property
    def args(self) -> dict:
        return dict(self.params)

    def bind(self, binding: dict) -> "Ref":
        return Ref(self.name, tuple(
            (k, binding[v.name] if isinstance(v, Var) else v) for k, v in self.params))


@dataclass(frozen=True)
class RationalsBelow:
    """Rationals i with lower < i < bound (``None`` = unbounded); binds ``i``."""

    bound: Optional[Fraction] = None
    lower: Optional[Fraction] = None
    variables = ("i",)

    def admits(self, idx: dict) -> bool:
        i = idx["i"]
        return (self.bound is None or i < self.bound) and (self.lower is None or i > self.lower)


@dataclass(frozen=True)
class OrdinalsBelow:
    """Ordinals i < bound; binds ``i``."""

    bound: Ordinal
    variables = ("i",)

    def admits(self, idx: dict) -> bool:
        return idx["i"] < self.bound


@dataclass(frozen=True)
class RationalTriples:
    """Pairs u < r < v (w = H[u, v](r) is computed by the child); binds ``u``, ``v``."""

    r: Fraction
    variables = ("u", "v")

    def admits(self, idx: dict) -> bool:
        return idx["u"] < self.r < idx["v"]


@dataclass(frozen=True)
class DigitCells:
    """Dyadic cells of [0, 1) on which binary digit ``position`` equals ``digit``; binds ``j``."""

    position: int
    digit: int
    variables = ("j",)

    def admits(self, idx: dict) -> bool:
        return 0 <= idx["j"] < (1 << (self.position - 1))


@dataclass(frozen=True)
class Family:
    kind: Any
    child: Ref

    def __post_init__(self):
        if not isinstance(self.child, Ref):
            raise InvalidCodeError("family child templates must be references")


FULL = Leaf(())
EMPTY = Union((FULL,))


def neg(code):
    return Union((code,))


def conj(*codes):
    return Union(tuple(neg(c) for c in codes))


# -- constructors --------------------------------------------------------------


@dataclass
class Constructor:
    """A named code.

    ``expand(args)`` builds the code.  ``candidates(kind, args, x)`` returns
    index bindings covering every witness of the family union when the
    section of ``x`` is infinite.  ``rank_hint(args)`` short-cuts the rank.
    """

    name: str
    expand: Callable[[dict], Any]
    candidates: Optional[Callable[[Any, dict, SymbolicReal], Iterable[dict]]] = None
    rank_hint: Optional[Callable[[dict], Ordinal]] = None


_REGISTRY: dict[str, Constructor] = {}


def register_constructor(ctor: Constructor) -> Constructor:
    _REGISTRY[ctor.name] = ctor
    return ctor


def constructor(name: str) -> Constructor:
    try:
        return _REGISTRY[name]
    except KeyError:
        raise InvalidCodeError(f"unknown code constructor {name!r}") from None


@lru_cache(maxsize=None)
def expand(ref: Ref):
    if any(isinstance(v, Var) for _, v in ref.params):
        raise InvalidCodeError(f"cannot expand open template {ref}")
    return constructor(ref.name).expand(ref.args)


def materialize(code, depth: int = 64):
    """Expand references outside family templates, up to ``depth`` levels."""
    if isinstance(code, Ref):
        return materialize(expand(code), depth - 1) if depth > 0 else code
    if isinstance(code, Union):
        return Union(tuple(materialize(c, depth) for c in code.children))
    return code


# -- evaluation ----------------------------------------------------------------


@lru_cache(maxsize=1 << 16)
def _expansion(x: SymbolicReal) -> BinaryExpansion:
    return encode_real(x)


def _finite_section(x: SymbolicReal) -> Optional[list]:
    if x.complement or not x.is_finite_description:
        return None
    return x.finite_points()


def _exhaustive(kind, x_points: list) -> Iterable[dict]:
    if isinstance(kind, RationalsBelow):
        return ({"i": q} for q in x_points)
    if isinstance(kind, OrdinalsBelow):
        n = len(x_points)
        return ({"i": ordinal(k)} for k in range(n + 1))
    if isinstance(kind, RationalTriples):
        return ({"u": u, "v": v} for u in x_points for v in x_points if u < v)
    raise InvalidCodeError(f"no exhaustive search for {kind}")


def _family_union_holds(fam: Family, x: SymbolicReal) -> bool:
    kind = fam.kind
    if isinstance(kind, DigitCells):
        return _expansion(x).digit(kind.position) == kind.digit
    if not isinstance(kind, (RationalsBelow, OrdinalsBelow, RationalTriples)):
        raise InvalidCodeError(f"unknown family kind {kind!r}")
    pts = _finite_section(x)
    if pts is not None:
        cands = _exhaustive(kind, pts)
    else:
        ctor = constructor(fam.child.name)
        if ctor.candidates is None:
            raise InvalidCodeError(f"{ctor.name} gives no witnesses for infinite sections")
        cands = ctor.candidates(kind, fam.child.args, x)
    for idx in cands:
        if kind.admits(idx) and _eval(fam.child.bind(idx), x):
            return True
    return False


@lru_cache(maxsize=1 << 20)
def _eval(code, x: SymbolicReal) -> bool:
    if isinstance(code, Leaf):
        ex = _expansion(x)
        for p, q in code.intervals:
            if p < q and ex.compare(p) > 0 and ex.compare(q) < 0:
                return False
        return True
    if isinstance(code, Union):
        return not any(_eval(c, x) for c in code.children)
    if isinstance(code, Family):
        return not _family_union_holds(code, x)
    if isinstance(code, Ref):
        return _eval(expand(code), x)
    raise InvalidCodeError(f"not a code node: {code!r}")


def eval_code(code, x: SymbolicReal) -> bool:
    """Does the real encoded by x belong to the set coded by ``code``?"""
    return _eval(code, x)


# -- multicodes ----------------------------------------------------------------


@dataclass(frozen=True)
class BorelMultiCode:
    """Rational-indexed codes: section r is ``Ref(ctor, params + {r})``.

    ``cache`` holds materialized sections keyed by rational.
    """

    ctor: str
    params: tuple = ()
    cache: tuple = ()

    def __post_init__(self):
        p = self.params.items() if isinstance(self.params, dict) else self.params
        object.__setattr__(self, "params", tuple(sorted(p)))
        c = self.cache.items() if isinstance(self.cache, dict) else self.cache
        object.__setattr__(self, "cache", tuple(sorted((rat(r), code) for r, code in c)))

    def section(self, r) -> Any:
        r = rat(r)
        for q, code in self.cache:
            if q == r:
                return code
        return Ref(self.ctor, self.params + (("r", r),))

    def with_cache(self, rs: Iterable) -> "BorelMultiCode":
        cache = dict(self.cache)
        for r in rs:
            r = rat(r)
            cache[r] = materialize(Ref(self.ctor, self.params + (("r", r),)))
        return BorelMultiCode(self.ctor, self.params, tuple(cache.items()))


def eval_multicode(mc: BorelMultiCode, x: SymbolicReal, r) -> bool:
    return _eval(mc.section(r), x)


# -- rank ----------------------------------------------------------------------


def _sample_rational(kind: RationalsBelow) -> Fraction:
    lo, hi = kind.lower, kind.bound
    if lo is not None and hi is not None:
        return (lo + hi) / 2
    if hi is not None:
        return hi - 1
    if lo is not None:
        return lo + 1
    return Fraction(0)


@lru_cache(maxsize=None)
def rank(code) -> Ordinal:
    """Well-foundedness witness: Leaf -> 0, parent > every child."""
    if isinstance(code, Leaf):
        return ZERO
    if isinstance(code, Union):
        best = ZERO
        for c in code.children:
            r = add(rank(c), ONE)
            if r > best:
                best = r
        return best
    if isinstance(code, Ref):
        ctor = constructor(code.name)
        if ctor.rank_hint is not None:
            return ctor.rank_hint(code.args)
        return rank(expand(code))
    if isinstance(code, Family):
        return _family_rank(code)
    raise InvalidCodeError(f"not a code node: {code!r}")


def _family_rank(fam: Family) -> Ordinal:
    kind = fam.kind
    if isinstance(kind, DigitCells):
        return add(rank(fam.child.bind({"j": 0})), ONE)
    if isinstance(kind, RationalsBelow):
        return add(rank(fam.child.bind({"i": _sample_rational(kind)})), ONE)
    if isinstance(kind, RationalTriples):
        return add(rank(fam.child.bind({"u": kind.r - 1, "v": kind.r + 1})), ONE)
    if isinstance(kind, OrdinalsBelow):
        xi = kind.bound
        if xi.is_zero:
            return ZERO
        if xi.is_successor:
            return add(rank(fam.child.bind({"i": xi.predecessor()})), ONE)
        # children ranks below a limit stay below it and grow past every index
        probe = add(rank(fam.child.bind({"i": xi.fundamental(0)})), ONE)
        if not probe < xi:
            raise InvalidCodeError(f"cannot bound the ranks of {fam.child.name} below {xi}")
        return xi
    raise InvalidCodeError(f"unknown family kind {kind!r}")


# -- serialization ---------------------------------------------------------------

_PARAM_TYPES: dict[str, tuple] = {}


def register_param_type(tag: str, cls: type | tuple, encode: Callable, decode: Callable) -> None:
    _PARAM_TYPES[tag] = (cls, encode, decode)


def _enc_value(v):
    if v is None:
        return None
    if isinstance(v, Var):
        return {"var": v.name}
    if isinstance(v, bool):
        raise InvalidCodeError("booleans are not code parameters")
    if isinstance(v, int):
        return {"int": v}
    if isinstance(v, Fraction):
        return {"rat": format_rat(v)}
    if isinstance(v, Ordinal):
        return {"ord": format_ordinal(v)}
    for tag, (cls, enc, _) in _PARAM_TYPES.items():
        if isinstance(v, cls):
            return {tag: enc(v)}
    raise InvalidCodeError(f"cannot serialize parameter {v!r}")


def _dec_value(d, path):
    if d is None:
        return None
    if not isinstance(d, dict) or len(d) != 1:
        raise CodeParseError("parameter must be a one-key object", path)
    (tag, val), = d.items()
    try:
        if tag == "var":
            return Var(val)
        if tag == "int":
            if not isinstance(val, int):
                raise ValueError(val)
            return val
        if tag == "rat":
            return _dec_rat(val, path)
        if tag == "ord":
            return parse_ordinal(val)
        if tag in _PARAM_TYPES:
            return _PARAM_TYPES[tag][2](val)
    except CodeParseError:
        raise
    except Exception as exc:
        raise CodeParseError(f"bad {tag} parameter: {exc}", path) from None
    raise CodeParseError(f"unknown parameter tag {tag!r}", path)


def _dec_rat(s, path):
    if not isinstance(s, str) or "/" not in s:
        raise CodeParseError(f"rational must be a 'num/den' string, got {s!r}", path)
    q = Fraction(s)
    if format_rat(q) != s:
        raise CodeParseError(f"rational {s!r} is not reduced", path)
    return q


def _enc_kind(kind) -> dict:
    if isinstance(kind, RationalsBelow):
        return {"kind": "rationals_below", "params": {
            "bound": None if kind.bound is None else format_rat(kind.bound),
            "lower": None if kind.lower is None else format_rat(kind.lower)}}
    if isinstance(kind, OrdinalsBelow):
        return {"kind": "ordinals_below", "params": {"bound": format_ordinal(kind.bound)}}
    if isinstance(kind, RationalTriples):
        return {"kind": "rational_triples", "params": {"r": format_rat(kind.r)}}
    if isinstance(kind, DigitCells):
        return {"kind": "digit_cells", "params": {"position": kind.position, "digit": kind.digit}}
    raise InvalidCodeError(f"unknown family kind {kind!r}")


def _dec_kind(name, params, path):
    if not isinstance(params, dict):
        raise CodeParseError("family params must be an object", path)
    opt = lambda k: None if params.get(k) is None else _dec_rat(params[k], f"{path}.{k}")
    try:
        if name == "rationals_below":
            return RationalsBelow(opt("bound"), opt("lower"))
        if name == "ordinals_below":
            return OrdinalsBelow(parse_ordinal(params["bound"]))
        if name == "rational_triples":
            return RationalTriples(_dec_rat(params["r"], f"{path}.r"))
        if name == "digit_cells":
            return DigitCells(int(params["position"]), int(params["digit"]))
    except CodeParseError:
        raise
    except Exception as exc:
        raise CodeParseError(f"bad family params: {exc}", path) from None
    raise CodeParseError(f"unknown family kind {name!r}", path)


def code_to_json(code):
    if isinstance(code, Leaf):
        return {"leaf": [[format_rat(p), format_rat(q)] for p, q in code.intervals]}
    if isinstance(code, Union):
        return {"union": [code_to_json(c) for c in code.children]}
    if isinstance(code, Family):
        k = _enc_kind(code.kind)
        return {"family": {"kind": k["kind"], "params": k["params"], "child": code_to_json(code.child)}}
    if isinstance(code, Ref):
        return {"ref": {"name": code.name, "params": {k: _enc_value(v) for k, v in code.params}}}
    raise InvalidCodeError(f"not a code node: {code!r}")


def code_from_json(d, path="$"):
    if not isinstance(d, dict) or len(d) != 1:
        raise CodeParseError("code node must be a one-key object", path)
    (tag, body), = d.items()
    if tag == "leaf":
        if not isinstance(body, list):
            raise CodeParseError("leaf must be a list of intervals", path)
        ivs = []
        for i, pair in enumerate(body):
            if not isinstance(pair, list) or len(pair) != 2:
                raise CodeParseError("interval must be a pair", f"{path}.leaf[{i}]")
            ivs.append((_dec_rat(pair[0], f"{path}.leaf[{i}][0]"),
                        _dec_rat(pair[1], f"{path}.leaf[{i}][1]")))
        return Leaf(tuple(ivs))
    if tag == "union":
        if not isinstance(body, list):
            raise CodeParseError("union must be a list", path)
        return Union(tuple(code_from_json(c, f"{path}.union[{i}]") for i, c in enumerate(body)))
    if tag == "family":
        if not isinstance(body, dict) or set(body) != {"kind", "params", "child"}:
            raise CodeParseError("family needs kind, params, child", path)
        kind = _dec_kind(body["kind"], body["params"], f"{path}.family")
        child = code_from_json(body["child"], f"{path}.family.child")
        if not isinstance(child, Ref):
            raise CodeParseError("family child must be a ref", f"{path}.family.child")
        return Family(kind, child)
    if tag == "ref":
        if not isinstance(body, dict) or not isinstance(body.get("name"), str):
            raise CodeParseError("ref needs a name", path)
        params = body.get("params", {})
        if not isinstance(params, dict):
            raise CodeParseError("ref params must be an object", path)
        return Ref(body["name"], tuple(
            (k, _dec_value(v, f"{path}.ref.params.{k}")) for k, v in params.items()))
    raise CodeParseError(f"unknown node tag {tag!r}", path)


def multicode_to_json(mc: BorelMultiCode) -> dict:
    return {
        "sections": {"ctor": mc.ctor, "params": {k: _enc_value(v) for k, v in mc.params}},
        "cache": {format_rat(r): code_to_json(c) for r, c in mc.cache},
    }


def multicode_from_json(d, path="$") -> BorelMultiCode:
    body = d
    if not isinstance(body, dict) or set(body) != {"sections", "cache"}:
        raise CodeParseError("multicode needs exactly sections and cache", path)
    if not isinstance(body["cache"], dict):
        raise CodeParseError("multicode cache must be an object", f"{path}.cache")
    sec = body["sections"]
    if not isinstance(sec, dict) or not isinstance(sec.get("ctor"), str):
        raise CodeParseError("sections need a ctor", f"{path}.sections")
    params = sec.get("params", {})
    if not isinstance(params, dict):
        raise CodeParseError("section params must be an object", f"{path}.sections")
    params = tuple((k, _dec_value(v, f"{path}.sections.params.{k}")) for k, v in params.items())
    cache = tuple((_dec_rat(r, f"{path}.cache"), code_from_json(c, f"{path}.cache.{r}"))
                  for r, c in body["cache"].items())
    return BorelMultiCode(sec["ctor"], params, cache)


def dumps(obj) -> bytes:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=True).encode("ascii")


def serialize(obj) -> bytes:
    """Canonical bytes for a code or multicode."""
    if isinstance(obj, BorelMultiCode):
        return dumps(multicode_to_json(obj))
    return dumps(code_to_json(obj))


def loads(data: bytes | str):
    if isinstance(data, bytes):
        try:
            data = data.decode("ascii")
        except UnicodeDecodeError as exc:
            raise CodeParseError("non-ascii input", exc.start) from None
    try:
        return json.loads(data)
    except json.JSONDecodeError as exc:
        raise CodeParseError(exc.msg, exc.pos) from None


def deserialize(data: bytes | str):
    d = loads(data)
    if isinstance(d, dict) and "sections" in d:
        return multicode_from_json(d)
    return code_from_json(d)
