"""Probe-based certification of chains and the layer decomposition of their union."""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from .borelcode import eval_code
from .chains import (
    Chain, Trimmed, UTag, below, below_via_middle, build_D, in_D,
)
from .ordinal import (
    ONE, ZERO, Ordinal, add, format_ordinal, ordinal, omega_power, parse_ordinal,
)
from .qreal import (
    AscendingLadder, DescendingLadder, FinitePoints, SymbolicReal, WOBlock,
    canonical_wo_set, format_rat, well_ordered_part, ALL_RATIONALS, EMPTY_SET,
)

__all__ = [
    "ProbePlan", "default_plan", "VerificationReport", "verify_chain",
    "LayerDecomposition", "decompose_layers", "OrderingViolationError", "landmarks",
    "probe_window",
]


class OrderingViolationError(ValueError):
    pass


@dataclass(frozen=True)
class ProbePlan:
    reals: tuple
    windows: tuple
    pair_budget: int = 600
    position_budget: int = 40
    seed: int = 0

    def __post_init__(self):
        if len(self.windows) != len(self.reals):
            raise ValueError("one rational window per probe")

    def __len__(self):
        return len(self.reals)

    @classmethod
    def empty(cls) -> "ProbePlan":
        return cls((), ())


def landmarks(mu: Ordinal, extra: int = 2) -> list:
    """Ordinals near the shape of mu: CNF prefixes with small tails, up to mu + extra."""
    out = set()
    prefix = ZERO
    for e, k in mu.terms:
        for j in range(k + 1):
            base = add(prefix, omega_power(e, j)) if j else prefix
            for tail in (ZERO, ONE, ordinal(2), omega_power(1), add(omega_power(1), ONE)):
                out.add(add(base, tail))
        prefix = add(prefix, omega_power(e, k))
    for n in range(extra + 1):
        out.add(add(mu, ordinal(n)))
    return sorted(out)


def _wo(nu, a, b) -> SymbolicReal:
    return canonical_wo_set(nu, (a, b))


def default_plan(mu, seed: int = 0, count: int = 56, window: int = 6) -> ProbePlan:
    """Canonical witnesses around mu, spoilers with descending blocks, and assorted sets."""
    mu = parse_ordinal(mu)
    rng = random.Random(seed)
    types = landmarks(mu)
    reals: list[SymbolicReal] = []
    for nu in types:
        reals.append(_wo(nu, 0, 1))
    # spoilers: a descending block cuts the well-ordered part, or sits harmlessly above it
    for nu in types[::2]:
        c = Fraction(rng.randint(1, 15), 16)
        reals.append(_wo(nu, 0, 1) + SymbolicReal((DescendingLadder(c, c + Fraction(1, 32)),)))
        reals.append(_wo(nu, 0, 1) + SymbolicReal((DescendingLadder(Fraction(2), Fraction(3)),)))
    fixed = [
        EMPTY_SET, ALL_RATIONALS,
        SymbolicReal((FinitePoints((Fraction(0), Fraction(1), Fraction(2))),)),
        SymbolicReal((FinitePoints((Fraction(0), Fraction(5))),)),
        SymbolicReal((AscendingLadder(Fraction(0), Fraction(1)), FinitePoints((Fraction(2),)))),
        SymbolicReal((AscendingLadder(Fraction(0), Fraction(1)), DescendingLadder(Fraction(2), Fraction(3)))),
        SymbolicReal((FinitePoints((Fraction(-1),)),), complement=True),
    ]
    reals.extend(fixed)
    while len(reals) < count:
        reals.append(_random_real(rng, types))
    seen, uniq = set(), []
    for z in reals:
        if z not in seen:
            seen.add(z)
            uniq.append(z)
    windows = tuple(probe_window(z, rng, window) for z in uniq)
    return ProbePlan(tuple(uniq), windows, seed=seed)


def _random_real(rng: random.Random, types: list) -> SymbolicReal:
    blocks = []
    for _ in range(rng.randint(1, 3)):
        a = Fraction(rng.randint(-8, 8), rng.randint(1, 6))
        b = a + Fraction(rng.randint(1, 8), rng.randint(1, 4))
        kind = rng.randrange(4)
        if kind == 0:
            pts = tuple(sorted({Fraction(rng.randint(-20, 20), rng.randint(1, 5)) for _ in range(rng.randint(1, 5))}))
            blocks.append(FinitePoints(pts))
        elif kind == 1:
            blocks.append(AscendingLadder(a, b))
        elif kind == 2:
            blocks.append(WOBlock(rng.choice(types), a, b))
        else:
            blocks.append(DescendingLadder(a, b))
    return SymbolicReal(tuple(blocks))


def probe_window(z: SymbolicReal, rng: random.Random, size: int) -> tuple:
    w = well_ordered_part(z)
    out = set()
    for xi in (ZERO, ONE, omega_power(1)):
        q = w.element_at(xi)
        if q is not None:
            out.add(q)
    q = z.some_between(None, None)
    if q is not None:
        out.add(q)
    while len(out) < size:
        out.add(Fraction(rng.randint(-40, 40), rng.randint(1, 12)))
    return tuple(sorted(out))


# -- reports ---------------------------------------------------------------------


@dataclass
class VerificationReport:
    length: str
    strategy: str
    positions: list = field(default_factory=list)
    uniformity_checked: int = 0
    uniformity_failures: list = field(default_factory=list)
    pair_verdicts: list = field(default_factory=list)
    via_middle: int = 0
    projection_checked: int = 0
    projection_failures: list = field(default_factory=list)
    oracle_checked: int = 0
    oracle_disagreements: list = field(default_factory=list)
    length_audit_ok: bool = True
    audit_failures: list = field(default_factory=list)

    @property
    def ordering_failures(self) -> list:
        return [v for v in self.pair_verdicts if v[2] == "fails"]

    @property
    def uniformity_ok(self) -> bool:
        return not self.uniformity_failures

    @property
    def ordering_ok(self) -> bool:
        return not self.ordering_failures

    @property
    def projection_ok(self) -> bool:
        return not self.projection_failures

    @property
    def oracle_ok(self) -> bool:
        return not self.oracle_disagreements

    @property
    def all_pass(self) -> bool:
        return (self.uniformity_ok and self.ordering_ok and self.projection_ok
                and self.oracle_ok and self.length_audit_ok)

    def to_json(self) -> dict:
        counts = {"holds": 0, "vacuous": 0, "fails": 0}
        for v in self.pair_verdicts:
            counts[v[2]] += 1
        return {
            "chain": {"length": self.length, "strategy": self.strategy},
            "positions": self.positions,
            "uniformity": {"pass": self.uniformity_ok, "checked": self.uniformity_checked,
                           "witnesses": self.uniformity_failures},
            "ordering": {"pass": self.ordering_ok, "pairs": len(self.pair_verdicts),
                         "counts": counts, "certified_via_middle": self.via_middle,
                         "verdicts": self.pair_verdicts},
            "projection_nesting": {"pass": self.projection_ok, "checked": self.projection_checked,
                                   "witnesses": self.projection_failures},
            "oracle_agreement": {"checked": self.oracle_checked,
                                 "agreed": self.oracle_checked - len(self.oracle_disagreements),
                                 "witnesses": self.oracle_disagreements},
            "length_audit_ok": self.length_audit_ok,
            "audit_witnesses": self.audit_failures,
            "all_pass": self.all_pass,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, indent=2)


def _sample_positions(chain: Chain, budget: int) -> list:
    return sorted(chain.positions(budget))


def _sample_pairs(n: int, budget: int, seed: int) -> list:
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    if len(pairs) <= budget:
        return pairs
    rng = random.Random(seed)
    return sorted(rng.sample(pairs, budget))


def verify_chain(chain: Chain, plan: ProbePlan) -> VerificationReport:
    rep = VerificationReport(format_ordinal(chain.length), chain.strategy)
    positions = _sample_positions(chain, plan.position_budget)
    rep.positions = [format_ordinal(p) for p in positions]
    sets = [chain.at(p) for p in positions]
    probes = plan.reals

    # uniformity and code/semantics agreement on every window
    for p, P in zip(positions, sets):
        for k, (x, window) in enumerate(zip(probes, plan.windows)):
            v = P.value(x)
            rs = set(window)
            if v is not None:
                rs.add(v)
            for r in sorted(rs):
                rep.uniformity_checked += 1
                rep.oracle_checked += 1
                got = P.contains(x, r)
                if got != (r == v):
                    rep.oracle_disagreements.append({
                        "position": format_ordinal(p), "set": str(P), "probe": x.to_expr(),
                        "rational": format_rat(r), "code": got,
                        "semantic": None if v is None else format_rat(v)})
                    if got and r != v:
                        rep.uniformity_failures.append({
                            "position": format_ordinal(p), "set": str(P), "probe": x.to_expr(),
                            "rational": format_rat(r)})

    # projection nesting: membership in pr P equals membership in D_xi, by code and by oracle
    d_cache: dict = {}
    for p, P in zip(positions, sets):
        xi = P.proj.xi
        for x in probes:
            key = (xi, x)
            if key not in d_cache:
                by_code = eval_code(build_D(xi), x)
                d_cache[key] = by_code
                rep.oracle_checked += 1
                if by_code != in_D(xi, x):
                    rep.oracle_disagreements.append({
                        "set": f"D[{format_ordinal(xi)}]", "probe": x.to_expr(),
                        "code": by_code, "semantic": in_D(xi, x)})
            rep.projection_checked += 1
            if (P.value(x) is not None) != d_cache[key]:
                rep.projection_failures.append({
                    "position": format_ordinal(p), "set": str(P), "probe": x.to_expr(),
                    "descriptor": str(P.proj)})

    # pairwise below
    u_at = [i for i, P in enumerate(sets) if isinstance(_untrim(P.semantic), UTag)]
    for i, j in _sample_pairs(len(positions), plan.pair_budget, plan.seed):
        vd = below(sets[i], sets[j], probes)
        entry = [rep.positions[i], rep.positions[j], vd.status]
        if vd.status == "fails":
            entry.append({"probe": vd.witness.to_expr(), "detail": vd.detail})
        rep.pair_verdicts.append(entry)
        if vd.ok and any(i < m < j and below_via_middle(sets[i], sets[m], sets[j]) for m in u_at):
            rep.via_middle += 1

    _check_audit(chain, positions, rep)
    return rep


def _untrim(tag):
    while isinstance(tag, Trimmed):
        tag = tag.base
    return tag


def _check_audit(chain: Chain, positions: Sequence[Ordinal], rep: VerificationReport) -> None:
    audit = chain.audit
    if audit is None:
        return
    fails = rep.audit_failures
    seen = {}
    for p in positions:
        src = audit.locate(p)
        if audit.position_of(src) != p:
            fails.append({"position": format_ordinal(p), "source": str(src), "problem": "round trip"})
        if src in seen:
            fails.append({"position": format_ordinal(p), "source": str(src), "problem": "collision"})
        seen[src] = p
    total = ZERO
    for nu, s in zip(audit.nus, audit.partial_sums):
        total = add(total, add(ONE, nu))
        if total != s:
            fails.append({"problem": "partial sum", "expected": format_ordinal(total), "got": format_ordinal(s)})
            break
    cut = audit.cut_step(max_steps=2000)
    sums = audit.partial_sums
    for a, b in zip(sums, sums[1:]):
        if not a < b:
            fails.append({"problem": "partial sums not increasing", "at": format_ordinal(b)})
            break
    if cut is not None:
        before = ZERO if cut == 1 else sums[cut - 2]
        if not (before < chain.length <= sums[cut - 1]):
            fails.append({"problem": "cut", "step": cut})
    else:
        # no partial sum reaches mu: every sum stays below it and mu is their supremum
        if not chain.length.is_limit or any(not s < chain.length for s in sums):
            fails.append({"problem": "unreachable length"})
    rep.length_audit_ok = not fails


# -- layers ----------------------------------------------------------------------


@dataclass
class LayerDecomposition:
    """Layer k holds, per probe, the k-th smallest section value of the chain."""

    layers: list
    mu_x: list
    probes: tuple
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def value(self, layer: int, probe: int) -> Optional[Fraction]:
        return self.layers[layer].get(probe) if layer < len(self.layers) else None

    def to_json(self) -> dict:
        return {
            "layers": [{str(k): format_rat(v) for k, v in sorted(layer.items())} for layer in self.layers],
            "mu_x": self.mu_x,
            "violations": self.violations,
        }


def decompose_layers(chain: Chain, plan: ProbePlan) -> LayerDecomposition:
    positions = _sample_positions(chain, plan.position_budget) if plan.reals else []
    sets = [chain.at(p) for p in positions]
    layers: list[dict] = []
    mu_x = []
    for k, x in enumerate(plan.reals):
        vals = [P.value(x) for P in sets]
        seq = [v for v in vals if v is not None]
        for a, b in zip(seq, seq[1:]):
            if not a < b:
                raise OrderingViolationError(
                    f"section values at {x.to_expr()} are not increasing: {format_rat(a)}, {format_rat(b)}")
        mu_x.append(len(seq))
        for i, v in enumerate(seq):
            while len(layers) <= i:
                layers.append({})
            layers[i][k] = v
    dec = LayerDecomposition(layers, mu_x, plan.reals)
    for i in range(len(layers)):
        for j in range(i + 1, len(layers)):
            lo, hi = layers[i], layers[j]
            if not set(hi) <= set(lo):
                dec.violations.append({"layers": [i, j], "problem": "projection not nested"})
            for k in set(lo) & set(hi):
                if not lo[k] < hi[k]:
                    dec.violations.append({"layers": [i, j], "probe": k, "problem": "order"})
    return dec
