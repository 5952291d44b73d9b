"""Command-line front end: ``uchains <command> [flags]``.

Exit status: 0 on success, 1 when a verification fails, 2 on usage errors.
"""

from __future__ import annotations

import argparse
import json
import os
import random
import sys
from pathlib import Path

from .borelcode import CodeError, deserialize, eval_code, serialize
from .chains import (
    DIRECT, INTERLEAVED, ChainError, build_D, build_U, build_chain, chain_from_json, chain_to_json,
    derived_E,
)
from .ordinal import OrdinalError, format_ordinal, parse_ordinal
from .qreal import (
    QRealError, canonical_wo_set, encode_real, format_rat, parse_real, rat,
    well_ordered_part,
)
from .verify import ProbePlan, decompose_layers, default_plan, probe_window, verify_chain


class UsageError(Exception):
    pass


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="uchains", description="Well-ordered chains of uniform Borel sets.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, *, out=True):
        sp.add_argument("--json", action="store_true", help="machine-readable output")
        sp.add_argument("--seed", type=int, default=None, help="seed (default: $CHAINS_SEED or 0)")
        if out:
            sp.add_argument("--out", help="write the result to this file")

    b = sub.add_parser("build-chain", help="build a chain and write it as JSON")
    b.add_argument("--length", required=True)
    b.add_argument("--strategy", choices=[DIRECT, INTERLEAVED], default=DIRECT)
    b.add_argument("--positions", type=int, default=16, help="number of stored elements")
    common(b)

    e = sub.add_parser("eval", help="evaluate U, D or E at a symbolic real")
    e.add_argument("--set", choices=["U", "D", "E"], required=True)
    e.add_argument("--xi", required=True)
    e.add_argument("--real", required=True)
    common(e, out=False)

    for name, helptext in (("verify", "verify a stored chain"), ("decompose", "layer decomposition")):
        v = sub.add_parser(name, help=helptext)
        v.add_argument("--chain", required=True)
        v.add_argument("--probes", default="default", help="'default' or a JSON file of real expressions")
        common(v)

    x = sub.add_parser("export", help="serialize the multicode of U_xi or the code of D_xi/E_xi")
    x.add_argument("--set", choices=["U", "D", "E"], required=True)
    x.add_argument("--xi", required=True)
    common(x)

    i = sub.add_parser("import", help="read a serialized code or multicode and print it canonically")
    i.add_argument("--in", dest="infile", required=True)
    common(i)

    r = sub.add_parser("encode-real", help="sieve expansion of a symbolic real")
    r.add_argument("--real", required=True)
    r.add_argument("--digits", type=int, default=32)
    common(r, out=False)

    w = sub.add_parser("wo-set", help="canonical well-ordered set of a given type")
    w.add_argument("--xi", required=True)
    w.add_argument("--interval", default="0/1,1/1", help="a,b")
    common(w, out=False)
    return p


def _seed(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get("CHAINS_SEED")
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError:
        raise UsageError(f"CHAINS_SEED must be an integer, got {env!r}") from None


def _emit(args, text: str | bytes) -> None:
    data = text if isinstance(text, bytes) else (text + "\n").encode()
    out = getattr(args, "out", None)
    if out:
        Path(out).write_bytes(data)
    else:
        sys.stdout.write(data.decode())


def _load_json(path: str):
    try:
        return json.loads(Path(path).read_text())
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}: invalid JSON at {exc.pos}: {exc.msg}") from None


def _plan(args, chain) -> ProbePlan:
    seed = _seed(args)
    plan = default_plan(chain.length, seed=seed)
    if args.probes == "default":
        return plan
    data = _load_json(args.probes)
    exprs = data.get("reals", []) if isinstance(data, dict) else data
    rng = random.Random(seed)
    extra = tuple(parse_real(e) for e in exprs)
    windows = tuple(probe_window(z, rng, 6) for z in extra)
    return ProbePlan(plan.reals + extra, plan.windows + windows, seed=seed)


def _cmd_build(args) -> int:
    chain = build_chain(args.length, args.strategy)
    doc = chain_to_json(chain, chain.positions(args.positions))
    _emit(args, json.dumps(doc, sort_keys=True, indent=None if args.json else 2))
    return 0


def _cmd_eval(args) -> int:
    x = parse_real(args.real)
    xi = parse_ordinal(args.xi)
    if args.set == "U":
        v = build_U(xi).value(x)
        if v is not None and not build_U(xi).contains(x, v):
            raise ChainError("code and semantics disagree")
        doc = {"set": "U", "xi": format_ordinal(xi), "value": None if v is None else format_rat(v)}
        text = "absent" if v is None else format_rat(v)
    else:
        code = build_D(xi) if args.set == "D" else derived_E(xi)
        member = eval_code(code, x)
        doc = {"set": args.set, "xi": format_ordinal(xi), "member": member}
        text = "member" if member else "not a member"
    print(json.dumps(doc, sort_keys=True) if args.json else text)
    return 0


def _read_chain(args):
    return chain_from_json(_load_json(args.chain))


def _cmd_verify(args) -> int:
    chain, _ = _read_chain(args)
    rep = verify_chain(chain, _plan(args, chain))
    if args.json:
        _emit(args, rep.dumps())
    else:
        j = rep.to_json()
        lines = [
            f"chain {j['chain']['length']} ({j['chain']['strategy']})",
            f"uniformity          {'pass' if rep.uniformity_ok else 'FAIL'} ({j['uniformity']['checked']} checks)",
            f"ordering            {'pass' if rep.ordering_ok else 'FAIL'} ({j['ordering']['pairs']} pairs)",
            f"projection nesting  {'pass' if rep.projection_ok else 'FAIL'}",
            f"oracle agreement    {j['oracle_agreement']['agreed']}/{j['oracle_agreement']['checked']}",
            f"length audit        {'pass' if rep.length_audit_ok else 'FAIL'}",
        ]
        _emit(args, "\n".join(lines))
    return 0 if rep.all_pass else 1


def _cmd_decompose(args) -> int:
    chain, _ = _read_chain(args)
    plan = _plan(args, chain)
    dec = decompose_layers(chain, plan)
    if args.json:
        _emit(args, json.dumps(dec.to_json(), sort_keys=True, indent=2))
    else:
        _emit(args, "\n".join([f"layers: {len(dec.layers)}",
                               f"violations: {len(dec.violations)}",
                               f"max per-probe count: {max(dec.mu_x, default=0)}"]))
    return 0 if dec.ok else 1


def _cmd_export(args) -> int:
    xi = parse_ordinal(args.xi)
    if args.set == "U":
        obj = build_U(xi).multicode
    else:
        obj = build_D(xi) if args.set == "D" else derived_E(xi)
    _emit(args, serialize(obj) + b"\n")
    return 0


def _cmd_import(args) -> int:
    try:
        data = Path(args.infile).read_bytes()
    except OSError as exc:
        raise UsageError(f"cannot read {args.infile}: {exc.strerror}") from None
    obj = deserialize(data.strip())
    _emit(args, serialize(obj) + b"\n")
    return 0


def _cmd_encode(args) -> int:
    x = parse_real(args.real)
    e = encode_real(x)
    doc = {"real": x.to_expr(), "digits": e.digits(args.digits)}
    if e.is_exact:
        try:
            doc["exact"] = format_rat(e.exact)
        except QRealError:
            pass  # too many digits to print in full
    if args.json:
        print(json.dumps(doc, sort_keys=True))
    else:
        print(doc.get("exact", "0." + doc["digits"] + "..."))
    return 0


def _cmd_wo(args) -> int:
    parts = args.interval.split(",")
    if len(parts) != 2:
        raise UsageError("--interval takes a,b")
    z = canonical_wo_set(parse_ordinal(args.xi), (rat(parts[0].strip()), rat(parts[1].strip())))
    if args.json:
        print(json.dumps({"real": z.to_expr(), "order_type": format_ordinal(well_ordered_part(z).order_type)},
                         sort_keys=True))
    else:
        print(z.to_expr())
    return 0


_COMMANDS = {
    "build-chain": _cmd_build, "eval": _cmd_eval, "verify": _cmd_verify,
    "decompose": _cmd_decompose, "export": _cmd_export, "import": _cmd_import,
    "encode-real": _cmd_encode, "wo-set": _cmd_wo,
}


def run(argv=None) -> int:
    parser = _parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return _COMMANDS[args.command](args)
    except (UsageError, OrdinalError, QRealError, CodeError, ChainError, ValueError) as exc:
        print(f"uchains: error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
