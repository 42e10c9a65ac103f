"""Command-line front end.

Exit codes: 0 Duplicator wins / equivalent, 1 Spoiler wins / distinguished,
2 usage or input error, 3 oracle and game disagree.
"""
from __future__ import annotations

import argparse
import itertools
import json
import random
import sys
from pathlib import Path

from .comonads import ComonadSpec, unravel
from .games import TOP, Game
from .hintikka import HintikkaSynthesizer, distinguishing_sentence
from .logic.oracle import DISTINGUISHED, EQUIVALENT, rank_k_equivalent_oracle
from .logic.sexpr import to_sexpr
from .oracles import bounded_bisimilar
from .structures import (
    Signature,
    Structure,
    StructureError,
    all_structures,
    dumps_structure,
    isomorphism_classes,
    structure_from_dict,
)
from .wooded import ROOT, ForestStructure, PathShape, forest_from_dict

EXIT_DUPLICATOR, EXIT_SPOILER, EXIT_ERROR, EXIT_MISMATCH = 0, 1, 2, 3


class InputError(Exception):
    pass


# --- input ----------------------------------------------------------------------


def _read_json(path: str):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"{path}: cannot read: {exc.strerror}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}:{exc.lineno}:{exc.colno}: malformed JSON: {exc.msg}") from None


def load_input(path: str) -> Structure | ForestStructure:
    """A structure file, or a forest file when it carries a parent map."""
    obj = _read_json(path)
    try:
        if isinstance(obj, dict) and "parent" in obj:
            return forest_from_dict(obj)
        return structure_from_dict(obj)
    except StructureError as exc:
        raise InputError(f"{path}: {exc}") from None


def _spec(args) -> ComonadSpec:
    try:
        return ComonadSpec(args.comonad, args.k, args.with_identity, args.play_bound)
    except StructureError as exc:
        raise InputError(str(exc)) from None


def _as_forest(spec: ComonadSpec, x, path: str) -> ForestStructure:
    if isinstance(x, ForestStructure):
        if x.flavor != spec.flavor:
            raise InputError(f"{path}: forest flavor {x.flavor} does not match --comonad {spec.kind}")
        return x
    try:
        return unravel(spec, x)
    except StructureError as exc:
        raise InputError(f"{path}: {exc}") from None


def _as_structure(x, path: str) -> Structure:
    if isinstance(x, ForestStructure):
        raise InputError(f"{path}: expected a structure, got a forest file")
    return x


# --- node names -----------------------------------------------------------------


def node_name(a: ForestStructure, ident) -> str:
    if ident is ROOT:
        return "root"
    if a.labels is None:
        return str(ident)
    play = a.labels[ident]
    if a.flavor == "E":
        return ".".join(str(x) for x in play)
    if a.flavor == "P":
        return ".".join(f"{p}:{x}" for p, x in play)
    return ".".join([str(play[0][1])] + [f"{r}:{x}" for r, x in play[1:]])


def parse_node(a: ForestStructure, text: str):
    tree = a.tree
    text = text.strip()
    if text in ("root", ""):
        return tree.ident[0]
    for ident in tree.ident:
        if node_name(a, ident) == text:
            return ident
    raise InputError(f"no path node {text!r}")


def _rank_text(v) -> object:
    return "top" if v == TOP else int(v)


def _emit(fmt: str, human: str, record: dict):
    if fmt == "json-lines":
        print(json.dumps(record, ensure_ascii=False, sort_keys=True))
    else:
        print(human)


# --- subcommands ----------------------------------------------------------------


def cmd_game(args) -> int:
    spec = _spec(args)
    a = _as_forest(spec, load_input(args.left), args.left)
    b = _as_forest(spec, load_input(args.right), args.right)
    try:
        g = Game(a, b)
    except StructureError as exc:
        raise InputError(str(exc)) from None
    rank, stab, _ = g.ranks
    if args.position:
        try:
            left, right = args.position.split(",")
        except ValueError:
            raise InputError("--position expects L,R") from None
        start = (g.ta.node(parse_node(a, left)), g.tb.node(parse_node(b, right)))
    else:
        start = (0, 0)
    v = rank.get(start, -1)
    winner = "Duplicator" if v == TOP else "Spoiler"
    where = f"{node_name(a, g.ta.ident[start[0]])},{node_name(b, g.tb.ident[start[1]])}"
    _emit(args.format, f"winner: {winner}\nposition: {where}\nrank: {_rank_text(v) if v != -1 else 'not in W'}\n"
          f"stabilization rank: {stab}",
          {"kind": "verdict", "winner": winner, "position": where,
           "rank": None if v == -1 else _rank_text(v), "stabilization_rank": stab})
    if not args.no_positions:
        if args.format == "human":
            print("positions:")
        order = sorted(rank, key=lambda p: (g.ta.depth(p[0]), p))
        for i, j in order:
            ln, rn = node_name(a, g.ta.ident[i]), node_name(b, g.tb.ident[j])
            depth = g.ta.depth(i)
            _emit(args.format, f"{'  ' * (depth + 1)}{ln} ~ {rn}  rank {_rank_text(rank[i, j])}",
                  {"kind": "position", "left": ln, "right": rn, "depth": depth,
                   "rank": _rank_text(rank[i, j])})
    return EXIT_DUPLICATOR if v == TOP else EXIT_SPOILER


def cmd_hintikka(args) -> int:
    spec = _spec(args)
    m = _as_structure(load_input(args.structure), args.structure)
    try:
        syn = HintikkaSynthesizer(spec, m)
    except StructureError as exc:
        raise InputError(f"{args.structure}: {exc}") from None
    ident = parse_node(syn.a, args.node) if args.node else syn.tree.ident[0]
    shape = None
    if args.shape:
        try:
            shape = PathShape.from_dict(_read_json(args.shape))
        except StructureError as exc:
            raise InputError(f"{args.shape}: {exc}") from None
    try:
        phi = syn.theta_at(ident, shape, args.rank)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    text = to_sexpr(phi)
    _emit(args.format, text, {
        "kind": "formula", "node": node_name(syn.a, ident), "rank": args.rank,
        "quantifier_rank": phi.qr, "free": sorted(phi.free), "formula": text,
    })
    return EXIT_DUPLICATOR


def cmd_distinguish(args) -> int:
    spec = _spec(args)
    m = _as_structure(load_input(args.left), args.left)
    n = _as_structure(load_input(args.right), args.right)
    if m.signature != n.signature:
        raise InputError("signature mismatch between the two structures")
    try:
        found = distinguishing_sentence(spec, m, n)
    except StructureError as exc:
        raise InputError(str(exc)) from None
    if found is None:
        _emit(args.format, "equivalent", {"kind": "distinguish", "equivalent": True})
        return EXIT_DUPLICATOR
    phi, r = found
    text = to_sexpr(phi)
    note = "  (z1 denotes the point)" if spec.kind == "modal" else ""
    _emit(args.format, f"rank {r}{note}\n{text}", {
        "kind": "distinguish", "equivalent": False, "rank": r,
        "quantifier_rank": phi.qr, "sentence": text,
    })
    return EXIT_SPOILER


def cmd_oracle(args) -> int:
    spec = _spec(args)
    m = _as_structure(load_input(args.left), args.left)
    n = _as_structure(load_input(args.right), args.right)
    if m.signature != n.signature:
        raise InputError("signature mismatch between the two structures")
    try:
        game_eq = Game(unravel(spec, m), unravel(spec, n)).rank_index(0, 0) == TOP
    except StructureError as exc:
        raise InputError(str(exc)) from None
    if spec.kind == "modal":
        oracle_eq = bounded_bisimilar(m, n, spec.k - 1)
        detail = {"oracle": "bounded-bisimulation", "depth": spec.k - 1}
    else:
        rank = spec.k if spec.kind == "ef" else spec.bound
        variables = None if spec.kind == "ef" else spec.k
        v = rank_k_equivalent_oracle(m, n, rank, budget=args.budget,
                                     equality=spec.with_identity, variables=variables)
        if v.status not in (EQUIVALENT, DISTINGUISHED):
            raise InputError(f"oracle budget exhausted after {v.generated} formulas")
        oracle_eq = v.status == EQUIVALENT
        detail = {"oracle": "formula-enumeration", "generated": v.generated}
        if v.witness is not None:
            detail["witness"] = to_sexpr(v.witness)
            detail["true_in"] = v.true_in
    agree = oracle_eq == game_eq
    word = lambda e: "equivalent" if e else "distinguished"  # noqa: E731
    human = f"game: {word(game_eq)}\noracle: {word(oracle_eq)}"
    if "witness" in detail:
        human += f"\nwitness (true in {detail['true_in']}): {detail['witness']}"
    if not agree:
        human += "\nORACLE MISMATCH"
    _emit(args.format, human, {"kind": "oracle", "game": word(game_eq), "oracle_verdict": word(oracle_eq),
                               "agree": agree, **detail})
    if not agree:
        if args.format != "human":
            print("ORACLE MISMATCH", file=sys.stderr)
        return EXIT_MISMATCH
    return EXIT_DUPLICATOR if game_eq else EXIT_SPOILER


def _parse_relations(specs: list[str]) -> Signature:
    rels = []
    for item in specs:
        name, _, arity = item.partition(":")
        try:
            rels.append((name, int(arity or 2)))
        except ValueError:
            raise InputError(f"bad --relation {item!r}; expected NAME:ARITY") from None
    try:
        return Signature(tuple(rels))
    except StructureError as exc:
        raise InputError(str(exc)) from None


def cmd_corpus(args) -> int:
    sig = _parse_relations(args.relation or ["R:2"])
    out = Path(args.out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise InputError(f"{out}: cannot create directory: {exc.strerror}") from None
    rng = random.Random(args.seed)
    written = 0
    iso = isomorphism_classes(sig, args.max_size) if args.iso else None
    for size in range(args.min_size, args.max_size + 1):
        slots = sum(size ** a for _, a in sig.relations)
        if iso is not None:
            batch = [m for m in iso if m.size == size]
        elif args.sample is not None and slots > 16:
            batch = []
            for _ in range(args.sample):
                tables = {
                    name: [row for row in itertools.product(range(size), repeat=ar) if rng.random() < 0.5]
                    for name, ar in sig.relations
                }
                batch.append(Structure(sig, size, tables))
        elif slots > 16:
            raise InputError(f"size {size} has 2^{slots} structures; pass --sample")
        else:
            batch = list(all_structures(sig, size))
        for idx, m in enumerate(batch):
            path = out / f"s{size}_{idx:05d}.json"
            try:
                path.write_text(dumps_structure(m) + "\n", encoding="utf-8")
            except OSError as exc:
                raise InputError(f"{path}: cannot write: {exc.strerror}") from None
            written += 1
    _emit(args.format, f"wrote {written} structures to {out}",
          {"kind": "corpus", "written": written, "out_dir": str(out)})
    return EXIT_DUPLICATOR


# --- parser ----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="woodgames", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def game_flags(q):
        q.add_argument("--comonad", choices=["ef", "pebble", "modal"], default="ef")
        q.add_argument("--k", type=int, default=2, help="resource: rounds, pebbles or modal depth")
        q.add_argument("--with-identity", action="store_true", help="use the signature with I")
        q.add_argument("--play-bound", type=int, default=None, help="pebble plays are cut at this length")
        q.add_argument("--format", choices=["human", "json-lines"], default="human")

    q = sub.add_parser("game", help="solve the back-and-forth game")
    game_flags(q)
    q.add_argument("left")
    q.add_argument("right")
    q.add_argument("--position", help="start position L,R in play notation")
    q.add_argument("--no-positions", action="store_true", help="omit the rank dump")
    q.set_defaults(run=cmd_game)

    q = sub.add_parser("hintikka", help="print a Hintikka formula")
    game_flags(q)
    q.add_argument("structure")
    q.add_argument("--rank", type=int, required=True)
    q.add_argument("--node", help="path node in play notation (default: root)")
    q.add_argument("--shape", help="JSON file with the target path shape")
    q.set_defaults(run=cmd_hintikka)

    q = sub.add_parser("distinguish", help="find a separating sentence")
    game_flags(q)
    q.add_argument("left")
    q.add_argument("right")
    q.set_defaults(run=cmd_distinguish)

    q = sub.add_parser("oracle", help="cross-check the game against an independent oracle")
    game_flags(q)
    q.add_argument("left")
    q.add_argument("right")
    q.add_argument("--budget", type=int, default=2_000_000)
    q.set_defaults(run=cmd_oracle)

    q = sub.add_parser("corpus", help="write structure files")
    q.add_argument("--max-size", type=int, required=True)
    q.add_argument("--min-size", type=int, default=0)
    q.add_argument("--relation", action="append", help="NAME:ARITY, repeatable (default R:2)")
    q.add_argument("--out-dir", required=True)
    q.add_argument("--seed", type=int, default=0)
    q.add_argument("--sample", type=int, default=None, help="random structures per size when exhaustive is too big")
    q.add_argument("--iso", action="store_true", help="one structure per isomorphism class")
    q.add_argument("--format", choices=["human", "json-lines"], default="human")
    q.set_defaults(run=cmd_corpus)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    for name in ("k", "rank", "max_size", "budget", "play_bound"):
        v = getattr(args, name, None)
        if v is not None and v < (0 if name in ("rank", "max_size") else 1):
            print(f"woodgames: error: --{name.replace('_', '-')} out of range", file=sys.stderr)
            return EXIT_ERROR
    try:
        return args.run(args)
    except InputError as exc:
        print(f"woodgames: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
