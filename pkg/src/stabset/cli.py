"""Command-line front end.

Every command builds one JSON report.  The text format is rendered from that
report, never computed separately.  Exit status: 0 when the report is ok,
1 when a verification failed, 2 for bad input.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Callable, Dict, List, Optional

from . import core_dynamics as cd
from . import free_groups as fg
from . import hilbert_operator as ho
from . import interval_maps as im
from . import linear_maps as lm
from . import morphism_monoids as mm
from . import properties
from . import word_substitutions as ws
from ._util import fraction_str, parse_fraction
from .errors import InputError, VerificationError

EXACT = "exact"
DEPTH_LIMITED = "depth-limited"


# --- input helpers --------------------------------------------------------------


def _read_text(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from exc


def _read_json(path: str):
    try:
        return json.loads(_read_text(path))
    except json.JSONDecodeError as exc:
        raise InputError(f"{path} is not valid JSON: {exc}") from exc


def _opt(args, name: str, default):
    value = getattr(args, name, None)
    return default if value is None else value


def _positive(args, name: str, default: int) -> int:
    value = _opt(args, name, default)
    if value < 1:
        raise InputError(f"--{name} must be positive")
    return value


def _nonneg(args, name: str, default: int) -> int:
    value = _opt(args, name, default)
    if value < 0:
        raise InputError(f"--{name} must be non-negative")
    return value


# --- fmap ---------------------------------------------------------------------------


def cmd_fmap_sets(args) -> dict:
    f = cd.FiniteSelfMap.from_json(_read_json(args.file))
    q = cd.four_sets(f)
    return {
        "sets": q.to_json(),
        "chain_holds": q.chain_holds(),
        "stab_equals_atrac": q.stab == q.atrac,
        "precision": EXACT,
        "ok": q.chain_holds() and q.stab == q.atrac,
    }


def cmd_fmap_chain(args) -> dict:
    f = cd.FiniteSelfMap.from_json(_read_json(args.file))
    if not 0 <= args.x < f.size:
        raise InputError(f"point {args.x} outside 0..{f.size - 1}")
    depth = _positive(args, "depth", 10)
    chain = cd.backward_chain(f, args.x, depth)
    in_stab = args.x in cd.greatest_stabilized_subset(f)
    return {
        "x": args.x,
        "depth": depth,
        "chain": chain,
        "in_stab": in_stab,
        "precision": EXACT,
        "ok": (chain is not None) or not in_stab,
    }


def cmd_fmap_z2(args) -> dict:
    depth = _nonneg(args, "depth", 100)
    p = cd.Z2Point(args.n, args.m)
    rep = cd.example21_classify(p)
    found = cd.example21_backward_search(p, depth) is not None
    expected = rep.in_atrac or (rep.max_chain_length is not None and rep.max_chain_length >= depth)
    return {
        "point": p.to_json(),
        "classification": rep.to_json(),
        "search_depth": depth,
        "search_found_chain": found,
        "agrees": found == expected,
        "precision": EXACT,
        "ok": found == expected,
    }


def cmd_fmap_window(args) -> dict:
    if args.N < 1:
        raise InputError("--N must be positive")
    f, points = cd.example21_truncate(args.N)
    q = cd.four_sets(f)
    name = lambda s: [points[i].to_json() for i in sorted(s)]  # noqa: E731
    return {
        "N": args.N,
        "size": f.size,
        "sets": {"fix": name(q.fix), "orb": name(q.orb), "stab": name(q.stab), "atrac": name(q.atrac)},
        "chain_holds": q.chain_holds(),
        "precision": EXACT,
        "ok": q.chain_holds(),
    }


# --- linear --------------------------------------------------------------------------


def cmd_linear(args) -> dict:
    M = lm.RationalMatrix.from_json(_read_json(args.file))
    rep = lm.chain_report(M)
    stable = lm.stable_subspace(M)
    decomp = lm.decomposition_check(M)
    bij = lm.restriction_is_bijective(M, stable)
    return {
        "chain": rep.to_json(),
        "stable_subspace": stable.to_json(),
        "kernel_image_decomposition": decomp,
        "restriction_bijective": bij,
        "precision": EXACT,
        "ok": decomp and bij,
    }


# --- hilbert ------------------------------------------------------------------------


def cmd_hilbert_verify(args) -> dict:
    if args.kmax < 1 or args.nmax < 2:
        raise InputError("need --kmax >= 1 and --nmax >= 2")
    w = ho.TruncationWindow(args.kmax, args.nmax)
    checks = args.check or list(ho.CHECKS)
    report = ho.verify_all(w, checks, seed=_opt(args, "seed", 0), tolerance=_opt(args, "tolerance", 0.0))
    report["precision"] = f"exact inside the {args.kmax}x{args.nmax} window"
    return report


def cmd_hilbert_pairing(args) -> dict:
    if args.limit < 1:
        raise InputError("--limit must be positive")
    rep = ho.check_pairing_bijection(args.limit)
    rep = dict(rep)
    rep["table"] = {f"{k},{n}": ho.alpha(k, n) for k in range(1, 5) for n in range(1, 5)}
    rep.setdefault("ok", bool(rep["inverse_on_grid"] and rep["inverse_on_indices"]))
    return rep


# --- subst ----------------------------------------------------------------------------


def _load_sub(path: str) -> ws.Substitution:
    return ws.Substitution.from_dsl(_read_text(path))


def cmd_subst_analyze(args) -> dict:
    sub = _load_sub(args.file)
    length = _nonneg(args, "length", 6)
    mort = ws.mortality(sub)
    fp = ws.fixed_point_specs(sub)
    prefix_sets = ws.four_sets_prefix(sub, length)
    return {
        "substitution": sub.to_json(),
        "non_erasing": sub.is_non_erasing(),
        "mortality": mort.to_json(),
        "fixed_points": fp.to_json(),
        "stable_power": ws.stable_power(sub),
        "prefix_sets": {"length": length, "precision": DEPTH_LIMITED, **prefix_sets},
        "ok": True,
    }


def cmd_subst_fixpoint(args) -> dict:
    sub = _load_sub(args.file)
    length = _nonneg(args, "length", 64)
    seed = args.letter
    if seed not in sub.alphabet:
        raise InputError(f"seed {seed!r} is not a letter of the substitution")
    spec = ws.spec_for_seed(sub, seed)
    out = {"spec": spec.to_json(), "length": length}
    if spec.case == "finite":
        word = ws.finite_fixed_word(sub, spec)
        out.update(word=word, precision=EXACT)
        psi = ws.power(sub, spec.power)
        out["ok"] = ws.apply_star(psi, word) == word
    else:
        pre = ws.expand_fixed_point(sub, spec, length)
        psi = ws.power(sub, spec.power)
        out.update(prefix=pre, precision=DEPTH_LIMITED)
        out["ok"] = ws.apply_star(psi, pre)[: len(pre)] == pre
    return out


def cmd_subst_member(args) -> dict:
    sub = _load_sub(args.file)
    word = args.word
    ws.check_word(sub, word)
    depth = _positive(args, "depth", 50)
    rep = ws.membership_finite(sub, word, depth)
    out = rep.to_json()
    out["word"] = word
    out["precision"] = EXACT
    out["ok"] = not rep.cross_check.get("contradiction", False)
    return out


# --- monoid -------------------------------------------------------------------------------


def cmd_monoid_finite(args) -> dict:
    system = mm.FiniteMonoidSystem.from_json(_read_json(args.file))
    sets = mm.finite_monoid_sets(system)
    out = sets.to_json()
    out.update(precision=EXACT, ok=sets.equal)
    return out


def cmd_monoid_epi(args) -> dict:
    tokens = mm.parse_directive(args.directive)
    length = _nonneg(args, "length", 60)
    gen = mm.episturmian_generate(tokens, length, args.alphabet)
    out = gen.to_json()
    out["directive"] = mm.format_directive(tokens)
    out["precision"] = EXACT if gen.achieved >= length else DEPTH_LIMITED
    if gen.prefix:
        back = mm.desubstitute_branches(gen.prefix, len(tokens), args.alphabet or None)
        out["desubstitution"] = back.to_json()
        out["ok"] = back.exists
    else:
        out["ok"] = True
    return out


def cmd_monoid_kolakoski(args) -> dict:
    length = _positive(args, "length", 100)
    rep = mm.kolakoski_report(length)
    out = dict(rep)
    out["precision"] = EXACT
    out["ok"] = bool(rep["self_encoding_holds"])
    return out


def cmd_monoid_smooth(args) -> dict:
    text = args.word.strip()
    if not text or set(text) - set("123456789"):
        raise InputError("--word must be a non-empty string of digits 1-9")
    word = [int(c) for c in text]
    alphabet = tuple(sorted(set(word) | {1, 2}))
    depth = _nonneg(args, "depth", 5)
    rep = mm.smooth_check(word, alphabet, depth)
    out = rep.to_json()
    out["precision"] = DEPTH_LIMITED
    return out


# --- freegroup -----------------------------------------------------------------------------


def cmd_freegroup_rankchain(args) -> dict:
    phi = fg.FreeEndo.from_json(_read_json(args.file))
    n = _positive(args, "n", 4)
    rep = fg.rank_chain(phi, n)
    out = rep.to_json()
    out["endomorphism"] = phi.to_json()
    out["precision"] = DEPTH_LIMITED if rep.set_stable_from is None else EXACT
    out["ok"] = all(b <= a for a, b in zip(rep.ranks, rep.ranks[1:]))
    return out


def cmd_freegroup_member(args) -> dict:
    phi = fg.FreeEndo.from_json(_read_json(args.file))
    fg.check_letters(args.word, phi.rank)
    depth = _positive(args, "depth", 4)
    rep = fg.stab_atrac_report(phi, fg.free_reduce(args.word), depth)
    out = rep.to_json()
    out["orbit_period"] = fg.orbit_period(phi, fg.free_reduce(args.word))
    out["precision"] = EXACT if rep.status in ("exact", "refuted") else DEPTH_LIMITED
    out["ok"] = True
    return out


# --- interval -----------------------------------------------------------------------------


def _load_pwl(args) -> im.PWLMap:
    if args.builtin == "discontinuous":
        return im.discontinuous_example_map()
    if args.builtin == "continuous":
        return im.continuous_example_map()
    if args.file is None:
        raise InputError("give a map file or --builtin discontinuous|continuous")
    return im.PWLMap.from_json(_read_json(args.file))


def cmd_interval_atrac(args) -> dict:
    f = _load_pwl(args)
    n = _nonneg(args, "n", 12)
    iterates = im.atrac_iterates(f, n)
    return {
        "map": f.to_json(),
        "iterates": [str(u) for u in iterates],
        "fixed_points": str(im.fixed_points(f)),
        "stabilized": len(iterates) >= 2 and iterates[-1] == iterates[-2],
        "precision": EXACT if len(iterates) >= 2 and iterates[-1] == iterates[-2] else DEPTH_LIMITED,
        "ok": True,
    }


def cmd_interval_chain(args) -> dict:
    f = _load_pwl(args)
    x = parse_fraction(args.x)
    if not 0 <= x <= 1:
        raise InputError("--x must lie in [0,1]")
    depth = _nonneg(args, "depth", 12)
    chain = im.backward_chain_point(f, x, depth)
    orbit = im.forward_orbit(f, x)
    return {
        "x": fraction_str(x),
        "depth": depth,
        "chain": None if chain is None else [fraction_str(c) for c in chain],
        "forward_orbit": orbit,
        "precision": DEPTH_LIMITED,
        "ok": True,
    }


def cmd_interval_witness(args) -> dict:
    f = _load_pwl(args)
    depth = _nonneg(args, "depth", 12)
    wit = im.stab_minus_orb_witness(f, depth)
    sampled = im.sampled_chain_check(f, depth)
    return {
        "map": f.to_json(),
        "fixed_points": str(im.fixed_points(f)),
        "witness": wit,
        "sampled_chains": sampled,
        "precision": DEPTH_LIMITED,
        "ok": wit is not None and sampled["ok"],
    }


# --- campaign --------------------------------------------------------------------------------


def cmd_campaign(args) -> dict:
    seed = _opt(args, "seed", 0)
    size = _nonneg(args, "size", 1)
    rep = properties.run_campaign(seed, size, args.suite)
    failed = [s for s in rep["suites"] if not s["ok"]]
    if failed:
        rep["first_failure"] = failed[0]
    return rep


# --- parser ------------------------------------------------------------------------------


def _common(seed: bool = True) -> argparse.ArgumentParser:
    # defaults are SUPPRESS so the same flag works before or after the subcommand
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--format", choices=("json", "text"), default=argparse.SUPPRESS)
    if seed:
        p.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    p.add_argument("--depth", type=int, default=argparse.SUPPRESS)
    p.add_argument("--length", type=int, default=argparse.SUPPRESS)
    p.add_argument("--tolerance", type=float, default=argparse.SUPPRESS)
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="stabset", parents=[common],
                                     description="Fixed, periodic, stable and attracting sets of self-maps.")
    sub = parser.add_subparsers(dest="command", required=True)

    def leaf(group, name: str, func: Callable, help: str, seed: bool = True):
        p = group.add_parser(name, parents=[common if seed else _common(seed=False)], help=help)
        p.set_defaults(func=func)
        return p

    fmap = sub.add_parser("fmap", help="finite self-maps and the Z^2 example").add_subparsers(dest="action", required=True)
    p = leaf(fmap, "sets", cmd_fmap_sets, "four sets of a map given as {\"size\", \"succ\"}")
    p.add_argument("file")
    p = leaf(fmap, "chain", cmd_fmap_chain, "backward chain from a point")
    p.add_argument("file")
    p.add_argument("--x", type=int, required=True)
    p = leaf(fmap, "z2", cmd_fmap_z2, "classify a point of the Z^2 example")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, default=0)
    p = leaf(fmap, "window", cmd_fmap_window, "four sets of the truncated Z^2 example")
    p.add_argument("--N", type=int, required=True)

    p = sub.add_parser("linear", parents=[common], help="kernel/image chains of a rational matrix")
    p.add_argument("file")
    p.set_defaults(func=cmd_linear)

    hil = sub.add_parser("hilbert", help="truncated sequence-space operator").add_subparsers(dest="action", required=True)
    p = leaf(hil, "verify", cmd_hilbert_verify, "exact checks inside a truncation window")
    p.add_argument("--kmax", type=int, default=40)
    p.add_argument("--nmax", type=int, default=40)
    p.add_argument("--check", action="append", choices=ho.CHECKS)
    p = leaf(hil, "pairing", cmd_hilbert_pairing, "bijectivity of the index pairing")
    p.add_argument("--limit", type=int, default=10 ** 6)

    sb = sub.add_parser("subst", help="word substitutions").add_subparsers(dest="action", required=True)
    p = leaf(sb, "analyze", cmd_subst_analyze, "mortality, fixed points, prefix sets")
    p.add_argument("file")
    p = leaf(sb, "fixpoint", cmd_subst_fixpoint, "expand the fixed point grown from a letter", seed=False)
    p.add_argument("file")
    p.add_argument("--seed", dest="letter", required=True, help="starting letter")
    p = leaf(sb, "member", cmd_subst_member, "membership of a finite word")
    p.add_argument("file")
    p.add_argument("--word", required=True)

    mo = sub.add_parser("monoid", help="monoids of maps, episturmian and run-length words").add_subparsers(
        dest="action", required=True)
    p = leaf(mo, "finite", cmd_monoid_finite, "Stab and Atrac of a finite system")
    p.add_argument("file")
    p = leaf(mo, "epi", cmd_monoid_epi, "generate and desubstitute an episturmian prefix")
    p.add_argument("--directive", required=True)
    p.add_argument("--alphabet", default=None)
    leaf(mo, "kolakoski", cmd_monoid_kolakoski, "Kolakoski prefix and self-encoding")
    p = leaf(mo, "smooth", cmd_monoid_smooth, "iterated run-length decoding of a word")
    p.add_argument("--word", required=True)

    fr = sub.add_parser("freegroup", help="free group endomorphisms").add_subparsers(dest="action", required=True)
    p = leaf(fr, "rankchain", cmd_freegroup_rankchain, "ranks of the iterated images")
    p.add_argument("file")
    p.add_argument("--n", type=int, default=None)
    p = leaf(fr, "member", cmd_freegroup_member, "Stab/Atrac status of a word")
    p.add_argument("file")
    p.add_argument("--word", required=True)

    iv = sub.add_parser("interval", help="piecewise-linear interval maps").add_subparsers(dest="action", required=True)
    for name, func, hlp in (("atrac", cmd_interval_atrac, "iterated images of [0,1]"),
                            ("chain", cmd_interval_chain, "backward chain and forward orbit of a point"),
                            ("witness", cmd_interval_witness, "search for a stable non-periodic point")):
        p = leaf(iv, name, func, hlp)
        p.add_argument("file", nargs="?")
        p.add_argument("--builtin", choices=("discontinuous", "continuous"))
        if name == "atrac":
            p.add_argument("--n", type=int, default=None)
        if name == "chain":
            p.add_argument("--x", required=True)

    p = sub.add_parser("campaign", parents=[common], help="seeded randomised property suites")
    p.add_argument("--size", type=int, default=1, help="scale factor for case counts; 0 runs nothing")
    p.add_argument("--suite", action="append", choices=sorted(properties.SUITES))
    p.set_defaults(func=cmd_campaign)
    return parser


# --- rendering ----------------------------------------------------------------------------------


def render_json(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=2, default=str)


def _flatten(value, prefix: str, out: List[str]) -> None:
    if isinstance(value, dict):
        for k in sorted(value):
            _flatten(value[k], f"{prefix}.{k}" if prefix else str(k), out)
    elif isinstance(value, list) and any(isinstance(v, (dict, list)) for v in value):
        for i, v in enumerate(value):
            _flatten(v, f"{prefix}[{i}]", out)
    else:
        out.append(f"{prefix}: {json.dumps(value, default=str)}")


def render_text(report: dict) -> str:
    # derived from the JSON form so both formats carry the same content
    lines: List[str] = []
    _flatten(json.loads(render_json(report)), "", lines)
    return "\n".join(lines)


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 2
    fmt = getattr(args, "format", "json")
    code = 0
    try:
        report = args.func(args)
        if not report.get("ok", True):
            code = 1
    except VerificationError as exc:
        report, code = {"ok": False, "error": str(exc), "kind": "verification"}, 1
    except (InputError, ValueError, RecursionError) as exc:
        report, code = {"ok": False, "error": str(exc), "kind": "input"}, 2
    report["exit_code"] = code
    text = render_text(report) if fmt == "text" else render_json(report)
    sys.stdout.write(text + "\n")
    if code == 2:
        sys.stderr.write(f"stabset: error: {report['error']}\n")
    return code
