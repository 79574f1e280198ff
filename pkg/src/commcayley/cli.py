"""Command-line front end: JSON-lines results, human summaries on stderr.

Exit status: 0 on success, 2 when any result is a budget-exhausted
"unknown" or a search came back empty-handed, 1 on errors.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import __version__
from .cache import CertificateCache
from .config import (
    CACHE_ENV_VAR,
    Config,
    ingest_corpus,
    load_config_file,
    load_loop_file,
    load_pattern_bank,
    resolve_cache_dir,
    resolve_config,
)
from .endpath import SeparatorError, choose_N, endpath_report, select_separator
from .loops import MoveError, k_equivalent, parse_loop, reduce_loop
from .metric import (
    BoundCertificate,
    CommutatorAlphabet,
    DomainError,
    Factorization,
    ball,
    cl_bounds,
    scl_upper,
    verify_certificate,
)
from .quasimorphism import (
    LipschitzViolation,
    Pattern,
    c_sigma,
    defect_bound,
    lipschitz_audit,
)
from .words import Word, WordSyntaxError, parse_word

SUBCOMMANDS = (
    "cl",
    "dist",
    "scl",
    "qm",
    "defect",
    "loop-reduce",
    "loop-equal",
    "endpath",
    "ball",
    "audit",
)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="commcayley",
        description="Commutator-length geometry toolkit for free groups.",
    )
    parser.add_argument("--version", action="version", version=__version__)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key=value config file")
    common.add_argument("--rank", type=int, help="free group rank (default 2)")
    common.add_argument("--L", type=int, help="alphabet budget |a|+|b| <= L (default 6)")
    common.add_argument("--depth", type=int, help="search depth (default 3)")
    common.add_argument("--word-cap", type=int, dest="word_cap",
                        help="intermediate word-length cap (default 256)")
    common.add_argument("--seed", type=int, help="64-bit seed for sampled audits")
    common.add_argument("--patterns", help="pattern bank file for lower bounds")
    common.add_argument("--cache-dir", dest="cache_dir",
                        help=f"certificate cache directory (or ${CACHE_ENV_VAR})")
    common.add_argument("--no-cache", action="store_true", help="bypass the cache")

    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("cl", parents=[common], help="commutator-length certificate")
    p.add_argument("--word", help="target word")
    p.add_argument("--words-file", help="batch corpus, one word per line")
    p.add_argument("--strict", action="store_true", help="abort on corpus parse errors")

    p = sub.add_parser("dist", parents=[common], help="bi-invariant distance certificate")
    p.add_argument("--g", required=True)
    p.add_argument("--h", required=True)

    p = sub.add_parser("scl", parents=[common], help="stable commutator length upper bounds")
    p.add_argument("--word", required=True)
    p.add_argument("--n-max", type=int, default=4, dest="n_max")
    p.add_argument("--figure", help="render the bound sequence to this file")

    p = sub.add_parser("qm", parents=[common], help="counting quasimorphism values")
    p.add_argument("--sigma", required=True)
    p.add_argument("--word", required=True)
    p.add_argument("--mode", choices=("geodesic", "verified"), default="geodesic")
    p.add_argument("--slack", type=int, default=0)

    p = sub.add_parser("defect", parents=[common], help="certified defect bound")
    p.add_argument("--sigma", required=True)
    p.add_argument("--window", type=int)
    p.add_argument("--samples", type=int, default=2000)

    p = sub.add_parser("loop-reduce", parents=[common], help="K-move reduction to the empty loop")
    p.add_argument("--loop", help="loop text, e.g. (a,b)(b,a)")
    p.add_argument("--loops-file", help="batch file, one loop per line")
    p.add_argument("--K", type=int, default=4)
    p.add_argument("--budget", type=int, default=100_000)

    p = sub.add_parser("loop-equal", parents=[common], help="K-equivalence search")
    p.add_argument("--loop1", required=True)
    p.add_argument("--loop2", required=True)
    p.add_argument("--K", type=int, default=4)
    p.add_argument("--budget", type=int, default=100_000)

    p = sub.add_parser("endpath", parents=[common], help="certified avoidance path")
    p.add_argument("--g", required=True)
    p.add_argument("--h", required=True)
    p.add_argument("--fg", help="factorization of g as (a,b)(c,d)...; searched if omitted")
    p.add_argument("--fh", help="factorization of h; searched if omitted")
    p.add_argument("--N", type=int, help="power offset; chosen by rule if omitted")
    p.add_argument("--target-r", type=int, default=1, dest="target_r")
    p.add_argument("--n-max", type=int, default=8, dest="n_max",
                   help="homogenization range for the separator")
    p.add_argument("--figure", help="render the per-vertex bound profile")

    p = sub.add_parser("ball", parents=[common], help="S_L ball exploration")
    p.add_argument("--center", default="")
    p.add_argument("--radius", type=int, required=True)
    p.add_argument("--include-words", action="store_true")
    p.add_argument("--figure", help="render the growth chart")

    p = sub.add_parser("audit", parents=[common], help="7D Lipschitz audit")
    p.add_argument("--sigma", required=True)
    p.add_argument("--trials", type=int, default=10_000)
    p.add_argument("--window", type=int)
    p.add_argument("--samples", type=int, default=2000)

    return parser


def _config_from_args(args: argparse.Namespace) -> Config:
    file_values = load_config_file(args.config) if args.config else None
    flags = {
        "rank": args.rank,
        "L": args.L,
        "depth": args.depth,
        "word_cap": args.word_cap,
        "seed": args.seed,
        "patterns": getattr(args, "patterns", None),
        "cache_dir": args.cache_dir,
    }
    return resolve_config(file_values, flags)


def _emit(obj: dict) -> None:
    sys.stdout.write(json.dumps(obj, sort_keys=True, separators=(",", ":")) + "\n")


def _note(msg: str) -> None:
    print(msg, file=sys.stderr)


def _pattern_bank(cfg: Config, alphabet_rank: int):
    if not cfg.patterns:
        return []
    bank = load_pattern_bank(cfg.patterns, alphabet_rank)
    return [defect_bound(p, 500, seed=cfg.seed) for p in bank]


def _cache(cfg: Config, args) -> CertificateCache | None:
    if getattr(args, "no_cache", False):
        return None
    directory = resolve_cache_dir(cfg)
    return CertificateCache(directory, __version__) if directory else None


def _cached_certificate(
    op: str,
    word: Word,
    cfg: Config,
    alphabet: CommutatorAlphabet,
    patterns,
    cache: CertificateCache | None,
) -> BoundCertificate:
    parts = {
        "op": op,
        "word": str(word),
        "rank": cfg.rank,
        "L": cfg.L,
        "depth": cfg.depth,
        "word_cap": cfg.word_cap,
        "patterns": sorted(str(d.pattern) for d in patterns),
    }
    if cache is not None:
        payload = cache.get(
            parts,
            verify=lambda d: verify_certificate(
                BoundCertificate.from_json_dict(d, cfg.rank)
            )[0],
        )
        if payload is not None:
            return BoundCertificate.from_json_dict(payload, cfg.rank)
    cert = cl_bounds(word, alphabet, cfg.depth, patterns, word_cap=cfg.word_cap)
    if cache is not None:
        cache.put(parts, cert.to_json_dict())
    return cert


# -- handlers -------------------------------------------------------------------


def _cmd_cl(args, cfg: Config) -> int:
    alphabet = CommutatorAlphabet.build(cfg.rank, cfg.L)
    patterns = _pattern_bank(cfg, cfg.rank)
    cache = _cache(cfg, args)
    if args.word is None and args.words_file is None:
        raise ValueError("cl needs --word or --words-file")
    words = []
    if args.word is not None:
        words.append(parse_word(args.word, cfg.rank))
    if args.words_file:
        report = ingest_corpus(args.words_file, cfg.rank, strict=args.strict)
        for err in report.errors:
            _note(f"{args.words_file}:{err['line']}:{err['column']}: {err['error']}")
        words.extend(report.words)
    status = 0
    for w in words:
        cert = _cached_certificate("cl", w, cfg, alphabet, patterns, cache)
        _emit(cert.to_json_dict())
        if cert.upper is None:
            status = 2
        _note(
            f"cl {w!s}: "
            + (f"exact {cert.upper}" if cert.exact else f"[{cert.lower}, {cert.upper}]")
        )
    return status


def _cmd_dist(args, cfg: Config) -> int:
    alphabet = CommutatorAlphabet.build(cfg.rank, cfg.L)
    patterns = _pattern_bank(cfg, cfg.rank)
    cache = _cache(cfg, args)
    g = parse_word(args.g, cfg.rank)
    h = parse_word(args.h, cfg.rank)
    for name, w in (("g", g), ("h", h)):
        if not all(s == 0 for s in w.exponent_sums()):
            raise DomainError(f"{name} = {w!s} is not in the commutator subgroup")
    word = (~g) * h
    cert = _cached_certificate("cl", word, cfg, alphabet, patterns, cache)
    _emit(cert.to_json_dict())
    _note(f"dist({g!s}, {h!s}) = cl({word!s}): [{cert.lower}, {cert.upper}]")
    return 0 if cert.upper is not None else 2


def _cmd_scl(args, cfg: Config) -> int:
    alphabet = CommutatorAlphabet.build(cfg.rank, cfg.L)
    w = parse_word(args.word, cfg.rank)
    est = scl_upper(w, args.n_max, alphabet, cfg.depth, word_cap=cfg.word_cap)
    payload = est.to_json_dict()
    _emit(payload)
    if args.figure:
        from .figures import scl_sequence_figure

        scl_sequence_figure(payload, args.figure)
        _note(f"figure written to {args.figure}")
    _note(f"scl_upper({w!s}, {args.n_max}) = {est.value}")
    return 0 if est.value is not None else 2


def _cmd_qm(args, cfg: Config) -> int:
    sigma = Pattern(parse_word(args.sigma, cfg.rank))
    w = parse_word(args.word, cfg.rank)
    fwd = c_sigma(w, sigma, args.mode, slack=args.slack)
    bwd = c_sigma(w, sigma.inverse(), args.mode, slack=args.slack)
    payload = {
        "v": 1,
        "sigma": str(sigma),
        "word": str(w),
        "mode": args.mode,
        "c_sigma": fwd.c_value,
        "c_sigma_inverse": bwd.c_value,
        "h_sigma": fwd.c_value - bwd.c_value,
        "verified": fwd.verified and bwd.verified,
    }
    _emit(payload)
    _note(f"h_{sigma!s}({w!s}) = {payload['h_sigma']}")
    if args.mode == "verified" and not payload["verified"]:
        return 2
    return 0


def _cmd_defect(args, cfg: Config) -> int:
    sigma = Pattern(parse_word(args.sigma, cfg.rank))
    bound = defect_bound(sigma, args.samples, args.window, seed=cfg.seed)
    _emit(bound.to_json_dict())
    _note(
        f"defect({sigma!s}): sampled >= {bound.sampled_lower}, "
        f"certified <= {bound.certified_upper}"
    )
    return 0


def _cmd_loop_reduce(args, cfg: Config) -> int:
    if args.loop is None and args.loops_file is None:
        raise ValueError("loop-reduce needs --loop or --loops-file")
    loops = []
    if args.loop is not None:
        loops.append(parse_loop(args.loop, cfg.rank))
    if args.loops_file:
        loops.extend(load_loop_file(args.loops_file, cfg.rank))
    alphabet = CommutatorAlphabet.build(cfg.rank, cfg.L)
    status = 0
    for loop in loops:
        seq = reduce_loop(loop, args.K, alphabet, args.budget)
        if seq is None:
            _emit({"v": 1, "found": False, "from": str(loop), "K": args.K,
                   "budget": args.budget})
            _note("no reduction found within budget (not a claim of impossibility)")
            status = 2
            continue
        _emit(seq.to_json_dict())
        loop_text = str(loop) or "(empty)"
        _note(f"{loop_text}: reduced in {len(seq.moves)} moves")
    return status


def _cmd_loop_equal(args, cfg: Config) -> int:
    l1 = parse_loop(args.loop1, cfg.rank)
    l2 = parse_loop(args.loop2, cfg.rank)
    alphabet = CommutatorAlphabet.build(cfg.rank, cfg.L)
    seq = k_equivalent(l1, l2, args.K, alphabet, args.budget)
    if seq is None:
        _emit({"v": 1, "found": False, "from": str(l1), "to": str(l2),
               "K": args.K, "budget": args.budget})
        _note("no K-equivalence found within budget")
        return 2
    _emit(seq.to_json_dict())
    _note(f"K-equivalent via {len(seq.moves)} moves")
    return 0


def _factorization_from_text(text: str, rank: int, target: Word) -> Factorization:
    loop = parse_loop(text, rank)
    fact = Factorization(loop.steps)
    fact.validate(target)
    return fact


def _cmd_endpath(args, cfg: Config) -> int:
    alphabet = CommutatorAlphabet.build(cfg.rank, cfg.L)
    g = parse_word(args.g, cfg.rank)
    h = parse_word(args.h, cfg.rank)
    factorizations = {}
    for name, w, text in (("g", g, args.fg), ("h", h, args.fh)):
        if text:
            factorizations[name] = _factorization_from_text(text, cfg.rank, w)
        else:
            cert = cl_bounds(w, alphabet, cfg.depth, word_cap=cfg.word_cap)
            if cert.witness is None:
                _emit({"v": 1, "found": False,
                       "reason": f"no factorization of {name} within budgets"})
                _note(f"pass --f{name} or raise --L/--depth")
                return 2
            factorizations[name] = cert.witness
    sep = select_separator(g, h, n_max=args.n_max, seed=cfg.seed)
    N = args.N if args.N is not None else choose_N(sep, args.target_r)
    shallow = min(cfg.depth, 2)
    lower_g = cl_bounds(g, alphabet, shallow, [sep.defect], word_cap=cfg.word_cap).lower
    lower_h = cl_bounds(h, alphabet, shallow, [sep.defect], word_cap=cfg.word_cap).lower
    report = endpath_report(
        g, h, factorizations["g"], factorizations["h"], sep, N,
        endpoint_lower=min(lower_g, lower_h),
    )
    _emit(report)
    if args.figure:
        from .figures import endpath_profile_figure

        endpath_profile_figure(report, args.figure)
        _note(f"figure written to {args.figure}")
    _note(
        f"endpath {g!s} -> {h!s}: N={N}, r_min={report['r_min']}, "
        f"{len(report['vertices'])} vertices"
    )
    return 0


def _cmd_ball(args, cfg: Config) -> int:
    alphabet = CommutatorAlphabet.build(cfg.rank, cfg.L)
    center = parse_word(args.center, cfg.rank)
    report = ball(center, args.radius, alphabet, word_cap=cfg.word_cap)
    payload = report.to_json_dict(include_words=args.include_words)
    _emit(payload)
    if args.figure:
        from .figures import ball_growth_figure

        ball_growth_figure(payload, args.figure)
        _note(f"figure written to {args.figure}")
    center_text = str(center) or "id"
    _note(
        f"ball(center={center_text}, r={args.radius}, L={cfg.L}): "
        f"{report.size} words, {report.truncated} truncated"
    )
    return 0


def _cmd_audit(args, cfg: Config) -> int:
    sigma = Pattern(parse_word(args.sigma, cfg.rank))
    bound = defect_bound(sigma, args.samples, args.window, seed=cfg.seed)
    report = lipschitz_audit(sigma, bound, args.trials, seed=cfg.seed)
    _emit(report)
    _note(
        f"audit {sigma!s}: {report['trials']} trials, 0 violations, "
        f"max ratio {report['max_ratio']} (<= 7)"
    )
    return 0


_HANDLERS = {
    "cl": _cmd_cl,
    "dist": _cmd_dist,
    "scl": _cmd_scl,
    "qm": _cmd_qm,
    "defect": _cmd_defect,
    "loop-reduce": _cmd_loop_reduce,
    "loop-equal": _cmd_loop_equal,
    "endpath": _cmd_endpath,
    "ball": _cmd_ball,
    "audit": _cmd_audit,
}


def run(argv=None) -> int:
    """Parse and dispatch; returns the process exit status."""
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _config_from_args(args)
        return _HANDLERS[args.command](args, cfg)
    except WordSyntaxError as exc:
        col = "" if exc.column is None else f" (column {exc.column})"
        _note(f"parse error: {exc}{col}")
        return 1
    except (DomainError, SeparatorError, MoveError, LipschitzViolation) as exc:
        _note(f"error: {exc}")
        return 1
    except (ValueError, OSError) as exc:
        _note(f"error: {exc}")
        return 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
