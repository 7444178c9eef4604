"""Command-line front end.

Exit codes: 0 success, 1 a check failed, 2 usage error, 3 resource limit.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import time

from . import boosted, buffers, experiments, greedy, kary
from .errors import (DomainError, EmptyWord, InvalidSymbol, NoStitchFound, NotShuffleSquare,
                     NotSigma2, OddParity, TooLarge)
from .words import Rng, as_word, parse_word, random_even_parity_word, random_word, render

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_LIMIT = 0, 1, 2, 3


class Result:
    """What a subcommand hands back: a JSON-able payload, optional CSV rows,
    and its exit code."""

    def __init__(self, payload, rows=None, header=None, code=EXIT_OK):
        self.payload = payload
        self.rows = rows
        self.header = header
        self.code = code


def _word(text, k=2):
    return parse_word(text, k)


# -- subcommands -------------------------------------------------------------------

def cmd_recognize(a):
    s = _word(a.word)
    t0 = time.perf_counter()
    ok = buffers.recognize(s)
    out = {"word": render(s), "is_shuffle_square": ok}
    if ok and a.witness:
        out["partition"] = buffers.extract_partition(s).to_dict()
    if a.with_lt:
        out["lt"] = buffers.lt(s, limit=a.lt_limit)
    out["seconds"] = time.perf_counter() - t0
    return Result(out)


def cmd_partition(a):
    s = _word(a.word)
    if a.method == "exact":
        try:
            p = buffers.extract_partition(s)
        except NotShuffleSquare:
            return Result({"word": render(s), "success": False, "reason": "NotShuffleSquare"}, code=EXIT_FAIL)
    elif a.method == "two-sided":
        try:
            p = buffers.two_sided_partition(s)
        except (NoStitchFound, OddParity) as e:
            return Result({"word": render(s), "success": False, "reason": type(e).__name__}, code=EXIT_FAIL)
    else:
        p = boosted.constructive_partition(s, tail_window=a.tail_window)
        if not p:
            return Result({"word": render(s), "success": False, **p.to_dict()}, code=EXIT_FAIL)
    return Result({"word": render(s), "success": True, "method": a.method, **p.to_dict()})


def cmd_lt(a):
    s = _word(a.word)
    return Result({"word": render(s), "lt": buffers.lt(s, limit=a.lt_limit)})


def cmd_count(a):
    rows = []
    for n in range(a.n_min, a.n + 1):
        c = kary.count_shuffle_squares(a.k, n, budget=a.budget)
        rows.append((a.k, n, c, kary.greedy_lower_bound(a.k, n)))
    ok = all(r[2] >= r[3] for r in rows)
    payload = [{"k": k, "n": n, "count": c, "greedy_lower_bound": lb} for k, n, c, lb in rows]
    return Result(payload, rows, ("k", "n", "count", "greedy_lower_bound"), EXIT_OK if ok else EXIT_FAIL)


def cmd_greedy_trace(a):
    s = _word(a.word)
    th = greedy.greedy_trace(s, a.init)
    rows = [(t, str(b), len(b), "" if t == 0 else ("match" if th.moves[t - 1] else "append"))
            for t, b in enumerate(th.states)]
    payload = {"word": render(s), "states": [str(b) for b in th.states],
               "moves": ["match" if m else "append" for m in th.moves]}
    return Result(payload, rows, ("t", "buffer", "length", "move"))


def cmd_qtable(a):
    L = a.L if a.L else None
    rows, summary, bad = [], [], []
    for q in greedy.qtable_iter(a.t_max, a.init, L, exact=not a.float):
        if a.check:
            if not greedy.check_monotonicity(q):
                bad.append(q.t)
        if q.t == a.t_max or a.all_rows:
            rows.extend((t, lead, x, y, float(p)) for t, lead, x, y, p in q.rows())
        last = q
    summary = {"t_max": a.t_max, "L": last.L, "exact": last.exact,
               "lost_mass": float(last._scale(last.lost)), "eps": float(last.prob(""))}
    if a.check:
        summary["monotonicity_failures"] = bad
    return Result(summary, rows, ("t", "lead", "a", "b", "prob"), EXIT_FAIL if bad else EXIT_OK)


def cmd_boosted_run(a):
    if a.k_init > 0:
        rep = experiments.cycle_report(a.k_init, a.trials, a.seed)
        row = (rep["k"], rep["mean_dX"], rep["var_dX"], rep["tail_T_4.5k"], rep["tail_absdX_0.5k"])
        return Result(rep, [row], ("k", "mean_dX", "var_dX", "tail_T_4.5k", "tail_absdX_0.5k"))
    out = []
    for i in range(a.trials):
        s = random_even_parity_word(a.n, Rng(a.seed, i)) if a.n % 2 == 0 else random_word(a.n, rng=Rng(a.seed, i))
        run = boosted.run_boosted(s)
        entry = {"trial": i, "records": [r.to_dict() for r in run.records],
                 "stopped_at": run.T, "partial": run.partial}
        p = boosted.constructive_partition(s, tail_window=a.tail_window)
        entry["success"] = bool(p)
        if p and a.witness:
            entry["partition"] = p.to_dict()
        elif not p:
            entry["failure"] = p.to_dict()
        out.append(entry)
    rows = [(e["trial"], len(e["records"]), e["stopped_at"], e["success"]) for e in out]
    return Result(out, rows, ("trial", "records", "T", "success"))


def cmd_density(a):
    if a.mode == "trend":
        rep = experiments.density_trend(tuple(range(2, a.n + 1, 2)))
    else:
        rep = experiments.density_experiment(a.n, a.trials, a.mode, a.seed, a.fallback,
                                             threads=a.threads, target=a.target)
    return _report_result([rep])


def cmd_validate(a):
    reps = []
    if a.which in ("claims", "all"):
        reps += experiments.validate_claims(a.k, a.trials, a.seed)
    if a.which in ("chernoff", "all"):
        reps.append(experiments.chernoff_check(a.k, a.eps, a.trials, a.seed))
    if a.which in ("cesaro", "all"):
        reps.append(experiments.cesaro_Y_experiment(a.n or 8000, min(a.trials, 200), a.delta, a.seed))
    if a.which == "lt":
        reps.append(experiments.lt_experiment(a.n or 12, a.trials, a.seed, threads=a.threads))
    return _report_result(reps)


def cmd_kary_count(a):
    counts = kary.shuffle_square_counts(a.k, a.n, budget=a.budget)
    rows = [(a.k, n, c, kary.greedy_success_count(a.k, n), kary.greedy_lower_bound(a.k, n))
            for n, c in counts.items()]
    payload = [dict(zip(("k", "n", "count", "greedy_successes", "greedy_lower_bound"), r)) for r in rows]
    return Result(payload, rows, ("k", "n", "count", "greedy_successes", "greedy_lower_bound"))


def cmd_kary_boosted(a):
    out, bad = [], 0
    for i in range(a.trials):
        s = kary.sample_mu(a.k, 2 * a.n, a.mu_bias, Rng(a.seed, i))
        st = kary.kary_boosted_run(s)
        empty = any(len(r) == 0 for r in st.resolutions())
        truth = kary.kary_recognize(s)
        if empty and not truth:
            bad += 1
        out.append({"trial": i, "word": render(s), "final": [str(x) for x in st.W],
                    "boosted_success": empty, "is_shuffle_square": truth,
                    "pairs": st.pairs_made, "boosts": st.boosts})
    rows = [(e["trial"], e["word"], e["boosted_success"], e["is_shuffle_square"], e["pairs"]) for e in out]
    return Result(out, rows, ("trial", "word", "boosted_success", "is_shuffle_square", "pairs"),
                  EXIT_FAIL if bad else EXIT_OK)


def cmd_alpha_bound(a):
    al = kary.alpha_bound(a.k, a.b)
    return Result({"k": a.k, "b": a.b, "alpha": al, "edge": al is None})


def _report_result(reps):
    payload = [r.to_dict() for r in reps]
    cols = ("name", "estimate", "stderr", "n_samples", "target", "kind", "passed", "provenance")
    rows = [tuple(d[c] for c in cols) for d in payload]
    failed = any(r.passed is False for r in reps)
    return Result(payload, rows, cols, EXIT_FAIL if failed else EXIT_OK)


# -- parser ------------------------------------------------------------------------

def _global_flags(suppress: bool) -> argparse.ArgumentParser:
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("global options")
    g.add_argument("--seed", type=int, default=d(0))
    g.add_argument("--trials", type=int, default=d(1000))
    g.add_argument("--threads", type=int, default=d(1))
    g.add_argument("--format", choices=("json", "csv"), default=d("json"))
    g.add_argument("--out", default=d(None), help="write output here instead of stdout")
    g.add_argument("--config", default=d(None), help="file of key=value defaults")
    return p


def build_parser():
    parser = argparse.ArgumentParser(prog="shufflesq", parents=[_global_flags(False)],
                                     description="Shuffle squares of binary and k-ary words.")
    sub = parser.add_subparsers(dest="command", required=True)
    glob = _global_flags(True)
    subs = {}

    def add(name, fn, help_):
        sp = sub.add_parser(name, parents=[glob], help=help_)
        sp.set_defaults(func=fn)
        subs[name] = sp
        return sp

    sp = add("recognize", cmd_recognize, "decide whether a word is a shuffle square")
    sp.add_argument("word")
    sp.add_argument("--witness", action="store_true", help="include a partition")
    sp.add_argument("--with-lt", action="store_true", help="also report the longest twins")
    sp.add_argument("--lt-limit", type=int, default=28)

    sp = add("partition", cmd_partition, "find two identical halves")
    sp.add_argument("word")
    sp.add_argument("--method", choices=("exact", "two-sided", "constructive"), default="exact")
    sp.add_argument("--tail-window", type=int, default=24)

    sp = add("lt", cmd_lt, "length of the longest twins")
    sp.add_argument("word")
    sp.add_argument("--lt-limit", type=int, default=28)

    sp = add("count", cmd_count, "exact number of shuffle squares by semi-length")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--n-min", type=int, default=0)
    sp.add_argument("--k", type=int, default=2)
    sp.add_argument("--budget", type=float, default=1e8)

    sp = add("greedy-trace", cmd_greedy_trace, "greedy buffer after every letter")
    sp.add_argument("word")
    sp.add_argument("--init", default="", help="starting two-run buffer")

    sp = add("qtable", cmd_qtable, "greedy state distribution")
    sp.add_argument("--t-max", type=int, required=True)
    sp.add_argument("--L", type=int, default=0, help="truncation length (0 = automatic)")
    sp.add_argument("--init", default="")
    sp.add_argument("--float", action="store_true", help="float instead of exact arithmetic")
    sp.add_argument("--check", action="store_true", help="check monotonicity at every step")
    sp.add_argument("--all-rows", action="store_true", help="emit rows for every t")

    sp = add("boosted-run", cmd_boosted_run, "boosted greedy runs on random words")
    sp.add_argument("--n", type=int, default=1000)
    sp.add_argument("--k-init", type=int, default=0, help="if set, aggregate single cycles from 1^k")
    sp.add_argument("--tail-window", type=int, default=24)
    sp.add_argument("--witness", action="store_true")

    sp = add("density", cmd_density, "fraction of shuffle squares")
    sp.add_argument("--n", type=int, required=True, help="semi-length")
    sp.add_argument("--mode", choices=("exact", "constructive", "trend"), default="exact")
    sp.add_argument("--fallback", action="store_true")
    sp.add_argument("--target", type=float, default=None)

    sp = add("validate", cmd_validate, "statistical checks of cycle quantities")
    sp.add_argument("--k", type=int, default=10)
    sp.add_argument("--which", choices=("claims", "chernoff", "cesaro", "lt", "all"), default="all")
    sp.add_argument("--eps", type=float, default=0.5)
    sp.add_argument("--delta", type=float, default=0.3)
    sp.add_argument("--n", type=int, default=0)

    sp = add("kary-count", cmd_kary_count, "exact k-ary shuffle-square counts")
    sp.add_argument("--k", type=int, default=3)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--budget", type=float, default=1e8)

    sp = add("kary-boosted", cmd_kary_boosted, "boosted k-ary algorithm on sampled words")
    sp.add_argument("--k", type=int, default=3)
    sp.add_argument("--n", type=int, default=6, help="semi-length")
    sp.add_argument("--mu-bias", type=float, default=0.0)

    sp = add("alpha-bound", cmd_alpha_bound, "twins-density threshold")
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--b", type=float, default=None)
    return parser, subs


def _config_defaults(argv):
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    return experiments.ExperimentConfig.from_file(known.config) if known.config else {}


def _emit(res: Result, fmt: str, out):
    if fmt == "csv" and res.rows is not None:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        if res.header:
            w.writerow(res.header)
        w.writerows(res.rows)
        text = buf.getvalue()
    else:
        text = json.dumps(res.payload, indent=2, default=str) + "\n"
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser, subs = build_parser()
    try:
        defaults = _config_defaults(argv)
    except (OSError, ValueError) as e:
        print(f"error: cannot read config: {e}", file=sys.stderr)
        return EXIT_USAGE
    if defaults:
        parser.set_defaults(**defaults)
        for sp in subs.values():
            sp.set_defaults(**defaults)
    try:
        a = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_USAGE
    try:
        res = a.func(a)
    except TooLarge as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_LIMIT
    except (InvalidSymbol, EmptyWord, NotSigma2, DomainError, OddParity, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    _emit(res, a.format, a.out)
    return res.code


if __name__ == "__main__":
    sys.exit(main())
