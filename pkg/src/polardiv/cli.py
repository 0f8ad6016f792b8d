"""Command-line pipeline: synth, fit, recommend, evaluate.

Exit codes: 0 success, 1 usage error, 2 data/input error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import contextlib
import json
import logging
import sys
from typing import Optional, Sequence

from .diversify import DiversifyParams, Recommendation, diversify_recommend
from .errors import DataError, NumericalError
from .evaluation import SplitSpec, evaluate, holdout_split
from .graph import build_graph, parse_events, write_events
from .ideology import AnchorSet, FitOptions, IdeologyModel, fit_ideology, item_positions_for
from .recsys import WalkParams, recommend_topn
from .synthgen import SynthParams, generate, read_truth

_log = logging.getLogger("polardiv")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


@contextlib.contextmanager
def _open_out(path: Optional[str]):
    if path is None or path == "-":
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fp:
            yield fp


def _read_events(path: str, strict: bool):
    with open(path, "rb") as fp:
        events, skipped = parse_events(fp, strict=strict)
    if skipped:
        _log.warning("%s: skipped %d malformed lines", path, skipped)
    return events


def _read_anchors(path: Optional[str]):
    if path is None:
        return None
    with open(path, encoding="utf-8") as fp:
        return AnchorSet.read_csv(fp)


def _walk_params(args) -> WalkParams:
    return WalkParams(alpha=args.alpha, beta=args.beta)


def _div_params(args) -> DiversifyParams:
    return DiversifyParams(lam=args.lam, tau=args.tau, pool_size=args.pool, list_size=args.n)


def cmd_synth(args) -> int:
    params = SynthParams(n_users=args.users, n_items=args.items, seed=args.seed)
    ds = generate(params)
    with _open_out(args.out) as fp:
        write_events(ds.events, fp)
    if args.truth:
        with open(args.truth, "w", encoding="utf-8", newline="\n") as fp:
            ds.write_truth(fp)
    _log.info("wrote %d events", len(ds.events))
    return EXIT_OK


def cmd_fit(args) -> int:
    events = _read_events(args.events, args.strict)
    anchors = _read_anchors(args.anchors)
    graph = build_graph(events)
    model = fit_ideology(graph, anchors, FitOptions(seed=args.seed))
    with _open_out(args.out) as fp:
        model.dump(fp)
    _log.info("fitted %d users, %d items, sigma1=%.6f", graph.num_users, graph.num_items, model.sigma1)
    if args.truth:
        from scipy.stats import spearmanr

        with open(args.truth, encoding="utf-8") as fp:
            tu, ti = read_truth(fp)
        uids = [u for u in model.user_ids if u in tu]
        iids = [i for i in model.item_ids if i in ti]
        rho_u = spearmanr([model.user_position(u) for u in uids], [tu[u] for u in uids])[0]
        rho_i = spearmanr([model.item_position(i) for i in iids], [ti[i] for i in iids])[0]
        print(json.dumps({"spearman_users": rho_u, "spearman_items": rho_i}), file=sys.stderr)
    return EXIT_OK


def cmd_recommend(args) -> int:
    walk = _walk_params(args)
    div = _div_params(args)
    graph = build_graph(_read_events(args.events, args.strict))
    with open(args.model, encoding="utf-8") as fp:
        model = IdeologyModel.load(fp)

    u = graph.user(args.user)
    if args.diversify == "on":
        recs = diversify_recommend(graph, model, args.user, walk, div)
    else:
        phi = item_positions_for(graph, model)
        recs = [Recommendation(s.item, s.score, float(phi[s.item])) for s in recommend_topn(graph, u, walk, args.n)]

    with _open_out(args.out) as fp:
        for rank, r in enumerate(recs, start=1):
            rec = {
                "rank": rank,
                "item": graph.item_ids[r.item],
                "score": r.score,
                "phi": None if r.phi != r.phi else r.phi,
                "backfilled": bool(r.backfilled),
            }
            fp.write(json.dumps(rec) + "\n")
    return EXIT_OK


def cmd_evaluate(args) -> int:
    walk = _walk_params(args)
    div = _div_params(args)
    split = SplitSpec(k=args.holdout_k, seed=args.seed)
    events = _read_events(args.events, args.strict)
    anchors = _read_anchors(args.anchors)
    train, test = holdout_split(events, split)
    graph = build_graph(train)
    model = fit_ideology(graph, anchors, FitOptions())

    out = {"baseline": evaluate(graph, model, test, walk, div, use_diversifier=False, n=args.n).to_dict()}
    if args.diversify == "on":
        out["diversified"] = evaluate(graph, model, test, walk, div, use_diversifier=True, n=args.n).to_dict()
    with _open_out(args.out) as fp:
        json.dump(out, fp, indent=1)
        fp.write("\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="polardiv", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def walk_flags(sp):
        sp.add_argument("--alpha", type=float, default=1.0)
        sp.add_argument("--beta", type=float, default=0.6)

    def div_flags(sp, default_diversify):
        sp.add_argument("--n", type=int, default=10)
        sp.add_argument("--lambda", dest="lam", type=float, default=0.5)
        sp.add_argument("--tau", type=float, default=2.0)
        sp.add_argument("--pool", type=int, default=100)
        sp.add_argument("--diversify", choices=("on", "off"), default=default_diversify)

    s = sub.add_parser("synth", help="generate a synthetic two-community dataset")
    s.add_argument("--users", type=int, default=1000)
    s.add_argument("--items", type=int, default=400)
    s.add_argument("--seed", type=int, default=7)
    s.add_argument("--out", required=True)
    s.add_argument("--truth")
    s.set_defaults(func=cmd_synth)

    s = sub.add_parser("fit", help="fit user and item positions")
    s.add_argument("--events", required=True)
    s.add_argument("--anchors")
    s.add_argument("--out")
    s.add_argument("--truth", help="ground-truth CSV; prints Spearman recovery to stderr")
    s.add_argument("--seed", type=int, default=42, help="power-iteration start seed")
    s.add_argument("--strict", action="store_true")
    s.set_defaults(func=cmd_fit)

    s = sub.add_parser("recommend", help="recommend items for one user")
    s.add_argument("--events", required=True)
    s.add_argument("--model", required=True)
    s.add_argument("--user", required=True)
    s.add_argument("--out")
    s.add_argument("--strict", action="store_true")
    walk_flags(s)
    div_flags(s, "on")
    s.set_defaults(func=cmd_recommend)

    s = sub.add_parser("evaluate", help="holdout evaluation, baseline vs diversified")
    s.add_argument("--events", required=True)
    s.add_argument("--anchors")
    s.add_argument("--holdout-k", type=int, default=3)
    s.add_argument("--seed", type=int, default=11, help="holdout split seed")
    s.add_argument("--out")
    s.add_argument("--strict", action="store_true")
    walk_flags(s)
    div_flags(s, "on")
    s.set_defaults(func=cmd_evaluate)
    return p


def run(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return args.func(args)
    except NumericalError as e:
        _log.error("numerical failure: %s", e)
        return EXIT_NUMERIC
    except (DataError, OSError, UnicodeDecodeError) as e:
        _log.error("%s", e)
        return EXIT_DATA
    except ValueError as e:
        # parameter values outside their documented ranges
        _log.error("usage: %s", e)
        return EXIT_USAGE


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
