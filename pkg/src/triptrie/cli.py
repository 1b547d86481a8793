"""``triptrie`` command line: extract -> encode -> build, then queries on the trie.

Settings come from built-in defaults, then a ``key=value`` config file
(``--config``), then command-line flags. Relative paths resolve against
``--data-dir``, which defaults to ``$TRIPTRIE_DATA`` or the working directory.
Results go to ``--out`` when given and to stdout otherwise; stage timings go
to stderr. Errors print one JSON object on stderr and exit nonzero.
"""
from __future__ import annotations

import argparse
import contextlib
import io
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from triptrie import analytics, ingest, macro, oracle, synth
from triptrie.geo_grid import NULL_PAD, make_grid
from triptrie.trie import Trie, build_trie_from_matrix

DATA_ENV = "TRIPTRIE_DATA"

# roughly 0.55 x 0.54 mile cells at 100 x 100 over the Bay Area
DEFAULTS = {
    "bbox": "-122.80,37.20,-121.80,37.98",
    "n_r": "100",
    "n_c": "100",
    "origin": "lower",
    "t_r": "60",
    "max_minutes": "30",
    "window": "11",
    "utc_offset": "-7",
    "seed": "0",
}

_CONVERT = {
    "n_r": int,
    "n_c": int,
    "t_r": int,
    "max_minutes": float,
    "window": int,
    "utc_offset": float,
    "seed": int,
}


class CliError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError(message)


def read_config(path) -> dict:
    """Parse ``key=value`` lines; ``#`` starts a comment, dashes in keys become underscores."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for no, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise CliError(f"{path}:{no}: expected key=value")
            key, value = (p.strip() for p in line.split("=", 1))
            key = key.replace("-", "_")
            if key not in DEFAULTS and key != "data_dir":
                raise CliError(f"{path}:{no}: unknown setting {key!r}")
            out[key] = value
    return out


def settings(args) -> dict:
    merged = dict(DEFAULTS)
    if args.config:
        merged.update(read_config(args.config))
    for key in list(DEFAULTS) + ["data_dir"]:
        v = getattr(args, key, None)
        if v is not None:
            merged[key] = str(v)
    out = {}
    for key, value in merged.items():
        try:
            out[key] = _CONVERT[key](value) if key in _CONVERT else value
        except ValueError:
            raise CliError(f"bad value for {key}: {value!r}") from None
    try:
        out["bbox"] = tuple(float(v) for v in out["bbox"].split(","))
    except ValueError:
        raise CliError(f"bad bbox {merged['bbox']!r}") from None
    if len(out["bbox"]) != 4:
        raise CliError("bbox needs four comma-separated values: x_min,y_min,x_max,y_max")
    out["data_dir"] = Path(out.get("data_dir") or os.environ.get(DATA_ENV) or ".")
    return out


class Run:
    def __init__(self, args, quiet=False):
        self.args = args
        self.cfg = settings(args)
        self.quiet = quiet

    def path(self, p) -> Path:
        p = Path(p)
        return p if p.is_absolute() else self.cfg["data_dir"] / p

    def grid(self):
        c = self.cfg
        return make_grid(c["bbox"], c["n_r"], c["n_c"], c["origin"])

    @contextlib.contextmanager
    def stage(self, name):
        t0 = time.perf_counter()
        yield
        if not self.quiet:
            print(f"time\t{name}\t{time.perf_counter() - t0:.3f}", file=sys.stderr)

    def emit(self, text: str):
        out = getattr(self.args, "out", None)
        if out:
            p = self.path(out)
            p.parent.mkdir(parents=True, exist_ok=True)
            p.write_text(text, encoding="utf-8")
        else:
            sys.stdout.write(text)

    def emit_json(self, obj):
        self.emit(json.dumps(obj, indent=2, sort_keys=True) + "\n")

    def load_trie(self) -> Trie:
        with self.stage("Loading trie"):
            return Trie.deserialize(self.path(self.args.trie).read_bytes()).freeze()


def _padded_matrix(strings, l=None):
    if not strings:
        raise CliError("corpus is empty")
    return ingest.as_matrix(strings, l), [s.trip_id for s in strings]


# --- subcommands -----------------------------------------------------------


def cmd_extract(run: Run):
    with run.stage("Extracting trips"):
        trips = ingest.extract_directory(run.path(run.args.traces))
        kept, frac = ingest.filter_by_duration(trips, run.cfg["max_minutes"])
    ingest.write_trips(run.path(run.args.out), kept)
    json.dump({"extracted": len(trips), "kept": len(kept), "kept_fraction": frac}, sys.stdout, sort_keys=True)
    print()


def cmd_encode(run: Run):
    with run.stage("Constructing string representations"):
        trips = ingest.read_trips(run.path(run.args.trips))
        strings, rejected = ingest.encode_corpus(run.grid(), trips, run.cfg["t_r"])
    ingest.write_corpus(run.path(run.args.out), strings)
    json.dump({"encoded": len(strings), "rejected": rejected}, sys.stdout, sort_keys=True)
    print()


def cmd_build(run: Run):
    strings = ingest.read_corpus(run.path(run.args.corpus))
    if run.args.category:
        strings = analytics.split_by_category(strings, run.cfg["utc_offset"])[run.args.category]
    mat, ids = _padded_matrix(strings, run.args.length)
    with run.stage("Constructing trie"):
        trie = build_trie_from_matrix(mat, ids)
    run.path(run.args.out).write_bytes(trie.serialize())
    json.dump({"n": trie.n, "l": trie.l, "nodes": trie.n_nodes}, sys.stdout, sort_keys=True)
    print()


def cmd_insert(run: Run):
    trie = Trie.deserialize(run.path(run.args.trie).read_bytes())
    strings = ingest.read_corpus(run.path(run.args.corpus))
    with run.stage("Inserting trips"):
        for s in strings:
            if len(s) > trie.l:
                raise CliError(f"trip {s.trip_id} has {len(s)} symbols, trie length is {trie.l}")
            trie.insert(tuple(s.symbols) + (NULL_PAD,) * (trie.l - len(s)), s.trip_id)
    run.path(run.args.out or run.args.trie).write_bytes(trie.serialize())
    json.dump({"inserted": len(strings), "n": trie.n, "nodes": trie.n_nodes}, sys.stdout, sort_keys=True)
    print()


def cmd_verify(run: Run):
    a = run.args
    if a.synthetic:
        mat = synth.random_walk_corpus(a.synthetic, a.length or 30, run.cfg["n_r"], run.cfg["n_c"], seed=run.cfg["seed"])
    elif a.corpus:
        mat, _ = _padded_matrix(ingest.read_corpus(run.path(a.corpus)), a.length)
    else:
        raise CliError("verify needs --corpus or --synthetic")
    with run.stage("Verifying trie against single linkage"):
        reports = oracle.verify_samples(mat, a.size, a.samples, run.cfg["seed"], full_sweep=a.full_sweep)
    passed = sum(r.ok for r in reports)
    run.emit_json(
        {
            "seed": run.cfg["seed"],
            "samples": a.samples,
            "size": a.size,
            "passed": passed,
            "reports": [r.as_dict() for r in reports],
        }
    )
    if passed != len(reports):
        raise CliError(f"{len(reports) - passed} of {len(reports)} samples failed")


def cmd_stats(run: Run):
    a = run.args
    window = run.cfg["window"]
    columns = {}
    with run.stage("Calculating trie statistics"):
        if a.trie:
            columns["All"] = analytics.trie_stats(run.load_trie(), window)
        else:
            strings = ingest.read_corpus(run.path(a.corpus))
            l = max((len(s) for s in strings), default=0)
            groups = {"all": strings}
            if a.categories:
                groups.update(analytics.split_by_category(strings, run.cfg["utc_offset"]))
            for key, group in groups.items():
                name = analytics.CATEGORIES.get(key, "All")
                if not group:
                    columns[name] = analytics.TrieStats(n=0, window=window)
                    continue
                mat, ids = _padded_matrix(group, l)
                columns[name] = analytics.trie_stats(build_trie_from_matrix(mat, ids), window)
    run.emit(analytics.format_stats(columns))


def cmd_heatmap(run: Run):
    trie = run.load_trie()
    with run.stage("Generating movement heat maps"):
        hm = analytics.heatmap(trie, run.args.level, run.grid(), run.cfg["t_r"])
    if run.args.out:
        hm.to_csv(run.path(run.args.out))
    else:
        buf = io.StringIO()
        np.savetxt(buf, hm.counts, fmt="%d", delimiter=",")
        sys.stdout.write(buf.getvalue())


def cmd_occurrence(run: Run):
    trie = run.load_trie()
    with run.stage("Generating region occurrence heat map"):
        grid = analytics.occurrence_grid(trie, run.grid())
    buf = io.StringIO()
    np.savetxt(buf, grid, fmt="%d", delimiter=",")
    run.emit(buf.getvalue())


def cmd_subtree(run: Run):
    a = run.args
    trie = run.load_trie()
    try:
        ranked = analytics.subtree_distribution(trie, a.start, a.depth, a.top)
    except analytics.NotFoundError as exc:
        raise CliError(exc.args[0]) from None
    run.emit_json({"start": a.start, "depth": a.depth, "regions": [{"region": z, "trips": c} for z, c in ranked]})


def _symbols(text: str) -> tuple:
    try:
        return tuple(int(v) for v in text.replace(",", " ").split())
    except ValueError:
        raise CliError(f"bad symbol list {text!r}") from None


def cmd_predict(run: Run):
    trie = run.load_trie()
    prefix = _symbols(run.args.prefix)
    node = trie.locate(prefix)
    if node is None:
        raise CliError(f"prefix {list(prefix)} not in the trie")
    dist = trie.children_distribution(node)
    run.emit_json(
        {
            "prefix": list(prefix),
            "trips": int(trie.counts[node]),
            "next": [{"region": z, "trips": c, "probability": p} for z, (c, p) in dist.items()],
        }
    )


def cmd_diversity(run: Run):
    a = run.args
    trie = run.load_trie()
    if a.start is not None and a.end is not None:
        run.emit_json({"start": a.start, "end": a.end, "trip_types": analytics.route_diversity(trie, a.start, a.end)})
        return
    table = analytics.route_diversity_table(trie)
    lines = ["start,end,trip_types"] + [f"{s},{e},{c}" for (s, e), c in table.items()]
    run.emit("\n".join(lines) + "\n")


def cmd_macro(run: Run):
    a = run.args
    trie = run.load_trie()
    with run.stage("Macro-clustering"):
        micros = macro.micro_clusters(trie, a.level)
        result = macro.macro_cluster(micros, a.q, a.method)
    lines = ["node_id\tmacro\tweight\trepresentative"]
    for m, c in zip(result.micros, result.labels.tolist()):
        lines.append(f"{m.node_id}\t{c}\t{m.weight}\t{' '.join(map(str, m.representative))}")
    run.emit("\n".join(lines) + "\n")
    json.dump({"micro": len(micros), "macro": result.k, "q": a.q, "max_diameter": max(result.diameters.values(), default=0)},
              sys.stdout, sort_keys=True)
    print()


def cmd_outliers(run: Run):
    trie = run.load_trie()
    rows = analytics.outlier_report(trie)
    if run.args.top is not None:
        rows = rows[: run.args.top]
    lines = ["region,involvement,first_depth,frequency"]
    lines += [f"{r.region},{r.involvement},{r.first_depth},{r.frequency}" for r in rows]
    run.emit("\n".join(lines) + "\n")


# --- parser ------------------------------------------------------------------


def _common(p):
    g = p.add_argument_group("settings (override the config file)")
    g.add_argument("--config", help="key=value settings file")
    g.add_argument("--data-dir", dest="data_dir", help=f"base for relative paths (default ${DATA_ENV} or .)")
    g.add_argument("--bbox", help="x_min,y_min,x_max,y_max in degrees")
    g.add_argument("--n-r", dest="n_r", type=int)
    g.add_argument("--n-c", dest="n_c", type=int)
    g.add_argument("--origin", choices=("lower", "upper"))
    g.add_argument("--t-r", dest="t_r", type=int, help="seconds per symbol")
    g.add_argument("--max-minutes", dest="max_minutes", type=float)
    g.add_argument("--window", type=int, help="first-levels window for stats")
    g.add_argument("--utc-offset", dest="utc_offset", type=float, help="hours added to UTC for start-time categories")
    g.add_argument("--seed", type=int)
    g.add_argument("--quiet", action="store_true", help="no timings on stderr")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="triptrie", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, fn, help):
        p = sub.add_parser(name, help=help)
        p.set_defaults(func=fn)
        _common(p)
        return p

    p = add("extract", cmd_extract, "trace directory -> occupied trips (duration filtered)")
    p.add_argument("traces")
    p.add_argument("--out", required=True)

    p = add("encode", cmd_encode, "trips -> symbol-string corpus")
    p.add_argument("trips")
    p.add_argument("--out", required=True)

    p = add("build", cmd_build, "corpus -> trie snapshot")
    p.add_argument("corpus")
    p.add_argument("--out", required=True)
    p.add_argument("--length", type=int, help="pad to this length instead of the longest trip")
    p.add_argument("--category", choices=sorted(analytics.CATEGORIES))

    p = add("insert", cmd_insert, "add corpus trips to an existing trie")
    p.add_argument("trie")
    p.add_argument("corpus")
    p.add_argument("--out", help="defaults to rewriting the input trie")

    p = add("verify", cmd_verify, "check trie levels against brute-force single linkage")
    p.add_argument("--corpus")
    p.add_argument("--synthetic", type=int, metavar="N", help="use N seeded random-walk strings instead")
    p.add_argument("--length", type=int)
    p.add_argument("--samples", type=int, default=10)
    p.add_argument("--size", type=int, default=1000)
    p.add_argument("--full-sweep", action="store_true")
    p.add_argument("--out")

    p = add("stats", cmd_stats, "dendrogram statistics table")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--trie")
    src.add_argument("--corpus")
    p.add_argument("--categories", action="store_true", help="with --corpus: add start-time category columns")
    p.add_argument("--out")

    p = add("heatmap", cmd_heatmap, "trip counts per cell at one level (CSV, south row first)")
    p.add_argument("trie")
    p.add_argument("--level", type=int, required=True)
    p.add_argument("--out")

    p = add("occurrence", cmd_occurrence, "first-occurrence depth per cell (CSV, south row first)")
    p.add_argument("trie")
    p.add_argument("--out")

    p = add("subtree", cmd_subtree, "regions reached at a depth by trips from one start region")
    p.add_argument("trie")
    p.add_argument("--start", type=int, required=True)
    p.add_argument("--depth", type=int, required=True)
    p.add_argument("--top", type=int, default=10)
    p.add_argument("--out")

    p = add("predict", cmd_predict, "next-region distribution after a prefix")
    p.add_argument("trie")
    p.add_argument("--prefix", required=True, help="symbols, comma or space separated")
    p.add_argument("--out")

    p = add("diversity", cmd_diversity, "distinct trip types per start/end pair")
    p.add_argument("trie")
    p.add_argument("--start", type=int)
    p.add_argument("--end", type=int)
    p.add_argument("--out")

    p = add("macro", cmd_macro, "group micro-clusters at a level under a Levenshtein diameter")
    p.add_argument("trie")
    p.add_argument("--level", type=int, required=True)
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--method", choices=macro.METHODS, default="complete")
    p.add_argument("--out")

    p = add("outliers", cmd_outliers, "regions ranked by outlier evidence")
    p.add_argument("trie")
    p.add_argument("--top", type=int)
    p.add_argument("--out")
    return parser


def _fail(exc: BaseException, code: int = 1) -> int:
    print(json.dumps({"error": type(exc).__name__, "message": str(exc)}, sort_keys=True), file=sys.stderr)
    return code


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except CliError as exc:
        return _fail(exc, 2)
    try:
        args.func(Run(args, quiet=args.quiet))
    except (CliError, ValueError, KeyError, OSError, MemoryError) as exc:
        return _fail(exc)
    return 0


if __name__ == "__main__":
    sys.exit(main())
