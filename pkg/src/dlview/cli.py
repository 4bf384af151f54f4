"""Batch command-line driver for the vessel-tree pipeline.

Corpus convention: one `.dltree` per component tree, named
`<subject>_<region>.dltree`.  All outputs are UTF-8 with LF line endings
and written atomically (temp file + rename).  Exit codes: 0 ok, 1 data
error, 2 usage error, 3 scan found flags.
"""

from __future__ import annotations

import argparse
import os
import sys
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import fields, replace
from pathlib import Path

from . import detect, edit, ingest, stats, synth
from .core import BinaryTree, CorpusEntry, Region
from .detect import DetectorConfig, FlagKind
from .extract import extract_binary_tree
from .layout import LayoutConfig, build_layout
from .render import RenderOptions, render_svg

EXIT_OK = 0
EXIT_DATA_ERROR = 1
EXIT_USAGE = 2
EXIT_FLAGS_FOUND = 3


class DataError(Exception):
    pass


def _write_atomic(path: Path, data: bytes) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".tmp-", suffix=path.suffix)
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _parallel(jobs: int, fn, items):
    if jobs <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


def _load_tree(path: Path) -> BinaryTree:
    try:
        return ingest.parse_dltree(path.read_bytes())
    except ingest.ParseError as e:
        raise DataError(f"{path}: {e}")


def _load_corpus(directory: Path) -> dict[tuple[str, str], BinaryTree]:
    paths = sorted(directory.glob("*.dltree"))
    if not paths:
        raise DataError(f"no .dltree files in {directory}")
    corpus = {}
    for p in paths:
        tree = _load_tree(p)
        corpus[(tree.subject_id, tree.region.value)] = tree
    return corpus


def _tree_filename(tree: BinaryTree) -> str:
    return f"{tree.subject_id}_{tree.region.value}.dltree"


def _read_config(path: Path | None) -> dict[str, str]:
    if path is None:
        return {}
    values = {}
    for lineno, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise DataError(f"{path}:{lineno}: expected 'key = value'")
        key, _, value = line.partition("=")
        values[key.strip()] = value.strip()
    return values


def _detector_config(cfg: dict[str, str], args) -> DetectorConfig:
    config = DetectorConfig()
    kwargs = {}
    for f in fields(DetectorConfig):
        if f.name in cfg:
            kwargs[f.name] = _cast(f, cfg[f.name])
        flag = getattr(args, f.name, None)
        if flag is not None:
            kwargs[f.name] = flag
    return replace(config, **kwargs) if kwargs else config


def _cast(f, raw: str):
    return int(raw) if f.type == "int" else float(raw)


# ---------------------------------------------------------------------------
# subcommands


def cmd_extract(args) -> int:
    out_dir = Path(args.out_dir)

    def one(path_str: str):
        path = Path(path_str)
        try:
            graph = ingest.parse_vess(path.read_bytes())
        except ingest.ParseError as e:
            raise DataError(f"{path}: {e}")
        tree = extract_binary_tree(graph)
        _write_atomic(out_dir / _tree_filename(tree), ingest.serialize_dltree(tree))

    _parallel(args.jobs, one, args.inputs)
    return EXIT_OK


def cmd_render(args) -> int:
    out_dir = Path(args.out_dir)
    options = RenderOptions(width=args.width, height=args.height)
    config = LayoutConfig(jitter_salt=args.jitter_seed_salt)

    def one(path_str: str):
        path = Path(path_str)
        tree = _load_tree(path)
        svg = render_svg(build_layout(tree, config), options)
        _write_atomic(out_dir / (path.stem + ".svg"), svg)

    _parallel(args.jobs, one, args.inputs)
    return EXIT_OK


def cmd_scan(args) -> int:
    corpus = _load_corpus(Path(args.directory))
    config = _detector_config(_read_config(Path(args.config) if args.config else None), args)

    def one(item):
        _, tree = item
        return detect.scan_tree(tree, config)

    per_tree = _parallel(args.jobs, one, sorted(corpus.items()))
    flags = [f for group in per_tree for f in group]
    flags.sort(key=lambda f: (f.subject_id, f.region_code,
                              detect._KIND_ORDER[f.kind], f.node_id))
    _write_atomic(Path(args.report), detect.flags_to_tsv(flags).encode("utf-8"))
    return EXIT_FLAGS_FOUND if flags else EXIT_OK


def cmd_apply_edits(args) -> int:
    corpus = _load_corpus(Path(args.directory))
    try:
        script = edit.parse_script(Path(args.script).read_text(encoding="utf-8"))
        edited = edit.apply_script(corpus, script)
    except edit.EditScriptError as e:
        raise DataError(f"{args.script}: {e}")
    out_dir = Path(args.out_dir)
    for tree in edited.values():
        _write_atomic(out_dir / _tree_filename(tree), ingest.serialize_dltree(tree))
    return EXIT_OK


_INJECT_KINDS = {
    "vein": FlagKind.VEIN,
    "misconnection": FlagKind.MISCONNECTION,
    "startingpoint": FlagKind.STARTING_POINT,
}


def parse_inject_spec(spec: str) -> dict[FlagKind, int]:
    """`vein=3,misconnection=2,startingpoint=1` -> per-kind injection counts."""
    counts: dict[FlagKind, int] = {}
    if not spec:
        return counts
    for part in spec.split(","):
        name, sep, num = part.strip().partition("=")
        if not sep or name.lower() not in _INJECT_KINDS:
            raise DataError(f"bad --inject entry {part!r}")
        counts[_INJECT_KINDS[name.lower()]] = int(num)
    return counts


def cmd_synth(args) -> int:
    import random

    entries = synth.generate_corpus(args.subjects, args.effect, args.seed)
    counts = parse_inject_spec(args.inject)
    rng = random.Random(args.seed ^ 0x5EED)
    detector_config = DetectorConfig()
    truth_rows = []
    repair_lines = []

    wanted = [kind for kind, n in sorted(counts.items(), key=lambda kv: kv[0].value)
              for _ in range(n)]
    if wanted:
        order = list(range(len(entries)))
        rng.shuffle(order)
        idx_iter = iter(order)
        for kind in wanted:
            for idx in idx_iter:
                entry = entries[idx]
                try:
                    tree, locus = synth.inject_anomaly(
                        entry.tree, kind, rng.randrange(2**62), detector_config)
                except synth.TreeTooSmallError:
                    continue
                repair_lines.append(synth.repair_operation(entry.tree, kind, locus))
                entries[idx] = CorpusEntry(tree, entry.covariate)
                truth_rows.append(
                    f"{tree.subject_id}\t{tree.region.value}\t{kind.value}\t{locus}")
                break
            else:
                raise DataError(f"not enough suitable trees to inject {kind.value}")

    out_dir = Path(args.out_dir)
    ages = {}
    for entry in entries:
        _write_atomic(out_dir / _tree_filename(entry.tree),
                      ingest.serialize_dltree(entry.tree))
        ages[entry.tree.subject_id] = entry.covariate
    repair_lines.reverse()
    _write_atomic(out_dir / "repairs.edits",
                  edit.format_script(repair_lines).encode("utf-8"))
    truth_rows.sort()
    _write_atomic(out_dir / "ground_truth.tsv",
                  ("subject\tregion\tkind\tnode\n"
                   + "".join(r + "\n" for r in truth_rows)).encode("utf-8"))
    age_lines = [f"{s}\t{a:.4f}" for s, a in sorted(ages.items())]
    _write_atomic(out_dir / "ages.tsv",
                  ("subject\tage\n" + "".join(l + "\n" for l in age_lines)).encode("utf-8"))
    return EXIT_OK


def _read_covariates(path: Path) -> dict[str, float]:
    ages = {}
    for i, line in enumerate(path.read_text(encoding="utf-8").splitlines()):
        if not line.strip() or (i == 0 and line.startswith("subject")):
            continue
        try:
            subject, age = line.split("\t")
            ages[subject] = float(age)
        except ValueError:
            raise DataError(f"{path}: bad covariate line {line!r}")
    return ages


def _corpus_entries(directory: Path, ages: dict[str, float]) -> list[CorpusEntry]:
    corpus = _load_corpus(directory)
    entries = []
    for (subject, _), tree in sorted(corpus.items()):
        if subject not in ages:
            raise DataError(f"no covariate for subject {subject!r}")
        entries.append(CorpusEntry(tree, ages[subject]))
    return entries


def cmd_stats(args) -> int:
    ages = _read_covariates(Path(args.covariates))
    primary = stats.region_age_analysis(_corpus_entries(Path(args.directory), ages))
    baseline = None
    if args.compare:
        baseline = stats.region_age_analysis(_corpus_entries(Path(args.compare), ages))
    _write_atomic(Path(args.out),
                  stats.comparison_to_tsv(primary, baseline).encode("utf-8"))
    if args.flags:
        records = detect.flags_from_tsv(Path(args.flags).read_text(encoding="utf-8"))
        corpus_size = len(_load_corpus(Path(args.directory)))
        summary = stats.summarize_flags(records, corpus_size)
        _write_atomic(Path(args.summary_out or "flag_summary.tsv"),
                      stats.summary_to_tsv(summary).encode("utf-8"))
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dlview",
        description="Extract, visualize, flag, correct and analyze vessel component trees.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("extract", help="convert .vess graphs to .dltree component trees")
    p.add_argument("inputs", nargs="+", metavar="in.vess")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("render", help="render .dltree files as SVG figures")
    p.add_argument("inputs", nargs="+", metavar="in.dltree")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--width", type=int, default=1000)
    p.add_argument("--height", type=int, default=800)
    p.add_argument("--jitter-seed-salt", default="")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("scan", help="run the discrepancy detectors over a corpus")
    p.add_argument("directory")
    p.add_argument("--config")
    p.add_argument("--report", required=True)
    p.add_argument("--epsilon-mm", dest="epsilon_mm", type=float)
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("apply-edits", help="apply a correction script to a corpus")
    p.add_argument("directory")
    p.add_argument("--script", required=True)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_apply_edits)

    p = sub.add_parser("synth", help="generate a synthetic corpus with ground truth")
    p.add_argument("--subjects", type=int, required=True)
    p.add_argument("--effect", type=float, default=0.0)
    p.add_argument("--inject", default="")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("stats", help="regression tables and flag summaries")
    p.add_argument("directory")
    p.add_argument("--covariates", required=True)
    p.add_argument("--compare")
    p.add_argument("--out", required=True)
    p.add_argument("--flags")
    p.add_argument("--summary-out")
    p.set_defaults(func=cmd_stats)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except DataError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_DATA_ERROR
    except (OSError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_DATA_ERROR


if __name__ == "__main__":
    sys.exit(main())
