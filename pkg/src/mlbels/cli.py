"""Command-line front end.

Three subcommands:

``run``
    Prequential runs of one model variant over a dataset or synthetic
    stream, once per seed. Writes a per-chunk CSV and an accuracy-series
    CSV per run and a ``summary.csv`` holding one row per run plus their
    mean.
``ablation``
    The same runs for every variant (BR, BR+Ens, BR+Ens+W, Default) on the
    same source and seeds. Writes ``ablation.csv`` with one column per
    variant.
``generate``
    Materialize a synthetic stream as an ARFF or sparse text file.

Settings are resolved flag first, then ``--config`` JSON file, then the
built-in defaults.
"""

from __future__ import annotations

import argparse
import csv
import json
import resource
import sys
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from . import __version__
from .data import DatasetHeader, generate_synthetic, load_arff, load_sparse, parse_synthetic
from .data.synthetic import SyntheticStream
from .errors import ConfigurationError, MLBelsError
from .evaluation import PrequentialReport, run_prequential
from .model import MLBelsModel, ModelConfig, Variant, default_chunk_size

# flag dest -> ModelConfig field
_MODEL_FLAGS = {
    "ensemble_size": "e",
    "df": "d_f",
    "de": "d_e",
    "lam": "lam",
    "theta": "theta",
    "tau": "tau",
    "pool": "pool_size",
    "variant": "variant",
    "lc_mode": "lc_mode",
}
# keys accepted in a config file besides the ModelConfig fields
_RUN_KEYS = {
    "dataset", "synthetic", "instances", "chunk", "label_fraction", "mask_seed", "repeats",
    "seeds", "out", "include_first_chunk", "labels", "features", "label_position", "scale",
    "data_seed",
}
_SUMMARY_FIELDS = ["run", "seed", "instances", "example_acc", "example_f1", "micro_f1",
                   "seconds_per_10"]


@dataclass
class RunSpec:
    """Fully resolved settings for a ``run`` or ``ablation`` invocation."""

    config: ModelConfig
    dataset: Path | None = None
    synthetic: str | None = None
    instances: int = 20000
    chunk: int | None = None
    label_fraction: float = 1.0
    mask_seed: int = 0
    seeds: list[int] = field(default_factory=lambda: [0])
    out: Path = Path("results")
    include_first_chunk: bool = False
    labels: int | None = None
    features: int | None = None
    label_position: str | None = None
    scale: str = "global"
    data_seed: int | None = None

    def __post_init__(self):
        if (self.dataset is None) == (self.synthetic is None):
            raise ConfigurationError("give exactly one of --dataset or --synthetic")
        if self.dataset is not None and not Path(self.dataset).is_file():
            raise ConfigurationError(f"no such dataset file: {self.dataset}")
        if self.synthetic is not None:
            parse_synthetic(self.synthetic, self.instances)  # fail before any output is written
        if not self.seeds:
            raise ConfigurationError("at least one seed is required")
        if not 0.0 < self.label_fraction <= 1.0:
            raise ConfigurationError(f"label fraction must lie in (0, 1], got {self.label_fraction}")
        if self.chunk is not None and self.chunk < 1:
            raise ConfigurationError(f"chunk size must be >= 1, got {self.chunk}")
        if self.instances < 1:
            raise ConfigurationError(f"instance count must be >= 1, got {self.instances}")

    @property
    def source_name(self) -> str:
        if self.synthetic is not None:
            return parse_synthetic(self.synthetic, self.instances).name
        return Path(self.dataset).stem

    @property
    def run_label(self) -> str:
        """Report name, tagged with the kept label share in missing-label mode."""
        if self.label_fraction < 1.0:
            return f"ML-BELS({self.label_fraction * 100:g}%)"
        return "ML-BELS"


def parse_seeds(text: str) -> list[int]:
    try:
        return [int(s) for s in str(text).split(",") if s.strip()]
    except ValueError:
        raise ConfigurationError(f"seeds must be comma-separated integers, got {text!r}") from None


def _add_source_args(p: argparse.ArgumentParser):
    src = p.add_mutually_exclusive_group()
    src.add_argument("--dataset", type=Path, help="ARFF file, or sparse text file with --features/--labels")
    src.add_argument("--synthetic", metavar="KIND:LABELS:NOISE",
                     help="synthetic stream, e.g. A:10:20 (abrupt, 10 labels, 20%% noise)")
    p.add_argument("--instances", type=int, help="synthetic stream length (default 20000)")
    p.add_argument("--data-seed", type=int, help="generator seed (default: the run seed)")
    p.add_argument("--labels", type=int, help="label count, overriding the ARFF relation tag")
    p.add_argument("--features", type=int, help="feature count (sparse text files)")
    p.add_argument("--label-position", choices=["prefix", "suffix"])
    p.add_argument("--scale", choices=["global", "running", "none"], help="feature scaling (default global)")


def _add_model_args(p: argparse.ArgumentParser, with_variant=True):
    p.add_argument("--chunk", type=int, help="chunk size (default: sized for about 40 chunks)")
    p.add_argument("--ensemble-size", type=int, help="output layer instances per label (default 3)")
    p.add_argument("--df", type=int, help="feature mapping nodes (default 25)")
    p.add_argument("--de", type=int, help="enhancement nodes (default 1)")
    p.add_argument("--lambda", dest="lam", type=float, help="ridge regularization (default 1e-3)")
    p.add_argument("--theta", type=float, help="head accuracy threshold (default 0.5)")
    p.add_argument("--tau", type=float, help="label cardinality trigger (default 1.5)")
    p.add_argument("--pool", type=int, help="pool capacity per label (default 100)")
    p.add_argument("--lc-mode", choices=["cumulative", "chunk"])
    if with_variant:
        p.add_argument("--variant", choices=[v.value for v in Variant])
    p.add_argument("--label-fraction", type=float, help="share of labels kept for training (default 1)")
    p.add_argument("--mask-seed", type=int, help="seed for hiding labels (default 0)")
    p.add_argument("--repeats", type=int, help="number of runs (default: one per seed)")
    p.add_argument("--seed", dest="seeds", help="seed or comma-separated seeds (default 0)")
    p.add_argument("--out", type=Path, help="output directory (default ./results)")
    p.add_argument("--include-first-chunk", action="store_true", default=None,
                   help="count the cold first chunk in the aggregates")
    p.add_argument("--config", type=Path, help="JSON file with default settings")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mlbels", description="Streaming multi-label classification with broad-learning ensembles.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="prequential evaluation of one variant")
    _add_source_args(run)
    _add_model_args(run)

    abl = sub.add_parser("ablation", help="compare BR, BR+Ens, BR+Ens+W and Default")
    _add_source_args(abl)
    _add_model_args(abl, with_variant=False)

    gen = sub.add_parser("generate", help="write a synthetic stream to disk")
    gen.add_argument("--synthetic", required=True, metavar="KIND:LABELS:NOISE")
    gen.add_argument("--instances", type=int, default=20000)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--format", choices=["arff", "sparse"], default="arff")
    gen.add_argument("output", type=Path)
    return parser


def _load_config_file(path: Path | None) -> dict:
    if path is None:
        return {}
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ConfigurationError(f"no such config file: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"{path}: invalid JSON ({exc})") from None
    if not isinstance(data, dict):
        raise ConfigurationError(f"{path}: top level must be an object")
    known = _RUN_KEYS | {f.name for f in fields(ModelConfig)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ConfigurationError(f"{path}: unknown keys {unknown}")
    return data


def resolve_spec(args: argparse.Namespace, variant: Variant | None = None) -> RunSpec:
    """Merge flags over the config file over defaults."""
    cfg = _load_config_file(getattr(args, "config", None))
    model_kw = {k: v for k, v in cfg.items() if k not in _RUN_KEYS}
    for flag, name in _MODEL_FLAGS.items():
        value = getattr(args, flag, None)
        if value is not None:
            model_kw[name] = value
    if variant is not None:
        model_kw["variant"] = variant

    def pick(name, default=None):
        value = getattr(args, name, None)
        if value is None:
            value = cfg.get(name, default)
        return value

    seeds = pick("seeds", "0")
    seeds = parse_seeds(seeds) if isinstance(seeds, str) else [int(s) for s in np.atleast_1d(seeds)]
    repeats = pick("repeats")
    if repeats is not None:
        if repeats < 1:
            raise ConfigurationError(f"repeats must be >= 1, got {repeats}")
        # extend with consecutive seeds after the largest one given
        while len(seeds) < repeats:
            seeds.append(max(seeds) + 1)
        seeds = seeds[:repeats]
    dataset = pick("dataset")
    chunk = pick("chunk")
    if chunk is not None:
        model_kw["chunk_size"] = chunk
    return RunSpec(
        config=ModelConfig(**model_kw),
        dataset=Path(dataset) if dataset is not None else None,
        synthetic=pick("synthetic"),
        instances=pick("instances", 20000),
        chunk=chunk,
        label_fraction=pick("label_fraction", 1.0),
        mask_seed=pick("mask_seed", 0),
        seeds=seeds,
        out=Path(pick("out", "results")),
        include_first_chunk=bool(pick("include_first_chunk", False)),
        labels=pick("labels"),
        features=pick("features"),
        label_position=pick("label_position"),
        scale=pick("scale", "global"),
        data_seed=pick("data_seed"),
    )


def open_source(spec: RunSpec, seed: int):
    """Return ``(n_features, n_labels, chunk_size, chunks)`` for one run."""
    if spec.synthetic is not None:
        data_seed = seed if spec.data_seed is None else spec.data_seed
        stream: SyntheticStream = generate_synthetic(
            parse_synthetic(spec.synthetic, spec.instances, data_seed))
        size = spec.chunk or default_chunk_size(spec.instances)
        return stream.n_features, stream.n_labels, size, stream.chunks(size)
    path = Path(spec.dataset)
    if path.suffix.lower() == ".arff":
        header, ds = load_arff(path, spec.labels, spec.label_position, scale=spec.scale)
    else:
        if spec.features is None or spec.labels is None:
            raise ConfigurationError(f"{path}: non-ARFF files need --features and --labels")
        header = DatasetHeader(path.stem, spec.features, spec.labels,
                               spec.label_position or "prefix")
        header, ds = load_sparse(path, header, scale=spec.scale)
        if header.n_instances is None:
            header.n_instances = sum(1 for _ in ds.rows())
    size = spec.chunk or default_chunk_size(header.n_instances or 0)
    return header.n_features, header.n_labels, size, ds.chunks(size)


def execute(spec: RunSpec, seed: int) -> PrequentialReport:
    n_features, n_labels, size, chunks = open_source(spec, seed)
    config = spec.config.replace(seed=seed, chunk_size=size)
    model = MLBelsModel(config, n_features, n_labels)
    report = run_prequential(model, chunks, include_first_chunk=spec.include_first_chunk,
                             label_fraction=spec.label_fraction, mask_seed=spec.mask_seed,
                             name=spec.run_label)
    report.meta.update(source=spec.source_name, seed=seed, config=config.to_dict())
    return report


def average_summaries(summaries: list[dict]) -> dict:
    """Arithmetic mean of the numeric fields of per-run summaries."""
    keys = ["instances", "example_acc", "example_f1", "micro_f1", "seconds_per_10"]
    return {k: float(np.mean([s[k] for s in summaries])) for k in keys}


def peak_rss_mb() -> float:
    # ru_maxrss is in kilobytes on Linux
    return resource.getrusage(resource.RUSAGE_SELF).ru_maxrss / 1024.0


def _write_summary(path: Path, rows: list[dict]):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=_SUMMARY_FIELDS, lineterminator="\n")
        w.writeheader()
        for row in rows:
            w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in row.items()
                        if k in _SUMMARY_FIELDS})


def cmd_run(args) -> int:
    spec = resolve_spec(args)
    spec.out.mkdir(parents=True, exist_ok=True)
    stem = f"{spec.source_name}_{spec.config.variant.value}"
    rows = []
    for seed in spec.seeds:
        report = execute(spec, seed)
        (spec.out / f"{stem}_seed{seed}.csv").write_text(report.to_csv(), encoding="utf-8")
        (spec.out / f"{stem}_seed{seed}_series.csv").write_text(report.series_csv(), encoding="utf-8")
        s = report.summary()
        rows.append({"run": s["name"], "seed": seed, **s})
        print(f"seed {seed}: acc={s['example_acc']:.4f} f1={s['example_f1']:.4f} "
              f"micro_f1={s['micro_f1']:.4f} s/10={s['seconds_per_10']:.2e}")
    mean = average_summaries(rows)
    rows.append({"run": f"{spec.run_label} mean", "seed": "", **mean})
    _write_summary(spec.out / "summary.csv", rows)
    print(f"{spec.run_label} on {spec.source_name}, {len(spec.seeds)} run(s): "
          f"acc={mean['example_acc']:.4f} f1={mean['example_f1']:.4f} "
          f"micro_f1={mean['micro_f1']:.4f} s/10={mean['seconds_per_10']:.2e}")
    print(f"peak memory: {peak_rss_mb():.1f} MB")
    return 0


def cmd_ablation(args) -> int:
    base = resolve_spec(args)
    base.out.mkdir(parents=True, exist_ok=True)
    columns = {}
    for variant in Variant:
        spec = resolve_spec(args, variant=variant)
        accs = [execute(spec, seed).example_accuracy for seed in spec.seeds]
        columns[variant.label] = float(np.mean(accs))
    path = base.out / "ablation.csv"
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["dataset"] + list(columns))
        w.writerow([base.source_name] + [repr(v) for v in columns.values()])
    print(f"{'dataset':<16}" + "".join(f"{k:>10}" for k in columns))
    print(f"{base.source_name:<16}" + "".join(f"{v:>10.3f}" for v in columns.values()))
    print(f"peak memory: {peak_rss_mb():.1f} MB")
    return 0


def cmd_generate(args) -> int:
    from .data import write_arff, write_sparse

    stream = generate_synthetic(parse_synthetic(args.synthetic, args.instances, args.seed))
    if args.format == "arff":
        write_arff(args.output, stream.X, stream.Y, relation=stream.spec.name)
    else:
        write_sparse(args.output, stream.X, stream.Y)
    print(f"wrote {stream.X.shape[0]} instances ({stream.n_labels} labels) to {args.output}")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {"run": cmd_run, "ablation": cmd_ablation, "generate": cmd_generate}
    try:
        return handlers[args.command](args)
    except (MLBelsError, ValueError, OSError) as exc:
        print(f"mlbels: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
