"""
Experiment grids
================

A :class:`GridConfig` names a dataset (an SBM preset or files on disk), the
models and feature variants to compare, the ``(t, s)`` grid for ILE
features and a number of repeats. :func:`run_grid` evaluates every cell
and returns an :class:`ExperimentReport` that can be written as CSV or as a
markdown table with one row per model/variant and one column per ``t``.

Seeding
-------
Repeat ``r`` uses the data seed ``base_seed + r``. It drives the SBM draw,
and named sub-streams of it drive the split, the corruption mask and the
eigensolver start vector, so every cell of a repeat sees the same data.
Model initialization uses ``(base_seed ^ crc32(cell_id)) + r``, so removing
a cell never changes another cell's numbers. Results therefore do not
depend on the worker count or the order in which cells finish.
"""

from __future__ import annotations

import csv
import io
import json
import math
import time
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from .datasets import corrupt_features, load_dataset, split_70_30
from .embedding import augment_features, compute_adjacency_embedding, compute_ile
from .errors import InterlapError, InvalidConfig, ParseError
from .nn.models import ModelConfig, build_model
from .nn.train import train
from .sbm import PRESETS, SbmSpec, generate

VARIANTS = ("None", "Adjacency", "ILE")
DEFAULT_S = (-1.0, -0.5, 0.0, 0.5, 1.0)
DEFAULT_T = (-1.0, -0.5, 0.5, 1.0)
CSV_COLUMNS = ("model", "variant", "t", "s", "corruption", "mean_acc", "std_acc", "seeds", "runtime_ms")
ERROR = "error"


@dataclass(frozen=True)
class DatasetSource:
    """Either an SBM (``preset`` or explicit blocks) or a set of files."""

    kind: str = "sbm"
    preset: str | None = "community"
    n: int = 300
    block_sizes: tuple[int, ...] | None = None
    probabilities: tuple[tuple[float, ...], ...] | None = None
    edges: str | None = None
    features: str | None = None
    labels: str | None = None
    degree_label_fraction: float | None = None
    lenient: bool = False

    def __post_init__(self):
        if self.kind not in ("sbm", "files"):
            raise InvalidConfig(f"dataset kind must be 'sbm' or 'files', got {self.kind!r}")
        if self.kind == "files" and not self.edges:
            raise InvalidConfig("file datasets need an edge list path")
        if self.kind == "sbm" and self.block_sizes is None and self.preset not in PRESETS:
            raise InvalidConfig(f"unknown SBM preset {self.preset!r}; expected one of {sorted(PRESETS)}")

    def spec(self, seed: int) -> SbmSpec:
        if self.block_sizes is not None:
            return SbmSpec(self.block_sizes, self.probabilities, seed)
        return PRESETS[self.preset](self.n, seed)


@dataclass(frozen=True)
class GridConfig:
    dataset: DatasetSource = field(default_factory=DatasetSource)
    models: tuple[str, ...] = ("GCN",)
    variants: tuple[str, ...] = VARIANTS
    s_values: tuple[float, ...] = DEFAULT_S
    t_values: tuple[float, ...] = DEFAULT_T
    k: int = 8
    repeats: int = 5
    corruption_ratios: tuple[float, ...] = (0.0,)
    corruption_sigma: float = 1.0
    base_seed: int = 0
    nn: dict = field(default_factory=dict)
    tol: float = 1e-8
    record_runtime: bool = True

    def __post_init__(self):
        models = tuple(ModelConfig(arch=m).arch for m in self.models)
        object.__setattr__(self, "models", models)
        variants = tuple(_variant_name(v) for v in self.variants)
        object.__setattr__(self, "variants", variants)
        for name in ("s_values", "t_values", "corruption_ratios"):
            object.__setattr__(self, name, tuple(float(x) for x in getattr(self, name)))
        if not models or not variants:
            raise InvalidConfig("models and variants must be nonempty")
        if "ILE" in variants and not (self.s_values and self.t_values):
            raise InvalidConfig("the ILE variant needs nonempty s_values and t_values")
        if self.repeats < 1:
            raise InvalidConfig("repeats must be >= 1")
        if self.k < 1:
            raise InvalidConfig("k must be >= 1")
        if not self.corruption_ratios:
            raise InvalidConfig("corruption_ratios must be nonempty (use [0.0] for none)")
        unknown = set(self.nn) - {f.name for f in fields(ModelConfig)} - {"arch"}
        if unknown:
            raise InvalidConfig(f"unknown nn options {sorted(unknown)}")

    def model_config(self, arch: str, seed: int) -> ModelConfig:
        opts = {k: v for k, v in self.nn.items() if k not in ("arch", "seed")}
        return ModelConfig(arch=arch, seed=seed, **opts)

    @classmethod
    def from_dict(cls, d: dict) -> "GridConfig":
        d = dict(d)
        ds = d.pop("dataset", {})
        if isinstance(ds, dict):
            ds = dict(ds)
            if ds.get("block_sizes") is not None:
                ds["block_sizes"] = tuple(ds["block_sizes"])
                ds["probabilities"] = tuple(tuple(r) for r in ds["probabilities"])
                ds.setdefault("preset", None)
            ds = DatasetSource(**ds)
        for key in ("models", "variants", "s_values", "t_values", "corruption_ratios"):
            if key in d:
                d[key] = tuple(d[key])
        try:
            return cls(dataset=ds, **d)
        except TypeError as exc:
            raise InvalidConfig(str(exc)) from None

    @classmethod
    def from_json(cls, path) -> "GridConfig":
        with open(path) as fh:
            try:
                data = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ParseError(exc.msg, exc.lineno, path) from None
        return cls.from_dict(data)

    def to_dict(self) -> dict:
        return asdict(self)


def _variant_name(v: str) -> str:
    for name in VARIANTS:
        if v.lower() == name.lower():
            return name
    raise InvalidConfig(f"unknown variant {v!r}; expected one of {VARIANTS}")


# -- cells and seeds ---------------------------------------------------------------


@dataclass(frozen=True)
class Cell:
    model: str
    variant: str
    t: float | None
    s: float | None
    corruption: float

    @property
    def cell_id(self) -> str:
        return f"{self.model}|{self.variant}|{_fmt(self.t)}|{_fmt(self.s)}|{self.corruption!r}"


def cells(cfg: GridConfig) -> list[Cell]:
    """Grid cells in report order: model, corruption, variant, then s and t."""
    out = []
    for model in cfg.models:
        for c in cfg.corruption_ratios:
            for v in cfg.variants:
                if v == "ILE":
                    out.extend(Cell(model, v, t, s, c) for s in cfg.s_values for t in cfg.t_values)
                else:
                    out.append(Cell(model, v, None, None, c))
    return out


def data_seed(cfg: GridConfig, r: int) -> int:
    return cfg.base_seed + r


def substream(seed: int, name: str) -> int:
    """Independent child seed of ``seed`` for the purpose ``name``."""
    return int(np.random.SeedSequence([seed, zlib.crc32(name.encode())]).generate_state(1)[0])


def init_seed(cfg: GridConfig, cell: Cell, r: int) -> int:
    return (cfg.base_seed ^ zlib.crc32(cell.cell_id.encode())) + r


# -- report ----------------------------------------------------------------------------


@dataclass(frozen=True)
class ReportRow:
    model: str
    variant: str
    t: float | None
    s: float | None
    corruption: float
    mean_acc: float | None
    std_acc: float | None
    seeds: tuple[int, ...]
    per_seed_accs: tuple[float, ...]
    runtime_ms: int | None = None
    error: str | None = None

    @property
    def failed(self) -> bool:
        return self.error is not None


@dataclass(frozen=True)
class ExperimentReport:
    rows: tuple[ReportRow, ...] = ()
    config: GridConfig | None = field(default=None, compare=False)

    def find(self, model, variant, t=None, s=None, corruption=0.0) -> ReportRow:
        for row in self.rows:
            if (row.model, row.variant, row.t, row.s, row.corruption) == (model, variant, t, s, corruption):
                return row
        raise KeyError((model, variant, t, s, corruption))


def _fmt(x) -> str:
    return "" if x is None else repr(float(x))


def _row_fields(row: ReportRow) -> list[str]:
    if row.failed:
        mean, std = ERROR, ""
        seeds = f"{ERROR}: {row.error}"
    else:
        mean, std = repr(row.mean_acc), repr(row.std_acc)
        seeds = ";".join(f"{sd}:{acc!r}" for sd, acc in zip(row.seeds, row.per_seed_accs))
    runtime = "" if row.runtime_ms is None else str(row.runtime_ms)
    return [row.model, row.variant, _fmt(row.t), _fmt(row.s), repr(row.corruption), mean, std, seeds, runtime]


def format_csv(report: ExperimentReport) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for row in report.rows:
        w.writerow(_row_fields(row))
    return buf.getvalue()


def parse_report(text: str) -> ExperimentReport:
    """Inverse of :func:`format_csv`."""
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header is None or tuple(header) != CSV_COLUMNS:
        raise ParseError(f"expected header {','.join(CSV_COLUMNS)}", 1)
    rows = []
    for lineno, rec in enumerate(reader, start=2):
        if len(rec) != len(CSV_COLUMNS):
            raise ParseError(f"expected {len(CSV_COLUMNS)} fields, got {len(rec)}", lineno)
        model, variant, t, s, corr, mean, std, seeds, runtime = rec
        opt = lambda x: None if x == "" else float(x)  # noqa: E731
        common = dict(
            model=model,
            variant=variant,
            t=opt(t),
            s=opt(s),
            corruption=float(corr),
            runtime_ms=None if runtime == "" else int(runtime),
        )
        if mean == ERROR:
            msg = seeds[len(ERROR) + 2 :] if seeds.startswith(ERROR + ": ") else seeds
            rows.append(ReportRow(mean_acc=None, std_acc=None, seeds=(), per_seed_accs=(), error=msg, **common))
            continue
        pairs = [p.split(":") for p in seeds.split(";")] if seeds else []
        rows.append(
            ReportRow(
                mean_acc=float(mean),
                std_acc=float(std),
                seeds=tuple(int(a) for a, _ in pairs),
                per_seed_accs=tuple(float(b) for _, b in pairs),
                **common,
            )
        )
    return ExperimentReport(tuple(rows))


def format_markdown(report: ExperimentReport) -> str:
    """Accuracy table in percent, ``mean (std)``, one block per corruption level.

    ``None``/``Adjacency`` rows do not depend on ``t`` and fill only the
    first column; ILE rows are labelled by ``s``.
    """
    rows = report.rows
    t_values = sorted({r.t for r in rows if r.t is not None})
    cols = [f"t={t:g}" for t in t_values] or ["acc"]
    out = []
    for corr in sorted({r.corruption for r in rows}):
        if len(out) or corr:
            out.append(f"\ncorruption = {corr:g}\n")
        out.append("| Model | Variant | " + " | ".join(cols) + " |")
        out.append("|---|---|" + "---|" * len(cols))
        models = list(dict.fromkeys(r.model for r in rows))
        for model in models:
            sel = [r for r in rows if r.model == model and r.corruption == corr]
            first = True
            for variant in VARIANTS:
                vrows = [r for r in sel if r.variant == variant]
                if not vrows:
                    continue
                if variant != "ILE":
                    cells_ = [_pct(vrows[0])] + [""] * (len(cols) - 1)
                    out.append(_md_line(model if first else "", variant, cells_))
                    first = False
                    continue
                for s in sorted({r.s for r in vrows}):
                    by_t = {r.t: r for r in vrows if r.s == s}
                    cells_ = [_pct(by_t[t]) if t in by_t else "" for t in t_values]
                    out.append(_md_line(model if first else "", f"s={s:g}", cells_))
                    first = False
    return "\n".join(out) + "\n"


def _pct(row: ReportRow) -> str:
    if row.failed:
        return ERROR
    return f"{100 * row.mean_acc:.2f} ({100 * row.std_acc:.2f})"


def _md_line(model, variant, values) -> str:
    return f"| {model} | {variant} | " + " | ".join(values) + " |"


def emit_report(report: ExperimentReport, path, format: str = "csv") -> None:
    if format == "csv":
        text = format_csv(report)
    elif format in ("markdown", "md"):
        text = format_markdown(report)
    else:
        raise InvalidConfig(f"unknown report format {format!r}")
    Path(path).write_text(text)


# -- running ---------------------------------------------------------------------


@dataclass
class _RepeatData:
    graph: object
    labels: np.ndarray
    features: np.ndarray | None
    split: object
    seed: int


def _load_repeat(cfg: GridConfig, r: int) -> _RepeatData:
    seed = data_seed(cfg, r)
    ds = cfg.dataset
    if ds.kind == "sbm":
        lg = generate(ds.spec(seed), shuffle=True)
        g, labels, features = lg.graph, lg.labels, None
    else:
        data = load_dataset(
            ds.edges,
            ds.features,
            ds.labels,
            degree_label_fraction=ds.degree_label_fraction,
            lenient=ds.lenient,
        )
        g, labels, features = data.graph, data.labels, data.features
    split = split_70_30(g.n, substream(seed, "split"))
    return _RepeatData(g, labels, features, split, seed)


def _base_features(cfg, data: _RepeatData, corruption: float):
    if data.features is None:
        if corruption:
            raise InvalidConfig("feature corruption needs a dataset with features")
        return None
    if not corruption:
        return data.features
    seed = substream(data.seed, f"corrupt|{corruption!r}")
    return corrupt_features(data.features, corruption, cfg.corruption_sigma, seed)


def run_grid(cfg: GridConfig, threads: int = 1) -> ExperimentReport:
    """Evaluate every cell of ``cfg`` for ``cfg.repeats`` repeats.

    ``threads`` bounds the worker pool; it never changes the numbers. A
    cell that raises is reported with its error message instead of
    accuracies.
    """
    threads = max(1, int(threads))
    pool = ThreadPoolExecutor(max_workers=threads) if threads > 1 else None
    pmap = pool.map if pool else map
    try:
        repeats = list(pmap(lambda r: _load_repeat(cfg, r), range(cfg.repeats)))
        keys = []
        if "Adjacency" in cfg.variants:
            keys.append(("Adjacency", None, None))
        if "ILE" in cfg.variants:
            keys.extend(("ILE", t, s) for s in cfg.s_values for t in cfg.t_values)
        jobs = [(r, key) for r in range(cfg.repeats) for key in keys]
        embeddings = dict(zip(jobs, pmap(lambda job: _embed(cfg, repeats[job[0]], job[1]), jobs)))
        grid = cells(cfg)
        rows = list(pmap(lambda c: _run_cell(cfg, c, repeats, embeddings), grid))
    finally:
        if pool:
            pool.shutdown()
    return ExperimentReport(tuple(rows), cfg)


def _embed(cfg, data: _RepeatData, key):
    variant, t, s = key
    seed = substream(data.seed, "eigensolver")
    try:
        if variant == "Adjacency":
            return compute_adjacency_embedding(data.graph, cfg.k, tol=cfg.tol, seed=seed)
        return compute_ile(data.graph, t, s, cfg.k, tol=cfg.tol, seed=seed)
    except InterlapError as exc:
        return exc


def _features(cfg, cell: Cell, data: _RepeatData, emb):
    base = _base_features(cfg, data, cell.corruption)
    if cell.variant == "None":
        return base if base is not None else np.ones((data.graph.n, 1))
    if isinstance(emb, Exception):
        raise emb
    return augment_features(base, emb)


def _run_cell(cfg: GridConfig, cell: Cell, repeats, embeddings) -> ReportRow:
    start = time.perf_counter()
    accs, seeds = [], []
    try:
        for r, data in enumerate(repeats):
            key = (r, (cell.variant, cell.t, cell.s))
            X = _features(cfg, cell, data, embeddings.get(key))
            mcfg = cfg.model_config(cell.model, init_seed(cfg, cell, r))
            num_classes = int(data.labels.max()) + 1
            model = build_model(mcfg, X.shape[1], num_classes, data.graph)
            accs.append(train(model, X, data.labels, data.split, mcfg).test_accuracy)
            seeds.append(data.seed)
    except (InterlapError, ValueError, FloatingPointError, np.linalg.LinAlgError) as exc:
        return ReportRow(
            cell.model, cell.variant, cell.t, cell.s, cell.corruption,
            None, None, (), (), _runtime(cfg, start), error=f"{type(exc).__name__}: {exc}",
        )
    a = np.asarray(accs)
    return ReportRow(
        cell.model,
        cell.variant,
        cell.t,
        cell.s,
        cell.corruption,
        float(a.mean()),
        float(a.std()),  # population std
        tuple(seeds),
        tuple(float(x) for x in accs),
        _runtime(cfg, start),
    )


def _runtime(cfg, start) -> int | None:
    if not cfg.record_runtime:
        return None
    return int(math.floor((time.perf_counter() - start) * 1000))
