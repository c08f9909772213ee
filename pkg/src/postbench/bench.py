"""Experiment orchestration: configs, the 3 x 3 evaluation grid, reports.

A run trains each requested model on each engagement target over a list
of split seeds and reports train/test mean squared error per cell,
aggregated as median/min/max across seeds.  A constant predictor at the
training-target mean is always evaluated alongside as a floor.  Report
files are deterministic: identical configs (seeds included) serialize
byte-identically; wall-clock timings are kept on the report object but
never written into the report files.
"""

from __future__ import annotations

import configparser
import hashlib
import json
import os
import time
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from .anfis import AnfisRegressor
from .data import TARGET_NAMES, SplitSpec, build_dataset
from .esn import EchoStateRegressor
from .rng import derive_seed
from .svr import SupportVectorRegressor

MODEL_ORDER = ("svr", "esn", "anfis")
BASELINE = "baseline"
DEFAULT_SEEDS = tuple(range(1, 11))
OUTPUT_DIR_ENV = "POSTBENCH_OUTPUT_DIR"


def mse(predictions, targets) -> float:
    """Mean squared error (1/T) sum (yhat - y)^2."""
    p = np.asarray(predictions, dtype=np.float64).ravel()
    t = np.asarray(targets, dtype=np.float64).ravel()
    if p.size == 0:
        raise ValueError("mse needs at least one value")
    if p.size != t.size:
        raise ValueError(f"length mismatch: {p.size} predictions, {t.size} targets")
    return float(np.mean((p - t) ** 2))


@dataclass(frozen=True)
class EsnSettings:
    reservoir_size: int = 25
    spectral_radius: float = 0.5
    input_scale: float = 1.0
    washout: int = 10
    ridge_lambda: float = 1e-6


@dataclass(frozen=True)
class SvrSettings:
    C: float = 1000.0
    epsilon: float = 0.1
    gamma: float = 0.1
    kkt_tol: float = 1e-3
    max_passes: int = 10000


@dataclass(frozen=True)
class AnfisSettings:
    n_mfs: int = 3
    lr: float = 0.01
    lse_lambda: float = 1e-6
    epochs: int = 2


@dataclass(frozen=True)
class RunConfig:
    data_path: Path
    n_train: int = 400
    shuffle: bool = True
    seeds: tuple = DEFAULT_SEEDS
    models: tuple = MODEL_ORDER
    targets: tuple = TARGET_NAMES
    output_dir: Path = Path("out")
    esn: EsnSettings = field(default_factory=EsnSettings)
    svr: SvrSettings = field(default_factory=SvrSettings)
    anfis: AnfisSettings = field(default_factory=AnfisSettings)

    def __post_init__(self):
        if not self.models:
            raise ValueError("at least one model is required")
        if not self.targets:
            raise ValueError("at least one target is required")
        for m in self.models:
            if m not in MODEL_ORDER:
                raise ValueError(f"unknown model {m!r}, expected {MODEL_ORDER}")
        for t in self.targets:
            if t not in TARGET_NAMES:
                raise ValueError(f"unknown target {t!r}, expected {TARGET_NAMES}")

    def canonical_text(self) -> str:
        lines = [
            f"data.path={self.data_path}",
            f"split.n_train={self.n_train}",
            f"split.shuffle={str(self.shuffle).lower()}",
            f"run.seeds={','.join(str(s) for s in self.seeds)}",
            f"run.models={','.join(self.models)}",
            f"run.targets={','.join(self.targets)}",
            f"run.output_dir={self.output_dir}",
        ]
        for section, settings in (("esn", self.esn), ("svr", self.svr),
                                  ("anfis", self.anfis)):
            for k, v in sorted(asdict(settings).items()):
                lines.append(f"{section}.{k}={v!r}")
        return "\n".join(lines) + "\n"

    def digest(self) -> str:
        return hashlib.sha256(self.canonical_text().encode()).hexdigest()

    def effective_output_dir(self) -> Path:
        env = os.environ.get(OUTPUT_DIR_ENV)
        return Path(env) if env else Path(self.output_dir)


def _typed(cls, section: configparser.SectionProxy):
    kwargs = {}
    known = {f.name: f.type for f in fields(cls)}
    for key in section:
        if key not in known:
            raise ValueError(f"unknown config key '{key}' in [{section.name}]")
        if known[key] == "int":
            kwargs[key] = section.getint(key)
        else:
            kwargs[key] = section.getfloat(key)
    return cls(**kwargs)


def load_config(path, data_override=None) -> RunConfig:
    """Parse the INI-style run configuration.

    Every section and key is optional except the data path, which must
    come from [data] or the override.
    """
    cp = configparser.ConfigParser()
    cp.optionxform = str  # keep key case (the SVR box constraint is 'C')
    if path is not None:
        read = cp.read(str(path))
        if not read:
            raise FileNotFoundError(f"config file not found: {path}")
    allowed = {"data", "split", "run", "esn", "svr", "anfis"}
    unknown = set(cp.sections()) - allowed
    if unknown:
        raise ValueError(f"unknown config sections: {sorted(unknown)}")
    kwargs = {}
    if cp.has_section("data") and cp.has_option("data", "path"):
        kwargs["data_path"] = Path(cp.get("data", "path"))
    if data_override is not None:
        kwargs["data_path"] = Path(data_override)
    if "data_path" not in kwargs:
        raise ValueError("no data path: pass --data or set [data] path in the config")
    if cp.has_section("split"):
        if cp.has_option("split", "n_train"):
            kwargs["n_train"] = cp.getint("split", "n_train")
        if cp.has_option("split", "shuffle"):
            kwargs["shuffle"] = cp.getboolean("split", "shuffle")
    if cp.has_section("run"):
        sec = cp["run"]
        if "seeds" in sec:
            kwargs["seeds"] = tuple(int(s) for s in sec["seeds"].split(","))
        if "models" in sec:
            kwargs["models"] = tuple(m.strip() for m in sec["models"].split(","))
        if "targets" in sec:
            kwargs["targets"] = tuple(t.strip() for t in sec["targets"].split(","))
        if "output_dir" in sec:
            kwargs["output_dir"] = Path(sec["output_dir"])
    for name, cls in (("esn", EsnSettings), ("svr", SvrSettings),
                      ("anfis", AnfisSettings)):
        if cp.has_section(name):
            kwargs[name] = _typed(cls, cp[name])
    return RunConfig(**kwargs)


@dataclass
class CellResult:
    model: str
    target: str
    train_mse: list = field(default_factory=list)
    test_mse: list = field(default_factory=list)
    wall_clock: list = field(default_factory=list)
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None and bool(self.test_mse)

    def aggregate(self):
        """(train_median, test_median, test_min, test_max) across seeds."""
        return (
            float(np.median(self.train_mse)),
            float(np.median(self.test_mse)),
            float(np.min(self.test_mse)),
            float(np.max(self.test_mse)),
        )


@dataclass
class EvalReport:
    cells: dict
    seeds: tuple
    n_train: int
    shuffle: bool
    models: tuple
    targets: tuple
    config_digest: str

    def row_order(self):
        order = [m for m in MODEL_ORDER if m in self.models] + [BASELINE]
        return [(m, t) for m in order for t in TARGET_NAMES if t in self.targets]

    def to_csv_text(self) -> str:
        lines = ["model,target,train_mse,test_mse,seed_median,seed_min,seed_max"]
        for key in self.row_order():
            cell = self.cells[key]
            if cell.ok:
                tr, te, lo, hi = cell.aggregate()
                vals = [tr, te, te, lo, hi]
                lines.append(",".join([cell.model, cell.target]
                                      + [format(v, ".6g") for v in vals]))
            else:
                lines.append(",".join([cell.model, cell.target] + ["nan"] * 5))
        return "\n".join(lines) + "\n"

    def to_markdown_text(self) -> str:
        display = {"svr": "SVR", "esn": "ESN", "anfis": "ANFIS",
                   BASELINE: "baseline"}
        cols = [t for t in TARGET_NAMES if t in self.targets]
        lines = ["| Method | " + " | ".join(c.capitalize() for c in cols) + " |",
                 "|" + " --- |" * (len(cols) + 1)]
        order = [m for m in MODEL_ORDER if m in self.models] + [BASELINE]
        for m in order:
            cells = []
            for t in cols:
                cell = self.cells[(m, t)]
                cells.append(format(cell.aggregate()[1], ".6g") if cell.ok
                             else "failed")
            lines.append("| " + " | ".join([display[m]] + cells) + " |")
        return "\n".join(lines) + "\n"

    def to_json_text(self) -> str:
        def sig6(v):
            return float(format(v, ".6g"))
        payload = {
            "metadata": {
                "config_digest": self.config_digest,
                "seeds": list(self.seeds),
                "n_train": self.n_train,
                "shuffle": self.shuffle,
                "models": list(self.models),
                "targets": list(self.targets),
            },
            "cells": [
                {
                    "model": cell.model,
                    "target": cell.target,
                    "error": cell.error,
                    "train_mse": [sig6(v) for v in cell.train_mse],
                    "test_mse": [sig6(v) for v in cell.test_mse],
                }
                for cell in (self.cells[k] for k in self.row_order())
            ],
        }
        return json.dumps(payload, indent=1, sort_keys=True) + "\n"

    def total_wall_clock(self) -> float:
        return sum(sum(c.wall_clock) for c in self.cells.values())


def _make_model(name: str, config: RunConfig, run_seed: int, target: str):
    if name == "esn":
        return EchoStateRegressor(**asdict(config.esn),
                                  seed=derive_seed(run_seed, "esn", target))
    if name == "svr":
        return SupportVectorRegressor(**asdict(config.svr))
    if name == "anfis":
        return AnfisRegressor(**asdict(config.anfis))
    raise ValueError(f"unknown model {name!r}")


def run_experiment(config: RunConfig) -> EvalReport:
    """Train and evaluate every requested (model, target) cell per seed.

    A failure inside one cell is recorded on that cell and the run
    continues; the constant-mean baseline is always computed per target.
    """
    cells = {}
    for name in list(config.models) + [BASELINE]:
        for target in config.targets:
            cells[(name, target)] = CellResult(model=name, target=target)
    for seed in config.seeds:
        spec = SplitSpec(n_train=config.n_train, seed=seed, shuffle=config.shuffle)
        _, train, test = build_dataset(config.data_path, spec)
        for target in config.targets:
            y_train = train.target_column(target)
            y_test = test.target_column(target)
            base = cells[(BASELINE, target)]
            t0 = time.perf_counter()
            const = float(np.mean(y_train))
            base.train_mse.append(mse(np.full(y_train.size, const), y_train))
            base.test_mse.append(mse(np.full(y_test.size, const), y_test))
            base.wall_clock.append(time.perf_counter() - t0)
            for name in config.models:
                cell = cells[(name, target)]
                if cell.error is not None:
                    continue
                t0 = time.perf_counter()
                try:
                    model = _make_model(name, config, seed, target)
                    model.fit(train.features, y_train)
                    cell.train_mse.append(float(model.train_mse_))
                    cell.test_mse.append(mse(model.predict(test.features), y_test))
                except Exception as exc:
                    cell.error = f"seed {seed}: {exc}"
                cell.wall_clock.append(time.perf_counter() - t0)
    return EvalReport(
        cells=cells,
        seeds=tuple(config.seeds),
        n_train=config.n_train,
        shuffle=config.shuffle,
        models=tuple(config.models),
        targets=tuple(config.targets),
        config_digest=config.digest(),
    )


def emit_report(report: EvalReport, fmt: str, output_dir) -> Path:
    """Write one report file; returns its path.

    Formats: csv, markdown, json.  Serialization is deterministic for a
    given report (timings are excluded).
    """
    writers = {
        "csv": ("report.csv", report.to_csv_text),
        "markdown": ("report.md", report.to_markdown_text),
        "json": ("report.json", report.to_json_text),
    }
    if fmt not in writers:
        raise ValueError(f"unknown report format {fmt!r}, expected {sorted(writers)}")
    output_dir = Path(output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)
    name, render = writers[fmt]
    path = output_dir / name
    with open(path, "w", newline="\n") as fh:
        fh.write(render())
    return path
