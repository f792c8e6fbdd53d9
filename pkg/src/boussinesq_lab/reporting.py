"""Experiment configuration, seeding and deterministic report files."""
from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import os
import platform
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager
from dataclasses import dataclass, field
from typing import Any, Callable, Optional

import numpy as np

PRECISIONS = ("double", "extended")
U64 = 2 ** 64


class ConfigError(ValueError):
    """Configuration does not match the experiment schema."""

    def __init__(self, message: str, field: Optional[str] = None):
        super().__init__(message if field is None else f"{field}: {message}")
        self.field = field


class ReportError(OSError):
    """Report files could not be written."""


# schema ---------------------------------------------------------------------------

def _parse_scalar(kind: str, raw: str):
    if kind == "int":
        return int(raw, 0)
    if kind == "float":
        return _parse_float(raw)
    if kind == "bool":
        low = raw.strip().lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"not a boolean: {raw!r}")
    if kind == "str":
        return raw.strip()
    raise ValueError(f"unknown field kind {kind!r}")


def _parse_float(raw: str) -> float:
    raw = raw.strip()
    if "/" in raw:  # allow exact fractions such as 1/64
        num, den = raw.split("/", 1)
        return float(num) / float(den)
    return float(raw)


@dataclass(frozen=True)
class Field:
    kind: str  # int, float, bool, str, ints, floats
    default: Any
    check: Optional[Callable[[Any], Optional[str]]] = None  # returns an error message or None
    help: str = ""

    def parse(self, raw) -> Any:
        if not isinstance(raw, str):
            return raw
        if self.kind in ("ints", "floats"):
            inner = "int" if self.kind == "ints" else "float"
            parts = [p for p in raw.replace(" ", "").split(",") if p]
            return tuple(_parse_scalar(inner, p) for p in parts)
        return _parse_scalar(self.kind, raw)


def positive(v) -> Optional[str]:
    vals = v if isinstance(v, tuple) else (v,)
    return None if all(x > 0 for x in vals) else "must be positive"


def at_least(lo):
    def check(v):
        return None if v >= lo else f"must be >= {lo}"
    return check


def in_range(lo, hi, closed=(True, True)):
    def check(v):
        ok_lo = v >= lo if closed[0] else v > lo
        ok_hi = v <= hi if closed[1] else v < hi
        if ok_lo and ok_hi:
            return None
        return f"must lie in {'[' if closed[0] else '('}{lo}, {hi}{']' if closed[1] else ')'}"
    return check


def nonempty(v) -> Optional[str]:
    return None if len(v) > 0 else "must be nonempty"


@dataclass(frozen=True)
class ExperimentConfig:
    name: str
    params: dict
    seed: int = 0
    precision: str = "extended"
    out_dir: str = "results"
    threads: int = 1

    def canonical(self) -> str:
        """Stable text form; output directory and thread count do not enter."""
        lines = [f"experiment={self.name}", f"seed={self.seed}", f"precision={self.precision}"]
        lines += [f"{k}={_canon(v)}" for k, v in sorted(self.params.items())]
        return "\n".join(lines) + "\n"

    @property
    def digest(self) -> str:
        return hashlib.sha256(self.canonical().encode()).hexdigest()[:8]

    @property
    def stem(self) -> str:
        return f"{self.name}-{self.digest}"


def _canon(v) -> str:
    if isinstance(v, tuple):
        return ",".join(_canon(x) for x in v)
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def parse_config_text(text: str) -> dict:
    """Flat ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    for n, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {n}: expected key=value, got {line!r}")
        k, v = line.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def build_config(name: str, schema: dict, raw: dict, seed=None, precision=None,
                 out_dir: str = "results", threads: int = 1) -> ExperimentConfig:
    """Validate raw values (strings or typed) against ``schema``."""
    raw = dict(raw)
    raw.pop("experiment", None)
    # explicit arguments win over values from the file
    file_seed, file_prec = raw.pop("seed", None), raw.pop("precision", None)
    seed = file_seed if seed is None else seed
    precision = file_prec if precision is None else precision
    unknown = sorted(set(raw) - set(schema))
    if unknown:
        raise ConfigError(f"unknown parameter for {name}", unknown[0])
    params = {}
    for key, fld in schema.items():
        try:
            val = fld.parse(raw[key]) if key in raw else fld.default
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"cannot parse {raw[key]!r} as {fld.kind} ({exc})", key) from None
        if fld.check is not None:
            msg = fld.check(val)
            if msg:
                raise ConfigError(msg, key)
        params[key] = val
    try:
        seed = 0 if seed is None else int(seed)
    except ValueError:
        raise ConfigError("must be an unsigned 64-bit integer", "seed") from None
    if not (0 <= seed < U64):
        raise ConfigError("must be an unsigned 64-bit integer", "seed")
    precision = "extended" if precision is None else str(precision)
    if precision not in PRECISIONS:
        raise ConfigError(f"must be one of {PRECISIONS}", "precision")
    if threads < 1:
        raise ConfigError("must be >= 1", "threads")
    return ExperimentConfig(name, params, seed, precision, out_dir, threads)


# randomness and workers -----------------------------------------------------------

def stream_rng(seed: int, stream: int) -> np.random.Generator:
    """Independent Philox stream: key = seed + stream * 2^64."""
    return np.random.Generator(np.random.Philox(key=int(seed) + (int(stream) << 64)))


@contextmanager
def worker_pool(threads: int):
    """Order-preserving map; results come back in submission order."""
    if threads <= 1:
        yield map
        return
    with ThreadPoolExecutor(max_workers=threads) as ex:
        yield ex.map


# results and files ----------------------------------------------------------------

@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    detail: str = ""


@dataclass
class Table:
    header: tuple
    rows: list

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.header)
        for row in self.rows:
            w.writerow([_cell(v) for v in row])
        return buf.getvalue()


def _cell(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    tables: dict = field(default_factory=dict)  # name -> Table; the first is the main table
    checks: list = field(default_factory=list)
    summary: dict = field(default_factory=dict)
    warnings: list = field(default_factory=list)
    budgets: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        f = float(v)
        return f if math.isfinite(f) else repr(f)
    if isinstance(v, complex):
        return [v.real, v.imag]
    return v if v is None or isinstance(v, str) else str(v)


def versions() -> dict:
    import mpmath
    import scipy

    from . import __version__
    return {"boussinesq_lab": __version__, "numpy": np.__version__, "scipy": scipy.__version__,
            "mpmath": mpmath.__version__, "python": platform.python_version()}


def emit_report(result: ExperimentResult, out_dir: Optional[str] = None) -> list:
    """Write CSV tables, a JSON manifest and a text summary; returns the paths."""
    if not result.tables and not result.checks:
        raise ValueError("empty results: nothing to report")
    cfg = result.config
    out_dir = cfg.out_dir if out_dir is None else out_dir
    stem = cfg.stem
    files = {}
    for i, (tname, table) in enumerate(result.tables.items()):
        fname = f"{stem}.csv" if i == 0 else f"{stem}-{tname}.csv"
        files[fname] = table.to_csv()
    manifest = {
        "experiment": cfg.name,
        "config_hash": cfg.digest,
        "config": {"seed": cfg.seed, "precision": cfg.precision, **cfg.params},
        "versions": versions(),
        "budgets": result.budgets,
        "warnings": list(result.warnings),
        "checks": [{"name": c.name, "passed": c.passed, "detail": c.detail} for c in result.checks],
        "passed": result.passed,
        "results": result.summary,
        "files": sorted(list(files) + [f"{stem}.txt"]),
    }
    files[f"{stem}.json"] = json.dumps(_jsonable(manifest), indent=2, sort_keys=True) + "\n"
    files[f"{stem}.txt"] = summary_text(result)
    try:
        os.makedirs(out_dir, exist_ok=True)
        paths = []
        for fname in sorted(files):
            p = os.path.join(out_dir, fname)
            with open(p, "w", encoding="utf-8", newline="") as fh:
                fh.write(files[fname])
            paths.append(p)
    except OSError as exc:
        raise ReportError(f"cannot write report to {out_dir!r}: {exc}") from exc
    return paths


def summary_text(result: ExperimentResult) -> str:
    cfg = result.config
    lines = [f"experiment {cfg.name} ({cfg.digest}) seed={cfg.seed} precision={cfg.precision}"]
    for c in result.checks:
        lines.append(f"{'PASS' if c.passed else 'FAIL'} {c.name}" + (f": {c.detail}" if c.detail else ""))
    for w in result.warnings:
        lines.append(f"WARN {w}")
    lines.append(f"overall {'PASS' if result.passed else 'FAIL'}")
    return "\n".join(lines) + "\n"
