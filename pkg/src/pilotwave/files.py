"""Config files in, result files out.

Config files are TOML with a ``scenario`` key, an optional
``schema_version`` and the scenario parameters as further top-level keys::

    scenario = "stern_gerlach"
    seed = 42
    theta0 = 1.0471975511965976

Every text output is ASCII, uses ``.`` as the decimal point, writes floats
with 17 significant digits and ends each line with ``\\n``.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .errors import ConfigParseError, SchemaError
from .scenarios import REGISTRY, RunRecord, ScenarioConfig, resolve
from .scenarios.base import CONFIG_SCHEMA_VERSION

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

FLOAT_FMT = "%.17g"
RESERVED = ("scenario", "schema_version")


# --- config -----------------------------------------------------------------


def parse_config_text(text: str, source="<string>") -> ScenarioConfig:
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        line = getattr(exc, "lineno", None)
        col = getattr(exc, "colno", None)
        msg = getattr(exc, "msg", str(exc))
        where = f"{source}:{line}:{col}" if line is not None else source
        raise ConfigParseError(f"{where}: {msg}", line, col) from None
    if "scenario" not in raw:
        raise SchemaError(f"{source}: missing key 'scenario'")
    scenario = raw["scenario"]
    if not isinstance(scenario, str):
        raise SchemaError(f"{source}: 'scenario' must be a string")
    version = raw.get("schema_version", CONFIG_SCHEMA_VERSION)
    if version != CONFIG_SCHEMA_VERSION:
        raise SchemaError(f"{source}: schema_version {version!r} not supported (expected {CONFIG_SCHEMA_VERSION})")
    nested = [k for k, v in raw.items() if isinstance(v, dict)]
    if nested:
        raise SchemaError(f"{source}: tables are not part of the schema: {', '.join(nested)}")
    params = {k: v for k, v in raw.items() if k not in RESERVED}
    return resolve(scenario, params)


def parse_config(path) -> ScenarioConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot read config {path}: {exc.strerror or exc}") from exc
    return parse_config_text(text, str(path))


def _toml_value(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return repr(v)
    if isinstance(v, str):
        return json.dumps(v)
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_toml_value(x) for x in v) + "]"
    raise TypeError(f"cannot write {type(v).__name__} as TOML")


def defaults_toml(scenario: str) -> str:
    """A complete config file holding every default, with one comment per key."""
    if scenario not in REGISTRY:
        raise SchemaError(f"unknown scenario {scenario!r}; known: {sorted(REGISTRY)}")
    spec = REGISTRY[scenario]
    lines = [f"# {spec.summary}", f'scenario = "{scenario}"', f"schema_version = {CONFIG_SCHEMA_VERSION}", ""]
    for name, p in spec.param_map().items():
        note = p.doc + (f" [{p.unit}]" if p.unit else "")
        if note:
            lines.append(f"# {note}")
        lines.append(f"{name} = {_toml_value(p.default)}")
    return "\n".join(lines) + "\n"


def config_to_toml(cfg: ScenarioConfig) -> str:
    lines = [f'scenario = "{cfg.scenario}"', f"schema_version = {CONFIG_SCHEMA_VERSION}"]
    lines += [f"{k} = {_toml_value(v)}" for k, v in cfg.values.items()]
    return "\n".join(lines) + "\n"


# --- densities ---------------------------------------------------------------


def write_density_csv(path, axes, density, names=None):
    """Long-format CSV: one row per grid point, coordinates then ``rho``."""
    density = np.asarray(density, dtype=float)
    axes = [np.asarray(a, dtype=float) for a in axes]
    if tuple(a.size for a in axes) != density.shape:
        raise ValueError(f"axes {[a.size for a in axes]} do not match density shape {density.shape}")
    names = names or [f"x{i}" for i in range(len(axes))]
    cols = [m.ravel() for m in np.meshgrid(*axes, indexing="ij")] + [density.ravel()]
    _savetxt(path, np.column_stack(cols), ",".join(list(names) + ["rho"]))


def read_density_csv(path):
    """Inverse of :func:`write_density_csv`; returns ``(axes, density, names)``."""
    with open(path, encoding="ascii") as fh:
        header = fh.readline().strip().split(",")
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    ncoord = len(header) - 1
    axes = [np.unique(data[:, i]) for i in range(ncoord)]
    rho = data[:, -1].reshape(tuple(a.size for a in axes))
    return axes, rho, header[:-1]


def write_pgm(path, density):
    """8-bit binary PGM (P5), row-major; value ``round(255 rho / max rho)``.

    A 1D density becomes a single-row image.  An all-zero density maps to 0.
    """
    rho = np.atleast_2d(np.asarray(density, dtype=float))
    if rho.ndim != 2:
        raise ValueError("PGM export needs a 1D or 2D density")
    top = float(np.max(rho)) if rho.size else 0.0
    if top > 0:
        img = np.rint(np.clip(rho, 0.0, None) / top * 255.0).astype(np.uint8)
    else:
        img = np.zeros(rho.shape, np.uint8)
    h, w = img.shape
    _write_bytes(path, f"P5\n{w} {h}\n255\n".encode("ascii") + img.tobytes())


def read_pgm(path):
    raw = Path(path).read_bytes()
    parts = raw.split(maxsplit=4)
    if parts[0] != b"P5":
        raise ValueError(f"{path}: not a binary PGM")
    w, h, maxval = int(parts[1]), int(parts[2]), int(parts[3])
    if maxval != 255:
        raise ValueError(f"{path}: unsupported maxval {maxval}")
    return np.frombuffer(parts[4][: w * h], dtype=np.uint8).reshape(h, w)


# --- low level ---------------------------------------------------------------


def _write_bytes(path, data: bytes):
    try:
        Path(path).write_bytes(data)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc


def _write_text(path, text: str):
    _write_bytes(path, text.encode("ascii", errors="backslashreplace"))


def _savetxt(path, arr, header):
    try:
        with open(path, "w", encoding="ascii", newline="\n") as fh:
            fh.write(header + "\n")
            np.savetxt(fh, arr, fmt=FLOAT_FMT, delimiter=",")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return FLOAT_FMT % float(v)
    return str(v)


def _json_default(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, np.generic):
        return o.item()
    raise TypeError(f"cannot serialize {type(o).__name__}")


def _dump_json(path, obj):
    _write_text(path, json.dumps(obj, indent=2, sort_keys=True, default=_json_default, allow_nan=True) + "\n")


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


def _slug(label: str) -> str:
    return "".join(c if c.isalnum() or c in "-_" else "_" for c in label)


# --- run outputs -------------------------------------------------------------


def write_stats(out: Path, rec: RunRecord):
    keys = list(rec.stats)
    width = max((len(k) for k in keys), default=0)
    lines = [f"# {rec.config.scenario}  seed={rec.config.seed}"]
    for k in keys:
        v = _fmt(rec.stats[k])
        s = rec.uncertainty.get(k)
        lines.append(f"{k.ljust(width)}  {v}" + (f"  +/- {_fmt(s)}" if s is not None else ""))
    _write_text(out / "stats.txt", "\n".join(lines) + "\n")
    rows = ["key,value,sigma"] + [
        f"{k},{_fmt(rec.stats[k])},{_fmt(rec.uncertainty[k]) if k in rec.uncertainty else ''}" for k in keys
    ]
    _write_text(out / "stats.csv", "\n".join(rows) + "\n")


def read_stats_csv(path) -> dict:
    """``{key: (value, sigma)}`` with numbers parsed back to float/int/bool."""
    out = {}
    with open(path, encoding="ascii") as fh:
        next(fh)
        for line in fh:
            k, v, s = line.rstrip("\n").split(",")
            out[k] = (_parse_scalar(v), float(s) if s else None)
    return out


def _parse_scalar(v):
    if v in ("true", "false"):
        return v == "true"
    try:
        return int(v)
    except ValueError:
        return float(v)


def write_trajectories(path, trajectories):
    """One row per (trajectory, time): index, label, t, coordinates, spin angles, abort flag."""
    dims = max((t.positions.shape[1] for t in trajectories), default=1)
    header = ["index", "label", "t"] + [f"x{i}" for i in range(dims)] + ["theta", "phi", "aborted"]
    lines = [",".join(header)]
    for i, tr in enumerate(trajectories):
        th = tr.theta if tr.theta is not None else np.full(tr.times.shape, np.nan)
        ph = tr.phi if tr.phi is not None else np.full(tr.times.shape, np.nan)
        for j, t in enumerate(tr.times):
            pos = [_fmt(float(x)) for x in tr.positions[j]]
            lines.append(",".join([str(i), _slug(str(tr.label)), _fmt(float(t))] + pos
                                  + [_fmt(float(th[j])), _fmt(float(ph[j])), "1" if tr.aborted else "0"]))
    _write_text(path, "\n".join(lines) + "\n")


def write_record(rec: RunRecord, out, config_path=None, started=None) -> dict:
    """Write every output of ``rec`` into ``out`` and the manifest last.

    Returns the manifest dict.
    """
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    files = []

    def add(p):
        files.append(Path(p))

    cfg = rec.config
    _dump_json(out / "config.json", {"scenario": cfg.scenario, "schema_version": CONFIG_SCHEMA_VERSION,
                                     "values": cfg.values})
    add(out / "config.json")
    _write_text(out / "config.toml", config_to_toml(cfg))
    add(out / "config.toml")
    write_stats(out, rec)
    add(out / "stats.txt")
    add(out / "stats.csv")

    if rec.frames:
        fdir = out / "frames"
        fdir.mkdir(exist_ok=True)
        for i, fr in enumerate(rec.frames):
            stem = fdir / f"{i:02d}_{_slug(fr.label)}"
            write_density_csv(stem.with_suffix(".csv"), fr.axes, fr.density)
            write_pgm(stem.with_suffix(".pgm"), fr.density)
            add(stem.with_suffix(".csv"))
            add(stem.with_suffix(".pgm"))
        index = ["index,label,time"] + [f"{i},{_slug(f.label)},{_fmt(float(f.time))}" for i, f in enumerate(rec.frames)]
        _write_text(fdir / "index.csv", "\n".join(index) + "\n")
        add(fdir / "index.csv")
    if rec.spacetime is not None:
        st = rec.spacetime
        write_density_csv(out / "spacetime.csv", st.axes, st.density, names=["t", "x"])
        write_pgm(out / "spacetime.pgm", st.density)
        add(out / "spacetime.csv")
        add(out / "spacetime.pgm")
    if rec.trajectories:
        write_trajectories(out / "trajectories.csv", rec.trajectories)
        add(out / "trajectories.csv")
    if rec.series:
        sdir = out / "series"
        sdir.mkdir(exist_ok=True)
        for name, (x, y) in rec.series.items():
            y = np.atleast_2d(np.asarray(y, dtype=float))
            if y.shape[-1] != len(x):
                y = y.T
            cols = ["x"] + [f"y{i}" for i in range(y.shape[0])]
            _savetxt(sdir / f"{_slug(name)}.csv", np.column_stack([np.asarray(x, float), y.T]), ",".join(cols))
            add(sdir / f"{_slug(name)}.csv")
    if rec.notes:
        _write_text(out / "notes.txt", "\n".join(rec.notes) + "\n")
        add(out / "notes.txt")

    manifest = {
        "scenario": cfg.scenario,
        "config_path": str(config_path) if config_path is not None else None,
        "seed": cfg.seed,
        "output_dir": str(out.resolve()),
        "version": __version__,
        "started": started,
        "finished": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        "files": [
            {"path": p.relative_to(out).as_posix(), "bytes": p.stat().st_size, "sha256": sha256_file(p)}
            for p in files
        ],
    }
    tmp = out / "manifest.json.tmp"
    _dump_json(tmp, manifest)
    os.replace(tmp, out / "manifest.json")
    return manifest


def verify_manifest(out) -> list[str]:
    """Paths whose size or checksum no longer match the manifest."""
    out = Path(out)
    man = json.loads((out / "manifest.json").read_text(encoding="ascii"))
    bad = []
    for f in man["files"]:
        p = out / f["path"]
        if not p.is_file() or p.stat().st_size != f["bytes"] or sha256_file(p) != f["sha256"]:
            bad.append(f["path"])
    return bad


def write_error(out, exc: BaseException, code: int):
    rec = {"error": type(exc).__name__, "message": str(exc), "exit_code": code}
    for attr in ("line", "column"):
        if getattr(exc, attr, None) is not None:
            rec[attr] = getattr(exc, attr)
    _dump_json(Path(out) / "error.json", rec)
