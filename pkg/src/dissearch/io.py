"""Tables with a metadata preamble, JSON reports and SVG line charts."""
import csv
import io as _io
import json
import os
import sys

import numpy as np

from . import __version__

FLOAT_FMT = ".17g"


def _cell(x):
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return format(float(x), FLOAT_FMT)
    return str(x)


def _parse_cell(s):
    for conv in (int, float):
        try:
            return conv(s)
        except ValueError:
            pass
    if s in ("true", "false"):
        return s == "true"
    return s


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def dumps_json(obj):
    return json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n"


def format_table(columns, rows, metadata=None, fmt="csv"):
    """Serialise a table to text.

    CSV: ``#``-prefixed preamble (version, then one ``key: json`` line per
    metadata entry), header row, data rows; floats carry 17 significant
    digits. JSON: ``{"metadata", "columns", "rows"}`` with the same content.
    """
    metadata = dict(metadata or {})
    metadata.setdefault("version", __version__)
    if fmt == "json":
        return dumps_json({"metadata": metadata, "columns": list(columns),
                           "rows": [list(r) for r in rows]})
    if fmt != "csv":
        raise ValueError(f"unknown table format {fmt!r}; expected 'csv' or 'json'")
    buf = _io.StringIO()
    buf.write(f"# dissearch {metadata['version']}\n")
    for key in sorted(metadata):
        buf.write(f"# {key}: {json.dumps(_jsonable(metadata[key]), sort_keys=True)}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_cell(x) for x in r])
    return buf.getvalue()


def write_table(path, columns, rows, metadata=None, fmt="csv"):
    """Write a table to ``path`` (``'-'`` or ``None`` for stdout)."""
    text = format_table(columns, rows, metadata, fmt)
    if path in (None, "-"):
        sys.stdout.write(text)
        return None
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write table to {path}: {exc.strerror or exc}") from exc
    return path


def read_table(path):
    """Inverse of :func:`write_table`: ``(columns, rows, metadata)``."""
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    if text.lstrip().startswith("{"):
        doc = json.loads(text)
        return doc["columns"], [tuple(r) for r in doc["rows"]], doc["metadata"]
    meta, body = {}, []
    for line in text.splitlines():
        if line.startswith("# ") and ": " in line:
            key, _, value = line[2:].partition(": ")
            meta[key] = json.loads(value)
        elif line.startswith("#"):
            continue
        else:
            body.append(line)
    reader = csv.reader(body)
    try:
        columns = next(reader)
    except StopIteration:
        return [], [], meta
    rows = [tuple(_parse_cell(c) for c in r) for r in reader]
    return columns, rows, meta


# -- plots -------------------------------------------------------------------

PLOT_KINDS = ("p1", "gamma", "tau")


def emit_plot(data, kind, path, fit=None, title=None):
    """Static SVG line chart.

    ``kind='p1'`` and ``kind='gamma'`` take a mapping ``N -> (x, y)``;
    ``kind='tau'`` takes a mapping ``label -> (N, tau_v)`` and an optional
    mapping ``label -> FitReport`` drawn as dashed lines.
    """
    if kind not in PLOT_KINDS:
        raise ValueError(f"unsupported plot kind {kind!r}; supported: {', '.join(PLOT_KINDS)}")
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    matplotlib.rcParams["svg.hashsalt"] = "dissearch"
    fig, ax = plt.subplots(figsize=(6, 4))
    fit = fit or {}
    for label, (x, y) in data.items():
        x, y = np.asarray(x, float), np.asarray(y, float)
        marker = "o" if x.size == 1 else None
        ax.plot(x, y, marker=marker, label=f"N={label}" if kind != "tau" else str(label))
        rep = fit.get(label)
        if kind == "tau" and rep is not None and x.size > 1:
            xs = np.linspace(x.min(), x.max(), 100)
            ys = rep.slope * np.log(xs) + rep.intercept if rep.model == "log" else \
                np.exp(rep.intercept + rep.slope * np.log(xs / 100.0))
            ax.plot(xs, ys, "k--", lw=0.8)
    labels = {
        "p1": ("t·v", "p₁"),
        "gamma": ("k", "γ_k / v"),
        "tau": ("N", "τ_rlx·v"),
    }[kind]
    ax.set_xlabel(labels[0])
    ax.set_ylabel(labels[1])
    if kind == "tau":
        ax.set_xscale("log")
    if title:
        ax.set_title(title)
    if len(data) <= 10:
        ax.legend(fontsize="small")
    fig.tight_layout()
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return path

