"""Small CSV / JSON helpers shared by the CLI and the library."""
from __future__ import annotations

import csv
import json
import os
from pathlib import Path

import numpy as np

OUT_ENV = "SEMISTIFF_OUT"


def default_out_dir():
    return Path(os.environ.get(OUT_ENV, "."))


def _plain(x):
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, complex):
        return {"re": x.real, "im": x.imag}
    return x


def format_cell(x):
    x = _plain(x)
    if isinstance(x, float):
        return repr(x)
    return x


def write_csv(path, rows, header=None):
    """Write rows (an iterable of sequences) with an optional header row."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        if header is not None:
            w.writerow(header)
        for row in rows:
            w.writerow([format_cell(x) for x in row])
    return path


def read_csv(path):
    with Path(path).open(newline="") as fh:
        return list(csv.reader(fh))


def write_json(path, data):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(data, indent=2, default=_plain) + "\n")
    return path


def dumps(data):
    return json.dumps(data, default=_plain, sort_keys=True)
