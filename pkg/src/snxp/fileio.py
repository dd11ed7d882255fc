"""Structured-text file formats: count matrices and CSV curve tables.

A count-matrix file is diff-able plain text:

    # snxp-counts 1
    # config: {...json...}
    # truth: {...json...}        (optional)
    <n_time_bins rows of n_detunings integers>

Curves and spectra are comma-separated columns with a one-line header.  All
writes go through a temp file and an atomic rename.
"""

from __future__ import annotations

import json
import os
import tempfile
from dataclasses import asdict
from pathlib import Path

import numpy as np

from .cavity import CavityParams
from .errors import FileFormatError
from .foil import FoilParams
from .synth import CountMatrix, DatasetTruth, SweepConfig

FORMAT_NAME = "snxp-counts"
FORMAT_VERSION = 1


def _atomic_write(path, text: str) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or Path("."),
                               prefix=path.name + ".", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_count_matrix(path, m: CountMatrix) -> None:
    lines = [f"# {FORMAT_NAME} {FORMAT_VERSION}",
             "# config: " + json.dumps(asdict(m.config), sort_keys=True)]
    if m.truth is not None:
        truth = {"cavity": asdict(m.truth.cavity),
                 "foil": asdict(m.truth.foil),
                 "delays": list(m.truth.delays)}
        lines.append("# truth: " + json.dumps(truth, sort_keys=True))
    for row in m.counts:
        lines.append(" ".join(str(int(v)) for v in row))
    _atomic_write(path, "\n".join(lines) + "\n")


def read_count_matrix(path) -> CountMatrix:
    text = Path(path).read_text()
    lines = text.splitlines()
    if not lines:
        raise FileFormatError(f"{path}: empty file")
    head = lines[0].lstrip("# ").split()
    if len(head) != 2 or head[0] != FORMAT_NAME:
        raise FileFormatError(f"{path}: not a {FORMAT_NAME} file")
    if int(head[1]) != FORMAT_VERSION:
        raise FileFormatError(
            f"{path}: format version {head[1]} not supported "
            f"(expected {FORMAT_VERSION})")
    config = None
    truth_raw = None
    body_start = 1
    for i, line in enumerate(lines[1:], start=1):
        if line.startswith("# config:"):
            config = json.loads(line.split(":", 1)[1])
        elif line.startswith("# truth:"):
            truth_raw = json.loads(line.split(":", 1)[1])
        elif line.startswith("#") or not line.strip():
            continue
        else:
            body_start = i
            break
    if config is None:
        raise FileFormatError(f"{path}: missing config header")
    try:
        cfg = SweepConfig(**config)
    except TypeError as exc:
        raise FileFormatError(f"{path}: bad config block: {exc}") from exc
    try:
        counts = np.array(
            [[int(v) for v in line.split()]
             for line in lines[body_start:] if line.strip()],
            dtype=np.int64)
    except ValueError as exc:
        raise FileFormatError(f"{path}: non-integer matrix entry") from exc
    truth = None
    if truth_raw is not None:
        try:
            truth = DatasetTruth(cavity=CavityParams(**truth_raw["cavity"]),
                                 foil=FoilParams(**truth_raw["foil"]),
                                 delays=np.array(truth_raw["delays"]))
        except (KeyError, TypeError) as exc:
            raise FileFormatError(f"{path}: bad truth block: {exc}") from exc
    return CountMatrix(counts=counts, config=cfg, truth=truth)


def write_csv(path, header: list, columns: list) -> None:
    """Comma-separated columns with a one-line header."""
    cols = [np.asarray(c) for c in columns]
    if len(cols) != len(header):
        raise FileFormatError("header and column counts differ")
    if any(c.shape != cols[0].shape for c in cols):
        raise FileFormatError("columns must share a length")
    lines = [",".join(header)]
    for row in zip(*cols):
        lines.append(",".join(repr(float(v)) for v in row))
    _atomic_write(path, "\n".join(lines) + "\n")


def read_csv(path):
    """Inverse of write_csv: (header list, list of float arrays)."""
    lines = Path(path).read_text().splitlines()
    if not lines:
        raise FileFormatError(f"{path}: empty file")
    header = lines[0].split(",")
    rows = [line.split(",") for line in lines[1:] if line.strip()]
    if any(len(r) != len(header) for r in rows):
        raise FileFormatError(f"{path}: ragged rows")
    try:
        data = np.array([[float(v) for v in r] for r in rows])
    except ValueError as exc:
        raise FileFormatError(f"{path}: non-numeric entry") from exc
    if data.size == 0:
        data = data.reshape(0, len(header))
    return header, [data[:, i] for i in range(len(header))]
