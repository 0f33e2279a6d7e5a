"""JSON file formats: matrix literals, channel descriptions and run reports."""

from __future__ import annotations

import csv
import io as _io
import json
import os
import tempfile
from pathlib import Path

import numpy as np

from . import linalg as la
from .channels import Locality, MixedUnitaryChannel
from .errors import ContractError

REPORT_SCHEMA = "corrsim-report/1"


def matrix_to_json(m) -> dict:
    """``{"rows": r, "cols": c, "entries": [[re, im], ...]}`` in row-major order."""
    m = la.as_matrix(m)
    return {
        "rows": int(m.shape[0]),
        "cols": int(m.shape[1]),
        "entries": [[float(z.real), float(z.imag)] for z in m.reshape(-1)],
    }


def matrix_from_json(obj: dict) -> np.ndarray:
    try:
        rows, cols, entries = int(obj["rows"]), int(obj["cols"]), obj["entries"]
    except (KeyError, TypeError, ValueError) as exc:
        raise ContractError(f"malformed matrix literal: {exc}") from None
    if rows < 1 or cols < 1 or len(entries) != rows * cols:
        raise ContractError(f"matrix literal has {len(entries)} entries, expected {rows}x{cols}")
    try:
        flat = np.array([complex(float(re), float(im)) for re, im in entries])
    except (TypeError, ValueError) as exc:
        raise ContractError(f"matrix entries must be [re, im] pairs: {exc}") from None
    return la.as_matrix(flat.reshape(rows, cols))


def load_matrix(path) -> np.ndarray:
    with open(path) as fh:
        return matrix_from_json(json.load(fh))


def channel_to_json(channel: MixedUnitaryChannel) -> dict:
    if channel.local_parts is None:
        raise ContractError("only local ensembles have a file representation")
    ensemble = []
    for p, (ua, ub) in zip(channel.probs, channel.local_parts):
        entry = {"p": float(p)}
        if ua is not None:
            entry["uA"] = matrix_to_json(ua)
        if ub is not None:
            entry["uB"] = matrix_to_json(ub)
        ensemble.append(entry)
    return {"locality": channel.locality.value, "dims": list(channel.dims), "ensemble": ensemble}


def channel_from_json(obj: dict) -> MixedUnitaryChannel:
    """Parse ``{"locality": ..., "ensemble": [{"p", "uA", "uB"}, ...]}``.

    A missing ``uA``/``uB`` is an identity factor.  ``"dims": [dA, dB]`` is
    needed only when some side is never given explicitly.
    """
    try:
        locality = Locality(obj.get("locality", "COLUR"))
        ensemble = obj["ensemble"]
    except (KeyError, ValueError, AttributeError) as exc:
        raise ContractError(f"malformed channel description: {exc}") from None
    if not ensemble:
        raise ContractError("channel ensemble is empty")
    probs, pairs = [], []
    da = db = None
    if "dims" in obj:
        da, db = (int(x) for x in obj["dims"])
    for entry in ensemble:
        ua = matrix_from_json(entry["uA"]) if "uA" in entry else None
        ub = matrix_from_json(entry["uB"]) if "uB" in entry else None
        da = ua.shape[0] if ua is not None and da is None else da
        db = ub.shape[0] if ub is not None and db is None else db
        probs.append(float(entry["p"]))
        pairs.append((ua, ub))
    if da is None or db is None:
        raise ContractError("cannot infer both local dimensions; add \"dims\": [dA, dB]")
    return MixedUnitaryChannel.from_local(probs, pairs, (da, db), locality)


def load_channel(path) -> MixedUnitaryChannel:
    with open(path) as fh:
        return channel_from_json(json.load(fh))


def to_jsonable(x):
    """Convert numpy scalars/arrays and dataclass-like values for ``json.dumps``."""
    if isinstance(x, dict):
        return {str(k): to_jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [to_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        if np.iscomplexobj(x):
            return [[float(z.real), float(z.imag)] for z in x.reshape(-1)]
        return x.tolist()
    if isinstance(x, (np.bool_,)):
        return bool(x)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.floating):
        v = float(x)
        return v if np.isfinite(v) else str(v)
    if isinstance(x, float) and not np.isfinite(x):
        return str(x)
    return x


def dumps_report(report: dict) -> str:
    return json.dumps(to_jsonable(report), indent=2, sort_keys=True) + "\n"


def rows_to_csv(rows: list[dict], columns: list[str]) -> str:
    buf = _io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=columns, extrasaction="ignore", lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow(to_jsonable(row))
    return buf.getvalue()


def write_atomic(path, text: str) -> None:
    """Write via a temporary file in the target directory, then rename."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
