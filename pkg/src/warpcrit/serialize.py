"""Deterministic on-disk formats for profiles and reports.

CSV carries the sampled profile in five fixed columns (s, r, rp, lam, lamp)
at 17 significant digits, which reproduces IEEE doubles exactly on
re-ingestion.  JSON envelopes are emitted with sorted keys, two-space
indentation, and the same float formatting, so two runs of the same
configuration differ only in the timestamp field.  All writes go through a
temporary file in the target directory followed by an atomic replace.
"""

from __future__ import annotations

import json
import math
import os
import tempfile
from datetime import datetime, timezone

import numpy as np

from .errors import ConfigError
from .profiles import OdeParams, Profile, conserved_quantity

__all__ = [
    "dump_json",
    "write_text_atomic",
    "write_envelope",
    "write_profile_csv",
    "read_profile_csv",
    "profile_from_arrays",
]

CSV_HEADER = "s,r,rp,lam,lamp"


def _fmt(x: float) -> str:
    if not math.isfinite(x):
        # CSV rows may carry nan for an absent potential; JSON never does.
        return "nan"
    return format(float(x), ".17g")


def dump_json(obj, indent: int = 0) -> str:
    """Render JSON with sorted keys and 17-significant-digit floats.

    The standard encoder prints floats with repr; the fixed format here
    keeps envelopes byte-stable across interpreter versions.  Non-finite
    floats are rejected: envelopes must encode absence explicitly.
    """
    pad = "  " * indent
    inner = "  " * (indent + 1)
    if obj is None:
        return "null"
    if obj is True:
        return "true"
    if obj is False:
        return "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        if not math.isfinite(float(obj)):
            raise ConfigError("non-finite float in JSON payload")
        return _fmt(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, (list, tuple, np.ndarray)):
        items = [dump_json(v, indent + 1) for v in obj]
        if not items:
            return "[]"
        return "[\n" + ",\n".join(inner + it for it in items) + "\n" + pad + "]"
    if isinstance(obj, dict):
        if not all(isinstance(k, str) for k in obj):
            raise ConfigError("JSON object keys must be strings")
        items = [
            f"{inner}{json.dumps(k)}: {dump_json(obj[k], indent + 1)}"
            for k in sorted(obj)
        ]
        if not items:
            return "{}"
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    raise ConfigError(f"unserializable value of type {type(obj).__name__}")


def write_text_atomic(path: str, text: str) -> None:
    """Write text via a sibling temp file and an atomic rename."""
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix="~")
    try:
        with os.fdopen(fd, "w", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_envelope(path: str, payload: dict) -> dict:
    """Stamp and atomically write a JSON envelope; returns the full record."""
    record = dict(payload)
    record["timestamp"] = datetime.now(timezone.utc).isoformat()
    write_text_atomic(path, dump_json(record) + "\n")
    return record


def write_profile_csv(path: str, profile: Profile) -> None:
    """Profile samples in the five fixed columns at full double precision."""
    s = np.asarray(profile.grid, dtype=float)
    r = np.asarray(profile.r, dtype=float)
    rp = np.asarray(profile.rp, dtype=float)
    nan = np.full(s.shape, np.nan)
    lam = nan if profile.lam is None else np.asarray(profile.lam, dtype=float)
    lamp = nan if profile.lamp is None else np.asarray(profile.lamp, dtype=float)
    rows = [CSV_HEADER]
    for vals in zip(s, r, rp, lam, lamp):
        rows.append(",".join(_fmt(v) for v in vals))
    write_text_atomic(path, "\n".join(rows) + "\n")


def read_profile_csv(path: str) -> dict:
    """Columns of a profile CSV as float64 arrays, keyed by name."""
    try:
        with open(path, "r") as fh:
            header = fh.readline().strip()
            if header != CSV_HEADER:
                raise ConfigError(
                    f"unexpected CSV header {header!r}; want {CSV_HEADER!r}"
                )
            data = np.loadtxt(fh, delimiter=",", ndmin=2)
    except OSError as exc:
        raise ConfigError(f"cannot read profile CSV: {exc}") from exc
    except ValueError as exc:
        raise ConfigError(f"malformed profile CSV {path}: {exc}") from exc
    if data.shape[1] != 5 or data.shape[0] < 2:
        raise ConfigError(
            f"profile CSV needs >= 2 rows of 5 columns, got shape {data.shape}"
        )
    names = CSV_HEADER.split(",")
    return {name: np.ascontiguousarray(data[:, i]) for i, name in enumerate(names)}


def profile_from_arrays(params: OdeParams, columns: dict) -> Profile:
    """Rebuild a grid-backed Profile from serialized columns.

    The result carries no dense interpolant: verification and curvature
    evaluation on the stored grid work, arbitrary-point sampling does not.
    The fiber curvature is re-derived from the conserved quantity.
    """
    s = np.asarray(columns["s"], dtype=float)
    if s.size < 2 or np.any(~np.isfinite(s)) or np.any(np.diff(s) <= 0):
        raise ConfigError("profile grid must be finite and strictly increasing")
    r = np.asarray(columns["r"], dtype=float)
    rp = np.asarray(columns["rp"], dtype=float)
    if np.any(~np.isfinite(r)) or np.any(~np.isfinite(rp)):
        raise ConfigError("profile columns r, rp must be finite")
    lam = np.asarray(columns["lam"], dtype=float)
    lamp = np.asarray(columns["lamp"], dtype=float)
    if np.all(np.isnan(lam)):
        lam_arr, lamp_arr = None, None
    elif np.any(~np.isfinite(lam)) or np.any(~np.isfinite(lamp)):
        raise ConfigError("potential columns must be all-finite or all-nan")
    else:
        lam_arr, lamp_arr = lam, lamp
    positive = r > 0.0
    if not np.any(positive):
        raise ConfigError("profile radius must be positive somewhere")
    kappa0 = float(
        np.median(np.asarray(conserved_quantity(params, r[positive], rp[positive]), dtype=float))
    )
    i0 = int(np.argmin(np.abs(s)))
    span_r = float(np.max(r) - np.min(r))
    constant = span_r <= 1e-12 * max(1.0, float(np.max(np.abs(r)))) and float(
        np.max(np.abs(rp))
    ) <= 1e-12
    return Profile(
        params=params,
        r0=float(r[i0]),
        s_max=float(s[-1]),
        grid=s,
        r=r,
        rp=rp,
        lam=lam_arr,
        lamp=lamp_arr,
        kappa0=kappa0,
        C=None,
        constant_solution=constant,
        degenerate_origin=bool(np.min(r) <= 0.0),
        s_min=float(s[0]),
        diagnostics={"source": "csv"},
    )
