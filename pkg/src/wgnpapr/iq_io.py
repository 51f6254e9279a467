"""I/Q capture files and result documents.

Capture layout: a raw body of interleaved little-endian float32 pairs
(I0, Q0, I1, Q1, ...) plus a JSON sidecar ``<path>.json`` holding
``sample_rate_hz``, ``center_frequency_hz``, ``label`` and ``num_samples``.

Result documents are written as canonical JSON (sorted keys, floats with 17
significant digits) so identical inputs give identical bytes.  Tabular
kinds carry ``columns`` and ``rows`` in their payload and can also be
written as CSV.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__

SCHEMA_VERSION = 1
SAMPLE_DTYPE = np.dtype("<f4")
_PAIR_DTYPE = np.dtype("<c8")
KINDS = ("monte_carlo", "kde", "spectrogram", "band_report", "stats_table")
TABULAR_KINDS = ("monte_carlo", "kde", "spectrogram", "stats_table")


class IqIoError(Exception):
    pass


class CaptureCorruptError(IqIoError):
    """Sample body does not frame into whole I/Q pairs."""


class CaptureMetadataError(IqIoError):
    """Sidecar missing, malformed or inconsistent with the body."""


class ResultFormatError(IqIoError):
    pass


@dataclass
class IqCapture:
    samples: np.ndarray = field(repr=False)
    sample_rate_hz: float
    center_frequency_hz: float = 0.0
    label: str = ""

    def __post_init__(self):
        self.samples = np.asarray(self.samples)
        if self.samples.ndim != 1 or self.samples.size < 1:
            raise ValueError("capture needs a nonempty 1-D sample vector")
        if not np.all(np.isfinite(self.samples)):
            raise ValueError("capture samples must be finite")
        if not self.sample_rate_hz > 0:
            raise ValueError("sample_rate_hz must be positive")
        if not self.center_frequency_hz >= 0:
            raise ValueError("center_frequency_hz must be >= 0")

    def __len__(self) -> int:
        return self.samples.size

    @property
    def span_hz(self) -> tuple[float, float]:
        half = self.sample_rate_hz / 2.0
        return self.center_frequency_hz - half, self.center_frequency_hz + half


def sidecar_path(path) -> Path:
    path = Path(path)
    return path.with_name(path.name + ".json")


def write_capture(capture: IqCapture, path) -> None:
    path = Path(path)
    body = np.ascontiguousarray(capture.samples, dtype=np.complex64).astype(_PAIR_DTYPE)
    path.write_bytes(body.tobytes())
    meta = {
        "sample_rate_hz": float(capture.sample_rate_hz),
        "center_frequency_hz": float(capture.center_frequency_hz),
        "label": capture.label,
        "num_samples": len(capture),
    }
    sidecar_path(path).write_text(dumps_canonical(meta) + "\n")


def read_capture(path) -> IqCapture:
    path = Path(path)
    meta_path = sidecar_path(path)
    if not meta_path.exists():
        raise CaptureMetadataError(f"missing sidecar {meta_path}")
    try:
        meta = json.loads(meta_path.read_text())
        rate = float(meta["sample_rate_hz"])
        center = float(meta["center_frequency_hz"])
        label = str(meta.get("label", ""))
        expected = int(meta["num_samples"])
    except (KeyError, TypeError, ValueError) as exc:
        raise CaptureMetadataError(f"bad sidecar {meta_path}: {exc}") from None
    raw = path.read_bytes()
    if len(raw) % SAMPLE_DTYPE.itemsize:
        raise CaptureCorruptError(f"{path}: body is not a whole number of float32 values")
    body = np.frombuffer(raw, dtype=SAMPLE_DTYPE)
    if body.size % 2:
        raise CaptureCorruptError(f"{path}: odd number of floats ({body.size}), I/Q pairs broken")
    if body.size // 2 != expected:
        raise CaptureMetadataError(
            f"{path}: sidecar says {expected} samples, body holds {body.size // 2}")
    samples = body.view(_PAIR_DTYPE).astype(np.complex64)
    return IqCapture(samples, rate, center, label)


# -- canonical serialization ----------------------------------------------


def _format_float(x: float) -> str:
    if not math.isfinite(x):
        raise ResultFormatError(f"non-finite value {x!r} cannot be serialized")
    text = format(x, ".17g")
    if "." not in text and "e" not in text and "inf" not in text:
        text += ".0"
    return text


def _plain(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, tuple):
        return list(obj)
    return obj


def _encode(obj, out: list[str]) -> None:
    obj = _plain(obj)
    if obj is None or isinstance(obj, (bool, str)):
        out.append(json.dumps(obj))
    elif isinstance(obj, int):
        out.append(str(obj))
    elif isinstance(obj, float):
        out.append(_format_float(obj))
    elif isinstance(obj, dict):
        out.append("{")
        for idx, key in enumerate(sorted(obj, key=str)):
            if idx:
                out.append(", ")
            out.append(json.dumps(str(key)) + ": ")
            _encode(obj[key], out)
        out.append("}")
    elif isinstance(obj, list):
        out.append("[")
        for idx, item in enumerate(obj):
            if idx:
                out.append(", ")
            _encode(item, out)
        out.append("]")
    else:
        raise ResultFormatError(f"cannot serialize {type(obj).__name__}")


def dumps_canonical(obj) -> str:
    out: list[str] = []
    _encode(obj, out)
    return "".join(out)


def plain_data(obj):
    """Deep copy of ``obj`` with numpy containers turned into lists and scalars."""
    return json.loads(dumps_canonical(obj))


@dataclass
class ResultDocument:
    kind: str
    payload: dict
    provenance: dict = field(default_factory=dict)
    schema_version: int = SCHEMA_VERSION

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ResultFormatError(f"unknown document kind {self.kind!r}")
        self.provenance.setdefault("tool_version", __version__)

    def to_dict(self) -> dict:
        return {
            "schema_version": self.schema_version,
            "kind": self.kind,
            "payload": self.payload,
            "provenance": self.provenance,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ResultDocument":
        try:
            return cls(kind=d["kind"], payload=d["payload"], provenance=d["provenance"],
                       schema_version=int(d["schema_version"]))
        except KeyError as exc:
            raise ResultFormatError(f"document missing field {exc}") from None

    def to_json(self) -> str:
        return dumps_canonical(self.to_dict()) + "\n"

    def to_csv(self) -> str:
        if self.kind not in TABULAR_KINDS:
            raise ResultFormatError(f"{self.kind} documents are not tabular; use JSON")
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.payload["columns"])
        for row in self.payload["rows"]:
            writer.writerow([_csv_cell(v) for v in _plain(row)])
        return buf.getvalue()


def _csv_cell(v) -> str:
    v = _plain(v)
    if v is None:
        return ""
    if isinstance(v, float):
        return _format_float(v)
    return str(v)


def write_result(doc: ResultDocument, path, format: str = "json") -> Path:
    """Write ``doc`` as ``json`` or ``csv``; returns the path written."""
    path = Path(path)
    if format == "json":
        text = doc.to_json()
    elif format == "csv":
        text = doc.to_csv()
    else:
        raise ResultFormatError(f"unknown format {format!r}")
    path.write_text(text)
    return path


def read_result(path) -> ResultDocument:
    return ResultDocument.from_dict(json.loads(Path(path).read_text()))
