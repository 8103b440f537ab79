"""Binary model artifacts.

Layout: ``MAGIC`` (8 bytes), format version (uint32 LE), header length
(uint32 LE), UTF-8 JSON header (kind, config echo, normalization stats,
parameter names and shapes), the parameters as float64 LE in header order,
and a trailing SHA-256 digest of everything before it.
"""
from __future__ import annotations

import hashlib
import json
import os
import struct

import numpy as np

from .baselines import FullyConnectedModel, HeuristicModel, LogisticAllModel
from .ingest import NormStats
from .model import Predictor, TsstnModel

MAGIC = b"TSSTNART"
FORMAT_VERSION = 1
_DIGEST = 32

KINDS = {
    "tsstn": TsstnModel,
    "lr": LogisticAllModel,
    "fc": FullyConnectedModel,
    "heuristic": HeuristicModel,
}


class ArtifactError(Exception):
    """Base class for unusable model artifacts."""


class ChecksumError(ArtifactError):
    pass


class VersionError(ArtifactError):
    def __init__(self, found: int, supported: int = FORMAT_VERSION):
        super().__init__(f"artifact format version {found} is not supported (this build reads version {supported})")
        self.found, self.supported = found, supported


def build_model(kind: str, stats: NormStats | None, config: dict) -> Predictor:
    try:
        cls = KINDS[kind]
    except KeyError:
        raise ArtifactError(f"unknown model kind {kind!r}") from None
    kwargs = {"hero_vocab": config.get("hero_vocab", 120), "seed": config.get("seed", 0)}
    if kind == "fc" and "hidden" in config:
        kwargs["hidden"] = tuple(config["hidden"])
    return cls(stats, **kwargs)


def to_bytes(model: Predictor) -> bytes:
    params = model.params()
    header = {
        "kind": model.kind,
        "config": model.config(),
        "norm_stats": None if model.stats is None else model.stats.to_dict(),
        "params": [{"name": p.name, "shape": list(p.shape)} for p in params],
    }
    head = json.dumps(header, sort_keys=True).encode("utf-8")
    body = b"".join(p.value.astype("<f8").tobytes() for p in params)
    blob = MAGIC + struct.pack("<II", FORMAT_VERSION, len(head)) + head + body
    return blob + hashlib.sha256(blob).digest()


def from_bytes(blob: bytes) -> Predictor:
    if len(blob) < len(MAGIC) + 8 + _DIGEST or not blob.startswith(MAGIC):
        raise ArtifactError("not a model artifact (bad magic)")
    payload, digest = blob[:-_DIGEST], blob[-_DIGEST:]
    if hashlib.sha256(payload).digest() != digest:
        raise ChecksumError("artifact checksum mismatch (file is corrupted)")
    version, head_len = struct.unpack_from("<II", blob, len(MAGIC))
    if version != FORMAT_VERSION:
        raise VersionError(version)
    start = len(MAGIC) + 8
    try:
        header = json.loads(payload[start:start + head_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ArtifactError(f"unreadable artifact header: {exc}") from exc
    stats = None if header["norm_stats"] is None else NormStats.from_dict(header["norm_stats"])
    model = build_model(header["kind"], stats, header["config"])
    params = model.params()
    specs = header["params"]
    if [(s["name"], tuple(s["shape"])) for s in specs] != [(p.name, p.shape) for p in params]:
        raise ArtifactError("artifact parameters do not match the model architecture")
    offset = start + head_len
    for p in params:
        n = p.value.size * 8
        if offset + n > len(payload):
            raise ArtifactError("artifact is truncated")
        p.value[...] = np.frombuffer(payload, dtype="<f8", count=p.value.size, offset=offset).reshape(p.shape)
        offset += n
    if offset != len(payload):
        raise ArtifactError("trailing bytes after parameter data")
    return model


def save(model: Predictor, path: str | os.PathLike) -> None:
    blob = to_bytes(model)
    tmp = f"{os.fspath(path)}.tmp"
    with open(tmp, "wb") as fh:
        fh.write(blob)
    os.replace(tmp, path)


def load(path: str | os.PathLike) -> Predictor:
    try:
        with open(path, "rb") as fh:
            blob = fh.read()
    except OSError as exc:
        raise ArtifactError(f"cannot read artifact {os.fspath(path)!r}: {exc}") from exc
    return from_bytes(blob)
