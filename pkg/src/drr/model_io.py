"""Single-file model persistence.

Layout, in order:

    DRRMODEL <version>\n        magic + decimal format version
    <n>\n                       byte length of the JSON header
    <header>                    JSON: method tag, shapes, scalars, metadata
    <payload>                   all arrays, C-order little-endian float64
    <digest>                    64 hex chars: sha256 of header + payload

Arrays round-trip bitwise: they are written as raw little-endian 64-bit
floats and read back without any parsing, so a loaded model's transform
output matches the original exactly.  Scalars ride in the JSON header,
which Python serializes with shortest-round-trip reprs (also exact).
Loading rejects unknown versions before touching the header and verifies
the checksum before constructing anything.
"""

import hashlib
import json

import numpy as np

from .pca import PcaModel
from .krr import KrrModel
from .ppa import PpaModel, PpaStage
from .reduction import DrrModel, LinearPredictor

FORMAT_VERSION = 1
_MAGIC = b"DRRMODEL"


class ModelFileError(ValueError):
    """Unreadable, corrupt, or unsupported model file."""


def _array_bytes(arr):
    return np.ascontiguousarray(arr, dtype="<f8").tobytes()


def _collect(model):
    """Return (method, meta, ordered list of (name, array))."""
    if isinstance(model, PcaModel):
        return (
            "pca",
            {},
            [
                ("mean", model.mean),
                ("basis", model.basis),
                ("eigenvalues", model.eigenvalues),
            ],
        )
    if isinstance(model, DrrModel):
        arrays = [
            ("pca.mean", model.pca.mean),
            ("pca.basis", model.pca.basis),
            ("pca.eigenvalues", model.pca.eigenvalues),
        ]
        specs = []
        for i, reg in enumerate(model.regressors):
            if reg is None:
                specs.append({"kind": "none"})
            elif isinstance(reg, KrrModel):
                specs.append({"kind": "kernel", "sigma": reg.sigma, "gamma": reg.gamma})
                arrays.append((f"reg{i}.train_inputs", reg.train_inputs))
                arrays.append((f"reg{i}.beta", reg.beta))
            elif isinstance(reg, LinearPredictor):
                specs.append({"kind": "linear", "intercept": reg.intercept})
                arrays.append((f"reg{i}.weights", reg.weights))
            else:
                raise ModelFileError(f"cannot serialize regressor type {type(reg)!r}")
        return "drr", {"regressors": specs}, arrays
    if isinstance(model, PpaModel):
        arrays = [("mean", model.mean)]
        specs = []
        for i, stage in enumerate(model.stages):
            specs.append({"alpha_scale": stage.alpha_scale})
            arrays.append((f"stage{i}.direction", stage.direction))
            arrays.append((f"stage{i}.complement", stage.complement))
            arrays.append((f"stage{i}.coefficients", stage.coefficients))
        return "ppa", {"degree": model.degree, "stages": specs}, arrays
    raise ModelFileError(f"cannot serialize model type {type(model)!r}")


def save_model(model, path, metadata=None, created=None):
    """Write a fitted PCA, DRR, or PPA model; see the format above.

    metadata is an optional JSON-serializable dict stored verbatim in the
    header (seeds, CV settings, provenance).  created is an optional
    timestamp string; it defaults to absent so that repeated runs with the
    same inputs produce byte-identical files.
    """
    method, meta, arrays = _collect(model)
    header = {
        "format": FORMAT_VERSION,
        "method": method,
        "d": model.d,
        "created": created,
        "meta": meta,
        "extra": dict(metadata) if metadata else {},
        "arrays": [{"name": name, "shape": list(arr.shape)} for name, arr in arrays],
    }
    header_bytes = json.dumps(header, allow_nan=False).encode("utf-8")
    payload = b"".join(_array_bytes(arr) for _, arr in arrays)
    digest = hashlib.sha256(header_bytes + payload).hexdigest().encode("ascii")
    with open(path, "wb") as fh:
        fh.write(_MAGIC + b" %d\n" % FORMAT_VERSION)
        fh.write(b"%d\n" % len(header_bytes))
        fh.write(header_bytes)
        fh.write(payload)
        fh.write(digest)


def _read_line(fh, what):
    line = fh.readline(64)
    if not line.endswith(b"\n"):
        raise ModelFileError(f"not a model file: missing {what} line")
    return line[:-1]


def _build_pca(arrays, prefix=""):
    return PcaModel(
        arrays[prefix + "mean"],
        arrays[prefix + "basis"],
        arrays[prefix + "eigenvalues"],
    )


def _build_model(method, meta, arrays):
    if method == "pca":
        return _build_pca(arrays)
    if method == "drr":
        regs = []
        for i, spec in enumerate(meta["regressors"]):
            kind = spec["kind"]
            if kind == "none":
                regs.append(None)
            elif kind == "kernel":
                regs.append(
                    KrrModel(
                        arrays[f"reg{i}.train_inputs"],
                        arrays[f"reg{i}.beta"],
                        spec["sigma"],
                        spec["gamma"],
                    )
                )
            elif kind == "linear":
                regs.append(
                    LinearPredictor(arrays[f"reg{i}.weights"], spec["intercept"])
                )
            else:
                raise ModelFileError(f"unknown regressor kind {kind!r}")
        return DrrModel(_build_pca(arrays, "pca."), regs)
    if method == "ppa":
        stages = [
            PpaStage(
                arrays[f"stage{i}.direction"],
                arrays[f"stage{i}.complement"],
                spec["alpha_scale"],
                arrays[f"stage{i}.coefficients"],
            )
            for i, spec in enumerate(meta["stages"])
        ]
        return PpaModel(arrays["mean"], stages, meta["degree"])
    raise ModelFileError(f"unknown method tag {method!r}")


def load_model(path):
    """Load a model saved by save_model; exact inverse of the format."""
    with open(path, "rb") as fh:
        magic = _read_line(fh, "magic")
        parts = magic.split()
        if len(parts) != 2 or parts[0] != _MAGIC:
            raise ModelFileError(f"not a model file: bad magic {magic!r}")
        try:
            version = int(parts[1])
        except ValueError:
            raise ModelFileError(f"not a model file: bad version {parts[1]!r}") from None
        if version != FORMAT_VERSION:
            raise ModelFileError(
                f"model file has format version {version}; "
                f"this build supports version {FORMAT_VERSION}"
            )
        try:
            header_len = int(_read_line(fh, "header length"))
        except ValueError:
            raise ModelFileError("not a model file: bad header length") from None
        header_bytes = fh.read(header_len)
        rest = fh.read()
    if len(header_bytes) < header_len or len(rest) < 64:
        raise ModelFileError("checksum cannot be verified: file is truncated")
    payload, digest = rest[:-64], rest[-64:]
    expected = hashlib.sha256(header_bytes + payload).hexdigest().encode("ascii")
    if digest != expected:
        raise ModelFileError("checksum mismatch: file is corrupt or truncated")
    try:
        header = json.loads(header_bytes)
    except json.JSONDecodeError as exc:
        raise ModelFileError(f"header is not valid JSON: {exc}") from None

    arrays = {}
    offset = 0
    for entry in header["arrays"]:
        shape = tuple(entry["shape"])
        count = int(np.prod(shape, dtype=np.int64)) if shape else 1
        nbytes = count * 8
        if offset + nbytes > len(payload):
            raise ModelFileError("payload is shorter than the declared arrays")
        flat = np.frombuffer(payload, dtype="<f8", count=count, offset=offset)
        arrays[entry["name"]] = flat.reshape(shape).copy()
        offset += nbytes
    if offset != len(payload):
        raise ModelFileError("payload is longer than the declared arrays")
    return _build_model(header["method"], header["meta"], arrays)
