"""Single-file model serialization.

Layout::

    b"MVRKM\\0"            6-byte magic
    uint16 LE              format version
    uint32 LE              header length in bytes
    header                 UTF-8 JSON: type tag, scalars, array table
    payload                arrays back to back, little-endian float64, C order

The header is written with sorted keys and no timestamps, so saving the same
model twice gives byte-identical files.
"""

import json
import struct

import numpy as np

from .embedding import Standardization
from .kernels import CenteringStats, KernelSpec
from .lssvm import LssvmModel
from .trainer import TrainedModel

MAGIC = b"MVRKM\0"
FORMAT_VERSION = 1


class ModelFileError(ValueError):
    pass


def _pack(path, type_tag, meta, arrays):
    table = []
    blobs = []
    offset = 0
    for name, arr in arrays:
        a = np.ascontiguousarray(np.asarray(arr, dtype="<f8"))
        table.append({"name": name, "shape": list(a.shape), "offset": offset})
        blob = a.tobytes(order="C")
        blobs.append(blob)
        offset += len(blob)
    header = json.dumps({"type": type_tag, "meta": meta, "arrays": table},
                        sort_keys=True, separators=(",", ":")).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<HI", FORMAT_VERSION, len(header)))
        fh.write(header)
        for blob in blobs:
            fh.write(blob)


def _unpack(path):
    with open(path, "rb") as fh:
        raw = fh.read()
    if raw[:6] != MAGIC:
        raise ModelFileError(f"{path}: not a model file (bad magic)")
    version, hlen = struct.unpack("<HI", raw[6:12])
    if version != FORMAT_VERSION:
        raise ModelFileError(f"{path}: unsupported format version {version}")
    try:
        header = json.loads(raw[12:12 + hlen].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ModelFileError(f"{path}: corrupt header: {exc}") from None
    payload = memoryview(raw)[12 + hlen:]
    arrays = {}
    for entry in header["arrays"]:
        shape = tuple(entry["shape"])
        count = int(np.prod(shape)) if shape else 1
        start = entry["offset"]
        if start + 8 * count > len(payload):
            raise ModelFileError(f"{path}: truncated array {entry['name']!r}")
        arrays[entry["name"]] = np.frombuffer(payload, dtype="<f8", count=count,
                                              offset=start).reshape(shape).astype(float)
    return header["type"], header["meta"], arrays


def save_model(path, model, config=None):
    """Write a fitted model; ``config`` (a dict) is stored for later forecasting."""
    if not isinstance(model, (TrainedModel, LssvmModel)):
        raise TypeError(f"cannot serialize {type(model).__name__}")
    st = model.standardization
    if isinstance(model, TrainedModel):
        meta = {"kx": str(model.kx), "ky": str(model.ky), "center": model.center,
                "p": model.p, "jitter": model.jitter, "config": config}
        arrays = [("H", model.H), ("lambdas", model.lambdas), ("X_train", model.X_train),
                  ("Y_train", model.Y_train), ("Ky", model.Ky), ("M_inv", model.M_inv),
                  ("std_mean", st.mean), ("std_std", st.std)]
        if model.center:
            meta["cx_total"] = model.cx.gram_total_mean
            meta["cy_total"] = model.cy.gram_total_mean
            arrays += [("cx_row_means", model.cx.gram_row_means),
                       ("cy_row_means", model.cy.gram_row_means)]
        _pack(path, "mvrkm", meta, arrays)
    elif isinstance(model, LssvmModel):
        meta = {"kx": str(model.kx), "gamma": model.gamma, "p": model.p, "config": config}
        arrays = [("alpha", model.alpha), ("b", model.b), ("X_train", model.X_train),
                  ("Y_train", model.Y_train), ("std_mean", st.mean), ("std_std", st.std)]
        _pack(path, "lssvm", meta, arrays)


def load_model(path):
    """Return ``(model, config_dict_or_None)``."""
    tag, meta, a = _unpack(path)
    st = Standardization(a["std_mean"], a["std_std"])
    try:
        if tag == "mvrkm":
            cx = cy = None
            if meta["center"]:
                cx = CenteringStats(a["cx_row_means"], float(meta["cx_total"]))
                cy = CenteringStats(a["cy_row_means"], float(meta["cy_total"]))
            model = TrainedModel(
                H=a["H"], lambdas=a["lambdas"], X_train=a["X_train"], Y_train=a["Y_train"],
                kx=KernelSpec.parse(meta["kx"]), ky=KernelSpec.parse(meta["ky"]),
                center=bool(meta["center"]), cx=cx, cy=cy, Ky=a["Ky"], M_inv=a["M_inv"],
                jitter=float(meta["jitter"]), p=int(meta["p"]), standardization=st,
            )
        elif tag == "lssvm":
            model = LssvmModel(a["alpha"], a["b"], float(meta["gamma"]), KernelSpec.parse(meta["kx"]),
                               a["X_train"], a["Y_train"], int(meta["p"]), st)
        else:
            raise ModelFileError(f"{path}: unknown model type {tag!r}")
    except KeyError as exc:
        raise ModelFileError(f"{path}: missing field {exc}") from None
    return model, meta.get("config")
