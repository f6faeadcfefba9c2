"""Self-describing model files.

A model file is a zip archive holding ``model.json`` (architecture, activations,
lambda, training config and any extra metadata) plus one ``.npy`` member per
parameter grid. Entries carry a fixed timestamp so the same model always
produces the same bytes.
"""

from __future__ import annotations

import io
import json
import os
import tempfile
import zipfile
from pathlib import Path

import numpy as np

from .errors import ModelFileError
from .model import AeParams, IaeModel, StackModel
from .model.autoencoder import PARAM_NAMES

FORMAT = "iaefilter-model"
VERSION = 1
_EPOCH = (1980, 1, 1, 0, 0, 0)


def _ae_desc(p: AeParams) -> dict:
    return {"enc_act": p.enc_act.value, "dec_act": p.dec_act.value}


def describe(model) -> dict:
    if isinstance(model, IaeModel):
        return {
            "kind": "iae",
            "ae1": _ae_desc(model.ae1),
            "ae2": _ae_desc(model.ae2),
            "lam": model.lam,
            "n_cols_v": model.n_cols_v,
            "dense_v_loss": model.dense_v_loss,
        }
    if isinstance(model, StackModel):
        return {"kind": "stack", "layers": [_ae_desc(p) for p in model.layers]}
    if isinstance(model, AeParams):
        return {"kind": "ae", **_ae_desc(model)}
    raise TypeError(f"cannot describe {type(model).__name__}")


def save_model(path, model, metadata: dict | None = None) -> None:
    header = {
        "format": FORMAT,
        "version": VERSION,
        "architecture": describe(model),
        "metadata": metadata or {},
    }
    arrays = model.arrays()
    header["arrays"] = sorted(arrays)

    buf = io.BytesIO()
    with zipfile.ZipFile(buf, "w", zipfile.ZIP_STORED) as zf:
        info = zipfile.ZipInfo("model.json", _EPOCH)
        zf.writestr(info, json.dumps(header, indent=2, sort_keys=True))
        for name in sorted(arrays):
            member = io.BytesIO()
            np.lib.format.write_array(member, np.ascontiguousarray(arrays[name]), allow_pickle=False)
            zf.writestr(zipfile.ZipInfo(f"{name}.npy", _EPOCH), member.getvalue())

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(buf.getvalue())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _build_ae(arrays: dict, prefix: str, desc: dict) -> AeParams:
    return AeParams(
        *(arrays[f"{prefix}{n}"] for n in PARAM_NAMES),
        enc_act=desc["enc_act"],
        dec_act=desc["dec_act"],
    )


def load_model(path):
    """Return ``(model, metadata)``; raises :class:`ModelFileError` on any defect."""
    try:
        with zipfile.ZipFile(path) as zf:
            header = json.loads(zf.read("model.json"))
            if header.get("format") != FORMAT:
                raise ModelFileError(f"{path}: not an {FORMAT} file")
            if header.get("version") != VERSION:
                raise ModelFileError(f"{path}: unsupported version {header.get('version')}")
            arrays = {}
            for name in header["arrays"]:
                arrays[name] = np.lib.format.read_array(
                    io.BytesIO(zf.read(f"{name}.npy")), allow_pickle=False
                )
        arch = header["architecture"]
        kind = arch["kind"]
        if kind == "ae":
            model = _build_ae(arrays, "", arch)
        elif kind == "stack":
            model = StackModel(
                [_build_ae(arrays, f"layer{i}.", d) for i, d in enumerate(arch["layers"])]
            )
        elif kind == "iae":
            model = IaeModel(
                _build_ae(arrays, "ae1.", arch["ae1"]),
                _build_ae(arrays, "ae2.", arch["ae2"]),
                arch["lam"],
                arch["n_cols_v"],
                arch["dense_v_loss"],
            )
        else:
            raise ModelFileError(f"{path}: unknown architecture kind {kind!r}")
    except ModelFileError:
        raise
    except (OSError, zipfile.BadZipFile, KeyError, ValueError, TypeError) as exc:
        raise ModelFileError(f"{path}: cannot load model ({exc})") from exc
    return model, header.get("metadata", {})
