"""State descriptors: JSON state files and compact ``NAME[:params]`` preset strings."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Callable

import numpy as np

from . import states as st
from .errors import InvalidParameterError, QcorrError


def _matrix(value) -> np.ndarray:
    if isinstance(value, dict):
        re = np.asarray(value.get("re", value.get("matrix_re")), dtype=float)
        im = value.get("im", value.get("matrix_im"))
        return re + 1j * np.asarray(im, dtype=float) if im is not None else re.astype(complex)
    return np.asarray(value, dtype=complex)


def _decode_params(name: str, params: dict[str, Any]) -> dict[str, Any]:
    """Turn JSON values into the arrays the preset factories expect."""
    out = {}
    for key, val in params.items():
        if key in ("rhos_b", "rhos_a"):
            out[key] = [_matrix(v) for v in val]
        elif key == "pairs":
            out[key] = [(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex)) for a, b in val]
        elif key == "amplitudes" and isinstance(val, dict):
            out[key] = np.asarray(val["re"], dtype=float) + 1j * np.asarray(val.get("im", 0.0), dtype=float)
        elif isinstance(val, (list, dict)):
            out[key] = _matrix(val)
        else:
            out[key] = val
    return out


def state_from_document(doc: dict[str, Any]) -> st.BipartiteState:
    """Build a state from a parsed state document.

    Either ``{"dims": [dA, dB], "matrix_re": [[...]], "matrix_im": [[...]]}`` or
    ``{"preset": name, "params": {...}}``.
    """
    if not isinstance(doc, dict):
        raise InvalidParameterError("state document must be a JSON object")
    if "preset" in doc:
        name = doc["preset"]
        params = doc.get("params", {}) or {}
        if name in CLI_PRESETS and name not in st.PRESETS:
            return cli_preset(name, {k: str(v) for k, v in params.items()})
        return st.preset(name, **_decode_params(name, params))
    if "dims" not in doc or "matrix_re" not in doc:
        raise InvalidParameterError("state document needs 'dims' and 'matrix_re' (or 'preset')")
    re = np.asarray(doc["matrix_re"], dtype=float)
    im = np.asarray(doc.get("matrix_im", np.zeros_like(re)), dtype=float)
    if re.shape != im.shape or re.ndim != 2:
        raise InvalidParameterError("matrix_re and matrix_im must be rectangular arrays of one shape")
    return st.make_state(tuple(doc["dims"]), re + 1j * im)


def load_state(path: str | Path) -> st.BipartiteState:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InvalidParameterError(f"cannot read state file {path}: {exc}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidParameterError(f"state file {path} is not valid JSON: {exc}") from None
    return state_from_document(doc)


def state_document(state: st.BipartiteState) -> dict[str, Any]:
    return {
        "dims": list(state.dims),
        "matrix_re": state.rho.real.tolist(),
        "matrix_im": state.rho.imag.tolist(),
    }


# -- preset strings -------------------------------------------------------------


def _qubit_diag(p0: float) -> np.ndarray:
    if not 0.0 <= p0 <= 1.0:
        raise InvalidParameterError(f"population must lie in [0, 1], got {p0}")
    return np.diag([p0, 1.0 - p0]).astype(complex)


def _product(a: float = 0.5, b: float = 0.5) -> st.BipartiteState:
    return st.product(_qubit_diag(a), _qubit_diag(b))


def _pure(theta: float = np.pi / 4) -> st.BipartiteState:
    return st.pure([np.cos(theta), 0, 0, np.sin(theta)])


def _dephased_bell() -> st.BipartiteState:
    return st.cc(np.diag([0.5, 0.5]))


def _random(seed: int = 0, rank: int | None = None, da: int = 2, db: int = 2) -> st.BipartiteState:
    return st.random_state((int(da), int(db)), None if rank is None else int(rank), int(seed))


def _random_family(fn):
    def make(seed: int = 0, da: int = 2, db: int = 2):
        return fn((int(da), int(db)), int(seed))

    return make


CLI_PRESETS: dict[str, tuple[Callable[..., st.BipartiteState], tuple[str, ...]]] = {
    "bell": (st.bell, ()),
    "werner": (st.werner, ("p",)),
    "product": (_product, ("a", "b")),
    "pure": (_pure, ("theta",)),
    "dephased-bell": (_dephased_bell, ()),
    "random": (_random, ("seed", "rank", "da", "db")),
    "random-cq": (_random_family(st.random_cq), ("seed", "da", "db")),
    "random-qc": (_random_family(st.random_qc), ("seed", "da", "db")),
    "random-cc": (_random_family(st.random_cc), ("seed", "da", "db")),
}

_INT_KEYS = {"seed", "rank", "da", "db"}


def parse_preset(descriptor: str) -> tuple[str, dict[str, str]]:
    """Split ``NAME[:v1,k2=v2,...]``; positional values bind to the preset's parameter order."""
    name, _, rest = descriptor.partition(":")
    name = name.strip().lower()
    if name not in CLI_PRESETS:
        raise InvalidParameterError(f"unknown preset {name!r}; choose from {sorted(CLI_PRESETS)}")
    order = CLI_PRESETS[name][1]
    params: dict[str, str] = {}
    for pos, item in enumerate(x for x in rest.split(",") if x.strip()):
        if "=" in item:
            k, v = item.split("=", 1)
            params[k.strip().lower()] = v.strip()
        elif pos < len(order):
            params[order[pos]] = item.strip()
        else:
            raise InvalidParameterError(f"too many positional parameters for preset {name!r}")
    unknown = set(params) - set(order)
    if unknown:
        raise InvalidParameterError(f"preset {name!r} has no parameters {sorted(unknown)}")
    return name, params


def cli_preset(name: str, params: dict[str, str]) -> st.BipartiteState:
    fn, _ = CLI_PRESETS[name]
    kwargs = {}
    for k, v in params.items():
        try:
            kwargs[k] = int(v) if k in _INT_KEYS else float(v)
        except ValueError:
            raise InvalidParameterError(f"parameter {k}={v!r} is not a number") from None
    try:
        return fn(**kwargs)
    except QcorrError:
        raise
    except (TypeError, ValueError) as exc:
        raise InvalidParameterError(f"bad parameters for preset {name!r}: {exc}") from None


def state_from_preset(descriptor: str) -> st.BipartiteState:
    return cli_preset(*parse_preset(descriptor))
