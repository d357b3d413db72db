"""JSON documents for every stored object, dispatched on the "kind" field."""
from __future__ import annotations

import json

from .annulus import NormalizedAnnulus
from .exponential import Framing, LiePath
from .fourier import FourierSeries
from .geometry import CircleDiffeo, JordanCurve
from .virasoro import VirasoroElement
from .welding import WeldingSolution


class FormatError(ValueError):
    pass


def welding_from_dict(d: dict) -> WeldingSolution:
    fp = FourierSeries.from_dict(d["f_plus"], "interior")
    fm = FourierSeries.from_dict(d["f_minus"], "exterior")
    phi = CircleDiffeo.from_dict(d["phi"]) if "phi" in d else None
    return WeldingSolution(fp, fm, float(d.get("residual", 0.0)), phi)


def welding_to_dict(sol: WeldingSolution) -> dict:
    d = sol.to_dict()
    if sol.phi is not None:
        d["phi"] = sol.phi.to_dict()
    return d


READERS = {
    "fourier": FourierSeries.from_dict,
    "curve": JordanCurve.from_dict,
    "diffeo": CircleDiffeo.from_dict,
    "welding": welding_from_dict,
    "annulus": NormalizedAnnulus.from_dict,
    "liepath": LiePath.from_dict,
    "framing": Framing.from_dict,
    "velement": VirasoroElement.from_dict,
}


def from_dict(d: dict):
    if not isinstance(d, dict) or "kind" not in d:
        raise FormatError("document has no 'kind' field")
    kind = d["kind"]
    if kind not in READERS:
        raise FormatError(f"unknown kind {kind!r}")
    try:
        return READERS[kind](d)
    except (KeyError, TypeError, IndexError) as exc:
        raise FormatError(f"malformed {kind} document: {exc!r}") from exc


def to_dict(obj) -> dict:
    if isinstance(obj, WeldingSolution):
        return welding_to_dict(obj)
    if hasattr(obj, "to_dict"):
        return obj.to_dict()
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(doc: dict) -> str:
    return json.dumps(doc, sort_keys=True, indent=1) + "\n"


def load(path: str):
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: {exc}") from exc
    return from_dict(doc)


def save(obj, path: str):
    with open(path, "w") as fh:
        fh.write(dumps(to_dict(obj)))
