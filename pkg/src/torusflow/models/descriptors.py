"""JSON model descriptors and named presets."""

import json
from pathlib import Path

from ..errors import ModelError
from .projective import ProjectiveModel
from .sphere import SphereModel
from .toric import Fan, ToricModel, cpn_fan, hirzebruch_fan

PRESETS = {
    "cp1": lambda: ProjectiveModel(1),
    "cp2": lambda: ProjectiveModel(2),
    "cp3": lambda: ProjectiveModel(3),
    "s2": lambda: SphereModel(1),
    "s4": lambda: SphereModel(2),
    "fan:cp2": lambda: ToricModel(cpn_fan(2)),
    "fan:hirzebruch1": lambda: ToricModel(hirzebruch_fan(1)),
}


def model_from_descriptor(data: dict):
    """Build a model from ``{"kind": "projective"|"toric"|"sphere", ...}``.

    A bare fan (``rank``/``rays``/``maximal_cones`` without ``kind``) is
    accepted as a toric descriptor.
    """
    if not isinstance(data, dict):
        raise ModelError("model descriptor must be a JSON object")
    kind = data.get("kind")
    if kind is None and "rays" in data:
        kind = "toric"
    try:
        if kind == "projective":
            weights = data.get("coordinate_weights")
            n = data.get("n")
            if n is None:
                if weights is None:
                    raise ModelError("projective descriptor needs n or coordinate_weights")
                n = len(weights) - 1
            return ProjectiveModel(int(n), weights)
        if kind == "toric":
            fan = data.get("fan", data)
            return ToricModel(Fan.from_json(fan))
        if kind == "sphere":
            return SphereModel(int(data["n"]))
    except (KeyError, TypeError) as exc:
        raise ModelError(f"malformed {kind} descriptor: {exc}") from None
    raise ModelError(f"unknown model kind {kind!r}")


def model_to_descriptor(model) -> dict:
    if isinstance(model, ProjectiveModel):
        return {"kind": "projective", "n": model.dim,
                "coordinate_weights": [w.to_json() for w in model.coordinate_weights]}
    if isinstance(model, ToricModel):
        return {"kind": "toric", "fan": model.fan.to_json()}
    if isinstance(model, SphereModel):
        return {"kind": "sphere", "n": model.dim}
    raise ModelError(f"cannot describe {model!r}")


def load_model(spec):
    """Resolve a preset name, a JSON file path, or an already-parsed descriptor."""
    if isinstance(spec, dict):
        return model_from_descriptor(spec)
    key = str(spec).strip().lower()
    if key in PRESETS:
        return PRESETS[key]()
    path = Path(spec)
    if not path.exists():
        raise ModelError(f"{spec!r} is neither a preset ({', '.join(PRESETS)}) nor a file")
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ModelError(f"{path}: invalid JSON ({exc})") from None
    return model_from_descriptor(data)
