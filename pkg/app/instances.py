"""Файлы экземпляров: чтение JSON, проверка по схеме, встроенный корпус."""
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Tuple

from .config import Config
from .errors import ParseError, ValidationError
from .module_model import Presentation
from .ring import RingSpec

logger = logging.getLogger(__name__)

ROOT = Path(__file__).resolve().parent.parent
SCHEMA_PATH = ROOT / "schema" / "instance.schema.json"
CORPUS_DIR = ROOT / "instances"

_JSON_TYPES = {
    "string": str,
    "integer": int,
    "array": list,
    "object": dict,
}


@dataclass(frozen=True)
class InstanceFile:
    label: str
    variables: Tuple[str, ...]
    f: str
    phi: Tuple[Tuple[str, ...], ...]
    p: Optional[int] = None
    cap: Optional[int] = None
    seed: Optional[int] = None
    expect: Dict[str, Any] = field(default_factory=dict, compare=False)

    def presentation(self, ring_cap: int, p: Optional[int] = None, default_p: int = 32003) -> Presentation:
        """Разбор выражений; p из флага важнее p из файла."""
        prime = p or self.p or default_p
        spec = RingSpec(self.variables, prime, ring_cap)
        return Presentation.from_strings(spec, self.phi, self.f, self.label)

    def tune(self, cfg: Config, explicit: Iterable[str] = ()) -> Config:
        """p, cap и seed из файла, если их не задали флагами."""
        explicit = set(explicit)
        return cfg.with_overrides(
            p=None if "p" in explicit else self.p,
            cap=None if "cap" in explicit else self.cap,
            seed=None if "seed" in explicit else self.seed,
        )


def load_schema() -> Dict[str, Any]:
    with SCHEMA_PATH.open(encoding="utf-8") as fh:
        return json.load(fh)


def _check_type(value: Any, rule: Dict[str, Any], where: str):
    expected = rule.get("type")
    if expected is None:
        return
    py = _JSON_TYPES[expected]
    # bool в JSON не целое число
    if not isinstance(value, py) or (py is int and isinstance(value, bool)):
        raise ValidationError(f"{where}: expected {expected}")
    if "minimum" in rule and value < rule["minimum"]:
        raise ValidationError(f"{where}: must be >= {rule['minimum']}")
    if py is list:
        if len(value) < rule.get("minItems", 0):
            raise ValidationError(f"{where}: needs at least {rule['minItems']} items")
        for k, item in enumerate(value):
            _check_type(item, rule.get("items", {}), f"{where}[{k}]")
    if py is dict:
        _check_object(value, rule, where)


def _check_object(doc: Dict[str, Any], rule: Dict[str, Any], where: str):
    props = rule.get("properties", {})
    for key in rule.get("required", []):
        if key not in doc:
            raise ValidationError(f"{where}: missing required key {key!r}")
    for key, value in doc.items():
        if key not in props:
            if rule.get("additionalProperties", True) is False:
                raise ValidationError(f"{where}: unknown key {key!r}")
            continue
        _check_type(value, props[key], f"{where}.{key}")


def validate_instance(doc: Any, schema: Optional[Dict[str, Any]] = None, name: str = "instance") -> InstanceFile:
    schema = schema or load_schema()
    if not isinstance(doc, dict):
        raise ValidationError(f"{name}: instance must be a JSON object")
    _check_object(doc, schema, name)
    phi = doc["phi"]
    width = len(phi[0])
    if width == 0 or any(len(row) != width for row in phi):
        raise ValidationError(f"{name}: phi rows must have equal nonzero length")
    if len(phi) != width:
        raise ValidationError(f"{name}: phi must be square, got {len(phi)}x{width}")
    variables = tuple(doc["variables"])
    if len(set(variables)) != len(variables):
        raise ValidationError(f"{name}: duplicate variable names")
    return InstanceFile(
        label=doc.get("label", name),
        variables=variables,
        f=doc["f"],
        phi=tuple(tuple(row) for row in phi),
        p=doc.get("p"),
        cap=doc.get("cap"),
        seed=doc.get("seed"),
        expect=dict(doc.get("expect", {})),
    )


def load_instance(path: Path) -> InstanceFile:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc}")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path.name}: malformed JSON: {exc.msg}", exc.pos)
    return validate_instance(doc, name=path.stem)


def bundled_corpus(directory: Optional[Path] = None) -> List[InstanceFile]:
    """Все экземпляры из instances/, по порядку меток."""
    directory = directory or CORPUS_DIR
    items = [load_instance(p) for p in sorted(directory.glob("*.json"))]
    logger.debug("corpus: %d instances from %s", len(items), directory)
    return sorted(items, key=lambda inst: inst.label)
