"""Отчёт команды и его вывод: таблица для человека, JSON для машины."""
import json
from dataclasses import dataclass, field, fields
from typing import Any, Dict, List, Sequence

# ключи, значения которых печатаются как многочлены от z
_POLY_KEYS = {"h", "h_tilde", "r_coeffs", "b", "b_first", "rho", "h_M", "h_N"}

_SECTIONS = (
    "invariants",
    "superficial",
    "depth",
    "rr",
    "delta",
    "sequences",
    "classification",
    "checks",
    "timings",
)


def format_poly(coeffs: Sequence[int], var: str = "z") -> str:
    """[4, 0, 6, -4, 1] -> "4 + 6z^2 - 4z^3 + z^4"."""
    parts = []
    for k, c in enumerate(coeffs):
        if c == 0:
            continue
        mag = abs(c)
        if k == 0:
            body = str(mag)
        else:
            power = var if k == 1 else f"{var}^{k}"
            body = power if mag == 1 else f"{mag}{power}"
        parts.append(("-" if c < 0 else "+", body))
    if not parts:
        return "0"
    sign, body = parts[0]
    out = ("-" if sign == "-" else "") + body
    for sign, body in parts[1:]:
        out += f" {sign} {body}"
    return out


@dataclass
class Report:
    label: str
    command: str
    cap: int
    seed: int
    invariants: Dict[str, Any] = field(default_factory=dict)
    superficial: List[Dict[str, Any]] = field(default_factory=list)
    depth: Dict[str, Any] = field(default_factory=dict)
    rr: Dict[str, Any] = field(default_factory=dict)
    delta: Dict[str, Any] = field(default_factory=dict)
    sequences: Dict[str, Any] = field(default_factory=dict)
    classification: Dict[str, Any] = field(default_factory=dict)
    checks: Dict[str, Any] = field(default_factory=dict)
    timings: Dict[str, float] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        out: Dict[str, Any] = {}
        for f in fields(self):
            value = getattr(self, f.name)
            if f.name in _SECTIONS and not value:
                continue
            out[f.name] = value
        return out

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "Report":
        known = {f.name for f in fields(cls)}
        return cls(**{k: v for k, v in data.items() if k in known})


def _plain(value: Any) -> Any:
    """Кортежи и numpy-скаляры в чистый JSON."""
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if hasattr(value, "item") and not isinstance(value, (str, bytes)):
        return value.item()
    return value


def _table_value(key: str, value: Any) -> str:
    if key in _POLY_KEYS and isinstance(value, (list, tuple)) and all(isinstance(c, int) for c in value):
        return format_poly(value)
    if key == "h_chain":
        return "; ".join(format_poly(h) for h in value)
    if isinstance(value, float):
        return f"{value:.3f}"
    return str(value)


def _table_lines(value: Any, indent: str) -> List[str]:
    lines = []
    if isinstance(value, dict):
        for k, v in value.items():
            if isinstance(v, (dict, list)) and v and not (k in _POLY_KEYS or k == "h_chain") and (
                isinstance(v, dict) or isinstance(v[0], dict)
            ):
                lines.append(f"{indent}{k}:")
                lines.extend(_table_lines(v, indent + "  "))
            else:
                lines.append(f"{indent}{k}: {_table_value(k, v)}")
    elif isinstance(value, list):
        for k, item in enumerate(value):
            lines.append(f"{indent}- [{k}]")
            lines.extend(_table_lines(item, indent + "  "))
    return lines


def emit(report: Report, fmt: str = "table") -> str:
    data = _plain(report.to_dict())
    if fmt == "json":
        return json.dumps(data, sort_keys=True, indent=2)
    lines = [
        f"instance: {data['label']}",
        f"command:  {data['command']}",
        f"cap: {data['cap']}  seed: {data['seed']}",
    ]
    for name in _SECTIONS:
        if name not in data:
            continue
        lines.append(f"[{name}]")
        lines.extend(_table_lines(data[name], "  "))
    return "\n".join(lines)
