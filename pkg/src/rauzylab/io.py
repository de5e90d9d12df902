"""Serialization: JSON types and polytopes, exact rational strings, CSV with config headers, JSONL traces."""

from __future__ import annotations

import csv
import io
import json
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Sequence

from .combinatorics import GeneralizedPermutation
from .geometry import Plane, PlanePolytope


def fraction_str(x) -> str:
    f = Fraction(x)
    return f"{f.numerator}/{f.denominator}"


def parse_fraction(s) -> Fraction:
    if isinstance(s, (int, Fraction)):
        return Fraction(s)
    if isinstance(s, float):
        raise ValueError("floats are not exact; write widths as 'p/q' strings")
    return Fraction(str(s).strip())


def parse_widths(text: str) -> list[Fraction]:
    """Comma-separated or JSON list of exact rationals."""
    text = text.strip()
    items = json.loads(text) if text.startswith("[") else [t for t in text.split(",") if t.strip()]
    return [parse_fraction(t) for t in items]


def load_type(spec: str) -> GeneralizedPermutation:
    """Inline JSON object, or a path to a file holding one."""
    text = spec.strip()
    if not text.startswith("{"):
        text = Path(spec).read_text()
    return GeneralizedPermutation.from_dict(json.loads(text))


def dump_type(perm: GeneralizedPermutation) -> str:
    return json.dumps(perm.to_dict(), sort_keys=True)


def polytope_to_dict(p: PlanePolytope) -> dict:
    return {
        "d": p.plane.d,
        "normals": [[fraction_str(a) for a in n] for n in p.plane.normals],
        "vertices": [[fraction_str(a) for a in v] for v in p.vertices],
        "simplices": [[[fraction_str(a) for a in v] for v in s] for s in p.simplices],
    }


def polytope_from_dict(data: dict) -> PlanePolytope:
    plane = Plane(int(data["d"]), tuple(tuple(parse_fraction(a) for a in n) for n in data["normals"]))
    simplices = tuple(tuple(tuple(parse_fraction(a) for a in v) for v in s) for s in data["simplices"])
    return PlanePolytope(plane, simplices)


def write_csv(path: Path, header: dict, columns: Sequence[str], rows: Iterable[Sequence]) -> None:
    """CSV whose leading ``#`` lines record the configuration that produced it."""
    buf = io.StringIO()
    for k, v in header.items():
        buf.write(f"# {k}={v}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow(r)
    Path(path).write_text(buf.getvalue())


def read_csv(path: Path) -> tuple[dict, list[dict]]:
    header, body = {}, []
    for line in Path(path).read_text().splitlines():
        if line.startswith("# "):
            k, _, v = line[2:].partition("=")
            header[k] = v
        else:
            body.append(line)
    return header, list(csv.DictReader(body))


def jsonl_line(record: dict) -> str:
    return json.dumps(record, sort_keys=True) + "\n"
