"""Line-based model file format.

UTF-8 text, ``#`` starts a comment, blank lines ignored:

    n <count>
    e <u> <v> <J_uv>      # J_uv >= 0, decimal
    h <v> <H_v>           # optional, default 0

The ``n`` line must come first; edges may not repeat; at most one ``h``
line per vertex. Floats are written with shortest round-trip formatting,
so parse(write(model)) reproduces the model exactly.
"""

from __future__ import annotations

import numpy as np

from .model import IsingModel

__all__ = ["ModelFormatError", "models_equivalent", "parse_model",
           "parse_model_text", "write_model", "write_model_text"]


class ModelFormatError(ValueError):
    """Malformed model file; message carries the offending line number."""


def parse_model_text(text: str, source: str = "<string>") -> IsingModel:
    n = None
    edges: list[tuple[int, int, float]] = []
    seen_edges: set[tuple[int, int]] = set()
    field_entries: dict[int, float] = {}

    def err(lineno: int, msg: str) -> ModelFormatError:
        return ModelFormatError(f"{source}, line {lineno}: {msg}")

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        tag = parts[0]
        if tag == "n":
            if n is not None:
                raise err(lineno, "duplicate n line")
            if len(parts) != 2:
                raise err(lineno, f"n line needs one count, got {raw!r}")
            try:
                n = int(parts[1])
            except ValueError:
                raise err(lineno, f"bad vertex count {parts[1]!r}") from None
            if n < 1:
                raise err(lineno, f"need at least one vertex, got {n}")
        elif tag == "e":
            if n is None:
                raise err(lineno, "e line before n line")
            if len(parts) != 4:
                raise err(lineno, f"e line needs u v J, got {raw!r}")
            try:
                u, v = int(parts[1]), int(parts[2])
                j = float(parts[3])
            except ValueError:
                raise err(lineno, f"bad edge entry {raw!r}") from None
            if not (0 <= u < n and 0 <= v < n):
                raise err(lineno, f"edge ({u},{v}) out of range for n={n}")
            if u == v:
                raise err(lineno, f"self-loop at vertex {u}")
            if j < 0:
                raise err(lineno,
                          f"coupling J={parts[3]} is negative; only "
                          "ferromagnetic (J >= 0) couplings are accepted")
            key = (min(u, v), max(u, v))
            if key in seen_edges:
                raise err(lineno, f"duplicate edge ({u},{v})")
            seen_edges.add(key)
            edges.append((u, v, j))
        elif tag == "h":
            if n is None:
                raise err(lineno, "h line before n line")
            if len(parts) != 3:
                raise err(lineno, f"h line needs v H, got {raw!r}")
            try:
                v = int(parts[1])
                hv = float(parts[2])
            except ValueError:
                raise err(lineno, f"bad field entry {raw!r}") from None
            if not 0 <= v < n:
                raise err(lineno, f"vertex {v} out of range for n={n}")
            if v in field_entries:
                raise err(lineno, f"duplicate field line for vertex {v}")
            field_entries[v] = hv
        else:
            raise err(lineno, f"unknown line tag {tag!r} (want n, e, or h)")
    if n is None:
        raise ModelFormatError(f"{source}: no n line found")
    field = None
    if field_entries:
        field = np.zeros(n)
        for v, hv in field_entries.items():
            field[v] = hv
    return IsingModel(n, tuple(edges), field)


def parse_model(path) -> IsingModel:
    with open(path, encoding="utf-8") as fh:
        return parse_model_text(fh.read(), source=str(path))


def write_model_text(model: IsingModel) -> str:
    lines = [f"n {model.n}"]
    for u, v, j in model.edges:
        lines.append(f"e {u} {v} {float(j)!r}")
    for v in range(model.n):
        if model.field[v] != 0.0:
            # plain-float repr: numpy scalar reprs do not parse back
            lines.append(f"h {v} {float(model.field[v])!r}")
    return "\n".join(lines) + "\n"


def write_model(model: IsingModel, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(write_model_text(model))


def models_equivalent(a: IsingModel, b: IsingModel) -> bool:
    """Field-by-field equality (dataclass == on array fields is ambiguous)."""
    return (a.n == b.n and a.edges == b.edges
            and bool(np.array_equal(a.field, b.field)))
