"""Model generators and the ``gen:`` source-spec parser.

Generator kinds: empty, path, cycle, complete, grid2d, erdos-renyi,
random-J. All couplings are nonnegative; randomized kinds are deterministic
functions of the seed (a dedicated child stream of the root seed).

Source-spec syntax used by the command line:

    gen:<kind>:key=value,key=value,...

for example ``gen:cycle:n=4,J=1`` or ``gen:erdos-renyi:n=10,p=0.3,J=0.5``.
"""

from __future__ import annotations

import math

from .model import IsingModel
from .rng import RngStream

__all__ = ["GENERATOR_KINDS", "generate_model", "parse_gen_spec"]

GENERATOR_KINDS = ("empty", "path", "cycle", "complete", "grid2d",
                   "erdos-renyi", "random-J")


def _require_n(params: dict) -> int:
    if "n" not in params:
        raise ValueError("generator needs n=<count>")
    n = int(params["n"])
    if n < 1:
        raise ValueError(f"need n >= 1, got {n}")
    return n


def _coupling(params: dict, default: float = 1.0) -> float:
    j = float(params.get("J", default))
    if j < 0:
        raise ValueError(f"coupling J={j} is negative; ferromagnetic only")
    return j


def _field(params: dict, n: int):
    if "h" not in params:
        return None
    import numpy as np
    return np.full(n, float(params["h"]))


def generate_model(kind: str, params: dict, rng: RngStream | None = None) -> IsingModel:
    """Build a model of the given kind. Randomized kinds (erdos-renyi,
    random-J) draw from ``rng`` and are deterministic given the stream."""
    if kind not in GENERATOR_KINDS:
        raise ValueError(f"unknown generator kind {kind!r}; "
                         f"choose from {', '.join(GENERATOR_KINDS)}")
    if kind == "grid2d":
        if "rows" in params or "cols" in params:
            rows = int(params.get("rows", params.get("cols", 0)))
            cols = int(params.get("cols", rows))
        else:
            n = _require_n(params)
            rows = int(math.isqrt(n))
            if rows * rows != n:
                raise ValueError("grid2d needs rows=/cols= or a square n")
            cols = rows
        if rows < 1 or cols < 1:
            raise ValueError("grid2d needs positive rows and cols")
        n = rows * cols
        j = _coupling(params)
        edges = []
        for r in range(rows):
            for c in range(cols):
                v = r * cols + c
                if c + 1 < cols:
                    edges.append((v, v + 1, j))
                if r + 1 < rows:
                    edges.append((v, v + cols, j))
        return IsingModel(n, tuple(edges), _field(params, n))

    n = _require_n(params)
    j = _coupling(params)
    if kind == "empty":
        edges: tuple = ()
    elif kind == "path":
        edges = tuple((v, v + 1, j) for v in range(n - 1))
    elif kind == "cycle":
        if n < 3:
            raise ValueError("cycle needs n >= 3")
        edges = tuple((v, (v + 1) % n, j) for v in range(n))
    elif kind == "complete":
        edges = tuple((u, v, j) for u in range(n) for v in range(u + 1, n))
    elif kind == "erdos-renyi":
        p = float(params.get("p", 0.5))
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"edge probability p={p} outside [0, 1]")
        gen = (rng or RngStream(0)).named_child("model-gen").generator()
        edges = tuple((u, v, j) for u in range(n) for v in range(u + 1, n)
                      if gen.random() < p)
    elif kind == "random-J":
        p = float(params.get("p", 0.5))
        jmax = float(params.get("jmax", 2.0))
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"edge probability p={p} outside [0, 1]")
        if jmax < 0:
            raise ValueError(f"jmax={jmax} is negative; ferromagnetic only")
        gen = (rng or RngStream(0)).named_child("model-gen").generator()
        edges = []
        for u in range(n):
            for v in range(u + 1, n):
                if gen.random() < p:
                    edges.append((u, v, float(gen.uniform(0.0, jmax))))
        edges = tuple(edges)
    else:  # pragma: no cover - guarded above
        raise AssertionError(kind)
    return IsingModel(n, edges, _field(params, n))


def parse_gen_spec(spec: str, rng: RngStream | None = None) -> IsingModel:
    """Parse ``gen:<kind>:key=value,...`` and build the model."""
    if not spec.startswith("gen:"):
        raise ValueError(f"not a generator spec: {spec!r}")
    rest = spec[len("gen:"):]
    if ":" in rest:
        kind, arg_str = rest.split(":", 1)
    else:
        kind, arg_str = rest, ""
    params: dict = {}
    if arg_str:
        for item in arg_str.split(","):
            if "=" not in item:
                raise ValueError(f"bad generator argument {item!r}; want key=value")
            key, value = item.split("=", 1)
            params[key.strip()] = value.strip()
    return generate_model(kind.strip(), params, rng)
