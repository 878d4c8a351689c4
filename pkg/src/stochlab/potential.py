"""Scalar potential fields H(x, y) and their gradients.

Two variants are supported. The polynomial-shore field is

    H(x, y) = b10*x + b01*y + b20*x**2 + b11*x*y + b02*y**2 + C / d(x, y)

where d is the shortest distance from (x, y) to a region boundary; the
barrier term C/d blows up near the shore and keeps a simulated mover off
the region. H is undefined where d = 0. The generic variant wraps any
user-supplied scalar evaluator with an optional analytic gradient (this is
where basis expansions such as thin plate splines would plug in).
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .core import Region, load_region, write_region
from .errors import ParameterError, SingularityError

# Evaluation closer to the boundary than this raises instead of returning a
# huge number, protecting downstream fitters from overflow.
SINGULARITY_GUARD = 1e-9


@dataclass(frozen=True)
class PotentialSpec:
    """Either a polynomial-shore field (beta, C, region) or a generic one
    (func, optional grad). Exactly one variant must be populated."""

    beta: tuple[float, float, float, float, float] | None = None
    C: float = 0.0
    region: Region | None = None
    func: Callable[[np.ndarray], float] | None = None
    grad: Callable[[np.ndarray], np.ndarray] | None = None

    def __post_init__(self):
        if (self.beta is None) == (self.func is None):
            raise ParameterError("specify exactly one of beta or func")
        if self.beta is not None:
            beta = tuple(float(b) for b in self.beta)
            if len(beta) != 5:
                raise ParameterError("beta must have 5 coefficients")
            object.__setattr__(self, "beta", beta)
            if self.C != 0.0 and self.region is None:
                raise ParameterError("a region is required when C is nonzero")
            if self.C < 0.0:
                raise ParameterError("C must be nonnegative")

    @property
    def variant(self) -> str:
        return "polynomial-shore" if self.beta is not None else "generic"


def polynomial_shore(beta, C: float = 0.0, region: Region | None = None) -> PotentialSpec:
    """Five-coefficient polynomial plus C/d shoreline barrier."""
    return PotentialSpec(beta=tuple(beta), C=float(C), region=region)


def generic_potential(func, grad=None) -> PotentialSpec:
    """Wrap an arbitrary scalar field, optionally with its analytic
    gradient."""
    return PotentialSpec(func=func, grad=grad)


def _shore_distance(spec: PotentialSpec, q) -> float:
    d = spec.region.distance(q)
    if d < SINGULARITY_GUARD:
        raise SingularityError(
            f"potential undefined at {tuple(float(c) for c in q)}: boundary distance {d:g}"
        )
    return d


def eval_potential(spec: PotentialSpec, q) -> float:
    """Evaluate H at a planar point q."""
    q = np.asarray(q, dtype=float)
    if spec.func is not None:
        return float(spec.func(q))
    x, y = float(q[0]), float(q[1])
    b10, b01, b20, b11, b02 = spec.beta
    value = b10 * x + b01 * y + b20 * x * x + b11 * x * y + b02 * y * y
    if spec.C != 0.0:
        value += spec.C / _shore_distance(spec, q)
    return value


def grad_potential(spec: PotentialSpec, q) -> np.ndarray:
    """Gradient of H at q.

    For the polynomial-shore variant the barrier gradient is
    C * grad(1/d) = -C * u / d**2 with u the unit vector from the nearest
    boundary point to q (ties between edges go to the first edge in vertex
    order). For generic specs without an analytic gradient, central finite
    differences are used.
    """
    q = np.asarray(q, dtype=float)
    if spec.func is not None:
        if spec.grad is not None:
            return np.asarray(spec.grad(q), dtype=float)
        return finite_diff_grad(spec.func, q)
    x, y = float(q[0]), float(q[1])
    b10, b01, b20, b11, b02 = spec.beta
    g = np.array([b10 + 2.0 * b20 * x + b11 * y, b01 + b11 * x + 2.0 * b02 * y])
    if spec.C != 0.0:
        d = _shore_distance(spec, q)
        nearest = spec.region.nearest_boundary_point(q)
        unit = (q - nearest) / d
        g -= spec.C * unit / (d * d)
    return g


def finite_diff_grad(func, q, h: float = 1e-5) -> np.ndarray:
    """Central-difference gradient of a scalar field, one axis at a time."""
    q = np.asarray(q, dtype=float)
    if h <= 0.0:
        raise ParameterError("finite-difference step must be positive")
    out = np.empty(len(q))
    for j in range(len(q)):
        hi = q.copy()
        lo = q.copy()
        hi[j] += h
        lo[j] -= h
        out[j] = (float(func(hi)) - float(func(lo))) / (2.0 * h)
    return out


def spec_to_json(spec: PotentialSpec, region_file: str | None = None) -> dict:
    """JSON-serializable form of a polynomial-shore spec."""
    if spec.variant != "polynomial-shore":
        raise ParameterError("only polynomial-shore specs serialize to JSON")
    return {
        "variant": "polynomial-shore",
        "beta": list(spec.beta),
        "C": spec.C,
        "region_file": region_file,
    }


def save_spec(spec: PotentialSpec, path, region_file: str | None = None) -> None:
    """Write a spec JSON; when the spec has a region, also write the region
    CSV next to it (default name derived from the spec path)."""
    path = os.fspath(path)
    if spec.region is not None and region_file is None:
        region_file = os.path.basename(path).rsplit(".", 1)[0] + "_region.csv"
    if spec.region is not None:
        write_region(spec.region, os.path.join(os.path.dirname(path) or ".", region_file))
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(spec_to_json(spec, region_file), fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_spec(path) -> PotentialSpec:
    """Read a spec JSON written by :func:`save_spec`; ``region_file`` is
    resolved relative to the JSON file."""
    path = os.fspath(path)
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    if data.get("variant") != "polynomial-shore":
        raise ParameterError(f"unsupported potential variant {data.get('variant')!r}")
    region = None
    if data.get("region_file"):
        region = load_region(os.path.join(os.path.dirname(path) or ".", data["region_file"]))
    return polynomial_shore(data["beta"], data.get("C", 0.0), region)
