"""Forward simulation of SDEs by the explicit Euler scheme.

The basic step for dr = mu(r, t) dt + sigma(r, t) dB is

    r_{k+1} = r_k + mu(r_k, t_k) * dt + sigma(r_k, t_k) * z_k * sqrt(dt)

with z_k independent standard normal vectors. On top of that the module
provides mean-reverting attraction drift, gradient-descent drift for a
scalar potential, second-order friction (position/velocity) dynamics, and
rejection-based confinement to a polygonal region: a step that would exit
the region is redrawn up to a capped number of attempts, after which the
previous position is held. Time grids are explicit inputs so synthetic
paths can land exactly on observed (possibly irregular) times.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .core import Region, RngStream, Trajectory
from .errors import DivergenceError, DomainError, EvaluationError, ParameterError
from .potential import PotentialSpec, grad_potential

# A drift field maps (position, time) -> velocity and must be effectively
# stateless so simulations of distinct replicates can run concurrently.
DriftField = Callable[[np.ndarray, float], np.ndarray]


def zero_drift(r: np.ndarray, t: float) -> np.ndarray:
    return np.zeros_like(r)


@dataclass(frozen=True)
class DiffusionSpec:
    """Isotropic scalar sigma (sigma * I) or a full p x p matrix evaluator."""

    sigma: float | None = None
    matrix: Callable[[np.ndarray, float], np.ndarray] | None = None

    def __post_init__(self):
        if (self.sigma is None) == (self.matrix is None):
            raise ParameterError("specify exactly one of sigma or matrix")
        if self.sigma is not None and self.sigma < 0.0:
            raise ParameterError("scalar diffusion must be nonnegative")

    @classmethod
    def scalar(cls, sigma: float) -> "DiffusionSpec":
        return cls(sigma=float(sigma))

    @classmethod
    def from_matrix(cls, fn) -> "DiffusionSpec":
        return cls(matrix=fn)

    @property
    def is_zero(self) -> bool:
        return self.sigma == 0.0

    def noise(self, r: np.ndarray, t: float, z: np.ndarray, sqrt_dt: float) -> np.ndarray:
        if self.sigma is not None:
            return self.sigma * z * sqrt_dt
        m = np.asarray(self.matrix(r, t), dtype=float)
        if not np.all(np.isfinite(m)):
            raise EvaluationError(f"non-finite diffusion matrix at t={t}")
        return (m @ z) * sqrt_dt


@dataclass(frozen=True)
class OUParams:
    """Mean-reverting attraction toward a point at rate alpha."""

    alpha: float
    attractor: np.ndarray
    sigma: float

    def __post_init__(self):
        if self.alpha <= 0.0:
            raise ParameterError("attraction rate alpha must be positive")
        if self.sigma < 0.0:
            raise ParameterError("sigma must be nonnegative")
        object.__setattr__(self, "attractor", np.asarray(self.attractor, dtype=float))


@dataclass(frozen=True)
class ConstraintPolicy:
    """Rejection confinement: redraw the noise up to max_attempts times,
    then hold the previous position. The cap prevents livelock at concave
    boundary pockets."""

    region: Region
    max_attempts: int = 100

    def __post_init__(self):
        if self.max_attempts < 1:
            raise ParameterError("max_attempts must be at least 1")


@dataclass(frozen=True)
class LangevinState:
    """Position, velocity and friction coefficient for second-order motion."""

    r: np.ndarray
    v: np.ndarray
    friction: float

    def __post_init__(self):
        if self.friction <= 0.0:
            raise ParameterError("friction must be positive")
        object.__setattr__(self, "r", np.asarray(self.r, dtype=float))
        object.__setattr__(self, "v", np.asarray(self.v, dtype=float))


def ou_drift(params: OUParams) -> DriftField:
    """Drift field alpha * (a - r) attracting toward the point a."""

    def drift(r: np.ndarray, t: float) -> np.ndarray:
        return params.alpha * (params.attractor - r)

    return drift


def gradient_system_drift(spec: PotentialSpec) -> DriftField:
    """Steepest-descent drift -grad H for a potential field."""

    def drift(r: np.ndarray, t: float) -> np.ndarray:
        return -grad_potential(spec, r)

    return drift


def euler_step(
    r: np.ndarray,
    t: float,
    dt: float,
    drift: DriftField,
    diffusion: DiffusionSpec,
    z: np.ndarray,
) -> np.ndarray:
    """One explicit Euler step: r + mu(r,t)*dt + sigma(r,t)*z*sqrt(dt)."""
    if dt <= 0.0:
        raise ParameterError("dt must be positive")
    r = np.asarray(r, dtype=float)
    mu = np.asarray(drift(r, t), dtype=float)
    if not np.all(np.isfinite(mu)):
        raise EvaluationError(f"non-finite drift at t={t}, r={r.tolist()}")
    step = diffusion.noise(r, t, np.asarray(z, dtype=float), math.sqrt(dt))
    return r + mu * dt + step


def simulate_sde(
    r0,
    grid,
    drift: DriftField,
    diffusion: DiffusionSpec,
    rng: RngStream | None = None,
    constraint: ConstraintPolicy | None = None,
) -> Trajectory:
    """Iterate the Euler scheme over an explicit time grid.

    The output has one position per grid time, starting with r0 at grid[0].
    With a constraint, any step leaving the region is redrawn (new z) up to
    the policy cap, then the previous position is held for that step. With
    zero scalar diffusion no random numbers are consumed, so the path is
    deterministic and independent of the stream.
    """
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or len(grid) < 2 or not np.all(np.diff(grid) > 0):
        raise ParameterError("grid must be strictly increasing with length >= 2")
    r = np.atleast_1d(np.asarray(r0, dtype=float))
    p = len(r)
    if constraint is not None and not constraint.region.contains(r):
        raise DomainError(f"initial position {r.tolist()} lies outside the region")
    needs_noise = not diffusion.is_zero
    if needs_noise and rng is None:
        raise ParameterError("an RngStream is required when diffusion is nonzero")

    out = np.empty((len(grid), p))
    out[0] = r
    zeros = np.zeros(p)
    for k in range(len(grid) - 1):
        t = grid[k]
        dt = grid[k + 1] - grid[k]
        sqrt_dt = math.sqrt(dt)
        mu = np.asarray(drift(r, t), dtype=float)
        if not np.all(np.isfinite(mu)):
            raise EvaluationError(f"non-finite drift at step {k}, t={t}")
        base = r + mu * dt
        attempts = constraint.max_attempts if constraint is not None else 1
        accepted = None
        for _ in range(attempts):
            z = rng.standard_normal(p) if needs_noise else zeros
            cand = base + diffusion.noise(r, t, z, sqrt_dt)
            if constraint is None or constraint.region.contains(cand):
                accepted = cand
                break
        if accepted is None:
            accepted = r  # fallback: hold the previous position
        if not np.all(np.isfinite(accepted)):
            raise DivergenceError(f"non-finite state at step {k + 1}", step=k + 1)
        r = accepted
        out[k + 1] = r
    return Trajectory(times=grid, positions=out)


def simulate_langevin(
    state0: LangevinState,
    spec: PotentialSpec,
    sigma: float,
    grid,
    rng: RngStream | None = None,
) -> Trajectory:
    """Euler scheme on the (r, v) pair:

        dr = v dt
        dv = -beta_f * v dt - beta_f * grad H(r) dt + sigma dB

    Returns the position component. For large friction beta_f the motion
    approaches the gradient system dr = -grad H dt.
    """
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or len(grid) < 2 or not np.all(np.diff(grid) > 0):
        raise ParameterError("grid must be strictly increasing with length >= 2")
    if sigma < 0.0:
        raise ParameterError("sigma must be nonnegative")
    if sigma > 0.0 and rng is None:
        raise ParameterError("an RngStream is required when sigma is nonzero")
    beta_f = state0.friction
    r = state0.r.copy()
    v = state0.v.copy()
    p = len(r)
    out = np.empty((len(grid), p))
    out[0] = r
    for k in range(len(grid) - 1):
        dt = grid[k + 1] - grid[k]
        g = grad_potential(spec, r)
        noise = sigma * rng.standard_normal(p) * math.sqrt(dt) if sigma > 0.0 else 0.0
        r_next = r + v * dt
        v_next = v - beta_f * v * dt - beta_f * g * dt + noise
        if not (np.all(np.isfinite(r_next)) and np.all(np.isfinite(v_next))):
            raise DivergenceError(f"non-finite state at step {k + 1}", step=k + 1)
        r, v = r_next, v_next
        out[k + 1] = r
    return Trajectory(times=grid, positions=out)
