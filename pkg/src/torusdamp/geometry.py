"""Flat-torus geometry, exact geodesic flow, and deterministic phase-space sampling.

Positions live in the fundamental domain [0, L_i) per axis; directions are
unit covectors.  On a flat torus the geodesic flow is straight-line motion
with wrap-around, so it is evaluated exactly (no integrator).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * math.pi

_UNIT_TOL = 1e-12


def wrap_position(x, periods):
    """Reduce coordinates to [0, L) per axis with mathematical modulus.

    Works on scalars and arrays; the last axis (or the scalar itself) is the
    coordinate axis.  Negative inputs wrap to the top of the domain.
    """
    periods = np.asarray(periods, dtype=float)
    out = np.mod(np.asarray(x, dtype=float), periods)
    # float modulus of a tiny negative number can land exactly on L
    return np.where(out >= periods, 0.0, out)


@dataclass(frozen=True)
class TorusGeometry:
    """Flat torus of dimension 1 or 2 with side lengths ``periods``."""

    dim: int
    periods: tuple[float, ...]

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise ValueError(f"dim must be 1 or 2, got {self.dim}")
        object.__setattr__(self, "periods", tuple(float(p) for p in self.periods))
        if len(self.periods) != self.dim:
            raise ValueError(
                f"expected {self.dim} periods, got {len(self.periods)}"
            )
        for p in self.periods:
            if not (math.isfinite(p) and p > 0):
                raise ValueError(f"periods must be positive and finite, got {p}")

    @classmethod
    def unit(cls, dim: int = 1) -> "TorusGeometry":
        """Torus with period 2*pi on every axis."""
        return cls(dim, (TWO_PI,) * dim)

    @property
    def volume(self) -> float:
        return float(np.prod(self.periods))


@dataclass(frozen=True)
class PhasePoint:
    """Point (x, xi) on the unit cotangent bundle: position plus unit direction."""

    x: tuple[float, ...]
    xi: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "x", tuple(float(v) for v in self.x))
        object.__setattr__(self, "xi", tuple(float(v) for v in self.xi))
        if len(self.x) != len(self.xi):
            raise ValueError("x and xi must have the same dimension")
        norm = math.sqrt(sum(v * v for v in self.xi))
        if abs(norm - 1.0) > _UNIT_TOL:
            raise ValueError(f"|xi| must be 1 within {_UNIT_TOL}, got {norm}")

    @property
    def dim(self) -> int:
        return len(self.x)


def geodesic_flow(geom: TorusGeometry, p: PhasePoint, t: float) -> PhasePoint:
    """Flow (x, xi) for time t: returns ((x + t*xi) mod periods, xi).

    Exact; satisfies the flow property phi_s(phi_t(p)) = phi_{s+t}(p) to
    rounding.  The direction tuple is passed through unchanged.
    """
    if p.dim != geom.dim:
        raise ValueError(f"phase point has dim {p.dim}, geometry has dim {geom.dim}")
    t = float(t)
    if not math.isfinite(t):
        raise ValueError(f"flow time must be finite, got {t}")
    x = wrap_position(
        np.array(p.x, dtype=float) + t * np.array(p.xi, dtype=float), geom.periods
    )
    return PhasePoint(tuple(x.tolist()), p.xi)


def sample_phase_space(geom: TorusGeometry, n_pos: int, n_dir: int) -> list[PhasePoint]:
    """Deterministic lattice on the unit cotangent bundle.

    Positions are equispaced per axis (n_pos per dimension, starting at 0),
    crossed with equispaced directions.  In d=1 the direction set is exactly
    {-1, +1} (n_dir counts beyond 2 are ignored; n_dir=1 keeps only +1); in
    d=2 directions are n_dir equispaced angles starting at 0.  Output order
    is position-major (positions in row-major axis order), direction-minor.
    """
    if n_pos < 1:
        raise ValueError(f"n_pos must be >= 1, got {n_pos}")
    if n_dir < 1:
        raise ValueError(f"n_dir must be >= 1, got {n_dir}")

    if geom.dim == 1:
        (L,) = geom.periods
        positions = [(i * L / n_pos,) for i in range(n_pos)]
        directions = [(-1.0,), (1.0,)] if n_dir >= 2 else [(1.0,)]
    else:
        L1, L2 = geom.periods
        positions = [
            (i * L1 / n_pos, j * L2 / n_pos)
            for i in range(n_pos)
            for j in range(n_pos)
        ]
        angles = [TWO_PI * m / n_dir for m in range(n_dir)]
        directions = [(math.cos(a), math.sin(a)) for a in angles]

    return [PhasePoint(x, xi) for x in positions for xi in directions]
