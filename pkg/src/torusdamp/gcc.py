"""Ray-averaged damping along geodesics and the control-condition scan.

The time-dependent control condition asks for a uniform positive lower bound
on (1/T) int_0^T W(phi_t(x0, xi0), offset + t) dt over all unit-speed rays,
all time offsets, and all horizons T beyond some threshold.  The universal
quantifiers are discretized to finite lattices here, so results are always
scoped by the recorded sampling resolution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .damping import DampingModel
from .geometry import PhasePoint, TorusGeometry, wrap_position


def ray_average(
    model: DampingModel,
    geom: TorusGeometry,
    p: PhasePoint,
    offset: float,
    horizon: float,
    quad_step: float,
) -> float:
    """Composite-Simpson value of (1/T) int_0^T W(phi_t(p), offset + t) dt.

    The step is shrunk to the nearest even subdivision of the horizon; for
    the smooth model zoo the quadrature error is O(quad_step^4) away from
    support edges.  Negative round-off is clamped to zero.
    """
    horizon = float(horizon)
    quad_step = float(quad_step)
    if not (math.isfinite(horizon) and horizon > 0):
        raise ValueError(f"horizon must be positive, got {horizon}")
    if not (math.isfinite(quad_step) and quad_step > 0):
        raise ValueError(f"quad_step must be positive, got {quad_step}")
    if quad_step > horizon / 8.0:
        raise ValueError(
            f"quad_step = {quad_step} too coarse, must be <= horizon/8 = {horizon / 8.0}"
        )
    if p.dim != geom.dim:
        raise ValueError(f"phase point dim {p.dim} != geometry dim {geom.dim}")

    m = int(math.ceil(horizon / quad_step))
    m += m % 2
    tt = np.linspace(0.0, horizon, m + 1)
    pos = wrap_position(
        np.array(p.x) + tt[:, None] * np.array(p.xi), np.array(geom.periods)
    )
    w = np.asarray(model.value(pos, float(offset) + tt), dtype=float)
    weights = np.ones(m + 1)
    weights[1:-1:2] = 4.0
    weights[2:-1:2] = 2.0
    h = horizon / m
    return max(0.0, float((h / 3.0) * np.dot(weights, w) / horizon))


@dataclass(frozen=True)
class GccReport:
    """Scan result: min ray average per horizon with the argmin ray, plus
    the lattice metadata that scopes the claim.

    control_level is the minimum average at the largest scanned horizon;
    attained_horizon is the smallest scanned horizon from which every
    larger scanned horizon stays at or above target_level (None when no
    target was given or the target is never sustained).
    """

    horizons: tuple[float, ...]
    offsets: tuple[float, ...]
    min_average: tuple[float, ...]
    argmin_rays: tuple[tuple[PhasePoint, float], ...]
    control_level: float
    target_level: float | None
    attained_horizon: float | None
    n_samples: int
    quad_step: float

    @property
    def violated(self) -> bool:
        """Whether some scanned ray average is numerically zero at every horizon."""
        return bool(max(self.min_average) < 1e-6)

    def to_dict(self) -> dict:
        return {
            "horizons": list(self.horizons),
            "offsets": list(self.offsets),
            "min_average": list(self.min_average),
            "argmin_rays": [
                {"x": list(p.x), "xi": list(p.xi), "offset": a}
                for p, a in self.argmin_rays
            ],
            "control_level": self.control_level,
            "target_level": self.target_level,
            "attained_horizon": (
                self.attained_horizon
                if self.attained_horizon is not None
                else "not attained"
            ),
            "violated": self.violated,
            "n_samples": self.n_samples,
            "quad_step": self.quad_step,
        }


def gcc_scan(
    model: DampingModel,
    geom: TorusGeometry,
    samples: list[PhasePoint],
    offsets,
    horizons,
    quad_step: float,
    target_level: float | None = None,
) -> GccReport:
    """Minimize ray_average over samples x offsets for each horizon.

    Deterministic and independent of evaluation order: ties resolve to the
    lowest sample index, then the lowest offset index.
    """
    offsets = [float(a) for a in offsets]
    horizons = [float(T) for T in horizons]
    if not samples:
        raise ValueError("samples must be nonempty")
    if not offsets:
        raise ValueError("offsets must be nonempty")
    if not horizons:
        raise ValueError("horizons must be nonempty")
    if any(b <= a for a, b in zip(horizons, horizons[1:])):
        raise ValueError("horizons must be sorted ascending")

    mins: list[float] = []
    argmins: list[tuple[PhasePoint, float]] = []
    for T in horizons:
        best_val = math.inf
        best_ray: tuple[PhasePoint, float] | None = None
        for p in samples:
            for a in offsets:
                val = ray_average(model, geom, p, a, T, quad_step)
                if val < best_val:
                    best_val = val
                    best_ray = (p, a)
        mins.append(best_val)
        argmins.append(best_ray)

    control_level = mins[-1]
    attained = None
    if target_level is not None:
        attained = first_sustained_horizon(horizons, mins, target_level)
    return GccReport(
        horizons=tuple(horizons),
        offsets=tuple(offsets),
        min_average=tuple(mins),
        argmin_rays=tuple(argmins),
        control_level=control_level,
        target_level=target_level,
        attained_horizon=attained,
        n_samples=len(samples),
        quad_step=float(quad_step),
    )


def first_sustained_horizon(horizons, min_averages, target_level: float):
    """Smallest scanned horizon T such that the min average stays >= the
    target for every scanned horizon >= T; None when never sustained."""
    if target_level <= 0:
        raise ValueError(f"target_level must be positive, got {target_level}")
    horizons = list(horizons)
    vals = list(min_averages)
    result = None
    for T, v in zip(reversed(horizons), reversed(vals)):
        if v >= target_level:
            result = T
        else:
            break
    return result


def estimate_min_horizon(report: GccReport, target_level: float):
    """first_sustained_horizon applied to a finished report."""
    return first_sustained_horizon(report.horizons, report.min_average, target_level)
