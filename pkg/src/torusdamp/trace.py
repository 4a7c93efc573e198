"""Time series of energy, dissipation flux, and diagnostics for one run.

The trace is recorded on a uniform time grid and is the single artifact the
analysis layer consumes.  CSV round-trips are bit-exact (shortest repr).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

#: per-sample slack allowed on the non-increasing energy check, relative to E(0)
MONOTONE_SLACK = 1e-12

_COLUMNS = ("t", "E", "D", "ut_sq", "mean_abs", "poincare_ratio")


@dataclass
class EnergyTrace:
    """Recorded series: energy E, dissipation flux D = int W |u_t|^2,
    kinetic integral ut_sq = int |u_t|^2, spatial-mean magnitude |uhat(0)|,
    and the gradient/mean-removed norm ratio (inf when the denominator
    underflows)."""

    times: np.ndarray
    E: np.ndarray
    D: np.ndarray
    ut_sq: np.ndarray
    mean_abs: np.ndarray
    poincare_ratio: np.ndarray

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.E = np.asarray(self.E, dtype=float)
        self.D = np.asarray(self.D, dtype=float)
        self.ut_sq = np.asarray(self.ut_sq, dtype=float)
        self.mean_abs = np.asarray(self.mean_abs, dtype=float)
        self.poincare_ratio = np.asarray(self.poincare_ratio, dtype=float)
        n = self.times.size
        if n == 0:
            raise ValueError("empty trace")
        for name in ("E", "D", "ut_sq", "mean_abs", "poincare_ratio"):
            if getattr(self, name).shape != (n,):
                raise ValueError(f"column {name} length mismatch")
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("times must be strictly increasing")
        for name in ("E", "D", "ut_sq"):
            if np.any(getattr(self, name) < 0):
                raise ValueError(f"column {name} must be nonnegative")
        slack = self.max_energy_increase()
        if slack > MONOTONE_SLACK * self.E[0]:
            raise ValueError(
                f"energy increases by {slack:.3e}, above the "
                f"{MONOTONE_SLACK:g}*E(0) tolerance"
            )

    def __len__(self) -> int:
        return self.times.size

    def max_energy_increase(self) -> float:
        """Largest single-sample energy increase (0 for a monotone trace)."""
        if self.E.size < 2:
            return 0.0
        return float(max(0.0, np.max(np.diff(self.E))))

    @property
    def dt_record(self) -> float:
        """Recording interval; the grid is uniform by construction."""
        if self.times.size < 2:
            raise ValueError("trace has a single sample, no recording interval")
        return float(self.times[1] - self.times[0])

    def index_of_time(self, t: float) -> int:
        """Index of the recorded instant equal to t; raises if t is not a
        sample point (no interpolation)."""
        idx = int(round((float(t) - self.times[0]) / self.dt_record))
        if idx < 0 or idx >= self.times.size or not np.isclose(
            self.times[idx], t, rtol=0.0, atol=1e-9 * max(1.0, abs(t))
        ):
            raise ValueError(f"t={t} is not a recorded instant")
        return idx

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            fh.write(",".join(_COLUMNS) + "\n")
            cols = (self.times, self.E, self.D, self.ut_sq,
                    self.mean_abs, self.poincare_ratio)
            for row in zip(*cols):
                fh.write(",".join(repr(float(v)) for v in row) + "\n")

    @classmethod
    def from_csv(cls, path) -> "EnergyTrace":
        with open(path, newline="") as fh:
            header = fh.readline().strip()
            if header != ",".join(_COLUMNS):
                raise ValueError(f"unexpected trace header: {header!r}")
            rows = [line.strip().split(",") for line in fh if line.strip()]
        if not rows:
            raise ValueError("empty trace")
        data = np.array([[float(v) for v in row] for row in rows], dtype=float)
        return cls(*(data[:, i] for i in range(len(_COLUMNS))))
