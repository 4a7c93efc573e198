"""Parametric zoo of smooth, nonnegative, bounded damping coefficients W(x, t).

Every family is built from one compactly supported profile

    b(r) = exp(1 - 1/(1 - (r/w)^2))   for |r| < w,   0 otherwise,

which is C-infinity with b(0) = 1, so a family's amplitude parameter equals
its sup norm.  Models are immutable after construction and evaluate
vectorized: ``model.value(x, t)`` takes positions shaped (..., dim) (plain
(...) also works in d=1) with broadcastable times and returns values of the
batch shape.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import ConfigError
from .geometry import TorusGeometry, wrap_position

TWO_PI = 2.0 * math.pi

# max |b'(r)| for the unit-width profile, attained at r = +-0.75983568565...;
# scales as 1/w for width w
BUMP_SLOPE_MAX = 2.1703570857103385

# fallback time window for sup-norm sampling of models with no finite period
_APERIODIC_T_WINDOW = 64.0


def bump_profile(r, width: float):
    """Compactly supported C-infinity bump: exp(1 - 1/(1 - (r/width)^2)) on |r| < width."""
    r = np.asarray(r, dtype=float)
    out = np.zeros_like(r)
    inside = np.abs(r) < width
    rho = r[inside] / width
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - rho * rho))
    return out


def bump_profile_deriv(r, width: float):
    """Exact derivative of bump_profile; identically zero outside the support."""
    r = np.asarray(r, dtype=float)
    out = np.zeros_like(r)
    inside = np.abs(r) < width
    rho = r[inside] / width
    one = 1.0 - rho * rho
    out[inside] = np.exp(1.0 - 1.0 / one) * (-2.0 * rho / (one * one)) / width
    return out


def wrap_displacement(d, period):
    """Wrap a displacement to [-L/2, L/2) per axis."""
    period = np.asarray(period, dtype=float)
    return np.mod(np.asarray(d, dtype=float) + period / 2.0, period) - period / 2.0


def _combine_periods(p1: float | None, p2: float | None) -> float | None:
    """Common temporal period of two periodic factors; None if either side is
    aperiodic or the two are incommensurate."""
    if p1 is None:
        return p2
    if p2 is None:
        return p1
    ratio = p1 / p2
    frac = Fraction(ratio).limit_denominator(4096)
    if frac.numerator == 0:
        return None
    if abs(float(frac) - ratio) < 1e-9 * max(1.0, abs(ratio)):
        return p1 * frac.denominator
    return None


@dataclass(frozen=True)
class SupNorms:
    """Sup bounds for W and dW/dt; exact flags distinguish closed-form sups
    from dense-sampling estimates."""

    sup_w: float
    sup_dt_w: float
    sup_w_exact: bool
    sup_dt_w_exact: bool


class DampingModel:
    """Base for all damping families.

    Subclasses implement ``_value`` on canonical batches (positions (m, dim),
    times (m,)) plus the metadata hooks; ``value`` is the public vectorized
    entry point.
    """

    #: spatial dimension the model is bound to, or None if dimension-free
    dim: int | None = None

    def value(self, x, t):
        flat, tf, batch = self._canon(x, t)
        return np.asarray(self._value(flat, tf), dtype=float).reshape(batch)

    def _value(self, x: np.ndarray, t: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def closed_form_sup(self) -> SupNorms | None:
        """Exact sup norms when the family admits them, else None."""
        return None

    def temporal_period(self) -> float | None:
        """Period of t -> W(., t), or None when static or aperiodic."""
        return None

    def is_static(self) -> bool:
        return False

    def to_spec(self) -> dict:
        raise NotImplementedError

    def _canon(self, x, t):
        """Normalize positions to (m, dim) and times to (m,); return the batch shape."""
        x = np.asarray(x, dtype=float)
        dim = self.dim
        if dim == 2:
            if x.ndim == 0 or x.shape[-1] != 2:
                raise ValueError("positions must have trailing dimension 2")
            batch = x.shape[:-1]
            flat = x.reshape(-1, 2)
        elif dim == 1:
            if x.ndim >= 2 and x.shape[-1] == 1:
                batch = x.shape[:-1]
            else:
                batch = x.shape
            flat = x.reshape(-1, 1)
        else:
            # dimension-free model: a trailing coordinate axis of width 1 or 2
            # is stripped when present, otherwise the whole shape is the batch
            if x.ndim >= 2 and x.shape[-1] in (1, 2):
                batch = x.shape[:-1]
                flat = x.reshape(-1, x.shape[-1])
            else:
                batch = x.shape
                flat = x.reshape(-1, 1)
        t = np.broadcast_to(np.asarray(t, dtype=float), batch).reshape(-1)
        return flat, t, batch


def damping_value(model: DampingModel, x, t):
    """Evaluate W(x, t); scalar in, scalar out, arrays map elementwise."""
    out = np.asarray(model.value(x, t))
    if out.ndim == 0:
        return float(out)
    return out


@dataclass(frozen=True)
class Constant(DampingModel):
    """Spatially and temporally constant damping W = w0 >= 0."""

    w0: float

    def __post_init__(self):
        if not (math.isfinite(self.w0) and self.w0 >= 0):
            raise ValueError(f"w0 must be nonnegative and finite, got {self.w0}")

    def _value(self, x, t):
        return np.full(t.shape, float(self.w0))

    def closed_form_sup(self):
        return SupNorms(float(self.w0), 0.0, True, True)

    def is_static(self):
        return True

    def to_spec(self):
        return {"type": "constant", "w0": float(self.w0)}


def _check_bump_params(width, amplitude):
    if not (math.isfinite(width) and width > 0):
        raise ValueError(f"width must be positive, got {width}")
    if not (math.isfinite(amplitude) and amplitude >= 0):
        raise ValueError(f"amplitude must be nonnegative, got {amplitude}")


@dataclass(frozen=True)
class StaticBump(DampingModel):
    """Bump of height ``amplitude`` centered at ``center``; radial in d=2."""

    center: tuple[float, ...]
    width: float
    amplitude: float
    periods: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))
        object.__setattr__(self, "periods", tuple(float(p) for p in self.periods))
        _check_bump_params(self.width, self.amplitude)
        if len(self.center) != len(self.periods):
            raise ValueError("center and periods must have the same dimension")

    @property
    def dim(self):
        return len(self.periods)

    def _value(self, x, t):
        disp = wrap_displacement(x - np.array(self.center), np.array(self.periods))
        r = np.sqrt(np.sum(disp * disp, axis=-1))
        return self.amplitude * bump_profile(r, self.width)

    def closed_form_sup(self):
        return SupNorms(float(self.amplitude), 0.0, True, True)

    def is_static(self):
        return True

    def to_spec(self):
        c = self.center[0] if self.dim == 1 else list(self.center)
        return {
            "type": "static_bump",
            "center": c,
            "width": float(self.width),
            "amplitude": float(self.amplitude),
        }


@dataclass(frozen=True)
class TravelingBump(DampingModel):
    """d=1 bump translating at constant speed:
    W(x, t) = A * b((x - center - speed*t) mod L)."""

    center: float
    width: float
    amplitude: float
    speed: float
    period: float

    dim = 1

    def __post_init__(self):
        _check_bump_params(self.width, self.amplitude)
        if not (math.isfinite(self.period) and self.period > 0):
            raise ValueError(f"period must be positive, got {self.period}")
        if not math.isfinite(self.speed):
            raise ValueError("speed must be finite")

    def _value(self, x, t):
        disp = wrap_displacement(x[:, 0] - self.center - self.speed * t, self.period)
        return self.amplitude * bump_profile(disp, self.width)

    def closed_form_sup(self):
        sup_dt = self.amplitude * abs(self.speed) * BUMP_SLOPE_MAX / self.width
        return SupNorms(float(self.amplitude), float(sup_dt), True, True)

    def temporal_period(self):
        if self.speed == 0.0:
            return None
        return self.period / abs(self.speed)

    def is_static(self):
        return self.speed == 0.0

    def to_spec(self):
        return {
            "type": "traveling_bump",
            "center": float(self.center),
            "width": float(self.width),
            "amplitude": float(self.amplitude),
            "speed": float(self.speed),
        }


@dataclass(frozen=True)
class RotatingBump2D(DampingModel):
    """d=2 radial bump translating with a constant velocity vector on the torus."""

    center: tuple[float, float]
    width: float
    amplitude: float
    velocity: tuple[float, float]
    periods: tuple[float, float]

    dim = 2

    def __post_init__(self):
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))
        object.__setattr__(self, "velocity", tuple(float(v) for v in self.velocity))
        object.__setattr__(self, "periods", tuple(float(p) for p in self.periods))
        _check_bump_params(self.width, self.amplitude)
        if len(self.center) != 2 or len(self.velocity) != 2 or len(self.periods) != 2:
            raise ValueError("center, velocity, periods must all be 2-vectors")

    def _value(self, x, t):
        drift = np.array(self.center) + t[:, None] * np.array(self.velocity)
        disp = wrap_displacement(x - drift, np.array(self.periods))
        r = np.sqrt(np.sum(disp * disp, axis=-1))
        return self.amplitude * bump_profile(r, self.width)

    def closed_form_sup(self):
        vnorm = math.hypot(*self.velocity)
        sup_dt = self.amplitude * vnorm * BUMP_SLOPE_MAX / self.width
        return SupNorms(float(self.amplitude), float(sup_dt), True, True)

    def temporal_period(self):
        axis_periods = [
            self.periods[i] / abs(self.velocity[i])
            for i in range(2)
            if self.velocity[i] != 0.0
        ]
        if not axis_periods:
            return None
        out = axis_periods[0]
        for p in axis_periods[1:]:
            out = _combine_periods(out, p)
            if out is None:
                return None
        return out

    def is_static(self):
        return self.velocity == (0.0, 0.0)

    def to_spec(self):
        return {
            "type": "rotating_bump",
            "center": list(self.center),
            "width": float(self.width),
            "amplitude": float(self.amplitude),
            "velocity": list(self.velocity),
        }


@dataclass(frozen=True)
class TimeModulated(DampingModel):
    """W(x, t) = theta(t) * W_base(x, t) with a smooth periodic on/off gate.

    The gate is the same bump profile in time: theta peaks at 1 mid-period
    and vanishes outside a window of relative length ``on_fraction``, so
    theta and d/dt theta stay bounded.
    """

    base: DampingModel
    period: float
    on_fraction: float

    def __post_init__(self):
        if not (math.isfinite(self.period) and self.period > 0):
            raise ValueError(f"period must be positive, got {self.period}")
        if not (0.0 < self.on_fraction <= 1.0):
            raise ValueError(f"on_fraction must be in (0, 1], got {self.on_fraction}")

    @property
    def dim(self):
        return self.base.dim

    def gate(self, t):
        phase = wrap_displacement(
            np.asarray(t, dtype=float) - self.period / 2.0, self.period
        )
        return bump_profile(phase, self.on_fraction * self.period / 2.0)

    def _value(self, x, t):
        return self.gate(t) * np.asarray(self.base._value(x, t), dtype=float)

    def temporal_period(self):
        base_p = None if self.base.is_static() else self.base.temporal_period()
        if not self.base.is_static() and base_p is None:
            return None
        return _combine_periods(self.period, base_p)

    def to_spec(self):
        return {
            "type": "time_modulated",
            "period": float(self.period),
            "on_fraction": float(self.on_fraction),
            "base": self.base.to_spec(),
        }


@dataclass(frozen=True)
class SumDamping(DampingModel):
    """Pointwise sum of damping models (still nonnegative and bounded)."""

    terms: tuple[DampingModel, ...]

    def __post_init__(self):
        if not self.terms:
            raise ValueError("sum requires at least one term")
        object.__setattr__(self, "terms", tuple(self.terms))
        dims = {m.dim for m in self.terms if m.dim is not None}
        if len(dims) > 1:
            raise ValueError(f"mixed dimensions in sum: {sorted(dims)}")

    @property
    def dim(self):
        for m in self.terms:
            if m.dim is not None:
                return m.dim
        return None

    def _value(self, x, t):
        out = np.asarray(self.terms[0]._value(x, t), dtype=float)
        for m in self.terms[1:]:
            out = out + m._value(x, t)
        return out

    def closed_form_sup(self):
        # component sups need not align in (x, t), except trivially for constants
        if all(isinstance(m, Constant) for m in self.terms):
            return SupNorms(sum(m.w0 for m in self.terms), 0.0, True, True)
        return None

    def temporal_period(self):
        out = None
        for m in self.terms:
            if m.is_static():
                continue
            p = m.temporal_period()
            if p is None:
                return None
            out = _combine_periods(out, p)
            if out is None:
                return None
        return out

    def is_static(self):
        return all(m.is_static() for m in self.terms)

    def to_spec(self):
        return {"type": "sum", "terms": [m.to_spec() for m in self.terms]}


def _spatial_periods(model: DampingModel) -> tuple[float, ...] | None:
    if isinstance(model, StaticBump):
        return model.periods
    if isinstance(model, TravelingBump):
        return (model.period,)
    if isinstance(model, RotatingBump2D):
        return model.periods
    if isinstance(model, TimeModulated):
        return _spatial_periods(model.base)
    if isinstance(model, SumDamping):
        for m in model.terms:
            p = _spatial_periods(m)
            if p is not None:
                return p
    return None


def damping_sup_norms(model: DampingModel, resolution: int = 256) -> SupNorms:
    """Sup of W and of dW/dt: closed-form (exact) where the family admits it,
    otherwise dense-sampling estimates over one spatial/temporal period.

    ``resolution`` is the sample count per period per axis (>= 64); sampled
    estimates are lower bounds that stabilize under refinement.
    """
    if resolution < 64:
        raise ValueError(f"resolution must be >= 64, got {resolution}")
    exact = model.closed_form_sup()
    if exact is not None:
        return exact

    periods = _spatial_periods(model) or (TWO_PI,)
    axes = [np.linspace(0.0, L, resolution, endpoint=False) for L in periods]
    if len(axes) == 1:
        xs = axes[0].reshape(-1, 1)
    else:
        g1, g2 = np.meshgrid(axes[0], axes[1], indexing="ij")
        xs = np.stack([g1.ravel(), g2.ravel()], axis=-1)

    t_span = model.temporal_period() or _APERIODIC_T_WINDOW
    ts = (
        np.array([0.0])
        if model.is_static()
        else np.linspace(0.0, t_span, resolution, endpoint=False)
    )
    h = t_span / (8.0 * resolution)

    sup_w = 0.0
    sup_dt = 0.0
    for t in ts:
        w = model.value(xs, float(t))
        sup_w = max(sup_w, float(np.max(w)))
        if not model.is_static():
            dw = (model.value(xs, float(t) + h) - model.value(xs, float(t) - h)) / (
                2.0 * h
            )
            sup_dt = max(sup_dt, float(np.max(np.abs(dw))))
    return SupNorms(sup_w, sup_dt, False, False)


def damping_grid_sample(model: DampingModel, grid, t: float):
    """Nodal values W(x_j, t) in the solver's row-major node layout."""
    vals = model.value(grid.nodes_stacked, float(t))
    return np.asarray(vals, dtype=float).reshape(grid.shape)


def _require_keys(spec: dict, required: set[str], optional: set[str] = frozenset()):
    keys = set(spec)
    missing = required - keys
    if missing:
        raise ConfigError(f"damping spec missing key {sorted(missing)[0]!r}")
    unknown = keys - required - optional
    if unknown:
        raise ConfigError(f"damping spec has unknown key {sorted(unknown)[0]!r}")


def _center_tuple(raw, geom: TorusGeometry) -> tuple[float, ...]:
    if geom.dim == 1:
        if isinstance(raw, (list, tuple)):
            (raw,) = raw
        return (float(raw),)
    if not isinstance(raw, (list, tuple)) or len(raw) != geom.dim:
        raise ConfigError(f"'center' must be a {geom.dim}-vector")
    return tuple(float(v) for v in raw)


def model_from_spec(spec: dict, geom: TorusGeometry) -> DampingModel:
    """Build a model from its JSON description, bound to a torus geometry.

    Schema (see README): constant {w0}; static_bump {center, width, amplitude};
    traveling_bump {center, width, amplitude, speed} (d=1);
    rotating_bump {center, width, amplitude, velocity} (d=2);
    time_modulated {period, on_fraction, base}; sum {terms}.
    """
    if not isinstance(spec, dict) or "type" not in spec:
        raise ConfigError("damping spec must be an object with a 'type' key")
    kind = spec["type"]
    try:
        if kind == "constant":
            _require_keys(spec, {"type", "w0"})
            return Constant(float(spec["w0"]))
        if kind == "static_bump":
            _require_keys(spec, {"type", "center", "width", "amplitude"})
            return StaticBump(
                _center_tuple(spec["center"], geom),
                float(spec["width"]),
                float(spec["amplitude"]),
                geom.periods,
            )
        if kind == "traveling_bump":
            _require_keys(spec, {"type", "center", "width", "amplitude", "speed"})
            if geom.dim != 1:
                raise ConfigError("'traveling_bump' requires dim=1")
            return TravelingBump(
                float(spec["center"]),
                float(spec["width"]),
                float(spec["amplitude"]),
                float(spec["speed"]),
                geom.periods[0],
            )
        if kind == "rotating_bump":
            _require_keys(spec, {"type", "center", "width", "amplitude", "velocity"})
            if geom.dim != 2:
                raise ConfigError("'rotating_bump' requires dim=2")
            vel = spec["velocity"]
            if not isinstance(vel, (list, tuple)) or len(vel) != 2:
                raise ConfigError("'velocity' must be a 2-vector")
            return RotatingBump2D(
                _center_tuple(spec["center"], geom),
                float(spec["width"]),
                float(spec["amplitude"]),
                (float(vel[0]), float(vel[1])),
                geom.periods,
            )
        if kind == "time_modulated":
            _require_keys(spec, {"type", "period", "on_fraction", "base"})
            return TimeModulated(
                model_from_spec(spec["base"], geom),
                float(spec["period"]),
                float(spec["on_fraction"]),
            )
        if kind == "sum":
            _require_keys(spec, {"type", "terms"})
            terms = spec["terms"]
            if not isinstance(terms, list) or not terms:
                raise ConfigError("'terms' must be a nonempty list")
            return SumDamping(tuple(model_from_spec(s, geom) for s in terms))
    except (ValueError, TypeError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"invalid damping spec for type {kind!r}: {exc}") from exc
    raise ConfigError(f"unknown damping type {kind!r}")
