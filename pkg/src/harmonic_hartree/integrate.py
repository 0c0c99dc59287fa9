"""Adaptive Dormand-Prince 5(4) integration of the sphere-restricted flow.

This is the package's independent oracle: every closed-form solution is
cross-checked against trajectories produced here.  The right-hand side is
the sphere vector field evaluated through dense operator matrices built
column-by-column from the sparse ladder operations, so both code paths
share one definition of the algebra.

Specifics:

* embedded Dormand-Prince 5(4) pair with PI-free standard step control;
* after every accepted step the state is projected back to the unit
  sphere; the projection magnitude is logged and must stay below ten
  times the local tolerance (the continuous flow conserves the norm, so
  the projection removes integrator drift only);
* dense output from a quintic two-point Hermite interpolant whose
  midpoint value/slope come from an extra half-step, keeping sample-time
  accuracy at the step-tolerance level;
* amplitude that a raising operator would push past the degree cutoff is
  monitored; if a state with nonzero centering moments reaches the
  boundary the integration aborts with TruncationError.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import fock
from .errors import IntegrationError, NormalizationError, TruncationError
from .fock import Cutoff, FockVector

# Dormand-Prince 5(4) tableau
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    np.array([]),
    np.array([1 / 5]),
    np.array([3 / 40, 9 / 40]),
    np.array([44 / 45, -56 / 15, 32 / 9]),
    np.array([19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729]),
    np.array([9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656]),
    np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84]),
]
_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_B4 = np.array(
    [5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40]
)
_ERR = _B5 - _B4

_H_MAX = 0.05  # keeps the quintic dense output within the step tolerance
_SAFETY = 1.0 / 20.0  # internal per-step error target relative to the
# requested tolerance, sized so conserved-quantity drift over O(10) time
# units stays at the requested tolerance level
_TRUNCATION_FLUX_TOL = 1e-12


def _quintic_matrix() -> np.ndarray:
    """Inverse of the condition matrix for a quintic in theta on [0, 1]:
    value and slope at theta = 0, 1/2, 1."""
    rows = []
    for th in (0.0, 0.5, 1.0):
        rows.append([th**k for k in range(6)])
        rows.append([k * th ** (k - 1) if k >= 1 else 0.0 for k in range(6)])
    return np.linalg.inv(np.array(rows))


_QUINTIC_INV = _quintic_matrix()


@dataclass(frozen=True)
class _FieldData:
    """Dense operators for the sphere field at a fixed cutoff."""

    cutoff: Cutoff
    n_diag: np.ndarray
    lower_a: tuple[np.ndarray, ...]
    lower_b: tuple[np.ndarray, ...]
    pos_a: tuple[np.ndarray, ...]  # a_i + a*_i (silently truncating)
    pos_b: tuple[np.ndarray, ...]
    lower2: np.ndarray  # sum_i (b_i b_i - a_i a_i)
    drop_a: tuple[np.ndarray, ...]  # squared raising amplitude lost at degree K
    drop_b: tuple[np.ndarray, ...]


@lru_cache(maxsize=None)
def _field_data(cutoff: Cutoff) -> _FieldData:
    idxs = fock.basis(cutoff)
    n_diag = np.array([idx.excitation for idx in idxs], dtype=float)
    lower_a, lower_b, pos_a, pos_b, drop_a, drop_b = [], [], [], [], [], []
    lower2 = np.zeros((len(idxs), len(idxs)), dtype=complex)
    for i in range(cutoff.d):
        la = fock.operator_matrix(lambda v: fock.apply_lowering_a(i, v), cutoff)
        lb = fock.operator_matrix(lambda v: fock.apply_lowering_b(i, v), cutoff)
        ra = fock.operator_matrix(lambda v: fock.apply_raising_a(i, v), cutoff)
        rb = fock.operator_matrix(lambda v: fock.apply_raising_b(i, v), cutoff)
        lower_a.append(la)
        lower_b.append(lb)
        pos_a.append(la + ra)
        pos_b.append(lb + rb)
        lower2 += lb @ lb - la @ la
        drop_a.append(
            np.array(
                [idx.a[i] + 1.0 if idx.degree == cutoff.k else 0.0 for idx in idxs]
            )
        )
        drop_b.append(
            np.array(
                [idx.b[i] + 1.0 if idx.degree == cutoff.k else 0.0 for idx in idxs]
            )
        )
    return _FieldData(
        cutoff=cutoff,
        n_diag=n_diag,
        lower_a=tuple(lower_a),
        lower_b=tuple(lower_b),
        pos_a=tuple(pos_a),
        pos_b=tuple(pos_b),
        lower2=lower2,
        drop_a=tuple(drop_a),
        drop_b=tuple(drop_b),
    )


def _cinner(u: np.ndarray, v: np.ndarray) -> complex:
    """<u, v> = sum u conj(v)."""
    return complex(np.vdot(v, u))


def sphere_field(data: _FieldData, y: np.ndarray) -> np.ndarray:
    """Sphere vector field on dense coefficients; aborts on truncation loss."""
    mean_n = _cinner(y, data.n_diag * y).real
    s2 = _cinner(y, data.lower2 @ y).real
    out = data.n_diag * y + (0.5 * mean_n + 0.5 * s2) * y
    for i in range(data.cutoff.d):
        cb = _cinner(y, data.lower_b[i] @ y).real
        if cb != 0.0:
            flux = abs(cb) * math.sqrt(float(data.drop_b[i] @ np.abs(y) ** 2))
            if flux > _TRUNCATION_FLUX_TOL:
                raise TruncationError(
                    f"field lost flux {flux:.3e} past the cutoff; increase K"
                )
            out = out - cb * (data.pos_b[i] @ y)
        ca = _cinner(y, data.lower_a[i] @ y).real
        if ca != 0.0:
            flux = abs(ca) * math.sqrt(float(data.drop_a[i] @ np.abs(y) ** 2))
            if flux > _TRUNCATION_FLUX_TOL:
                raise TruncationError(
                    f"field lost flux {flux:.3e} past the cutoff; increase K"
                )
            out = out + ca * (data.pos_a[i] @ y)
    return -1j * out


def _energy_dense(data: _FieldData, y: np.ndarray) -> float:
    mean_n = _cinner(y, data.n_diag * y).real
    quad = 0.0
    for i in range(data.cutoff.d):
        quad += _cinner(y, data.lower_a[i] @ y).real ** 2
        quad -= _cinner(y, data.lower_b[i] @ y).real ** 2
    return 0.5 * mean_n + 0.5 * quad


@dataclass(frozen=True)
class _Segment:
    s0: float
    h: float
    coeffs: np.ndarray  # (6, dim) quintic coefficients in theta


@dataclass(frozen=True)
class ConservedSamples:
    """Per-sample records along a trajectory (norm before re-projection)."""

    norm: np.ndarray
    mean_n: np.ndarray
    energy: np.ndarray


@dataclass(frozen=True)
class DriftRecord:
    norm: float
    mean_n: float
    energy: float


@dataclass(frozen=True)
class Trajectory:
    """Sampled solution of the sphere flow.

    ``times`` are strictly increasing; ``states`` are unit-norm snapshots.
    ``conserved`` records raw interpolated norm plus excitation mean and
    energy per sample; ``max_renormalization`` is the largest per-step
    sphere-projection magnitude.
    """

    cutoff: Cutoff
    times: np.ndarray
    states: tuple[FockVector, ...]
    conserved: ConservedSamples
    initial_mean_n: float
    initial_energy: float
    max_renormalization: float
    accepted_steps: int
    rejected_steps: int
    _segments: tuple[_Segment, ...]
    _direction: float

    def interpolate(self, t: float) -> FockVector:
        """Dense-output state at any time inside the integration window."""
        s = t * self._direction
        lo, hi = self._segments[0], self._segments[-1]
        # slack covers the float-roundoff sliver the stepper may leave at
        # the window end; quintic extrapolation over it is exact in practice
        if s < lo.s0 - 1e-9 or s > hi.s0 + hi.h + 1e-9:
            raise ValueError(f"time {t} outside the integrated range")
        return fock.from_array(self.cutoff, _interp_raw(self._segments, s))


def _bisect_segment(segments: tuple[_Segment, ...], s: float) -> _Segment:
    lo, hi = 0, len(segments) - 1
    while lo < hi:
        mid = (lo + hi) // 2
        seg = segments[mid]
        if s < seg.s0:
            hi = mid - 1
        elif s > seg.s0 + seg.h:
            lo = mid + 1
        else:
            return segments[mid]
    return segments[lo]


def _dp5_step(f, y: np.ndarray, h: float, k1: np.ndarray):
    """One Dormand-Prince step; returns (y_new, err_vector, k_stages)."""
    k = [k1]
    for stage in range(1, 7):
        yi = y + h * sum(a * ki for a, ki in zip(_A[stage], k))
        k.append(f(yi))
    y_new = yi  # stage 7 state equals the 5th-order solution (FSAL)
    err = h * sum(e * ki for e, ki in zip(_ERR, k))
    return y_new, err, k


def integrate(
    state: FockVector,
    t_end: float,
    tol: float = 1e-10,
    samples: int | np.ndarray = 65,
) -> Trajectory:
    """Integrate the sphere flow from a unit state over [0, t_end].

    ``tol`` (both absolute and relative) must lie in [1e-12, 1e-4]; the
    initial support must stay at least two degrees below the cutoff.
    Negative ``t_end`` integrates backward.  ``samples`` is either a count
    (equally spaced, endpoints included) or an array of times.
    """
    if not 1e-12 <= tol <= 1e-4:
        raise ValueError(f"tol must lie in [1e-12, 1e-4], got {tol}")
    if abs(state.norm - 1.0) > 1e-8:
        raise NormalizationError(f"initial state must be unit, norm={state.norm}")
    if state.max_degree() > state.cutoff.k - 2:
        raise ValueError(
            f"initial support degree {state.max_degree()} exceeds interior "
            f"limit K-2={state.cutoff.k - 2}"
        )
    if t_end == 0.0:
        raise ValueError("t_end must be nonzero")

    direction = 1.0 if t_end > 0 else -1.0
    span = abs(t_end)
    data = _field_data(state.cutoff)

    if isinstance(samples, (int, np.integer)):
        sample_times = np.linspace(0.0, t_end, int(samples))
    else:
        sample_times = np.asarray(samples, dtype=float)
    sample_s = np.sort(sample_times * direction)
    if sample_s[0] < -1e-12 or sample_s[-1] > span + 1e-12:
        raise ValueError("sample times outside [0, t_end]")

    def f(y: np.ndarray) -> np.ndarray:
        return direction * sphere_field(data, y)

    y0 = fock.to_array(state.normalized())
    y = y0
    k1 = f(y)
    s = 0.0
    h = min(_H_MAX, span, max(1e-4, tol ** (1 / 5)))
    segments: list[_Segment] = []
    max_renorm = 0.0
    accepted = rejected = 0

    while True:
        remaining = span - s
        if remaining <= 1e-13 * max(1.0, span):
            break
        h = min(h, remaining, _H_MAX)
        if h < 1e-14 * max(1.0, s):
            raise IntegrationError(f"step size underflow at t={s * direction}")
        y_new, err, k_stages = _dp5_step(f, y, h, k1)
        scale = _SAFETY * tol * (1.0 + np.maximum(np.abs(y), np.abs(y_new)))
        err_norm = float(np.sqrt(np.mean(np.abs(err / scale) ** 2)))
        if err_norm > 1.0:
            rejected += 1
            h *= max(0.2, 0.9 * err_norm ** (-0.2))
            continue

        f_new = k_stages[-1]  # FSAL stage is the derivative at y_new
        # extra half-step for the quintic dense output midpoint
        y_mid, _, k_mid = _dp5_step(f, y, 0.5 * h, k1)
        f_mid = k_mid[-1]
        rhs = np.stack(
            [y, h * k1, y_mid, h * f_mid, y_new, h * f_new]
        )
        segments.append(_Segment(s0=s, h=h, coeffs=_QUINTIC_INV @ rhs))

        norm = float(np.linalg.norm(y_new))
        renorm = abs(norm - 1.0)
        max_renorm = max(max_renorm, renorm)
        if renorm > 10.0 * tol:
            raise IntegrationError(
                f"sphere projection {renorm:.3e} exceeded 10*tol at t={s * direction}"
            )
        y = y_new / norm
        k1 = f_new  # FSAL (projection perturbs it below the local tolerance)
        s += h
        accepted += 1
        if err_norm > 0.0:
            h *= min(5.0, max(0.2, 0.9 * err_norm ** (-0.2)))
        else:
            h *= 5.0

    traj_segments = tuple(segments)
    norms, means, energies, states = [], [], [], []
    for st in sample_s:
        arr = y0 if st <= 0.0 else _interp_raw(traj_segments, st)
        norm = float(np.linalg.norm(arr))
        unit = arr / norm
        norms.append(norm)
        means.append(_cinner(unit, data.n_diag * unit).real)
        energies.append(_energy_dense(data, unit))
        states.append(fock.from_array(state.cutoff, unit))

    order = np.argsort(sample_s * direction)
    times = (sample_s * direction)[order]
    return Trajectory(
        cutoff=state.cutoff,
        times=times,
        states=tuple(states[j] for j in order),
        conserved=ConservedSamples(
            norm=np.array(norms)[order],
            mean_n=np.array(means)[order],
            energy=np.array(energies)[order],
        ),
        initial_mean_n=_cinner(y0, data.n_diag * y0).real,
        initial_energy=_energy_dense(data, y0),
        max_renormalization=max_renorm,
        accepted_steps=accepted,
        rejected_steps=rejected,
        _segments=traj_segments,
        _direction=direction,
    )


def _interp_raw(segments: tuple[_Segment, ...], s: float) -> np.ndarray:
    seg = _bisect_segment(segments, s)
    theta = (s - seg.s0) / seg.h
    powers = np.array([theta**k for k in range(6)])
    return powers @ seg.coeffs


def conserved_drift(traj: Trajectory) -> DriftRecord:
    """Maximum deviation of norm, excitation mean, and energy from their
    values at the initial state."""
    if traj.times.size == 0:
        raise ValueError("empty trajectory")
    return DriftRecord(
        norm=float(np.max(np.abs(traj.conserved.norm - 1.0))),
        mean_n=float(np.max(np.abs(traj.conserved.mean_n - traj.initial_mean_n))),
        energy=float(np.max(np.abs(traj.conserved.energy - traj.initial_energy))),
    )
