"""Harmonic Hartree energy and its vector-field representations.

On the unit sphere the energy reads

    H(v) = 1/2 <v, N v> + 1/2 sum_i |Re<v, a_i v>|^2 - 1/2 sum_i |Re<v, b_i v>|^2

with N the excitation operator.  Three representations of the induced
Hamiltonian vector field are exposed:

* ``FULL``   -- the ambient field, including the (|v|^2 - 1) off-sphere term;
* ``SPHERE`` -- the restriction to the unit sphere (drops that term), which
  is tangent to the sphere and leaves every centered subspace invariant;
* ``CHART``  -- the quotient-chart field obtained by removing the component
  along i*v; it satisfies <v, X(v)> = 0 and vanishes exactly at the
  relative equilibria (unit excitation eigenvectors).

Every expectation value is evaluated through the ladder operations of
:mod:`.fock`; no coefficient formulas are hand-expanded here.  Scalar
prefactors that are exactly zero short-circuit the corresponding operator
application, so eigenvector inputs never touch the cutoff boundary.
"""

from __future__ import annotations

from enum import Enum

from . import fock
from .errors import NormalizationError, TruncationError
from .fock import FockVector


class FieldKind(Enum):
    FULL = "full"
    SPHERE = "sphere"
    CHART = "chart"


def first_moment_a(v: FockVector, i: int) -> float:
    """Re<v, a_i v>, proportional to the q_i position expectation."""
    return fock.inner(v, fock.apply_lowering_a(i, v)).real


def first_moment_b(v: FockVector, i: int) -> float:
    """Re<v, b_i v>, proportional to the p_i position expectation."""
    return fock.inner(v, fock.apply_lowering_b(i, v)).real


def energy(v: FockVector) -> float:
    """Energy of a unit state (norm checked to 1e-10); phase invariant."""
    if abs(v.norm - 1.0) > 1e-10:
        raise NormalizationError(f"energy requires a unit state, norm={v.norm}")
    d = v.cutoff.d
    mean_n = fock.inner(v, fock.apply_excitation(v)).real
    quad = 0.0
    for i in range(d):
        quad += first_moment_a(v, i) ** 2 - first_moment_b(v, i) ** 2
    return 0.5 * mean_n + 0.5 * quad


def _pair_lowered_scalar(v: FockVector) -> float:
    """Re<v, sum_i (b_i b_i - a_i a_i) v>.

    Equals Re<v, sum_i (b*_i b*_i - a_i a_i) v> by self-conjugacy, but uses
    only lowering so it is exact for any support.
    """
    acc = 0.0
    for i in range(v.cutoff.d):
        bb = fock.apply_lowering_b(i, fock.apply_lowering_b(i, v))
        aa = fock.apply_lowering_a(i, fock.apply_lowering_a(i, v))
        acc += fock.inner(v, bb - aa).real
    return acc


def _position_op_a(i: int, v: FockVector) -> FockVector:
    return fock.apply_lowering_a(i, v) + fock.apply_raising_a(i, v)


def _position_op_b(i: int, v: FockVector) -> FockVector:
    return fock.apply_lowering_b(i, v) + fock.apply_raising_b(i, v)


def _guard(term: FockVector, what: str) -> FockVector:
    if term.truncated:
        raise TruncationError(
            f"{what} lost amplitude past the cutoff; increase K"
        )
    return term


def vector_field(kind: FieldKind, v: FockVector) -> FockVector:
    """Hamiltonian vector field in the requested representation.

    Raises TruncationError when a contributing ladder application (nonzero
    prefactor) crosses the cutoff boundary.
    """
    d = v.cutoff.d
    mean_n = fock.inner(v, fock.apply_excitation(v)).real
    s2 = _pair_lowered_scalar(v)

    if kind is FieldKind.CHART:
        out = fock.apply_excitation(v) + (-mean_n) * v
        for i in range(d):
            cb = first_moment_b(v, i)
            if cb != 0.0:
                out = out - cb * _guard(_position_op_b(i, v), "b_i + b*_i") + (2.0 * cb * cb) * v
            ca = first_moment_a(v, i)
            if ca != 0.0:
                out = out + ca * _guard(_position_op_a(i, v), "a_i + a*_i") + (-2.0 * ca * ca) * v
        return -1j * out

    # shared sphere part: N v + (mean_n/2 + s2/2) v - sum_i cb (b+b*) v + sum_i ca (a+a*) v
    out = fock.apply_excitation(v) + (0.5 * mean_n + 0.5 * s2) * v
    for i in range(d):
        cb = first_moment_b(v, i)
        if cb != 0.0:
            out = out - cb * _guard(_position_op_b(i, v), "b_i + b*_i")
        ca = first_moment_a(v, i)
        if ca != 0.0:
            out = out + ca * _guard(_position_op_a(i, v), "a_i + a*_i")

    if kind is FieldKind.FULL:
        w = v.norm_sq - 1.0
        if w != 0.0:
            # off-sphere correction: (w/4) * (2N + sum_i (bb + b*b* - aa - a*a*)) v
            corr = 2.0 * fock.apply_excitation(v)
            for i in range(d):
                bb = fock.apply_lowering_b(i, fock.apply_lowering_b(i, v))
                b2 = _guard(
                    fock.apply_raising_b(i, fock.apply_raising_b(i, v)), "b*_i b*_i"
                )
                aa = fock.apply_lowering_a(i, fock.apply_lowering_a(i, v))
                a2 = _guard(
                    fock.apply_raising_a(i, fock.apply_raising_a(i, v)), "a*_i a*_i"
                )
                corr = corr + bb + b2 - aa - a2
            out = out + (0.25 * w) * corr
    elif kind is not FieldKind.SPHERE:
        raise ValueError(f"unknown field kind {kind!r}")

    return -1j * out
