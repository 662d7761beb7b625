"""The two-atom interaction pipeline and the single-atom interference scheme.

Each atom j passes its cavity (resonant swap), a dispersive region adding a
phase phi_j to the excited branch, and a Ramsey zone performing an X rotation
by the pulse angle 2*theta_j.  The composite per-atom map is a 2x2 unitary and
the joint action on the two-qubit amplitude vector is its Kronecker product.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import NotNormalized
from .qstate import SingleExcitationState, TwoQubitState, _check_unit_norm

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class ProtocolAngles:
    """Apparatus settings (radians): Ramsey half-angles and dispersive phases."""

    theta1: float
    theta2: float
    phi1: float
    phi2: float

    def __post_init__(self):
        for name in ("theta1", "theta2", "phi1", "phi2"):
            v = float(getattr(self, name))
            if not math.isfinite(v):
                raise ValueError(f"{name} must be finite")
            object.__setattr__(self, name, v)

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.theta1, self.theta2, self.phi1, self.phi2)

    def canonical(self) -> "ProtocolAngles":
        """Reduce to theta in [0, pi) and phi in [0, 2*pi).

        Outcome probabilities are periodic with period pi in each theta and
        2*pi in each phi, so this relabels the same apparatus settings.
        """
        return ProtocolAngles(
            self.theta1 % math.pi,
            self.theta2 % math.pi,
            self.phi1 % TWO_PI,
            self.phi2 % TWO_PI,
        )


def atom_matrix(theta: float, phi: float) -> np.ndarray:
    """2x2 unitary for one atom's pass, as a complex ndarray.

    Product of the X rotation by 2*theta, the phase gate diag(1, e^{i phi})
    and the swap imprint diag(1, -i); the rightmost factor acts first.
    """
    if not (math.isfinite(theta) and math.isfinite(phi)):
        raise ValueError("angles must be finite")
    c, s = math.cos(theta), math.sin(theta)
    ph = cmath.exp(1j * phi)
    return np.array([[c, -s * ph], [-1j * s, -1j * c * ph]], dtype=complex)


@dataclass(frozen=True)
class FinalCoefficients:
    """Joint atomic amplitudes after both atoms exit: gg, ge, eg, ee order."""

    gg: complex
    ge: complex
    eg: complex
    ee: complex

    @property
    def amps(self) -> tuple[complex, complex, complex, complex]:
        return (self.gg, self.ge, self.eg, self.ee)

    @property
    def norm_sq(self) -> float:
        return sum(abs(z) ** 2 for z in self.amps)


def _final_amplitudes(
    a00: complex,
    a01: complex,
    a10: complex,
    a11: complex,
    theta1: float,
    theta2: float,
    phi1: float,
    phi2: float,
) -> tuple[complex, complex, complex, complex]:
    """Kronecker action of the two per-atom matrices, in scalar arithmetic.

    Matches atom_matrix entrywise; kept free of array overhead because the
    angle search evaluates it in a tight loop.
    """
    c1, s1 = math.cos(theta1), math.sin(theta1)
    e1 = cmath.exp(1j * phi1)
    c2, s2 = math.cos(theta2), math.sin(theta2)
    e2 = cmath.exp(1j * phi2)
    m1_00, m1_01 = c1, -s1 * e1
    m1_10, m1_11 = -1j * s1, -1j * c1 * e1
    m2_00, m2_01 = c2, -s2 * e2
    m2_10, m2_11 = -1j * s2, -1j * c2 * e2
    # Row transform on the first qubit index ...
    p0 = m1_00 * a00 + m1_01 * a10
    p1 = m1_00 * a01 + m1_01 * a11
    q0 = m1_10 * a00 + m1_11 * a10
    q1 = m1_10 * a01 + m1_11 * a11
    # ... then on the second.
    gg = p0 * m2_00 + p1 * m2_01
    ge = p0 * m2_10 + p1 * m2_11
    eg = q0 * m2_00 + q1 * m2_01
    ee = q0 * m2_10 + q1 * m2_11
    return gg, ge, eg, ee


def apply_protocol(state: TwoQubitState, angles: ProtocolAngles) -> FinalCoefficients:
    """Send a normalized state through both arms of the apparatus.

    Returns the joint atomic amplitudes; the Kronecker convention pairs
    (amp00, amp01, amp10, amp11) with (gg, ge, eg, ee).
    """
    _check_unit_norm(state.norm_sq)
    return FinalCoefficients(*_final_amplitudes(*state.amps, *angles.as_tuple()))


def phase_identity_residual(state: TwoQubitState, angles: ProtocolAngles) -> float:
    """How far the pipeline is from its determinant phase identity.

    The output determinant gg*ee - ge*eg equals the input determinant times
    -e^{i(phi1+phi2)}, so the returned magnitude is rounding-level for every
    state and angle tuple.
    """
    out = apply_protocol(state, angles)
    a, b, c, d = state.amps
    det_in = a * d - b * c
    det_out = out.gg * out.ee - out.ge * out.eg
    return abs(det_out + cmath.exp(1j * (angles.phi1 + angles.phi2)) * det_in)


def single_particle_probability(state: SingleExcitationState, phi: float) -> float:
    """Excitation probability of the probe atom in the single-atom scheme.

    The atom swaps with cavity A, acquires the dispersive phase on its excited
    branch and is mixed by a half pulse at cavity B, so the two paths
    interfere: the result equals (1 + 2|amp_a*amp_b| cos(phi - arg amp_a
    + arg amp_b)) / 2.
    """
    _check_unit_norm(state.norm_sq)
    amp_e = state.amp_a + state.amp_b * cmath.exp(1j * phi)
    return 0.5 * abs(amp_e) ** 2


def single_particle_visibility(state: SingleExcitationState, grid_points: int) -> float:
    """Fringe contrast of the swept single-atom pattern.

    Sweeps phi over a uniform grid of [0, 2*pi) and returns
    (max - min) / (max + min); discretization error is bounded by
    pi^2 * (2|amp_a*amp_b|) / grid_points^2.
    """
    if grid_points < 8:
        raise ValueError("grid_points must be at least 8")
    _check_unit_norm(state.norm_sq)
    step = TWO_PI / grid_points
    probs = [single_particle_probability(state, k * step) for k in range(grid_points)]
    p_max, p_min = max(probs), min(probs)
    return (p_max - p_min) / (p_max + p_min)
