"""Two-qubit pure states: normalization, concurrence, random generation, file I/O.

Amplitudes are ordered (amp00, amp01, amp10, amp11) over the product basis
|0>|0>, |0>|1>, |1>|0>, |1>|1> of the two cavity modes.  States are immutable
values and all operations are pure functions.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import NotNormalized, ParseError, ZeroState

# Unit-norm tolerance on the sum of squared moduli.  Inputs further off than
# this are treated as user errors rather than rounding noise.
NORM_TOL = 1e-9

# Below this modulus an amplitude counts as zero when deciding degeneracy.
ZERO_TOL = 1e-15


def _as_finite_complex(name: str, value) -> complex:
    z = complex(value)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise ValueError(f"{name} must be finite, got {value!r}")
    return z


def _check_unit_norm(norm_sq: float, what: str = "state") -> None:
    if abs(norm_sq - 1.0) > NORM_TOL:
        raise NotNormalized(
            f"{what} has squared norm {norm_sq!r}; expected 1 within {NORM_TOL}"
        )


@dataclass(frozen=True)
class TwoQubitState:
    """Pure state of the two cavity qubits."""

    amp00: complex
    amp01: complex
    amp10: complex
    amp11: complex

    def __post_init__(self):
        for name in ("amp00", "amp01", "amp10", "amp11"):
            object.__setattr__(self, name, _as_finite_complex(name, getattr(self, name)))

    @property
    def amps(self) -> tuple[complex, complex, complex, complex]:
        return (self.amp00, self.amp01, self.amp10, self.amp11)

    @property
    def vector(self) -> np.ndarray:
        return np.array(self.amps, dtype=complex)

    @property
    def norm_sq(self) -> float:
        return sum(abs(a) ** 2 for a in self.amps)

    @classmethod
    def from_vector(cls, vec) -> "TwoQubitState":
        a, b, c, d = (complex(v) for v in vec)
        return cls(a, b, c, d)


@dataclass(frozen=True)
class SingleExcitationState:
    """One shared photon between the two cavities.

    amp_a multiplies |0>_A |1>_B (photon in cavity B), amp_b multiplies
    |1>_A |0>_B (photon in cavity A).
    """

    amp_a: complex
    amp_b: complex

    def __post_init__(self):
        object.__setattr__(self, "amp_a", _as_finite_complex("amp_a", self.amp_a))
        object.__setattr__(self, "amp_b", _as_finite_complex("amp_b", self.amp_b))

    @property
    def norm_sq(self) -> float:
        return abs(self.amp_a) ** 2 + abs(self.amp_b) ** 2


def normalize(state: TwoQubitState) -> TwoQubitState:
    """Rescale to unit norm, preserving the direction (amplitude ratios).

    Raises ZeroState when every amplitude has modulus below ZERO_TOL.
    """
    if all(abs(a) < ZERO_TOL for a in state.amps):
        raise ZeroState("cannot normalize a state whose amplitudes are all zero")
    scale = 1.0 / math.sqrt(state.norm_sq)
    return TwoQubitState(*(a * scale for a in state.amps))


def concurrence_exact(state: TwoQubitState) -> float:
    """Concurrence of a normalized pure state: 2 |amp00*amp11 - amp01*amp10|.

    0 for product states, 1 for maximally entangled states.
    """
    _check_unit_norm(state.norm_sq)
    a, b, c, d = state.amps
    return 2.0 * abs(a * d - b * c)


def haar_state(rng: np.random.Generator) -> TwoQubitState:
    """Draw one state uniformly from the unit sphere of the 4-dim complex space.

    Four independent standard complex Gaussians (eight standard normals in
    (re, im) pairs), then normalization.
    """
    z = rng.standard_normal(8)
    return normalize(
        TwoQubitState(
            complex(z[0], z[1]),
            complex(z[2], z[3]),
            complex(z[4], z[5]),
            complex(z[6], z[7]),
        )
    )


def random_pure_state(seed: int) -> TwoQubitState:
    """Haar-random normalized state, deterministic for a fixed seed (PCG64)."""
    return haar_state(np.random.Generator(np.random.PCG64(seed)))


_ALLOWED_KEYS = {"amplitudes", "normalize"}


def parse_state(text: str, auto_normalize: bool = False) -> TwoQubitState:
    """Read a state from its JSON document form.

    The document is an object with key "amplitudes": a list of four [re, im]
    pairs in (amp00, amp01, amp10, amp11) order, plus an optional boolean
    "normalize".  Unit norm is required unless normalization is requested via
    the document key or `auto_normalize`.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise ParseError("state document must be a JSON object")
    unknown = set(doc) - _ALLOWED_KEYS
    if unknown:
        raise ParseError(f"unknown keys in state document: {sorted(unknown)}")
    if "amplitudes" not in doc:
        raise ParseError('state document is missing the "amplitudes" key')
    raw = doc["amplitudes"]
    if not isinstance(raw, list) or len(raw) != 4:
        raise ParseError('"amplitudes" must be a list of four [re, im] pairs')
    amps = []
    for i, entry in enumerate(raw):
        if not isinstance(entry, list) or len(entry) != 2:
            raise ParseError(f"amplitude {i} must be a two-element [re, im] list")
        re, im = entry
        for part in (re, im):
            if isinstance(part, bool) or not isinstance(part, (int, float)):
                raise ParseError(f"amplitude {i} components must be numbers")
            if not math.isfinite(part):
                raise ParseError(f"amplitude {i} components must be finite")
        amps.append(complex(re, im))
    flag = doc.get("normalize", False)
    if not isinstance(flag, bool):
        raise ParseError('"normalize" must be a boolean')
    state = TwoQubitState(*amps)
    if flag or auto_normalize:
        return normalize(state)
    _check_unit_norm(state.norm_sq)
    return state


def serialize_state(state: TwoQubitState) -> str:
    """JSON document for a state; parse_state(serialize_state(s)) is exact."""
    return json.dumps(
        {"amplitudes": [[a.real, a.imag] for a in state.amps]}
    )
