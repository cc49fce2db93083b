"""Two-particle spin states with adjustable entanglement.

States are stored as four complex amplitudes ordered (uu, ud, du, dd), where
the first letter is particle one, measured along a common axis in the x-z
plane. The axis is an angle from z: 0 for z, pi/2 for x.

z is the standard basis. For theta != 0 the basis along theta is

    |up_theta>   = cos(theta/2) |up_z> + sin(theta/2) |down_z>
    |down_theta> = sin(theta/2) |up_z> - cos(theta/2) |down_z>

(as theta -> 0 this tends to the z basis up to the sign of |down>), which
for theta = pi/2 gives |up_x> = (|up_z> + |down_z>)/sqrt 2 and
|down_x> = (|up_z> - |down_z>)/sqrt 2. With this sign choice the z-basis form
of a|up,down>_x - b|down,up>_x has amplitudes ((a-b)/2, -(a+b)/2, (a+b)/2, -(a-b)/2).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

OUTCOMES = ("uu", "ud", "du", "dd")
UP, DOWN = "up", "down"
AXES = {"z": 0.0, "x": math.pi / 2}


def _axis_matrix(theta: float) -> np.ndarray:
    # columns are |up_theta>, |down_theta> in z components; each matrix is its own inverse
    if theta == 0.0:
        return np.eye(2)
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array([[c, s], [s, -c]])


def _axis_name(theta: float) -> str:
    for name, angle in AXES.items():
        if abs(theta - angle) < 1e-15:
            return name
    return f"theta={theta:.12g}"


@dataclass(frozen=True)
class TwoQubitState:
    amplitudes: np.ndarray
    angle: float = 0.0

    def __post_init__(self):
        amp = np.asarray(self.amplitudes, dtype=complex)
        if amp.shape != (4,):
            raise ValueError("a two-qubit state has four amplitudes")
        norm = float(np.sum(np.abs(amp) ** 2))
        if abs(norm - 1.0) > 1e-9:
            raise ValueError(f"state is not normalized (sum |c|^2 = {norm})")
        amp.flags.writeable = False
        object.__setattr__(self, "amplitudes", amp)
        object.__setattr__(self, "angle", float(self.angle))

    @property
    def basis(self) -> str:
        return _axis_name(self.angle)

    def amplitude(self, outcome: str) -> complex:
        return complex(self.amplitudes[OUTCOMES.index(outcome)])

    def as_dict(self) -> dict[str, complex]:
        return {k: complex(v) for k, v in zip(OUTCOMES, self.amplitudes)}


def make_partial_entangled(a: float, b: float, normalize: bool = False) -> TwoQubitState:
    """x-basis state a|up>1|down>2 - b|down>1|up>2."""
    norm = math.hypot(a, b)
    if normalize:
        if norm == 0:
            raise ValueError("a and b cannot both be zero")
        a, b = a / norm, b / norm
    elif abs(a * a + b * b - 1.0) > 1e-9:
        raise ValueError(f"a^2 + b^2 must be 1 (got {a * a + b * b}); pass normalize=True to rescale")
    return TwoQubitState(np.array([0.0, a, -b, 0.0], dtype=complex), AXES["x"])


def to_axis(s: TwoQubitState, theta: float) -> TwoQubitState:
    """Re-express ``s`` in the product basis along ``theta`` for both particles."""
    u_old = _axis_matrix(s.angle)
    u_new = _axis_matrix(theta)
    # old components -> z components -> new components; each single-qubit matrix is self-inverse
    m = u_new @ u_old
    amp = np.kron(m, m) @ s.amplitudes
    return TwoQubitState(amp, theta)


def rotate_x_to_z(s: TwoQubitState) -> TwoQubitState:
    if s.basis != "x":
        raise ValueError(f"expected an x-basis state, got basis {s.basis}")
    return to_axis(s, AXES["z"])


def rotate_z_to_x(s: TwoQubitState) -> TwoQubitState:
    if s.basis != "z":
        raise ValueError(f"expected a z-basis state, got basis {s.basis}")
    return to_axis(s, AXES["x"])


def joint_probabilities(s: TwoQubitState) -> np.ndarray:
    """Born probabilities of (uu, ud, du, dd) in the state's own basis."""
    return np.abs(s.amplitudes) ** 2


def _check_given(given_particle: int, given_outcome: str):
    if given_particle not in (1, 2):
        raise ValueError("given_particle must be 1 or 2")
    if given_outcome not in (UP, DOWN):
        raise ValueError(f"given_outcome must be {UP!r} or {DOWN!r}")


def _slice(given_particle: int, given_outcome: str) -> list[int]:
    # indices into (uu, ud, du, dd) of the other particle's (up, down) given the condition
    k = 0 if given_outcome == UP else 1
    return [2 * k, 2 * k + 1] if given_particle == 1 else [k, 2 + k]


def conditional_amplitudes(s: TwoQubitState, given_particle: int = 1,
                           given_outcome: str = UP) -> np.ndarray:
    """Normalised (up, down) amplitudes of the other particle after the given result."""
    _check_given(given_particle, given_outcome)
    amp = s.amplitudes[_slice(given_particle, given_outcome)]
    norm = math.sqrt(float(np.sum(np.abs(amp) ** 2)))
    if norm == 0:
        raise ValueError(f"particle {given_particle} cannot be found {given_outcome} in this state")
    return amp / norm


def conditional_distribution(s: TwoQubitState, given_particle: int = 1,
                             given_outcome: str = UP) -> np.ndarray:
    """(P(up), P(down)) for the other particle, conditioned on the given result."""
    _check_given(given_particle, given_outcome)
    p = joint_probabilities(s)[_slice(given_particle, given_outcome)]
    total = p.sum()
    if total <= 0:
        raise ValueError(f"particle {given_particle} cannot be found {given_outcome} in this state")
    return p / total


def concurrence(s: TwoQubitState) -> float:
    c = s.amplitudes
    return float(2.0 * abs(c[0] * c[3] - c[1] * c[2]))


@dataclass(frozen=True)
class MeasurementRecord:
    counts: dict[str, int]
    n: int
    seed: int
    axis: str

    def conditional_frequency(self, given_particle: int = 1, given_outcome: str = UP) -> np.ndarray:
        _check_given(given_particle, given_outcome)
        idx = _slice(given_particle, given_outcome)
        sel = np.array([self.counts[OUTCOMES[i]] for i in idx], dtype=float)
        if sel.sum() == 0:
            raise ValueError("no events with the requested outcome")
        return sel / sel.sum()


def sample_measurements(s: TwoQubitState, n: int, seed: int) -> MeasurementRecord:
    if n < 1:
        raise ValueError("need at least one measurement")
    rng = np.random.default_rng(seed)
    p = joint_probabilities(s)
    counts = rng.multinomial(n, p / p.sum())
    return MeasurementRecord(dict(zip(OUTCOMES, map(int, counts))), n, seed, s.basis)
