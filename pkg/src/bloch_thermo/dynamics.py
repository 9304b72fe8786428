"""Stroke trajectories on the Bloch ball.

Every generator used by the cycles is linear-affine in Bloch coordinates,
``db/dt = M b + c``, and is also available as an explicit Lindblad pair
(Hamiltonian, jump operators) for the density-matrix oracle. The two
representations are derived independently; :func:`evolve_lindblad` uses
the first, :func:`evolve_density_oracle` the second.

Rotation sign convention: ``UnitaryRotation(axis, omega)`` gives
``db/dt = omega * axis x b``. About +x with ``omega > 0`` this decreases the
in-plane angle ``atan2(b_y, b_z)``, i.e. it turns states with ``b_y >= 0``
towards +z.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np

from .bloch import (
    PAULI,
    SIGMA_X,
    BlochState,
    DensityMatrix,
    LocalField,
    bloch_to_matrix,
    clamp_to_ball,
    matrix_to_bloch,
    pure_state_ket,
)
from .errors import (
    DegenerateTrajectory,
    InvalidTarget,
    NegativeBranch,
    NonPhysicalMatrix,
    OutOfPlane,
    StepTooLarge,
    ZeroBlochVector,
)

DEFAULT_SAMPLES = 10001
DEFAULT_STEP = 1e-3
PLANE_TOL = 1e-12

_KET0 = np.array([1.0, 0.0], dtype=complex)
_KET1 = np.array([0.0, 1.0], dtype=complex)


def _unit(vec, what: str) -> tuple[float, float, float]:
    v = np.asarray(vec, dtype=float)
    n = np.linalg.norm(v)
    if v.shape != (3,) or not n > 0:
        raise ValueError(f"{what} must be a non-zero 3-vector")
    return tuple(float(x) for x in v / n)


def _positive(value: float, what: str) -> float:
    if not value > 0:
        raise ValueError(f"{what} must be positive, got {value!r}")
    return float(value)


def _skew(a) -> np.ndarray:
    ax, ay, az = a
    return np.array([[0.0, -az, ay], [az, 0.0, -ax], [-ay, ax, 0.0]])


@dataclass(frozen=True)
class UnitaryRotation:
    axis: tuple[float, float, float]
    omega: float

    def __post_init__(self):
        object.__setattr__(self, "axis", _unit(self.axis, "rotation axis"))
        if self.omega == 0 or not math.isfinite(self.omega):
            raise ValueError("rotation rate must be non-zero and finite")

    def bloch_affine(self):
        return self.omega * _skew(self.axis), np.zeros(3)

    def propagate(self, b0, t) -> np.ndarray:
        """Rodrigues rotation of ``b0`` by ``omega * t`` for each time in ``t``."""
        k = np.array(self.axis)
        b0 = np.asarray(b0, dtype=float)
        ang = self.omega * np.asarray(t, dtype=float)[:, None]
        return (b0 * np.cos(ang) + np.cross(k, b0) * np.sin(ang)
                + k * np.dot(k, b0) * (1.0 - np.cos(ang)))

    def lindblad_operators(self):
        H = 0.5 * self.omega * np.einsum("i,ijk->jk", np.array(self.axis), PAULI)
        return H, []


@dataclass(frozen=True)
class SigmaXDissipator:
    """Single jump operator ``sqrt(gamma) sigma_x``; contracts b_y, b_z at rate 2 gamma."""

    gamma: float

    def __post_init__(self):
        _positive(self.gamma, "gamma")

    def bloch_affine(self):
        return np.diag([0.0, -2.0 * self.gamma, -2.0 * self.gamma]), np.zeros(3)

    def propagate(self, b0, t) -> np.ndarray:
        decay = np.exp(-2.0 * self.gamma * np.asarray(t, dtype=float))
        return np.asarray(b0, dtype=float) * np.stack([np.ones_like(decay), decay, decay], axis=-1)

    def lindblad_operators(self):
        return np.zeros((2, 2), dtype=complex), [math.sqrt(self.gamma) * SIGMA_X]


@dataclass(frozen=True)
class PurifyingDissipator:
    """Jump operators ``sqrt(lam)|psi><0|`` and ``sqrt(lam)|psi><1|`` with |psi> along ``direction``."""

    direction: tuple[float, float, float]
    lam: float

    def __post_init__(self):
        object.__setattr__(self, "direction", _unit(self.direction, "target direction"))
        _positive(self.lam, "lambda")

    def bloch_affine(self):
        return -self.lam * np.eye(3), self.lam * np.array(self.direction)

    def propagate(self, b0, t) -> np.ndarray:
        n = np.array(self.direction)
        decay = np.exp(-self.lam * np.asarray(t, dtype=float))[:, None]
        return n + (np.asarray(b0, dtype=float) - n) * decay

    def lindblad_operators(self):
        psi = pure_state_ket(self.direction)
        s = math.sqrt(self.lam)
        return np.zeros((2, 2), dtype=complex), [s * np.outer(psi, _KET0.conj()),
                                                  s * np.outer(psi, _KET1.conj())]


@dataclass(frozen=True)
class SpectralDissipator:
    """Four jump operators ``sqrt(lam p_i)|psi_i><j|`` built from the target's eigenbasis."""

    target: DensityMatrix
    lam: float

    def __post_init__(self):
        if not isinstance(self.target, DensityMatrix):
            object.__setattr__(self, "target", DensityMatrix(self.target))
        _positive(self.lam, "lambda")

    @property
    def target_bloch(self) -> np.ndarray:
        return matrix_to_bloch(self.target.matrix)

    def bloch_affine(self):
        return -self.lam * np.eye(3), self.lam * self.target_bloch

    def propagate(self, b0, t) -> np.ndarray:
        bs = self.target_bloch
        decay = np.exp(-self.lam * np.asarray(t, dtype=float))[:, None]
        return bs + (np.asarray(b0, dtype=float) - bs) * decay

    def lindblad_operators(self):
        p, vecs = self.target.eigh()
        p = np.clip(p, 0.0, None)
        ops = []
        for pk, psi in zip(p, vecs.T):
            s = math.sqrt(self.lam * pk)
            ops.append(s * np.outer(psi, _KET0.conj()))
            ops.append(s * np.outer(psi, _KET1.conj()))
        return np.zeros((2, 2), dtype=complex), ops


GeneratorSpec = Union[UnitaryRotation, SigmaXDissipator, PurifyingDissipator, SpectralDissipator]


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Time-ordered Bloch samples of one stroke.

    ``rates`` holds ``db/dt`` at each sample when known analytically; the
    ledger falls back to finite differences otherwise.
    """

    t: np.ndarray
    b: np.ndarray
    rates: np.ndarray | None = None
    generator: GeneratorSpec | None = field(default=None, repr=False)

    def __post_init__(self):
        t = np.array(self.t, dtype=float)
        b = clamp_to_ball(self.b)
        if t.ndim != 1 or b.shape != (t.size, 3):
            raise DegenerateTrajectory(f"inconsistent shapes t{t.shape} b{b.shape}")
        if t.size < 2:
            raise DegenerateTrajectory("a trajectory needs at least 2 samples")
        if np.any(np.diff(t) <= 0):
            raise DegenerateTrajectory("sample times must be strictly increasing")
        arrays = {"t": t, "b": b}
        if self.rates is not None:
            rates = np.array(self.rates, dtype=float)
            if rates.shape != b.shape:
                raise DegenerateTrajectory("rates must match the sample array")
            arrays["rates"] = rates
        for name, arr in arrays.items():
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    def __len__(self):
        return self.t.size

    @property
    def duration(self) -> float:
        return float(self.t[-1] - self.t[0])

    @property
    def modulus(self) -> np.ndarray:
        return np.linalg.norm(self.b, axis=1)

    @property
    def start(self) -> BlochState:
        return BlochState(tuple(self.b[0]))

    @property
    def end(self) -> BlochState:
        return BlochState(tuple(self.b[-1]))

    def state(self, k: int) -> BlochState:
        return BlochState(tuple(self.b[k]))

    def states(self):
        return [BlochState(tuple(row)) for row in self.b]


def _check_samples(samples: int) -> int:
    if int(samples) != samples or samples < 2:
        raise DegenerateTrajectory(f"samples must be an integer >= 2, got {samples!r}")
    return int(samples)


def _constant(start: BlochState, samples: int) -> Trajectory:
    # Zero-length strokes are held over a unit window so times stay increasing.
    b = np.tile(start.vector, (samples, 1))
    return Trajectory(np.linspace(0.0, 1.0, samples), b, np.zeros_like(b))


def _from_generator(gen, start: BlochState, duration: float, samples: int) -> Trajectory:
    t = np.linspace(0.0, duration, samples)
    b = clamp_to_ball(gen.propagate(start.vector, t))
    M, c = gen.bloch_affine()
    return Trajectory(t, b, b @ M.T + c, gen)


def _require_plane(state: BlochState) -> None:
    if abs(state.b[0]) > PLANE_TOL:
        raise OutOfPlane(f"b_x = {state.b[0]!r} is not zero; stroke requires the b_x = 0 plane")


def rotate_isentropic(start: BlochState, delta_theta: float, samples: int = DEFAULT_SAMPLES,
                      rate: float = 1.0) -> Trajectory:
    """Coherent rotation about +x changing ``atan2(b_y, b_z)`` by ``delta_theta``.

    The rotation runs at ``|omega| = rate`` so the stroke lasts
    ``|delta_theta| / rate``; a negative ``delta_theta`` uses ``omega > 0``.
    """
    samples = _check_samples(samples)
    _require_plane(start)
    _positive(rate, "rate")
    if delta_theta == 0:
        return _constant(start, samples)
    gen = UnitaryRotation((1.0, 0.0, 0.0), -math.copysign(rate, delta_theta))
    return _from_generator(gen, start, abs(delta_theta) / rate, samples)


def contract_isochoric(start: BlochState, B_target: float, gamma: float = 1.0,
                       samples: int = DEFAULT_SAMPLES) -> Trajectory:
    """Radial contraction to modulus ``B_target`` under the sigma_x dissipator."""
    samples = _check_samples(samples)
    _require_plane(start)
    B0 = start.modulus()
    if not 0 < B_target < B0:
        raise InvalidTarget(f"contraction needs 0 < B_target < |start| = {B0!r}, got {B_target!r}")
    gen = SigmaXDissipator(gamma)
    return _from_generator(gen, start, math.log(B0 / B_target) / (2.0 * gamma), samples)


def purify_isochoric(start: BlochState, B_target: float, lam: float = 1.0,
                     samples: int = DEFAULT_SAMPLES) -> Trajectory:
    """Radial expansion to modulus ``B_target`` towards the pure state along ``start``."""
    samples = _check_samples(samples)
    B0 = start.modulus()
    if B0 == 0:
        raise ZeroBlochVector("purifying stroke needs a defined start direction")
    if not B0 < B_target < 1:
        raise InvalidTarget(f"purification needs |start| = {B0!r} < B_target < 1, got {B_target!r}")
    gen = PurifyingDissipator(tuple(start.direction()), lam)
    return _from_generator(gen, start, math.log((1.0 - B0) / (1.0 - B_target)) / lam, samples)


def relax_to_target(start: BlochState, target, lam: float = 1.0, duration: float = 1.0,
                    samples: int = DEFAULT_SAMPLES) -> Trajectory:
    """Exponential relaxation towards ``target`` under the spectral dissipator."""
    samples = _check_samples(samples)
    _positive(duration, "duration")
    gen = SpectralDissipator(target if isinstance(target, DensityMatrix) else DensityMatrix(target), lam)
    return _from_generator(gen, start, duration, samples)


def spectral_isochoric(start: BlochState, B_target: float, lam: float = 1.0,
                       target_modulus: float | None = None,
                       samples: int = DEFAULT_SAMPLES) -> Trajectory:
    """Radial expansion to ``B_target`` by relaxing towards a mixed target further out.

    The target sits on the same ray at ``target_modulus`` (default halfway
    between ``B_target`` and 1); the stroke stops when ``B_target`` is reached.
    """
    B0 = start.modulus()
    if B0 == 0:
        raise ZeroBlochVector("spectral stroke needs a defined start direction")
    if not B0 < B_target < 1:
        raise InvalidTarget(f"expansion needs |start| = {B0!r} < B_target < 1, got {B_target!r}")
    if target_modulus is None:
        target_modulus = 0.5 * (1.0 + B_target)
    if not B_target < target_modulus <= 1:
        raise InvalidTarget("target modulus must lie in (B_target, 1]")
    rho_star = bloch_to_matrix(target_modulus * start.direction())
    duration = math.log((target_modulus - B0) / (target_modulus - B_target)) / lam
    return relax_to_target(start, rho_star, lam, duration, samples)


def _linear(u):
    return u, np.ones_like(u)


def _quadratic(u):
    return u * u, 2.0 * u


SCHEDULES: dict[str, Callable] = {"linear": _linear, "quadratic": _quadratic}


def _in_plane_basis(field: LocalField):
    vhat = field.unit
    perp = np.cross(vhat, [1.0, 0.0, 0.0])
    if np.linalg.norm(perp) < 1e-8:
        perp = np.cross(vhat, [0.0, 1.0, 0.0])
    return vhat, perp / np.linalg.norm(perp)


def isothermal_path(T: float, theta_start: float, theta_end: float, field: LocalField,
                    samples: int = DEFAULT_SAMPLES, k_B: float = 1.0, duration: float = 1.0,
                    schedule: Union[str, Callable] = "linear") -> Trajectory:
    """Quasi-static path on the surface ``B = tanh(eps cos(theta) / (k_B T))``.

    Constructed geometrically in the plane spanned by the field and
    ``v_hat x x_hat`` (the b_x = 0 plane for a field along z). ``schedule``
    maps normalised time ``u`` in [0, 1] to ``(fraction, d fraction/du)``.
    """
    samples = _check_samples(samples)
    _positive(T, "temperature")
    _positive(k_B, "k_B")
    for th in (theta_start, theta_end):
        if not (abs(th) < math.pi / 2 and math.cos(th) > 0):
            raise NegativeBranch(f"theta = {th!r} leaves the positive-temperature branch")
    eps = field.epsilon
    vhat, perp = _in_plane_basis(field)
    beta = eps / (k_B * T)
    if theta_start == theta_end:
        B = math.tanh(beta * math.cos(theta_start))
        return _constant(BlochState(tuple(B * (math.cos(theta_start) * vhat + math.sin(theta_start) * perp))),
                         samples)
    sched = SCHEDULES[schedule] if isinstance(schedule, str) else schedule
    _positive(duration, "duration")
    t = np.linspace(0.0, duration, samples)
    frac, dfrac = sched(t / duration)
    span = theta_end - theta_start
    theta = theta_start + span * np.asarray(frac)
    dtheta = span * np.asarray(dfrac) / duration
    c, s = np.cos(theta), np.sin(theta)
    B = np.tanh(beta * c)
    dB_dtheta = -(1.0 - B * B) * beta * s
    radial = c[:, None] * vhat + s[:, None] * perp
    tangent = -s[:, None] * vhat + c[:, None] * perp
    b = B[:, None] * radial
    db = dtheta[:, None] * (dB_dtheta[:, None] * radial + B[:, None] * tangent)
    return Trajectory(t, b, db)


def _step_count(duration: float, step: float) -> int:
    _positive(step, "step")
    if step > duration * (1 + 1e-12):
        raise StepTooLarge(f"step {step!r} exceeds duration {duration!r}")
    n = round(duration / step)
    if abs(n * step - duration) > 1e-9 * duration:
        n = math.ceil(duration / step)
    return max(int(n), 1)


def rk4_affine(M: np.ndarray, c: np.ndarray, b0: np.ndarray, h: float, n: int) -> np.ndarray:
    """Classical RK4 for ``db/dt = M b + c``; broadcasts over leading axes.

    Returns an array of shape ``(n + 1, ..., 3)``.
    """
    M = np.asarray(M, dtype=float)
    c = np.asarray(c, dtype=float)

    def rhs(b):
        return np.einsum("...ij,...j->...i", M, b) + c

    out = np.empty((n + 1,) + np.shape(b0))
    b = out[0] = np.asarray(b0, dtype=float)
    for k in range(n):
        k1 = rhs(b)
        k2 = rhs(b + 0.5 * h * k1)
        k3 = rhs(b + 0.5 * h * k2)
        k4 = rhs(b + h * k3)
        b = out[k + 1] = b + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return out


def evolve_lindblad(gen: GeneratorSpec, start: BlochState, duration: float,
                    step: float = DEFAULT_STEP) -> Trajectory:
    """Fixed-step RK4 integration of the Bloch equation of motion for ``gen``."""
    _positive(duration, "duration")
    n = _step_count(duration, step)
    M, c = gen.bloch_affine()
    b = rk4_affine(M, c, start.vector, duration / n, n)
    b = clamp_to_ball(b)
    return Trajectory(np.linspace(0.0, duration, n + 1), b, b @ M.T + c, gen)


def lindblad_rhs(rho: np.ndarray, H: np.ndarray, L: np.ndarray, K: np.ndarray) -> np.ndarray:
    """``-i[H, rho] + sum_k L_k rho L_k^+ - {K, rho}/2`` with ``K = sum_k L_k^+ L_k``.

    ``L`` has shape ``(..., k, 2, 2)``; everything broadcasts over leading axes.
    """
    out = -1j * (H @ rho - rho @ H) - 0.5 * (K @ rho + rho @ K)
    if L.shape[-3]:
        out = out + np.sum(L @ rho[..., None, :, :] @ np.conj(np.swapaxes(L, -1, -2)), axis=-3)
    return out


def stack_operators(gens) -> tuple[np.ndarray, np.ndarray]:
    """Stack the Lindblad operators of same-variant generators for batched runs."""
    Hs, Ls = [], []
    for g in gens:
        H, ops = g.lindblad_operators()
        Hs.append(H)
        Ls.append(np.array(ops, dtype=complex).reshape(len(ops), 2, 2))
    return np.array(Hs), np.array(Ls)


def oracle_integrate(H: np.ndarray, L: np.ndarray, rho0: np.ndarray, h: float, n: int) -> np.ndarray:
    """RK4 on the matrix master equation; returns shape ``(n + 1, ..., 2, 2)``."""
    H = np.asarray(H, dtype=complex)
    L = np.asarray(L, dtype=complex)
    K = np.sum(np.conj(np.swapaxes(L, -1, -2)) @ L, axis=-3)
    out = np.empty((n + 1,) + np.shape(rho0), dtype=complex)
    rho = out[0] = np.asarray(rho0, dtype=complex)
    for k in range(n):
        k1 = lindblad_rhs(rho, H, L, K)
        k2 = lindblad_rhs(rho + 0.5 * h * k1, H, L, K)
        k3 = lindblad_rhs(rho + 0.5 * h * k2, H, L, K)
        k4 = lindblad_rhs(rho + h * k3, H, L, K)
        rho = out[k + 1] = rho + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return out


def evolve_density_oracle(gen: GeneratorSpec, start, duration: float,
                          step: float = DEFAULT_STEP) -> list[tuple[float, DensityMatrix]]:
    """Integrate the master equation for ``gen`` in the 2x2 matrix representation."""
    _positive(duration, "duration")
    rho0 = start if isinstance(start, DensityMatrix) else DensityMatrix(start)
    n = _step_count(duration, step)
    H, L = stack_operators([gen])
    path = oracle_integrate(H[0], L[0], rho0.matrix, duration / n, n)
    times = np.linspace(0.0, duration, n + 1)
    try:
        return [(float(t), DensityMatrix(m, tol=1e-10)) for t, m in zip(times, path)]
    except NonPhysicalMatrix as exc:
        raise NonPhysicalMatrix(f"oracle integration left the state space: {exc}") from exc


def bloch_path_of(oracle_path) -> np.ndarray:
    """Bloch vectors of an oracle result, shape ``(N, 3)``."""
    return np.array([matrix_to_bloch(rho.matrix) for _, rho in oracle_path])


__all__ = [
    "DEFAULT_SAMPLES",
    "DEFAULT_STEP",
    "GeneratorSpec",
    "PurifyingDissipator",
    "SigmaXDissipator",
    "SpectralDissipator",
    "Trajectory",
    "UnitaryRotation",
    "bloch_path_of",
    "contract_isochoric",
    "evolve_density_oracle",
    "evolve_lindblad",
    "isothermal_path",
    "oracle_integrate",
    "purify_isochoric",
    "relax_to_target",
    "rk4_affine",
    "rotate_isentropic",
    "spectral_isochoric",
    "stack_operators",
]
