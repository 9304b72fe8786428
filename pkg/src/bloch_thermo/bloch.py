"""Qubit states on the Bloch ball and their pointwise state functions.

Conventions: hbar = 1, the local Hamiltonian is ``H = -v . sigma`` and the
density matrix is ``rho = (I + b . sigma) / 2``. Entropies are returned in
units set by ``k_B`` (default 1).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import xlogy

from .errors import InvalidField, NonPhysicalMatrix, NonPhysicalState, ZeroBlochVector

BALL_TOL = 1e-12
MATRIX_TOL = 1e-12

IDENTITY = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULI = np.stack([SIGMA_X, SIGMA_Y, SIGMA_Z])

LN2 = float(np.log(2.0))


def _check_kb(k_B: float) -> None:
    if not k_B > 0:
        raise ValueError(f"k_B must be positive, got {k_B!r}")


def clamp_to_ball(b: np.ndarray, tol: float = BALL_TOL) -> np.ndarray:
    """Validate Bloch vectors (shape ``(..., 3)``) against the unit ball.

    Vectors with modulus in ``(1, 1 + tol]`` are rescaled onto the sphere;
    anything further out raises :class:`NonPhysicalState`.
    """
    b = np.array(b, dtype=float)
    if b.shape[-1:] != (3,):
        raise NonPhysicalState(f"Bloch vectors must have 3 components, got shape {b.shape}")
    if not np.all(np.isfinite(b)):
        raise NonPhysicalState("Bloch vector has non-finite components")
    mod = np.linalg.norm(b, axis=-1)
    if np.any(mod > 1.0 + tol):
        raise NonPhysicalState(f"|b| = {mod.max():.17g} exceeds 1")
    over = mod > 1.0
    if np.any(over):
        b[over] = b[over] / mod[over][..., None]
    return b


@dataclass(frozen=True)
class BlochState:
    """Immutable qubit state given by its Bloch vector."""

    b: tuple[float, float, float]

    def __post_init__(self):
        vec = clamp_to_ball(self.b)
        object.__setattr__(self, "b", tuple(float(x) for x in vec))

    @classmethod
    def from_polar(cls, modulus: float, theta: float) -> "BlochState":
        """State in the b_x = 0 plane at angle ``theta`` from +z (b_y >= 0 for theta in [0, pi])."""
        return cls((0.0, modulus * np.sin(theta), modulus * np.cos(theta)))

    @property
    def vector(self) -> np.ndarray:
        return np.array(self.b)

    def modulus(self) -> float:
        return float(np.linalg.norm(self.b))

    def direction(self) -> np.ndarray:
        mod = self.modulus()
        if mod == 0.0:
            raise ZeroBlochVector("direction of the zero Bloch vector is undefined")
        return self.vector / mod


@dataclass(frozen=True)
class LocalField:
    """Effective field ``v`` (energy units) defining ``H = -v . sigma``."""

    v: tuple[float, float, float]

    def __post_init__(self):
        vec = np.asarray(self.v, dtype=float)
        if vec.shape != (3,) or not np.all(np.isfinite(vec)):
            raise InvalidField(f"field must be a finite 3-vector, got {self.v!r}")
        if not np.linalg.norm(vec) > 0:
            raise InvalidField("field magnitude epsilon must be strictly positive")
        object.__setattr__(self, "v", tuple(float(x) for x in vec))

    @classmethod
    def along_z(cls, epsilon: float = 1.0) -> "LocalField":
        return cls((0.0, 0.0, epsilon))

    @property
    def vector(self) -> np.ndarray:
        return np.array(self.v)

    @property
    def epsilon(self) -> float:
        return float(np.linalg.norm(self.v))

    @property
    def unit(self) -> np.ndarray:
        return self.vector / self.epsilon

    def hamiltonian(self) -> np.ndarray:
        return -np.einsum("i,ijk->jk", self.vector, PAULI)


class DensityMatrix:
    """Validated 2x2 qubit density operator (read-only array wrapper)."""

    __slots__ = ("_m",)

    def __init__(self, matrix, tol: float = MATRIX_TOL):
        m = np.array(matrix, dtype=complex)
        if m.shape != (2, 2) or not np.all(np.isfinite(m)):
            raise NonPhysicalMatrix(f"expected a finite 2x2 matrix, got shape {m.shape}")
        if abs(np.trace(m) - 1.0) > tol:
            raise NonPhysicalMatrix(f"trace {np.trace(m)!r} differs from 1")
        if np.max(np.abs(m - m.conj().T)) > tol:
            raise NonPhysicalMatrix("matrix is not Hermitian")
        m = 0.5 * (m + m.conj().T)
        if np.linalg.eigvalsh(m).min() < -tol:
            raise NonPhysicalMatrix("matrix has a negative eigenvalue")
        m.setflags(write=False)
        self._m = m

    @property
    def matrix(self) -> np.ndarray:
        return self._m

    def eigh(self):
        """Eigenvalues (ascending) and eigenvectors as columns."""
        return np.linalg.eigh(self._m)

    def __array__(self, dtype=None, copy=None):
        return self._m.astype(dtype) if dtype is not None else self._m.copy()

    def __repr__(self):
        return f"DensityMatrix({self._m.tolist()!r})"


def bloch_to_matrix(b: np.ndarray) -> np.ndarray:
    """Vectorised ``(I + b . sigma) / 2`` for arrays of shape ``(..., 3)``."""
    b = np.asarray(b, dtype=float)
    return 0.5 * (IDENTITY + np.einsum("...i,ijk->...jk", b, PAULI))


def matrix_to_bloch(rho: np.ndarray) -> np.ndarray:
    """Vectorised ``b_i = tr(rho sigma_i)`` for arrays of shape ``(..., 2, 2)``."""
    rho = np.asarray(rho)
    return np.real(np.einsum("...jk,ikj->...i", rho, PAULI))


def to_density(state: BlochState) -> DensityMatrix:
    return DensityMatrix(bloch_to_matrix(state.vector))


def from_density(rho) -> BlochState:
    if not isinstance(rho, DensityMatrix):
        rho = DensityMatrix(rho)
    return BlochState(tuple(matrix_to_bloch(rho.matrix)))


def pure_state_ket(direction) -> np.ndarray:
    """Ket whose Bloch vector is the unit vector ``direction``."""
    n = np.asarray(direction, dtype=float)
    n = n / np.linalg.norm(n)
    polar = np.arccos(np.clip(n[2], -1.0, 1.0))
    azimuth = np.arctan2(n[1], n[0])
    return np.array([np.cos(polar / 2), np.exp(1j * azimuth) * np.sin(polar / 2)])


def energy(state: BlochState, field: LocalField) -> float:
    return -float(np.dot(state.b, field.v))


def entropy_of_modulus(B, k_B: float = 1.0):
    """Von Neumann entropy as a function of the Bloch modulus (array-friendly)."""
    _check_kb(k_B)
    B = np.asarray(B, dtype=float)
    p, q = (1.0 + B) / 2.0, (1.0 - B) / 2.0
    # xlogy(0, 0) == 0 gives the exact pure-state limit
    return -k_B * (xlogy(p, p) + xlogy(q, q))


def entropy(state: BlochState, k_B: float = 1.0) -> float:
    return float(entropy_of_modulus(state.modulus(), k_B))


def isothermal_f(B):
    """``f(B) = B artanh(B) + ln(1 - B^2) / 2``, equal to ``ln 2 - S(B)/k_B``."""
    B = np.asarray(B, dtype=float)
    return B * np.arctanh(B) + 0.5 * (np.log1p(B) + np.log1p(-B))


def theta_angle(state: BlochState, field: LocalField) -> float:
    """Angle in [0, pi] between the Bloch vector and the field."""
    b = state.vector
    if not np.any(b):
        raise ZeroBlochVector("angle to the field is undefined at b = 0")
    v = field.unit
    return float(np.arctan2(np.linalg.norm(np.cross(b, v)), np.dot(b, v)))


def temperature_of(B, cos_theta, epsilon: float = 1.0, k_B: float = 1.0):
    """Effective temperature ``eps cos(theta) / (k_B artanh B)`` on arrays.

    Pure states (B = 1) map to 0; B = 0 is the caller's responsibility.
    """
    _check_kb(k_B)
    B = np.asarray(B, dtype=float)
    with np.errstate(divide="ignore"):
        return epsilon * np.asarray(cos_theta) / (k_B * np.arctanh(B))


def effective_temperature(state: BlochState, field: LocalField, k_B: float = 1.0) -> float:
    """Signed effective temperature of ``state`` relative to ``field``.

    Negative when the state leans towards the excited eigenstate
    (cos theta < 0). Returns 0 for pure states, the B -> 1 limit.
    """
    B = state.modulus()
    if B == 0.0:
        raise ZeroBlochVector("effective temperature is unbounded at b = 0")
    cos_theta = float(np.dot(state.vector / B, field.unit))
    if B >= 1.0:
        return 0.0
    return float(temperature_of(B, cos_theta, field.epsilon, k_B))


def thermal_state(T: float, field: LocalField, k_B: float = 1.0) -> BlochState:
    """Gibbs state of ``H = -v . sigma`` at temperature ``T`` > 0."""
    _check_kb(k_B)
    if not T > 0:
        raise ValueError("temperature must be positive")
    return BlochState(tuple(np.tanh(field.epsilon / (k_B * T)) * field.unit))


def trace_distance_bloch(b1, b2):
    """Trace distance between qubit states given as Bloch vectors."""
    return 0.5 * np.linalg.norm(np.asarray(b1) - np.asarray(b2), axis=-1)
