"""Heat, mechanical work and coherence work along Bloch trajectories.

With ``E = -B (b_hat . v)`` the energy change splits into

* heat            ``Qdot = -(dB/dt)(b_hat . v)``
* mechanical work ``Wdot = -b . dv/dt``
* coherence work  ``Cdot = -B (d b_hat/dt) . v``

Path integrals use Simpson's rule on the trajectory's sample grid.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np
from scipy.integrate import cumulative_simpson, cumulative_trapezoid, simpson

from .bloch import BlochState, LocalField, entropy_of_modulus
from .dynamics import Trajectory
from .errors import DegenerateTrajectory, ZeroBlochVector, ZeroTemperature


@dataclass(frozen=True)
class EnergyLedger:
    Q: float
    W: float
    C: float
    dE: float
    dS: float
    clausius: float
    residual_first_law: float
    residual_clausius: float

    def as_dict(self) -> dict[str, float]:
        return asdict(self)


def _split_rates(b, db, v, dv=None):
    B = np.linalg.norm(b, axis=-1)
    if np.any(B == 0):
        raise ZeroBlochVector("heat/coherence split needs a defined Bloch direction")
    bhat = b / B[..., None]
    dB = np.sum(bhat * db, axis=-1)
    dbhat = (db - bhat * dB[..., None]) / B[..., None]
    Qdot = -dB * (bhat @ v)
    Cdot = -B * (dbhat @ v)
    Wdot = np.zeros_like(Qdot) if dv is None else -np.sum(b * dv, axis=-1)
    return Qdot, Wdot, Cdot


def instantaneous_rates(state: BlochState, state_rate, field: LocalField, field_rate=None):
    """``(Qdot, Wdot, Cdot)`` for a state moving at ``state_rate`` in a field changing at ``field_rate``."""
    dv = None if field_rate is None else np.asarray(field_rate, dtype=float)
    Q, W, C = _split_rates(state.vector, np.asarray(state_rate, dtype=float), field.vector, dv)
    return float(Q), float(W), float(C)


def trajectory_rates(traj: Trajectory) -> np.ndarray:
    """Analytic ``db/dt`` when the trajectory carries it, else second-order differences."""
    if traj.rates is not None:
        return traj.rates
    return np.gradient(traj.b, traj.t, axis=0, edge_order=2 if len(traj) >= 3 else 1)


def _require_samples(traj: Trajectory) -> None:
    if len(traj) < 2:
        raise DegenerateTrajectory("ledger integration needs at least 2 samples")


def rate_samples(traj: Trajectory, field: LocalField):
    _require_samples(traj)
    return _split_rates(traj.b, trajectory_rates(traj), field.vector)


def clausius_entropy(traj: Trajectory, field: LocalField, k_B: float = 1.0) -> float:
    """``integral of Qdot / T_eff dt`` along ``traj``."""
    _require_samples(traj)
    Qdot, _, _ = rate_samples(traj, field)
    B = traj.modulus
    cos_theta = (traj.b @ field.unit) / B
    if np.any(np.abs(cos_theta) < 1e-12) or np.any(B >= 1.0):
        raise ZeroTemperature("effective temperature vanishes on the path")
    inv_T = k_B * np.arctanh(B) / (field.epsilon * cos_theta)
    return float(simpson(Qdot * inv_T, x=traj.t))


def integrate_ledger(traj: Trajectory, field: LocalField, k_B: float = 1.0) -> EnergyLedger:
    """Integrate the three energy channels along a fixed-field stroke.

    ``clausius`` is NaN when the effective temperature vanishes on the path.
    """
    Qdot, Wdot, Cdot = rate_samples(traj, field)
    Q = float(simpson(Qdot, x=traj.t))
    C = float(simpson(Cdot, x=traj.t))
    W = float(simpson(Wdot, x=traj.t))
    v = field.vector
    dE = float(-(traj.b[-1] @ v) + (traj.b[0] @ v))
    S = entropy_of_modulus(traj.modulus[[0, -1]], k_B)
    dS = float(S[1] - S[0])
    try:
        clausius = clausius_entropy(traj, field, k_B)
    except ZeroTemperature:
        clausius = float("nan")
    return EnergyLedger(Q=Q, W=W, C=C, dE=dE, dS=dS, clausius=clausius,
                        residual_first_law=dE - (Q + W + C),
                        residual_clausius=clausius - dS)


def cumulative_ledger(traj: Trajectory, field: LocalField):
    """Running ``(Q, W, C)`` at every sample, starting from zero."""
    Qdot, Wdot, Cdot = rate_samples(traj, field)
    cumulate = cumulative_simpson if len(traj) >= 3 else cumulative_trapezoid
    return tuple(cumulate(y, x=traj.t, initial=0.0) for y in (Qdot, Wdot, Cdot))


def first_law_residual(ledger: EnergyLedger) -> float:
    return ledger.dE - (ledger.Q + ledger.W + ledger.C)
