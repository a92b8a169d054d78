# =====================
# simulation/sde.py
# Euler-Maruyama integration of the Hopf normal form and the 3-D Van der Pol variant
# with a linearly ramped bifurcation parameter
# =====================

import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from common.config import (
    BIFURCATION_TIME,
    HOPF_ETA,
    HOPF_LAMBDA_END,
    HOPF_LAMBDA_START,
    HOPF_T_END,
    SIM_T_END,
    VDP_LAMBDA0,
    VDP_LAMBDA_CRITICAL,
)
from common.errors import InvalidParameter, NonFiniteState
from common.utils import rng_for

HOPF = "hopf"
VDP3 = "vdp3"


# ── Parameter ramp ───────────────────────────────────────────────────────────
@dataclass(frozen=True)
class RampSchedule:
    """
    lambda(t) moves linearly from lambda0 at t_start to lambda_end at t_end and is held at the
    endpoint values outside that interval. A constant schedule always returns lambda0.
    """

    lambda0: float
    lambda_end: float
    t_start: float
    t_end: float
    constant: bool = False

    def __post_init__(self):
        if not self.t_end > self.t_start:
            raise InvalidParameter(f"ramp needs t_end > t_start, got {self.t_start}, {self.t_end}")

    @classmethod
    def held(cls, lambda0: float, t_start: float = 0.0, t_end: float = 1.0) -> "RampSchedule":
        return cls(lambda0, lambda0, t_start, t_end, constant=True)

    def value(self, t: float) -> float:
        if self.constant or t <= self.t_start:
            return self.lambda0
        if t >= self.t_end:
            return self.lambda_end
        frac = (t - self.t_start) / (self.t_end - self.t_start)
        return self.lambda0 + (self.lambda_end - self.lambda0) * frac

    def values(self, ts: np.ndarray) -> np.ndarray:
        ts = np.asarray(ts, dtype=np.float64)
        if self.constant:
            return np.full(ts.shape, self.lambda0)
        frac = (ts - self.t_start) / (self.t_end - self.t_start)
        lam = self.lambda0 + (self.lambda_end - self.lambda0) * frac
        lam = np.where(ts <= self.t_start, self.lambda0, lam)
        return np.where(ts >= self.t_end, self.lambda_end, lam)


# ── Drift functions ──────────────────────────────────────────────────────────
def _hopf(x: float, y: float, lam: float, eta: float) -> tuple[float, float]:
    r2 = x * x + y * y
    r4 = r2 * r2
    return (
        lam * x - y + 2.0 * eta * x * r2 - x * r4,
        x + lam * y + 2.0 * eta * y * r2 - y * r4,
    )


def _vdp3(x: float, y: float, z: float, lam: float, a: float) -> tuple[float, float, float]:
    return ((3.0 * x - x * x * x - y) / a, x - lam, x - z)


def drift_hopf(x: float, y: float, lam: float, eta: float) -> np.ndarray:
    """Hopf normal form: (lx - y + 2*eta*x*r^2 - x*r^4, x + ly + 2*eta*y*r^2 - y*r^4)."""
    return np.array(_hopf(float(x), float(y), float(lam), float(eta)))


def drift_vdp3(x: float, y: float, z: float, lam: float, a: float) -> np.ndarray:
    """3-D Van der Pol variant: ((3x - x^3 - y)/a, x - lambda, x - z)."""
    if a == 0:
        raise InvalidParameter("time-scale parameter a must be non-zero")
    return np.array(_vdp3(float(x), float(y), float(z), float(lam), float(a)))


def equilibrium_vdp3(lam: float) -> np.ndarray:
    """(lambda, 3*lambda - lambda^3, lambda): the fixed point of drift_vdp3."""
    lam = float(lam)
    return np.array([lam, 3.0 * lam - lam * lam * lam, lam])


def model_dim(name: str) -> int:
    return 2 if name == HOPF else 3


# ── Models ───────────────────────────────────────────────────────────────────
@dataclass(frozen=True)
class SdeModel:
    """
    Drift specification plus additive noise of equal amplitude in every equation.

    For the Hopf normal form eta is both the cubic drift coefficient and the noise amplitude,
    so noise_sigma defaults to eta.
    """

    name: str
    ramp: RampSchedule
    noise_sigma: float
    eta: Optional[float] = None
    a: Optional[float] = None

    def __post_init__(self):
        if self.name not in (HOPF, VDP3):
            raise InvalidParameter(f"unknown model {self.name!r}")
        if not (np.isfinite(self.noise_sigma) and self.noise_sigma >= 0):
            raise InvalidParameter(f"noise_sigma must be >= 0, got {self.noise_sigma}")
        if self.name == HOPF and self.eta is None:
            raise InvalidParameter("Hopf normal form needs eta")
        if self.name == VDP3 and not self.a:
            raise InvalidParameter("time-scale parameter a must be non-zero")

    @classmethod
    def hopf_normal_form(
        cls, eta: float, ramp: RampSchedule, noise_sigma: Optional[float] = None
    ) -> "SdeModel":
        return cls(HOPF, ramp, eta if noise_sigma is None else noise_sigma, eta=eta)

    @classmethod
    def vdp_three_d(cls, a: float, ramp: RampSchedule, noise_sigma: float) -> "SdeModel":
        return cls(VDP3, ramp, noise_sigma, a=a)

    @property
    def dim(self) -> int:
        return model_dim(self.name)

    def drift(self, state, lam: float) -> np.ndarray:
        if self.name == HOPF:
            return drift_hopf(state[0], state[1], lam, self.eta)
        return drift_vdp3(state[0], state[1], state[2], lam, self.a)


def hopf_demo_model(eta: float = HOPF_ETA, t_end: float = HOPF_T_END) -> SdeModel:
    ramp = RampSchedule(HOPF_LAMBDA_START, HOPF_LAMBDA_END, 0.0, t_end)
    return SdeModel.hopf_normal_form(eta, ramp)


def vdp3_model(
    a: float,
    sigma: float,
    ramped: bool,
    lambda0: float = VDP_LAMBDA0,
    bifurcation_time: float = BIFURCATION_TIME,
    t_end: float = SIM_T_END,
) -> SdeModel:
    """
    Ramped runs cross lambda_c = 1 at `bifurcation_time` and keep the same slope to t_end;
    control runs hold lambda at lambda0.
    """
    if ramped:
        lambda_end = lambda0 + (VDP_LAMBDA_CRITICAL - lambda0) * (t_end / bifurcation_time)
        ramp = RampSchedule(lambda0, lambda_end, 0.0, t_end)
    else:
        ramp = RampSchedule.held(lambda0, 0.0, t_end)
    return SdeModel.vdp_three_d(a, ramp, sigma)


def initial_state(model: SdeModel) -> np.ndarray:
    """Origin for the Hopf form, the equilibrium at lambda(0) for the Van der Pol variant."""
    if model.name == HOPF:
        return np.zeros(2)
    return equilibrium_vdp3(model.ramp.value(model.ramp.t_start))


# ── Integration ──────────────────────────────────────────────────────────────
@dataclass(frozen=True, eq=False)
class Trajectory:
    dt: float
    t0: float
    states: np.ndarray
    seed: int

    @property
    def n_points(self) -> int:
        return int(self.states.shape[0])

    @property
    def dim(self) -> int:
        return int(self.states.shape[1])

    @property
    def t_end(self) -> float:
        return self.t0 + (self.n_points - 1) * self.dt

    def times(self) -> np.ndarray:
        return self.t0 + np.arange(self.n_points) * self.dt

    def nearest_index(self, t) -> np.ndarray:
        idx = np.rint((np.asarray(t, dtype=np.float64) - self.t0) / self.dt).astype(np.int64)
        return np.clip(idx, 0, self.n_points - 1)

    def state_at(self, t: float) -> np.ndarray:
        return self.states[int(self.nearest_index(t))]


def n_steps_for(t0: float, t_end: float, dt: float) -> int:
    # tolerance keeps e.g. 2000 / 0.05 from flooring to 39999
    return int(math.floor((t_end - t0) / dt + 1e-9))


def simulate(
    model: SdeModel, x0, t0: float, t_end: float, dt: float, seed: int
) -> Trajectory:
    """
    X_{k+1} = X_k + f(X_k, lambda(t_k)) dt + sigma sqrt(dt) Z_k

    Z_k are standard normal vectors drawn up front from PCG64(seed). With sigma = 0 no
    variates are drawn and the scheme is plain deterministic Euler.
    """
    if not dt > 0:
        raise InvalidParameter(f"dt must be > 0, got {dt}")
    if not t_end > t0:
        raise InvalidParameter(f"t_end must exceed t0, got t0={t0}, t_end={t_end}")
    x0 = np.asarray(x0, dtype=np.float64).reshape(-1)
    if x0.size != model.dim:
        raise InvalidParameter(f"{model.name} needs a {model.dim}-vector initial state")

    n = n_steps_for(t0, t_end, dt)
    lams = model.ramp.values(t0 + np.arange(n) * dt).tolist()
    if model.noise_sigma > 0:
        scale = model.noise_sigma * math.sqrt(dt)
        noise = (rng_for(seed).standard_normal((n, model.dim)) * scale).tolist()
    else:
        noise = None

    if model.name == HOPF:
        states = _euler_hopf(x0, lams, noise, dt, float(model.eta))
    else:
        states = _euler_vdp3(x0, lams, noise, dt, float(model.a))

    finite = np.isfinite(states).all(axis=1)
    if not finite.all():
        step = int(np.argmin(finite))
        raise NonFiniteState(step, t0 + step * dt)

    logging.debug("🧮 simulated %s: %d steps, seed=%d", model.name, n, seed)
    return Trajectory(dt=float(dt), t0=float(t0), states=states, seed=int(seed))


def _euler_hopf(x0, lams, noise, dt, eta) -> np.ndarray:
    x, y = float(x0[0]), float(x0[1])
    xs, ys = [x], [y]
    for k, lam in enumerate(lams):
        fx, fy = _hopf(x, y, lam, eta)
        x = x + fx * dt
        y = y + fy * dt
        if noise is not None:
            w = noise[k]
            x += w[0]
            y += w[1]
        xs.append(x)
        ys.append(y)
    return np.column_stack([xs, ys])


def _euler_vdp3(x0, lams, noise, dt, a) -> np.ndarray:
    x, y, z = float(x0[0]), float(x0[1]), float(x0[2])
    xs, ys, zs = [x], [y], [z]
    for k, lam in enumerate(lams):
        fx, fy, fz = _vdp3(x, y, z, lam, a)
        x = x + fx * dt
        y = y + fy * dt
        z = z + fz * dt
        if noise is not None:
            w = noise[k]
            x += w[0]
            y += w[1]
            z += w[2]
        xs.append(x)
        ys.append(y)
        zs.append(z)
    return np.column_stack([xs, ys, zs])
