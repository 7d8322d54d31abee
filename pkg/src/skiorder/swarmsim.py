"""Simulated 2-D swarm trajectories, from pure noise to flocking models.

Random draws for every model follow a fixed order from one PCG64 stream
seeded with ``cfg.seed``:

1. initial positions, shape (n_agents, 2), uniform on [0, init_box]
2. initial velocities, shape (n_agents, 2), standard normal
3. Vicsek headings, shape (n_agents,), uniform on [0, 2*pi)
4. spiral parameters (n1, n2, n3), shape (n_agents, 3), standard normal
5. per-step noise, shape (n_steps - 1, n_agents, 2), standard normal

All five blocks are drawn for every model so a given seed yields the same
noise stream regardless of model.  Measurement noise, when enabled, comes
from an independent stream seeded with ``[seed, 1]``.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

from skiorder.errors import ConfigError, SimulationDivergedError
from skiorder.trajmat import SignalMatrix, assemble_trajectory

MODELS = (
    "pure_noise",
    "position_walk",
    "velocity_walk",
    "kinematic_noise",
    "acceleration_noise",
    "cucker_smale",
    "vicsek",
    "spiral_in",
)

MEASUREMENT_NOISE_FRACTION = 0.05


@dataclass(frozen=True)
class SimConfig:
    model: str = "pure_noise"
    n_agents: int = 50
    n_steps: int = 500
    dt: float = 1.0
    seed: int = 0
    mu: float = 0.3
    K: float = 1.0
    beta: float = 0.4
    radius: float = 1.0
    speed: float = 0.5
    box_size: float = 10.0
    freq_f: float = 1.0
    spiral_t_max: float = 5.0
    init_box: float = 10.0
    measurement_noise: bool = False
    noise_fraction: float = MEASUREMENT_NOISE_FRACTION

    def __post_init__(self):
        if self.model not in MODELS:
            raise ConfigError(f"unknown model {self.model!r}; choose from {', '.join(MODELS)}")
        if self.n_agents < 1:
            raise ConfigError("n_agents must be >= 1")
        if self.n_steps < 2:
            raise ConfigError("n_steps must be >= 2")
        if not self.dt > 0:
            raise ConfigError("dt must be positive")
        if not 0.0 <= self.mu <= 1.0:
            raise ConfigError("mu must lie in [0, 1]")
        if self.radius < 0 or self.speed < 0 or not self.box_size > 0:
            raise ConfigError("vicsek radius/speed must be >= 0 and box_size > 0")

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "SimConfig":
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(d) - names
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)


@dataclass
class _Draws:
    positions: np.ndarray
    velocities: np.ndarray
    headings: np.ndarray
    spiral: np.ndarray
    noise: np.ndarray


def _draw(cfg: SimConfig) -> _Draws:
    rng = np.random.default_rng(cfg.seed)
    n = cfg.n_agents
    return _Draws(
        positions=rng.uniform(0.0, cfg.init_box, size=(n, 2)),
        velocities=rng.standard_normal((n, 2)),
        headings=rng.uniform(0.0, 2 * np.pi, size=n),
        spiral=rng.standard_normal((n, 3)),
        noise=rng.standard_normal((cfg.n_steps - 1, n, 2)),
    )


# Each integrator returns positions of shape (n_steps, n_agents, 2).


def pure_noise(x0, noise):
    return np.concatenate([x0[None], noise])


def position_walk(x0, noise):
    return np.concatenate([x0[None], x0 + np.cumsum(noise, axis=0)])


def velocity_walk(x0, v0, noise, dt=1.0):
    v = position_walk(v0, noise)
    return position_walk(x0, v[:-1] * dt)


def kinematic_noise(x0, noise, mu):
    x = np.empty((len(noise) + 1,) + x0.shape)
    x[0] = x0
    for t, n in enumerate(noise):
        x[t + 1] = x[t] + mu * np.abs(x[t]) * n
    return x


def acceleration_noise(x0, v0, noise, mu, dt=1.0):
    v = kinematic_noise(v0, noise, mu)
    return position_walk(x0, v[:-1] * dt)


def cucker_smale(x0, v0, n_steps, K=1.0, beta=0.4, dt=1.0):
    """Discrete Cucker-Smale flocking with coupling averaged over agents.

    ``a_ij = K / (1 + |x_i - x_j|^2)^beta`` and
    ``v_i += dt/n * sum_j a_ij (v_j - v_i)``.
    """
    n = len(x0)
    x = np.empty((n_steps, n, 2))
    x[0] = x0
    v = v0.copy()
    with np.errstate(over="ignore", invalid="ignore"):
        for t in range(n_steps - 1):
            diff = x[t][:, None, :] - x[t][None, :, :]
            a = K / (1.0 + np.sum(diff**2, axis=-1)) ** beta
            dv = (a @ v - a.sum(axis=1)[:, None] * v) * (dt / n)
            x[t + 1] = x[t] + v * dt
            v = v + dv
            if not np.all(np.isfinite(v)):
                raise SimulationDivergedError("cucker_smale", t + 1)
    return x


def vicsek_headings(pos, headings, radius, box_size):
    """One alignment update: circular mean heading over neighbours within ``radius`` (self included).

    Distances use the minimum-image convention of a periodic box.
    """
    d = pos[:, None, :] - pos[None, :, :]
    d -= box_size * np.round(d / box_size)
    near = np.sum(d**2, axis=-1) <= radius**2
    s = near @ np.sin(headings)
    c = near @ np.cos(headings)
    return np.arctan2(s, c)


def vicsek(x0, theta0, n_steps, radius=1.0, speed=0.5, box_size=10.0, dt=1.0):
    """Noise-free Vicsek model in a periodic box.

    Neighbourhoods are computed on wrapped coordinates; the recorded
    trajectories are unwrapped, so every step has length ``speed * dt``.
    """
    n = len(x0)
    x = np.empty((n_steps, n, 2))
    x[0] = x0
    theta = theta0.copy()
    for t in range(n_steps - 1):
        x[t + 1] = x[t] + speed * dt * np.stack([np.cos(theta), np.sin(theta)], axis=-1)
        theta = vicsek_headings(np.mod(x[t + 1], box_size), theta, radius, box_size)
    return x


def spiral_in(params, n_steps, freq_f=1.0, t_max=5.0):
    t = np.linspace(0.0, t_max, n_steps)[:, None]
    n1, n2, n3 = params[:, 0], params[:, 1], params[:, 2]
    phase = 2 * np.pi * (freq_f + n1) * t
    decay = np.exp(-t)
    x = decay * np.sin(phase + n2) + 5 * t
    y = decay * np.cos(phase + n3) + 2 * t
    return np.stack([x, y], axis=-1)


def _integrate(cfg: SimConfig, dr: _Draws) -> np.ndarray:
    m = cfg.model
    if m == "pure_noise":
        # first sample reuses the standard-normal velocity draw
        return pure_noise(dr.velocities, dr.noise)
    if m == "position_walk":
        return position_walk(dr.positions, dr.noise)
    if m == "velocity_walk":
        return velocity_walk(dr.positions, dr.velocities, dr.noise, cfg.dt)
    if m == "kinematic_noise":
        return kinematic_noise(dr.positions, dr.noise, cfg.mu)
    if m == "acceleration_noise":
        return acceleration_noise(dr.positions, dr.velocities, dr.noise, cfg.mu, cfg.dt)
    if m == "cucker_smale":
        return cucker_smale(dr.positions, dr.velocities, cfg.n_steps, cfg.K, cfg.beta, cfg.dt)
    if m == "vicsek":
        return vicsek(dr.positions, dr.headings, cfg.n_steps, cfg.radius, cfg.speed, cfg.box_size, cfg.dt)
    if m == "spiral_in":
        return spiral_in(dr.spiral, cfg.n_steps, cfg.freq_f, cfg.spiral_t_max)
    raise ConfigError(f"unknown model {m!r}")


def add_measurement_noise(X, fraction: float = MEASUREMENT_NOISE_FRACTION, seed=None):
    """Add Gaussian noise with per-row std ``fraction * (max - min)`` of that row."""
    if fraction < 0:
        raise ValueError("fraction must be non-negative")
    values = X.values if isinstance(X, SignalMatrix) else np.asarray(X, dtype=float)
    rng = np.random.default_rng(seed)
    scale = fraction * (values.max(axis=1) - values.min(axis=1))
    noisy = values + rng.standard_normal(values.shape) * scale[:, None]
    if isinstance(X, SignalMatrix):
        return dataclasses.replace(X, values=noisy)
    return noisy


def simulate(cfg: SimConfig) -> SignalMatrix:
    """Run one simulation and return its 2*n_agents x n_steps position matrix."""
    with np.errstate(over="ignore", invalid="ignore"):
        traj = _integrate(cfg, _draw(cfg))
    bad = ~np.all(np.isfinite(traj), axis=(1, 2))
    if bad.any():
        raise SimulationDivergedError(cfg.model, int(np.argmax(bad)))
    X = assemble_trajectory(traj.transpose(1, 0, 2))
    if cfg.measurement_noise:
        X = add_measurement_noise(X, cfg.noise_fraction, seed=[cfg.seed, 1])
    return X
