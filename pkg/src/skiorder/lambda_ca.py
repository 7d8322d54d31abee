"""Lambda-parameterised one-dimensional cellular automaton.

Rule tables follow the generation procedure of D. J. Eck's 1-D CA applet:
rule 0 (all dead) maps to dead, every other neighbourhood gets a random live
state, mirror-image neighbourhoods share an output when the rule set is
isotropic, and a shuffled "lambda path" of class representatives decides
which rules are switched on for a given lambda.  A cell whose neighbourhood
code is switched off dies.

Neighbourhood codes read the window left to right, leftmost cell as the
most significant base-``states`` digit; the world wraps around.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, replace

import numpy as np

from skiorder.errors import ConfigError
from skiorder.trajmat import SignalMatrix

# lambda values scanned in the reference experiment
LAMBDA_GRID = (
    0.0, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.37, 0.39, 0.4, 0.45,
    0.5, 0.55, 0.6, 0.65, 0.7, 0.75, 0.8, 0.85, 0.9, 0.95, 0.99,
)


def isotropic_mate(index: int, states: int = 4, neighbors: int = 5) -> int:
    """Index of the neighbourhood whose digit string is the reverse of ``index``'s."""
    if not 0 <= index < states**neighbors:
        raise IndexError(f"rule index {index} out of range for {states}^{neighbors} rules")
    mate = 0
    for _ in range(neighbors):
        index, digit = divmod(index, states)
        mate = mate * states + digit
    return mate


def mate_table(states: int, neighbors: int) -> np.ndarray:
    return np.array([isotropic_mate(i, states, neighbors) for i in range(states**neighbors)], dtype=np.int64)


def class_count(states: int, neighbors: int, isotropic: bool) -> int:
    if isotropic:
        return (states**neighbors + states ** ((neighbors + 1) // 2)) // 2 - 1
    return states**neighbors - 1


@dataclass(frozen=True)
class CARuleSet:
    states: int
    neighbors: int
    isotropic: bool
    rule: np.ndarray
    rule_is_used: np.ndarray
    lambda_path: np.ndarray
    rule_seed: int

    @property
    def lambda_ct(self) -> int:
        return len(self.lambda_path)

    @property
    def rules_used(self) -> int:
        """Number of enabled lambda-path entries."""
        return int(np.count_nonzero(self.rule_is_used[self.lambda_path]))


def new_rule_set(rule_seed: int, states: int = 4, neighbors: int = 5, isotropic: bool = True) -> CARuleSet:
    """Random rule table and shuffled lambda path, all rules initially enabled."""
    if states < 2:
        raise ConfigError("states must be >= 2")
    if neighbors < 1 or neighbors % 2 == 0:
        raise ConfigError("neighbors must be a positive odd number")
    rng = np.random.default_rng(rule_seed)
    rule_ct = states**neighbors
    mates = mate_table(states, neighbors)

    rule = np.zeros(rule_ct, dtype=np.int64)
    draws = rng.integers(1, states, size=rule_ct - 1)
    for i in range(1, rule_ct):
        rule[i] = draws[i - 1]
        if isotropic:
            rule[mates[i]] = rule[i]

    used = np.zeros(rule_ct, dtype=bool)
    path = []
    for i in range(1, rule_ct):
        if not used[i]:
            path.append(i)
            used[i] = True
            if isotropic:
                used[mates[i]] = True
    path = np.array(path, dtype=np.int64)
    assert len(path) == class_count(states, neighbors, isotropic)

    # the applet's swap-with-random-position shuffle, kept for fidelity
    swaps = rng.integers(0, len(path), size=len(path))
    for i, r in enumerate(swaps):
        path[i], path[r] = path[r], path[i]

    return CARuleSet(
        states=states,
        neighbors=neighbors,
        isotropic=isotropic,
        rule=rule,
        rule_is_used=used,
        lambda_path=path,
        rule_seed=rule_seed,
    )


def set_rules_used(ruleset: CARuleSet, lam: float) -> CARuleSet:
    """Enable the first ``round(lam * lambda_ct)`` lambda-path rules (and their mates)."""
    if not 0.0 <= lam <= 1.0:
        warnings.warn(f"lambda {lam} outside [0, 1]; clamped", stacklevel=2)
        lam = min(max(lam, 0.0), 1.0)
    n_used = int(np.floor(lam * ruleset.lambda_ct + 0.5))
    n_used = min(max(n_used, 0), ruleset.lambda_ct)

    used = np.zeros_like(ruleset.rule_is_used)
    on = ruleset.lambda_path[:n_used]
    used[on] = True
    if ruleset.isotropic:
        used[mate_table(ruleset.states, ruleset.neighbors)[on]] = True
    return replace(ruleset, rule_is_used=used)


def effective_table(ruleset: CARuleSet) -> np.ndarray:
    """Next state for each neighbourhood code: the rule output if enabled, else dead."""
    table = np.where(ruleset.rule_is_used, ruleset.rule, 0)
    table[0] = 0
    return table


def neighborhood_codes(world: np.ndarray, states: int, neighbors: int) -> np.ndarray:
    half = neighbors // 2
    codes = np.zeros(world.shape, dtype=np.int64)
    for offset in range(-half, half + 1):
        # np.roll(world, -offset)[i] == world[i + offset]
        codes = codes * states + np.roll(world, -offset)
    return codes


def step(world, ruleset: CARuleSet, table: np.ndarray | None = None) -> np.ndarray:
    world = np.asarray(world, dtype=np.int64)
    if len(world) < ruleset.neighbors:
        raise ConfigError(f"world of {len(world)} cells is smaller than the neighbourhood")
    if table is None:
        table = effective_table(ruleset)
    return table[neighborhood_codes(world, ruleset.states, ruleset.neighbors)]


@dataclass(frozen=True)
class CAConfig:
    lam: float = 0.33
    n_cells: int = 230
    n_steps: int = 443
    states: int = 4
    neighbors: int = 5
    isotropic: bool = True
    dead_probability: float = 0.5
    rule_seed: int = 0
    world_seed: int = 0

    def __post_init__(self):
        if self.n_cells < self.neighbors:
            raise ConfigError("n_cells must be >= neighbors")
        if self.n_steps < 1:
            raise ConfigError("n_steps must be >= 1")


@dataclass(frozen=True)
class CATrace:
    """Cell states over time, one row per cell and one column per generation."""

    grid: np.ndarray
    ruleset: CARuleSet

    def to_signal_matrix(self) -> SignalMatrix:
        return SignalMatrix(values=self.grid.astype(float), row_labels=tuple((i,) for i in range(len(self.grid))))


def initial_world(n_cells: int, states: int, seed: int, dead_probability: float = 0.5) -> np.ndarray:
    """Each cell dead with ``dead_probability``, otherwise a uniform live state."""
    rng = np.random.default_rng(seed)
    dead = rng.random(n_cells) < dead_probability
    live = rng.integers(1, states, size=n_cells)
    return np.where(dead, 0, live)


def run(cfg: CAConfig) -> CATrace:
    """Evolve a random world; the first column is the initial world."""
    ruleset = set_rules_used(new_rule_set(cfg.rule_seed, cfg.states, cfg.neighbors, cfg.isotropic), cfg.lam)
    table = effective_table(ruleset)
    world = initial_world(cfg.n_cells, cfg.states, cfg.world_seed, cfg.dead_probability)
    history = np.empty((cfg.n_steps, cfg.n_cells), dtype=np.int64)
    history[0] = world
    for t in range(1, cfg.n_steps):
        world = step(world, ruleset, table)
        history[t] = world
    return CATrace(grid=history.T.copy(), ruleset=ruleset)
