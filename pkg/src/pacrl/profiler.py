"""Rate-profile construction by tabular Q-learning on a maze.

Walking the maze from (0, 0) to (N-K, K) takes N moves; move k decides index k:
"down" (action 0) freezes it and "right" (action 1) makes it an information bit.
Indices whose Reed-Muller score is above the boundary score are always
information, those below are always frozen, and only the indices sitting on the
boundary score are left to the agent. Each episode sends the all-zero codeword
through the channel and steps a list decoder in lock-step with the walk; the
reward depends on whether and where the all-zero path survives.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import NamedTuple

import numpy as np

from .channel import frame_rng, llr, sigma_from_ebn0
from .core import CodeParams, RateProfile, as_precoder, rm_scores
from .scl import DecoderConfig, DecoderSession

DOWN, RIGHT = 0, 1


class MazeError(ValueError):
    pass


class MazeState(NamedTuple):
    row: int
    col: int


INITIAL_STATE = MazeState(0, 0)


@dataclass
class Partition:
    """Index classes of one episode; ``I_init`` and ``N_set`` are mutated as it runs."""

    I_init: set
    N_set: set
    t_b: int
    greedy_calls: int = 0

    def copy(self) -> "Partition":
        return Partition(set(self.I_init), set(self.N_set), self.t_b, self.greedy_calls)

    @property
    def n_learnable(self) -> int:
        return len(self.N_set)


@dataclass(frozen=True)
class TrainConfig:
    episodes: int = 20_000
    alpha: float = 0.1
    epsilon: float = 0.2
    epsilon_final: float | None = 0.01
    gamma: float = 1.0
    base_reward: float = 1.0
    step_reward: float = 0.25
    train_ebn0_db: float = 2.5
    L: int = 8
    kernel: str = "exact"
    seed: int = 0
    freeze_noise: bool = False
    noiseless: bool = False

    def __post_init__(self):
        if self.episodes < 0:
            raise ValueError("episodes must be >= 0")
        if not 0 <= self.alpha <= 1:
            raise ValueError(f"alpha must lie in [0, 1], got {self.alpha}")
        for eps in (self.epsilon, self.epsilon_final):
            if eps is not None and not 0 <= eps <= 1:
                raise ValueError(f"epsilon must lie in [0, 1], got {eps}")
        if self.base_reward <= 0:
            raise ValueError("base reward x must be positive")
        if self.step_reward < 0:
            raise ValueError("step reward z must be non-negative")
        if self.L < 1:
            raise ValueError("list size must be >= 1")

    def epsilon_at(self, episode: int) -> float:
        """Linear decay from ``epsilon`` to ``epsilon_final`` over the run."""
        if self.epsilon_final is None or self.episodes <= 1:
            return self.epsilon
        frac = episode / (self.episodes - 1)
        return self.epsilon + (self.epsilon_final - self.epsilon) * frac


@dataclass
class EpisodeOutcome:
    actions: np.ndarray
    F: int
    i: int | None = None
    c: np.ndarray | None = None
    greedy_calls: int = 0
    reward: float = 0.0
    drop_step: int | None = None

    @property
    def right_actions(self) -> int:
        return int(np.count_nonzero(self.actions == RIGHT))


@dataclass
class TrainReport:
    records: list = field(default_factory=list)
    best_actions: np.ndarray | None = None
    best_reward: float = -math.inf
    N: int = 0
    K: int = 0

    @property
    def f_rate(self) -> float:
        if not self.records:
            return float("nan")
        return sum(r["F"] for r in self.records) / len(self.records)

    @property
    def greedy_calls(self) -> int:
        return sum(r["greedy_calls"] for r in self.records)

    def to_jsonl(self) -> str:
        return "".join(json.dumps(r) + "\n" for r in self.records)

    def best_profile(self) -> RateProfile | None:
        if self.best_actions is None:
            return None
        return RateProfile(self.best_actions.astype(np.uint8))


def new_q_table(N: int, K: int) -> np.ndarray:
    return np.zeros((N - K + 1, K + 1, 2))


def rm_score_partition(N: int, K: int) -> Partition:
    """Split indices by Reed-Muller score around the boundary score.

    The boundary is the (N-K)-th smallest score, counted from one.
    """
    if not 0 < K < N:
        raise ValueError(f"need 0 < K < N, got N={N}, K={K}")
    scores = rm_scores(N)
    t_b = int(np.sort(scores)[N - K - 1])
    I_init = {int(i) for i in np.flatnonzero(scores > t_b)}
    N_set = {int(i) for i in np.flatnonzero(scores == t_b)}
    return Partition(I_init, N_set, t_b)


def next_state(s: MazeState, a: int, N: int, K: int) -> MazeState:
    row, col = s
    if a == DOWN:
        if row >= N - K:
            raise MazeError(f"cannot move down from {tuple(s)}: bottom wall at row {N - K}")
        return MazeState(row + 1, col)
    if a == RIGHT:
        if col >= K:
            raise MazeError(f"cannot move right from {tuple(s)}: right wall at column {K}")
        return MazeState(row, col + 1)
    raise MazeError(f"unknown action {a!r}")


def epsilon_greedy(Q, s: MazeState, epsilon: float, rng, tie: str = "random") -> int:
    """Random action with probability ``epsilon``, else the argmax of Q at ``s``.

    Ties go to a uniform draw (``tie="random"``) or to the information action
    (``tie="right"``).
    """
    if epsilon > 0 and rng is not None and rng.random() < epsilon:
        return int(rng.integers(2))
    q0, q1 = Q[s.row, s.col, 0], Q[s.row, s.col, 1]
    if q0 == q1:
        if tie == "right":
            return RIGHT
        return int(rng.integers(2))
    return RIGHT if q1 > q0 else DOWN


def select_action(Q, partition: Partition, K: int, k: int, s: MazeState, epsilon: float,
                  rng, tie: str = "random"):
    """Action for index ``k``; returns ``(partition, a)`` with ``partition`` updated in place.

    A boundary index chosen as information moves from ``N_set`` into
    ``I_init`` so the two sets stay disjoint.
    """
    if k in partition.N_set:
        n_info = len(partition.I_init)
        if n_info == K:
            partition.N_set.discard(k)
            return partition, DOWN
        if n_info + len(partition.N_set) == K:
            partition.N_set.discard(k)
            partition.I_init.add(k)
            return partition, RIGHT
        partition.greedy_calls += 1
        a = epsilon_greedy(Q, s, epsilon, rng, tie)
        partition.N_set.discard(k)
        if a == RIGHT:
            partition.I_init.add(k)
        return partition, a
    if k in partition.I_init:
        return partition, RIGHT
    return partition, DOWN


def update_q(N: int, K: int, Q, s: MazeState, s2: MazeState, a: int, r: float,
             alpha: float, gamma: float):
    """One temporal-difference update of Q(s, a); on a wall the only legal next action bootstraps."""
    if s2.row == N - K:
        target = Q[s2.row, s2.col, RIGHT]
    elif s2.col == K:
        target = Q[s2.row, s2.col, DOWN]
    else:
        target = max(Q[s2.row, s2.col, DOWN], Q[s2.row, s2.col, RIGHT])
    q = Q[s.row, s.col, a]
    Q[s.row, s.col, a] = q + alpha * (r + gamma * target - q)
    return Q


def reward(c, k: int, i: int, f: int, x: float, z: float):
    """Per-step reward from the best path's bit ``c[k]`` and the all-zero path's rank ``i``."""
    if c[k] == 0:
        return x - z * (i - 1), f
    r = -x - z * (i - 1)
    if f == 0:
        r -= x
        f = 1
    return r, f


def _episode_llrs(N: int, K: int, cfg: TrainConfig, episode_index: int) -> np.ndarray:
    sigma = sigma_from_ebn0(cfg.train_ebn0_db, K / N)
    if cfg.noiseless:
        return llr(np.ones(N), sigma * sigma)
    frame = 0 if cfg.freeze_noise else episode_index
    y = 1.0 + sigma * frame_rng(cfg.seed, frame, 2).standard_normal(N)
    return llr(y, sigma * sigma)


def run_episode(code: CodeParams, w, Q, cfg: TrainConfig, episode_index: int, rng,
                epsilon: float | None = None, llrs=None):
    """Play one episode and apply its Q updates; returns ``(Q, EpisodeOutcome)``."""
    N, K = code.N, code.K
    eps = cfg.epsilon_at(episode_index) if epsilon is None else epsilon
    if llrs is None:
        llrs = _episode_llrs(N, K, cfg, episode_index)
    session = DecoderSession(llrs, DecoderConfig(cfg.L, cfg.kernel, as_precoder(w)))
    part = rm_score_partition(N, K)
    x, z = cfg.base_reward, cfg.step_reward
    actions = np.zeros(N, dtype=np.int8)
    s = INITIAL_STATE
    for k in range(N):
        part, a = select_action(Q, part, K, k, s, eps, rng)
        actions[k] = a
        s2 = next_state(s, a, N, K)
        report = session.step(frozen=(a == DOWN))
        if a == RIGHT and not report.allzero_alive:
            update_q(N, K, Q, s, s2, a, -2.0 * x, cfg.alpha, cfg.gamma)
            return Q, EpisodeOutcome(actions[: k + 1], 1, greedy_calls=part.greedy_calls,
                                     reward=-2.0 * x, drop_step=k)
        s = s2
    result = session.finalize()
    i = result.allzero_rank
    c = result.best.v
    s = INITIAL_STATE
    f = 0
    total = 0.0
    for k in range(N):
        a = int(actions[k])
        s2 = next_state(s, a, N, K)
        r, f = reward(c, k, i, f, x, z)
        total += r
        update_q(N, K, Q, s, s2, a, r, cfg.alpha, cfg.gamma)
        s = s2
    return Q, EpisodeOutcome(actions, 0, i, c, part.greedy_calls, total)


def train(N: int, K: int, w, cfg: TrainConfig, Q=None, progress=None):
    """Run ``cfg.episodes`` episodes; returns ``(Q, TrainReport)``."""
    code = CodeParams(N, K)
    if not 0 < K < N:
        raise ValueError(f"need 0 < K < N, got N={N}, K={K}")
    Q = new_q_table(N, K) if Q is None else Q
    rng = np.random.default_rng([int(cfg.seed), 1])
    report = TrainReport(N=N, K=K)
    cumulative = 0.0
    fixed_llrs = _episode_llrs(N, K, cfg, 0) if cfg.freeze_noise else None
    for e in range(cfg.episodes):
        eps = cfg.epsilon_at(e)
        Q, out = run_episode(code, w, Q, cfg, e, rng, eps, llrs=fixed_llrs)
        if out.F == 0 and out.right_actions != K:
            raise AssertionError(f"episode {e} allocated {out.right_actions} information bits, expected {K}")
        cumulative += out.reward
        report.records.append({
            "episode": e, "F": out.F, "i": out.i, "epsilon": eps, "reward": out.reward,
            "cumulative_reward": cumulative, "greedy_calls": out.greedy_calls,
        })
        if out.F == 0 and out.reward > report.best_reward:
            report.best_reward = out.reward
            report.best_actions = out.actions.copy()
        if progress is not None:
            progress(e, out)
    return Q, report


def extract_profile(Q, N: int, K: int) -> RateProfile:
    """Greedy walk (no exploration, ties to information) through the trained table."""
    part = rm_score_partition(N, K)
    bits = np.zeros(N, dtype=np.uint8)
    s = INITIAL_STATE
    for k in range(N):
        part, a = select_action(Q, part, K, k, s, 0.0, None, tie="right")
        bits[k] = a
        s = next_state(s, a, N, K)
    return RateProfile(bits)


def save_q(path, Q, N: int, K: int, cfg: TrainConfig | None = None, w=None, manifest=None) -> None:
    obj = {
        "N": N,
        "K": K,
        "shape": list(Q.shape),
        "w": None if w is None else str(as_precoder(w)),
        "config": None if cfg is None else asdict(cfg),
        "manifest": manifest,
        "values": [float(q) for q in np.asarray(Q).ravel()],
    }
    Path(path).write_text(json.dumps(obj))


def load_q(path):
    """Returns ``(Q, meta)`` where ``meta`` is the checkpoint without its values."""
    obj = json.loads(Path(path).read_text())
    Q = np.array(obj.pop("values"), dtype=np.float64).reshape(obj["shape"])
    if Q.shape != (obj["N"] - obj["K"] + 1, obj["K"] + 1, 2):
        raise ValueError(f"checkpoint shape {Q.shape} does not match N={obj['N']}, K={obj['K']}")
    return Q, obj
