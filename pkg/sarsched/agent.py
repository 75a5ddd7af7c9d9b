# coding=utf-8
"""
Proximal policy optimization for the sensing/communication scheduler.

A categorical policy over {communicate, sense} and a separate value network,
both numpy MLPs. Masked actions get -inf logits. Advantages come from GAE and
the policy is updated with the clipped surrogate objective plus an entropy
bonus, using Adam.

"""

import dataclasses
import logging
from typing import Callable, Dict, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from .env import OBS_DIM, Action, SchedulingGymEnv
from .exceptions import ContractViolation, NonFiniteError
from .network import MLP, Adam, RunningNorm
from .params import AgentSection, EvaluationSection, ScenarioConfig, TrainingSection
from .records import EpisodeLog
from .scenario import EveTrack, gen_eve_circular, gen_eve_random

log = logging.getLogger(__name__)
log.addHandler(logging.NullHandler())

N_ACTIONS = len(Action)
OUTPUT_SCALE = 0.01

CURVE_COLUMNS = ["iteration", "mean_reward", "mean_secrecy", "mean_user_rate", "scr_violations"]


@dataclasses.dataclass
class PolicyParams:
    policy: MLP
    value: MLP
    obs_norm: Optional[RunningNorm] = None

    @classmethod
    def init(cls, hidden_sizes: Sequence[int], rng: np.random.Generator, obs_dim: int = OBS_DIM,
             obs_norm: bool = False) -> "PolicyParams":
        hidden = list(hidden_sizes)
        return cls(
            policy=MLP([obs_dim] + hidden + [N_ACTIONS], rng, output_scale=OUTPUT_SCALE),
            value=MLP([obs_dim] + hidden + [1], rng, output_scale=1.0),
            obs_norm=RunningNorm(obs_dim) if obs_norm else None,
        )

    @property
    def arrays(self) -> List[np.ndarray]:
        return self.policy.params + self.value.params

    def prepare(self, obs: np.ndarray) -> np.ndarray:
        obs = np.asarray(obs, dtype=np.float64)
        return self.obs_norm(obs) if self.obs_norm is not None else obs

    def copy(self) -> "PolicyParams":
        norm = self.obs_norm.copy() if self.obs_norm is not None else None
        return PolicyParams(policy=self.policy.copy(), value=self.value.copy(), obs_norm=norm)

    def is_finite(self) -> bool:
        return all(np.all(np.isfinite(a)) for a in self.arrays)


@dataclasses.dataclass
class RolloutBatch:
    obs: np.ndarray
    actions: np.ndarray
    log_probs: np.ndarray
    rewards: np.ndarray
    values: np.ndarray
    dones: np.ndarray
    masks: np.ndarray
    advantages: Optional[np.ndarray] = None
    returns: Optional[np.ndarray] = None

    def __len__(self) -> int:
        return len(self.actions)

    def take(self, idx: np.ndarray) -> "RolloutBatch":
        fields = {f.name: getattr(self, f.name) for f in dataclasses.fields(self)}
        return RolloutBatch(**{k: (v[idx] if v is not None else None) for k, v in fields.items()})


def masked_probs(logits: np.ndarray, masks: np.ndarray) -> np.ndarray:
    """Softmax over permitted actions; forbidden actions get probability 0."""
    logits = np.atleast_2d(logits)
    masks = np.atleast_2d(masks)
    if not np.all(masks.any(axis=1)):
        raise ContractViolation("every action is masked")
    z = np.where(masks, logits, -np.inf)
    z = z - z.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def _log(p: np.ndarray) -> np.ndarray:
    return np.log(np.where(p > 0, p, 1.0))


def act(params: PolicyParams, obs: np.ndarray, mask: np.ndarray, rng: np.random.Generator,
        greedy: bool = False) -> Tuple[int, float, float]:
    """
    Sample (or, when greedy, take the most likely) permitted action.

    `mask` is a boolean array indexed by Action value.
    """
    x = params.prepare(obs)[None, :]
    p = masked_probs(params.policy(x), np.asarray(mask, dtype=bool)[None, :])[0]
    if greedy:
        action = int(np.argmax(p))
    else:
        action = int(rng.choice(N_ACTIONS, p=p))
    value = float(params.value(x)[0, 0])
    return action, float(np.log(p[action])), value


def gae(batch: RolloutBatch, gamma: float, lam: float, last_value: float = 0.0) -> RolloutBatch:
    """Generalized advantage estimates and returns; episode ends are marked by dones."""
    T = len(batch)
    adv = np.zeros(T)
    next_adv, next_value = 0.0, last_value
    for t in range(T - 1, -1, -1):
        live = 1.0 - float(batch.dones[t])
        delta = batch.rewards[t] + gamma * next_value * live - batch.values[t]
        next_adv = delta + gamma * lam * live * next_adv
        adv[t] = next_adv
        next_value = batch.values[t]
    return dataclasses.replace(batch, advantages=adv, returns=adv + batch.values)


def normalize_advantages(adv: np.ndarray) -> np.ndarray:
    return (adv - adv.mean()) / (adv.std() + 1e-8)


def _policy_terms(params: PolicyParams, mb: RolloutBatch):
    logits, cache = params.policy.forward(mb.obs)
    p = masked_probs(logits, mb.masks)
    logp = _log(p)
    rows = np.arange(len(mb))
    ratio = np.exp(logp[rows, mb.actions] - mb.log_probs)
    return p, logp, ratio, cache


def surrogate_objective(params: PolicyParams, mb: RolloutBatch, clip: float) -> float:
    """Mean clipped surrogate min(r A, clip(r) A)."""
    _, _, ratio, _ = _policy_terms(params, mb)
    adv = mb.advantages
    return float(np.mean(np.minimum(ratio * adv, np.clip(ratio, 1.0 - clip, 1.0 + clip) * adv)))


def ppo_loss_and_grads(params: PolicyParams, mb: RolloutBatch, clip: float, vf_coef: float,
                       ent_coef: float) -> Tuple[float, List[np.ndarray], Dict[str, float]]:
    """
    Total PPO loss for a minibatch and its gradient w.r.t. params.arrays.

    loss = -mean(min(r A, clip(r) A)) - ent_coef * mean(H) + vf_coef * mean((V - R)^2)
    """
    B = len(mb)
    rows = np.arange(B)
    p, logp, ratio, cache = _policy_terms(params, mb)
    adv = mb.advantages

    unclipped = ratio * adv
    clipped = np.clip(ratio, 1.0 - clip, 1.0 + clip) * adv
    objective = np.minimum(unclipped, clipped)
    # d objective / d log pi(a): nonzero only where the unclipped branch is active
    d_obj = np.where(unclipped <= clipped, unclipped, 0.0)

    entropy = -np.sum(p * logp, axis=1)
    onehot = np.zeros_like(p)
    onehot[rows, mb.actions] = 1.0
    d_logp = onehot - p
    d_entropy = -p * (logp + entropy[:, None])

    d_logits = -(d_obj[:, None] * d_logp) / B - ent_coef * d_entropy / B
    policy_grads = params.policy.backward(cache, d_logits)

    values, v_cache = params.value.forward(mb.obs)
    values = values[:, 0]
    err = values - mb.returns
    d_values = (2.0 * vf_coef / B) * err
    value_grads = params.value.backward(v_cache, d_values[:, None])

    policy_loss = -float(objective.mean()) - ent_coef * float(entropy.mean())
    value_loss = vf_coef * float(np.mean(err ** 2))
    stats = {
        "policy_loss": policy_loss,
        "value_loss": value_loss,
        "entropy": float(entropy.mean()),
        "approx_kl": float(np.mean(mb.log_probs - logp[rows, mb.actions])),
        "clip_frac": float(np.mean(np.abs(ratio - 1.0) > clip)),
    }
    return policy_loss + value_loss, policy_grads + value_grads, stats


def _check_finite(params: PolicyParams, loss: float, where: str) -> None:
    if not np.isfinite(loss) or not params.is_finite():
        log.error("Non-finite training state after %s (loss=%r)", where, loss)
        raise NonFiniteError(f"non-finite loss or parameters after {where}")


def ppo_update(params: PolicyParams, batch: RolloutBatch, hyper: AgentSection,
               rng: np.random.Generator, optimizer: Optional[Adam] = None) -> Dict[str, float]:
    """
    Several epochs of minibatch Adam steps on the clipped objective.

    Updates params in place (through the optimizer bound to params.arrays)
    and returns the statistics of the last minibatch.
    """
    if len(batch) == 0:
        raise ValueError("cannot update on an empty batch")
    optimizer = optimizer or Adam(params.arrays, lr=hyper.lr)
    batch = dataclasses.replace(batch, advantages=normalize_advantages(batch.advantages))
    stats: Dict[str, float] = {}
    for epoch in range(hyper.epochs):
        order = rng.permutation(len(batch))
        for start in range(0, len(batch), hyper.minibatch):
            mb = batch.take(order[start:start + hyper.minibatch])
            loss, grads, stats = ppo_loss_and_grads(params, mb, hyper.clip, hyper.vf_coef, hyper.ent_coef)
            optimizer.step(grads)
            _check_finite(params, loss, f"epoch {epoch}")
    return stats


def collect_rollouts(params: PolicyParams, env: SchedulingGymEnv, episodes: int,
                     rng: np.random.Generator) -> Tuple[RolloutBatch, List[EpisodeLog]]:
    """Run full episodes with the sampling policy and stack their transitions."""
    obs_l, raw_l, act_l, logp_l, rew_l, val_l, done_l, mask_l = ([] for _ in range(8))
    logs = []
    for _ in range(episodes):
        obs, info = env.reset(seed=int(rng.integers(2 ** 31)))
        episode = EpisodeLog.begin(env.state)
        done = False
        while not done:
            mask = info["action_mask"]
            action, logp, value = act(params, obs, mask, rng)
            raw_l.append(obs)
            obs_l.append(params.prepare(obs))
            act_l.append(action)
            logp_l.append(logp)
            val_l.append(value)
            mask_l.append(mask)
            obs, reward, done, _, info = env.step(action)
            episode.record(env.state, info["outcome"])
            rew_l.append(reward)
            done_l.append(done)
        logs.append(episode)
    if params.obs_norm is not None:
        params.obs_norm.update(np.array(raw_l))
    batch = RolloutBatch(
        obs=np.array(obs_l), actions=np.array(act_l, dtype=int), log_probs=np.array(logp_l),
        rewards=np.array(rew_l), values=np.array(val_l), dones=np.array(done_l, dtype=bool),
        masks=np.array(mask_l, dtype=bool),
    )
    return batch, logs


def evaluate_policy(params: PolicyParams, cfg: ScenarioConfig, tracks: Sequence[EveTrack],
                    greedy: bool = True, seed: int = 0) -> List[EpisodeLog]:
    """One episode per track; greedy evaluation takes the arg-max permitted action."""
    rng = np.random.default_rng(seed)
    logs = []
    for track in tracks:
        env = SchedulingGymEnv(cfg, track)
        obs, info = env.reset(seed=int(rng.integers(2 ** 31)))
        episode = EpisodeLog.begin(env.state)
        done = False
        while not done:
            action, _, _ = act(params, obs, info["action_mask"], rng, greedy=greedy)
            obs, _, done, _, info = env.step(action)
            episode.record(env.state, info["outcome"])
        logs.append(episode)
    return logs


def evaluation_tracks(cfg: ScenarioConfig, evaluation: EvaluationSection, seed: int) -> List[EveTrack]:
    """Held-out circular tracks around the user, episodes_per_speed per speed."""
    seeds = np.random.SeedSequence(seed).spawn(len(evaluation.speeds_mps) * evaluation.episodes_per_speed)
    tracks = []
    for k, speed in enumerate(np.repeat(evaluation.speeds_mps, evaluation.episodes_per_speed)):
        track_seed = int(seeds[k].generate_state(1)[0])
        tracks.append(gen_eve_circular(cfg, evaluation.radius_m, float(speed), track_seed))
    return tracks


def random_track_sampler(cfg: ScenarioConfig) -> Callable[[np.random.Generator], EveTrack]:
    def sample(rng: np.random.Generator) -> EveTrack:
        return gen_eve_random(cfg, int(rng.integers(2 ** 31)))
    return sample


class TrainResult(NamedTuple):
    params: PolicyParams
    final_params: PolicyParams
    curve: pd.DataFrame
    best_score: float


def train(cfg: ScenarioConfig, hyper: AgentSection, training: TrainingSection, seed: int,
          track_sampler: Optional[Callable[[np.random.Generator], EveTrack]] = None,
          eval_tracks: Sequence[EveTrack] = ()) -> TrainResult:
    """
    Rollout, GAE and PPO update on freshly drawn tracks every iteration.

    The returned params are the best by greedy mean secrecy on eval_tracks
    (the final params when no evaluation tracks are given).
    """
    init_ss, rollout_ss, update_ss = np.random.SeedSequence(seed).spawn(3)
    params = PolicyParams.init(hyper.hidden_sizes, np.random.default_rng(init_ss), obs_norm=hyper.obs_norm)
    rollout_rng = np.random.default_rng(rollout_ss)
    update_rng = np.random.default_rng(update_ss)
    env = SchedulingGymEnv(cfg, track_sampler or random_track_sampler(cfg))
    optimizer = Adam(params.arrays, lr=hyper.lr)

    best, best_score = params.copy(), -np.inf
    rows = []
    for iteration in range(1, training.iterations + 1):
        batch, logs = collect_rollouts(params, env, training.episodes_per_iteration, rollout_rng)
        batch = gae(batch, hyper.gamma, hyper.gae_lambda)
        stats = ppo_update(params, batch, hyper, update_rng, optimizer)

        row = {
            "iteration": iteration,
            "mean_reward": float(np.mean([lg.total_reward for lg in logs])),
            "mean_secrecy": float(np.mean([lg.mean_secrecy for lg in logs])),
            "mean_user_rate": float(np.mean([lg.mean_user_rate for lg in logs])),
            "scr_violations": int(sum(lg.scr_violations for lg in logs)),
        }
        rows.append(row)
        log.info("Iteration %d: reward=%.3f secrecy=%.3f user_rate=%.3f scr_violations=%d entropy=%.3f",
                 iteration, row["mean_reward"], row["mean_secrecy"], row["mean_user_rate"],
                 row["scr_violations"], stats.get("entropy", float("nan")))

        if eval_tracks and (iteration % training.eval_interval == 0 or iteration == training.iterations):
            score = float(np.mean([lg.mean_secrecy for lg in evaluate_policy(params, cfg, eval_tracks)]))
            log.info("Evaluation after iteration %d: mean secrecy %.4f", iteration, score)
            if score > best_score:
                best, best_score = params.copy(), score
                log.info("New best policy (mean secrecy %.4f)", score)

    if not eval_tracks:
        best = params.copy()
    curve = pd.DataFrame(rows, columns=CURVE_COLUMNS)
    return TrainResult(params=best, final_params=params, curve=curve, best_score=float(best_score))
