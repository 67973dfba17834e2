"""Sequential-update multi-agent PPO with the latent-diffusion actor.

Per iteration: collect on-policy rollouts, estimate advantages (GAE over the
shared critic's value trace), draw a fresh agent permutation, then update
each agent once in order on the clipped surrogate built from the compound
advantage plus a weighted denoising loss; after each agent's step its
post-update probability ratios scale the compound advantage for the agents
that follow. The critic is then regressed toward the GAE value targets. The
rollout store is cleared every iteration (on-policy contract).

Ratios are exact: per stored step the latent draw, mask, and observation are
replayed, so an unchanged parameter vector reproduces the stored
log-probability bit for bit and yields a ratio of exactly 1.
"""

from __future__ import annotations

import csv
import json
import os
from dataclasses import dataclass, field, replace

import numpy as np

from ..seeding import derive_stream_seed, stream
from .actor import ActorConfig, Critic, DiffusionActor, masked_log_softmax, sample_action
from .env import OffloadEnv, RewardParams, observation_dim
from .nets import Adam, add_scaled, grad_arrays, param_arrays

CHECKPOINT_VERSION = 1
CURVE_HEADER = ["iteration", "mean_reward", "actor_loss", "diffusion_loss",
                "critic_loss"]


@dataclass
class RolloutBuffer:
    """On-policy rollout storage; one row per environment step."""

    states: np.ndarray  # (T, state_dim)
    obs: np.ndarray  # (T, n_agents, obs_dim)
    actions: np.ndarray  # (T, n_agents) int, -1 where inactive
    logps: np.ndarray  # (T, n_agents)
    latents: np.ndarray  # (T, n_agents, latent_dim)
    masks: np.ndarray  # (T, n_agents, n_actions) bool
    active: np.ndarray  # (T, n_agents) bool
    rewards: np.ndarray  # (T,)
    dones: np.ndarray  # (T,)
    values: np.ndarray  # (T,)
    episode_rewards: list[float] = field(default_factory=list)


def gae_advantages(rewards: np.ndarray, values: np.ndarray, dones: np.ndarray,
                   gamma: float, lam: float) -> np.ndarray:
    """Standard recursive generalized advantage estimation.

    Terminal steps (done flag) cut the recursion; value after the final
    stored step is taken as zero, which is exact for complete episodes.
    """
    rewards = np.asarray(rewards, dtype=np.float64)
    values = np.asarray(values, dtype=np.float64)
    nonterminal = 1.0 - np.asarray(dones, dtype=np.float64)
    n = len(rewards)
    adv = np.zeros(n)
    running = 0.0
    for t in range(n - 1, -1, -1):
        next_value = values[t + 1] if t + 1 < n else 0.0
        delta = rewards[t] + gamma * next_value * nonterminal[t] - values[t]
        running = delta + gamma * lam * nonterminal[t] * running
        adv[t] = running
    return adv


def compound_advantage(m_prev: np.ndarray, ratio_prev: np.ndarray) -> np.ndarray:
    """One recursion step: scale the compound advantage by the previously
    updated agent's probability ratios."""
    m_prev = np.asarray(m_prev, dtype=np.float64)
    ratio_prev = np.asarray(ratio_prev, dtype=np.float64)
    if m_prev.shape != ratio_prev.shape:
        raise ValueError("compound advantage and ratios must share a shape")
    return ratio_prev * m_prev


def happo_clip_loss(new_logp: np.ndarray, old_logp: np.ndarray,
                    m_adv: np.ndarray, epsilon: float
                    ) -> tuple[float, np.ndarray]:
    """Clipped surrogate (negated for minimization) and its exact gradient
    with respect to the new log-probabilities."""
    if not 0.0 < epsilon < 1.0:
        raise ValueError("clip epsilon must lie in (0, 1)")
    ratio = np.exp(new_logp - old_logp)
    unclipped = ratio * m_adv
    clipped = np.clip(ratio, 1.0 - epsilon, 1.0 + epsilon) * m_adv
    per_sample = np.minimum(unclipped, clipped)
    loss = -float(per_sample.mean())
    takes_unclipped = (unclipped <= clipped).astype(np.float64)
    grad = -(ratio * m_adv) * takes_unclipped / len(new_logp)
    return loss, grad


def collect_rollout(config, actors: list[DiffusionActor], critic: Critic,
                    seed: int, iteration: int) -> RolloutBuffer:
    tcfg = config.training
    n_agents = config.world.n_uavs
    rows = {key: [] for key in ("states", "obs", "actions", "logps", "latents",
                                "masks", "active", "rewards", "dones", "values")}
    episode_rewards = []
    for ep in range(tcfg.rollout_episodes):
        env = OffloadEnv(config, derive_stream_seed(seed, f"world:{iteration}:{ep}"),
                         terminate_when_done=tcfg.early_stop)
        act_rng = stream(seed, f"actions:{iteration}:{ep}")
        snap = env.reset()
        done = False
        total = 0.0
        while not done:
            actions = [None] * n_agents
            logps = np.zeros(n_agents)
            latents = np.zeros((n_agents, actors[0].cfg.latent_dim))
            acts = -np.ones(n_agents, dtype=int)
            for u in range(n_agents):
                if snap.active[u]:
                    a, lp, z = sample_action(actors[u], snap.obs[u],
                                             snap.masks[u], act_rng)
                    actions[u] = a
                    acts[u] = a
                    logps[u] = lp
                    latents[u] = z
            value, _ = critic.value(snap.state)
            nxt, rew, done, _ = env.step(actions)
            rows["states"].append(snap.state)
            rows["obs"].append(np.stack(snap.obs))
            rows["actions"].append(acts)
            rows["logps"].append(logps)
            rows["latents"].append(latents)
            rows["masks"].append(np.stack(snap.masks))
            rows["active"].append(np.array(snap.active, dtype=bool))
            rows["rewards"].append(rew)
            rows["dones"].append(float(done))
            rows["values"].append(float(value[0]))
            total += rew
            snap = nxt
        episode_rewards.append(total)
    return RolloutBuffer(
        states=np.stack(rows["states"]),
        obs=np.stack(rows["obs"]),
        actions=np.stack(rows["actions"]),
        logps=np.stack(rows["logps"]),
        latents=np.stack(rows["latents"]),
        masks=np.stack(rows["masks"]),
        active=np.stack(rows["active"]),
        rewards=np.array(rows["rewards"]),
        dones=np.array(rows["dones"]),
        values=np.array(rows["values"]),
        episode_rewards=episode_rewards)


@dataclass
class TrainResult:
    actors: list[DiffusionActor]
    critic: Critic
    curves: list[dict]
    actor_updates_per_iteration: list[int]


def _actor_config(config, use_diffusion: bool) -> ActorConfig:
    t = config.training
    return ActorConfig(
        obs_dim=observation_dim(config.world.n_tbs),
        n_actions=config.world.n_uavs + config.world.n_tbs + 1,
        latent_dim=t.latent_dim, hidden=t.hidden, activation=t.activation,
        diffusion_steps=t.diffusion_steps, use_diffusion=use_diffusion)


def build_actors_and_critic(config, seed: int, use_diffusion: bool
                            ) -> tuple[list[DiffusionActor], Critic]:
    acfg = _actor_config(config, use_diffusion)
    actors = [DiffusionActor(acfg, stream(seed, f"init:actor:{i}"))
              for i in range(config.world.n_uavs)]
    state_dim = config.world.n_uavs * acfg.obs_dim
    critic = Critic(state_dim, config.training.hidden,
                    config.training.activation, stream(seed, "init:critic"))
    return actors, critic


def _agent_update(actor: DiffusionActor, adam: Adam, buffer: RolloutBuffer,
                  agent: int, m_adv: np.ndarray, tcfg, diff_rng
                  ) -> tuple[float, float, np.ndarray]:
    """One clipped-surrogate (+ weighted denoising) step for one agent;
    returns (ppo loss, diffusion loss, post-update ratios over its rows)."""
    rows = np.where(buffer.active[:, agent])[0]
    if len(rows) == 0:
        return 0.0, 0.0, np.ones(0)
    obs = buffer.obs[rows, agent]
    lat = buffer.latents[rows, agent]
    acts = buffer.actions[rows, agent]
    mask = buffer.masks[rows, agent]
    old_logp = buffer.logps[rows, agent]

    logits, cache = actor.logits(obs, lat)
    logp_all = masked_log_softmax(logits, mask)
    take = np.arange(len(rows))
    new_logp = logp_all[take, acts]
    ppo_loss, dnew = happo_clip_loss(new_logp, old_logp, m_adv[rows],
                                     tcfg.clip_epsilon)
    probs = np.where(mask, np.exp(logp_all), 0.0)
    dlogits = np.zeros_like(logits)
    dlogits[take, acts] = dnew
    dlogits -= dnew[:, None] * probs
    grads = actor.backward_from_logits(dlogits, cache)

    diff_loss = 0.0
    if actor.cfg.use_diffusion and tcfg.diffusion_loss_weight > 0:
        batch = tcfg.batch_size
        pick = diff_rng.integers(0, len(rows), size=batch)
        z0 = diff_rng.standard_normal((batch, actor.cfg.latent_dim))
        t_idx = diff_rng.integers(1, actor.schedule.steps + 1, size=batch)
        noise = diff_rng.standard_normal((batch, actor.cfg.latent_dim))
        diff_loss, diff_grads = actor.diffusion_loss_and_grads(
            obs[pick], z0, t_idx, noise)
        for name, net in actor.net_items():
            add_scaled(grads[name], diff_grads[name], tcfg.diffusion_loss_weight)

    if not (np.isfinite(ppo_loss) and np.isfinite(diff_loss)):
        raise RuntimeError(
            f"non-finite actor loss (ppo={ppo_loss}, diffusion={diff_loss})")
    adam.step(grad_arrays(*(grads[name] for name, _ in actor.net_items())))

    new_logp2 = actor.log_probs(obs, lat, mask)[take, acts]
    ratios = np.exp(new_logp2 - old_logp)
    return ppo_loss, diff_loss, ratios


def train(config, seed: int, out_dir: str | None = None,
          disable_diffusion: bool = False) -> TrainResult:
    """Run the full training loop; deterministic given (config, seed)."""
    config.validate()
    tcfg = config.training
    use_diffusion = tcfg.use_diffusion and not disable_diffusion
    n_agents = config.world.n_uavs
    actors, critic = build_actors_and_critic(config, seed, use_diffusion)
    adams = [Adam(param_arrays(*(net for _, net in actor.net_items())),
                  tcfg.learning_rate) for actor in actors]
    critic_adam = Adam(param_arrays(critic.net), tcfg.learning_rate)
    perm_rng = stream(seed, "permutations")
    diff_rng = stream(seed, "diffusion-batches")

    curves = []
    updates_per_iter = []
    for iteration in range(tcfg.iterations):
        buffer = collect_rollout(config, actors, critic, seed, iteration)
        raw_adv = gae_advantages(buffer.rewards, buffer.values, buffer.dones,
                                 tcfg.gamma, tcfg.gae_lambda)
        adv = raw_adv
        if tcfg.advantage_normalize:
            adv = (raw_adv - raw_adv.mean()) / (raw_adv.std() + 1e-8)
        m_adv = adv.copy()

        order = perm_rng.permutation(n_agents)
        updates = 0
        ppo_losses = []
        diff_losses = []
        for agent in order:
            agent = int(agent)
            ppo_loss, diff_loss, ratios = _agent_update(
                actors[agent], adams[agent], buffer, agent, m_adv, tcfg, diff_rng)
            rows = np.where(buffer.active[:, agent])[0]
            if len(rows):
                m_adv[rows] = compound_advantage(m_adv[rows], ratios)
            ppo_losses.append(ppo_loss)
            diff_losses.append(diff_loss)
            updates += 1
        updates_per_iter.append(updates)

        targets = raw_adv + buffer.values
        critic_loss = 0.0
        for _ in range(tcfg.critic_epochs):
            critic_loss, cgrads = critic.td_loss_and_grads(buffer.states, targets)
            if not np.isfinite(critic_loss):
                raise RuntimeError(f"non-finite critic loss {critic_loss}")
            critic_adam.step(grad_arrays(cgrads))

        curves.append({
            "iteration": iteration,
            "mean_reward": float(np.mean(buffer.episode_rewards)),
            "actor_loss": float(np.mean(ppo_losses)),
            "diffusion_loss": float(np.mean(diff_losses)),
            "critic_loss": float(critic_loss),
        })

    result = TrainResult(actors=actors, critic=critic, curves=curves,
                         actor_updates_per_iteration=updates_per_iter)
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        write_curves(os.path.join(out_dir, "curves.csv"), curves)
        save_checkpoint(os.path.join(out_dir, "checkpoint.npz"),
                        actors, critic, config)
    return result


def evaluate_policy(config, actors: list[DiffusionActor], seed: int,
                    episodes: int = 16) -> float:
    """Mean total episode reward of the (frozen) actors over fresh seeds."""
    tcfg = config.training
    totals = []
    for ep in range(episodes):
        env = OffloadEnv(config, derive_stream_seed(seed, f"eval-world:{ep}"),
                         terminate_when_done=tcfg.early_stop)
        rng = stream(seed, f"eval-actions:{ep}")
        snap = env.reset()
        done = False
        total = 0.0
        while not done:
            actions = [None] * env.n_agents
            for u in range(env.n_agents):
                if snap.active[u]:
                    a, _, _ = sample_action(actors[u], snap.obs[u],
                                            snap.masks[u], rng)
                    actions[u] = a
            snap, rew, done, _ = env.step(actions)
            total += rew
        totals.append(total)
    return float(np.mean(totals))


def write_curves(path: str, curves: list[dict]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=CURVE_HEADER)
        writer.writeheader()
        for row in curves:
            writer.writerow(row)


def save_checkpoint(path: str, actors: list[DiffusionActor], critic: Critic,
                    config) -> None:
    """All parameters in one npz: a json meta header carrying the version
    tag and scenario shape, plus one array per layer tensor under
    agent{i}/{net}/{layer}/{W,b} and critic/{layer}/{W,b} keys."""
    cfg = actors[0].cfg
    meta = {
        "version": CHECKPOINT_VERSION,
        "n_agents": len(actors),
        "obs_dim": cfg.obs_dim,
        "n_actions": cfg.n_actions,
        "latent_dim": cfg.latent_dim,
        "hidden": cfg.hidden,
        "activation": cfg.activation,
        "diffusion_steps": cfg.diffusion_steps,
        "use_diffusion": cfg.use_diffusion,
        "state_dim": len(actors) * cfg.obs_dim,
    }
    arrays = {"meta": np.array(json.dumps(meta))}
    for i, actor in enumerate(actors):
        for name, net in actor.net_items():
            for j, (w, b) in enumerate(net):
                arrays[f"agent{i}/{name}/{j}/W"] = w
                arrays[f"agent{i}/{name}/{j}/b"] = b
    for j, (w, b) in enumerate(critic.net):
        arrays[f"critic/{j}/W"] = w
        arrays[f"critic/{j}/b"] = b
    np.savez(path, **arrays)


def load_checkpoint(path: str) -> tuple[list[DiffusionActor], Critic, dict]:
    data = np.load(path, allow_pickle=False)
    meta = json.loads(str(data["meta"]))
    if meta.get("version") != CHECKPOINT_VERSION:
        raise ValueError(f"unsupported checkpoint version {meta.get('version')}")
    acfg = ActorConfig(
        obs_dim=meta["obs_dim"], n_actions=meta["n_actions"],
        latent_dim=meta["latent_dim"], hidden=meta["hidden"],
        activation=meta["activation"], diffusion_steps=meta["diffusion_steps"],
        use_diffusion=meta["use_diffusion"])
    rng = np.random.default_rng(0)
    actors = []
    for i in range(meta["n_agents"]):
        actor = DiffusionActor(acfg, rng)
        for name, net in actor.net_items():
            for j in range(len(net)):
                net[j][0] = data[f"agent{i}/{name}/{j}/W"]
                net[j][1] = data[f"agent{i}/{name}/{j}/b"]
        actors.append(actor)
    critic = Critic(meta["state_dim"], meta["hidden"], meta["activation"], rng)
    for j in range(len(critic.net)):
        critic.net[j][0] = data[f"critic/{j}/W"]
        critic.net[j][1] = data[f"critic/{j}/b"]
    return actors, critic, meta
