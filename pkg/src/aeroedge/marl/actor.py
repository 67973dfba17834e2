"""Latent-generative actor and shared critic.

Action pipeline: the encoder maps the observation to a feature vector; a
Gaussian latent draw is denoised in one conditioned application (feature and
normalized step index appended to the denoiser input) into a clean latent;
the decoder maps that latent to candidate logits, infeasible candidates are
masked out, and the action is drawn from the resulting categorical.

The categorical log-probability of the decoded masked softmax is what enters
the PPO ratios: per action draw the latent is a stochastic conditioning
feature, re-pinned from the stored draw during updates so old and new
log-probabilities are computed on identical inputs. With diffusion disabled
the clean latent comes from a linear head on the encoder features instead,
recovering a plain PPO actor with the same decoder shape.

The training-time denoising objective is the mean over the batch of the
squared error norm between the injected noise and the denoiser output on the
noised latent; its gradient flows into both the denoiser and the encoder.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .diffusion import DiffusionSchedule, forward_diffuse
from .nets import (Params, mlp_backward, mlp_forward, mlp_init,
                   zeros_like_params)


@dataclass(frozen=True)
class ActorConfig:
    obs_dim: int
    n_actions: int
    latent_dim: int = 32
    hidden: int = 128
    activation: str = "tanh"
    diffusion_steps: int = 10
    beta_start: float = 1e-4
    beta_end: float = 0.02
    use_diffusion: bool = True


def masked_log_softmax(logits: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """Log-probabilities over feasible candidates; -inf where masked.

    A single feasible candidate gets log-probability exactly 0.
    """
    logits = np.atleast_2d(logits)
    mask = np.atleast_2d(mask).astype(bool)
    if not mask.any(axis=1).all():
        raise ValueError("infeasible: at least one candidate must be unmasked")
    neg = np.where(mask, logits, -np.inf)
    peak = neg.max(axis=1, keepdims=True)
    expd = np.where(mask, np.exp(neg - peak), 0.0)
    lse = np.log(expd.sum(axis=1, keepdims=True))
    return np.where(mask, neg - peak - lse, -np.inf)


class DiffusionActor:
    """One agent's policy networks (heterogeneous across agents)."""

    def __init__(self, cfg: ActorConfig, rng: np.random.Generator):
        self.cfg = cfg
        self.schedule = DiffusionSchedule.linear(cfg.diffusion_steps,
                                                 cfg.beta_start, cfg.beta_end)
        h, z = cfg.hidden, cfg.latent_dim
        self.encoder: Params = mlp_init([cfg.obs_dim, h, h], rng)
        self.latent_head: Params = mlp_init([h, z], rng)
        self.denoiser: Params = mlp_init([z + h + 1, h, h, z], rng)
        self.decoder: Params = mlp_init([z, h, cfg.n_actions], rng)

    # parameter plumbing -------------------------------------------------
    def net_items(self) -> list[tuple[str, Params]]:
        return [("encoder", self.encoder), ("latent_head", self.latent_head),
                ("denoiser", self.denoiser), ("decoder", self.decoder)]

    def zero_grads(self) -> dict[str, Params]:
        return {name: zeros_like_params(net) for name, net in self.net_items()}

    # forward/backward ---------------------------------------------------
    def features(self, obs: np.ndarray):
        return mlp_forward(self.encoder, obs, self.cfg.activation,
                           activate_last=True)

    def logits(self, obs: np.ndarray, z_draw: np.ndarray):
        """Candidate logits for a batch; z_draw is the per-row latent draw
        (ignored when diffusion is disabled). Returns (logits, cache)."""
        obs = np.atleast_2d(obs)
        act = self.cfg.activation
        f, enc_cache = self.features(obs)
        if self.cfg.use_diffusion:
            z_draw = np.atleast_2d(z_draw)
            t_cond = np.ones((obs.shape[0], 1))  # final step index / steps
            din = np.concatenate([z_draw, f, t_cond], axis=1)
            z_clean, mid_cache = mlp_forward(self.denoiser, din, act)
        else:
            z_clean, mid_cache = mlp_forward(self.latent_head, f, act)
        logits, dec_cache = mlp_forward(self.decoder, z_clean, act)
        return logits, (enc_cache, mid_cache, dec_cache)

    def backward_from_logits(self, dlogits: np.ndarray, cache) -> dict[str, Params]:
        enc_cache, mid_cache, dec_cache = cache
        act = self.cfg.activation
        grads = self.zero_grads()
        dz_clean, grads["decoder"] = mlp_backward(self.decoder, dec_cache,
                                                  dlogits, act)
        if self.cfg.use_diffusion:
            din_grad, grads["denoiser"] = mlp_backward(self.denoiser, mid_cache,
                                                       dz_clean, act)
            df = din_grad[:, self.cfg.latent_dim:self.cfg.latent_dim + self.cfg.hidden]
        else:
            df, grads["latent_head"] = mlp_backward(self.latent_head, mid_cache,
                                                    dz_clean, act)
        _, grads["encoder"] = mlp_backward(self.encoder, enc_cache, df, act,
                                           activate_last=True)
        return grads

    def diffusion_loss_and_grads(self, obs: np.ndarray, z0: np.ndarray,
                                 t_idx: np.ndarray, noise: np.ndarray):
        """Denoising objective on a batch: mean over rows of the squared
        error norm between noise and the denoiser output. Returns
        (loss, grads); gradients cover the denoiser and the encoder."""
        obs = np.atleast_2d(obs)
        act = self.cfg.activation
        batch = obs.shape[0]
        f, enc_cache = self.features(obs)
        z_t = forward_diffuse(z0, t_idx, self.schedule, noise)
        t_cond = (np.asarray(t_idx, dtype=np.float64)
                  / self.schedule.steps).reshape(batch, 1)
        din = np.concatenate([z_t, f, t_cond], axis=1)
        eps_hat, den_cache = mlp_forward(self.denoiser, din, act)
        diff = eps_hat - noise
        loss = float((diff * diff).sum() / batch)
        grads = self.zero_grads()
        din_grad, grads["denoiser"] = mlp_backward(self.denoiser, den_cache,
                                                   2.0 * diff / batch, act)
        df = din_grad[:, self.cfg.latent_dim:self.cfg.latent_dim + self.cfg.hidden]
        _, grads["encoder"] = mlp_backward(self.encoder, enc_cache, df, act,
                                           activate_last=True)
        return loss, grads

    # acting ---------------------------------------------------------------
    def draw_latent(self, rng: np.random.Generator) -> np.ndarray:
        if self.cfg.use_diffusion:
            return rng.standard_normal(self.cfg.latent_dim)
        return np.zeros(self.cfg.latent_dim)

    def log_probs(self, obs: np.ndarray, z_draw: np.ndarray,
                  mask: np.ndarray) -> np.ndarray:
        logits, _ = self.logits(obs, z_draw)
        return masked_log_softmax(logits, mask)


def sample_action(actor: DiffusionActor, obs: np.ndarray, mask: np.ndarray,
                  rng: np.random.Generator) -> tuple[int, float, np.ndarray]:
    """Draw one action: sample the latent, decode masked logits, sample the
    categorical. Returns (action index, its log-probability, latent draw)."""
    mask = np.asarray(mask, dtype=bool)
    if not mask.any():
        raise ValueError("infeasible: empty action mask")
    z_draw = actor.draw_latent(rng)
    logp = actor.log_probs(obs, z_draw, mask)[0]
    probs = np.exp(logp)
    probs = probs / probs.sum()
    action = int(rng.choice(len(probs), p=probs))
    return action, float(logp[action]), z_draw


class Critic:
    """Shared state-value head over the concatenated global state."""

    def __init__(self, state_dim: int, hidden: int, activation: str,
                 rng: np.random.Generator):
        self.activation = activation
        self.net: Params = mlp_init([state_dim, hidden, hidden, 1], rng)

    def value(self, states: np.ndarray):
        states = np.atleast_2d(states)
        v, cache = mlp_forward(self.net, states, self.activation)
        return v[:, 0], cache

    def td_loss_and_grads(self, states: np.ndarray, targets: np.ndarray):
        """Mean squared TD regression toward the given value targets."""
        v, cache = self.value(states)
        diff = v - targets
        loss = float((diff * diff).mean())
        dv = (2.0 * diff / len(diff))[:, None]
        _, grads = mlp_backward(self.net, cache, dv, self.activation)
        return loss, grads
