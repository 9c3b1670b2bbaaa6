"""Dueling, optionally-noisy distributional Q-network on bare numpy.

The net is a two-hidden-layer ReLU trunk feeding a value head (one vector
of return atoms) and an advantage head (one vector per action); per-action
logits are value + advantage - mean advantage, softmaxed over atoms.
Forward passes cache activations so the analytic backward pass can be
checked against finite differences at 64-bit precision.
"""
from __future__ import annotations

import math

import numpy as np

from ..config import RainbowConfig

KIND_DENSE = 0
KIND_NOISY = 1


def _scale_noise(rng: np.random.Generator, size: int, dtype) -> np.ndarray:
    x = rng.standard_normal(size)
    return (np.sign(x) * np.sqrt(np.abs(x))).astype(dtype)


class DenseLayer:
    kind = KIND_DENSE

    def __init__(self, in_dim: int, out_dim: int, rng: np.random.Generator, dtype):
        bound = 1.0 / math.sqrt(in_dim)
        self.w = rng.uniform(-bound, bound, (out_dim, in_dim)).astype(dtype)
        self.b = rng.uniform(-bound, bound, out_dim).astype(dtype)

    @property
    def shape(self) -> tuple[int, int]:
        return self.w.shape

    def sample_noise(self, rng: np.random.Generator) -> None:
        pass

    def effective(self, use_noise: bool) -> tuple[np.ndarray, np.ndarray]:
        return self.w, self.b

    def parameters(self, prefix: str) -> dict[str, np.ndarray]:
        return {f"{prefix}.w": self.w, f"{prefix}.b": self.b}

    def grads_from(self, d_out: np.ndarray, x: np.ndarray, use_noise: bool, prefix: str) -> dict[str, np.ndarray]:
        return {f"{prefix}.w": d_out.T @ x, f"{prefix}.b": d_out.sum(axis=0)}


class NoisyLayer:
    """Linear layer with factorized Gaussian parameter noise.

    Effective weights are mu + sigma * eps with eps the outer product of
    per-input and per-output scaled noise vectors; zero-noise mode uses the
    mu parameters alone, so sigma = 0 makes both modes identical.
    """

    kind = KIND_NOISY

    def __init__(self, in_dim: int, out_dim: int, rng: np.random.Generator, dtype, sigma0: float = 0.5):
        bound = 1.0 / math.sqrt(in_dim)
        self.w = rng.uniform(-bound, bound, (out_dim, in_dim)).astype(dtype)
        self.b = rng.uniform(-bound, bound, out_dim).astype(dtype)
        self.w_sigma = np.full((out_dim, in_dim), sigma0 / math.sqrt(in_dim), dtype=dtype)
        self.b_sigma = np.full(out_dim, sigma0 / math.sqrt(out_dim), dtype=dtype)
        self.eps_w = np.zeros((out_dim, in_dim), dtype=dtype)
        self.eps_b = np.zeros(out_dim, dtype=dtype)

    @property
    def shape(self) -> tuple[int, int]:
        return self.w.shape

    def sample_noise(self, rng: np.random.Generator) -> None:
        eps_in = _scale_noise(rng, self.w.shape[1], self.w.dtype)
        eps_out = _scale_noise(rng, self.w.shape[0], self.w.dtype)
        self.eps_w = np.outer(eps_out, eps_in)
        self.eps_b = eps_out

    def effective(self, use_noise: bool) -> tuple[np.ndarray, np.ndarray]:
        if use_noise:
            return self.w + self.w_sigma * self.eps_w, self.b + self.b_sigma * self.eps_b
        return self.w, self.b

    def parameters(self, prefix: str) -> dict[str, np.ndarray]:
        return {
            f"{prefix}.w": self.w,
            f"{prefix}.b": self.b,
            f"{prefix}.w_sigma": self.w_sigma,
            f"{prefix}.b_sigma": self.b_sigma,
        }

    def grads_from(self, d_out: np.ndarray, x: np.ndarray, use_noise: bool, prefix: str) -> dict[str, np.ndarray]:
        dw = d_out.T @ x
        db = d_out.sum(axis=0)
        grads = {f"{prefix}.w": dw, f"{prefix}.b": db}
        if use_noise:
            grads[f"{prefix}.w_sigma"] = dw * self.eps_w
            grads[f"{prefix}.b_sigma"] = db * self.eps_b
        else:
            grads[f"{prefix}.w_sigma"] = np.zeros_like(self.w_sigma)
            grads[f"{prefix}.b_sigma"] = np.zeros_like(self.b_sigma)
        return grads


class QNetwork:
    """Value network mapping a 16-feature observation to per-action return
    distributions (or scalar Q-values when the distributional head is off)."""

    def __init__(self, cfg: RainbowConfig, obs_dim: int = 16, n_actions: int = 6, seed: int = 0):
        self.cfg = cfg
        self.obs_dim = obs_dim
        self.n_actions = n_actions
        self.atoms = cfg.atoms if cfg.use_distributional else 1
        self.dtype = np.float64 if cfg.float64 else np.float32
        self.support = np.linspace(cfg.v_min, cfg.v_max, self.atoms, dtype=np.float64)

        rng = np.random.Generator(np.random.Philox(seed))
        h1, h2 = cfg.hidden_sizes
        head = (lambda i, o: NoisyLayer(i, o, rng, self.dtype, cfg.sigma0)) if cfg.use_noisy else (
            lambda i, o: DenseLayer(i, o, rng, self.dtype)
        )
        self.trunk1 = DenseLayer(obs_dim, h1, rng, self.dtype)
        self.trunk2 = DenseLayer(h1, h2, rng, self.dtype)
        if cfg.use_dueling:
            self.value_head = head(h2, self.atoms)
            self.adv_head = head(h2, n_actions * self.atoms)
        else:
            self.value_head = None
            self.adv_head = head(h2, n_actions * self.atoms)

    @property
    def layers(self) -> list:
        named = [self.trunk1, self.trunk2]
        if self.value_head is not None:
            named.append(self.value_head)
        named.append(self.adv_head)
        return named

    def layer_names(self) -> list[str]:
        names = ["trunk1", "trunk2"]
        if self.value_head is not None:
            names.append("value")
        names.append("adv")
        return names

    def parameters(self) -> dict[str, np.ndarray]:
        params: dict[str, np.ndarray] = {}
        for name, layer in zip(self.layer_names(), self.layers):
            params.update(layer.parameters(name))
        return params

    def set_parameters(self, params: dict[str, np.ndarray]) -> None:
        own = self.parameters()
        for key, value in params.items():
            np.copyto(own[key], value.astype(self.dtype, copy=False))

    def copy_from(self, other: "QNetwork") -> None:
        self.set_parameters(other.parameters())

    def sample_noise(self, rng: np.random.Generator) -> None:
        for layer in self.layers:
            layer.sample_noise(rng)

    def forward(self, x: np.ndarray, use_noise: bool = False, cache: dict | None = None) -> np.ndarray:
        """Per-action atom distributions (B, A, K); caches activations when
        a dict is supplied so backward() can run."""
        x = np.asarray(x, dtype=self.dtype)
        if x.ndim == 1:
            x = x[None, :]
        w1, b1 = self.trunk1.effective(use_noise)
        h1 = x @ w1.T + b1
        a1 = np.maximum(h1, 0.0)
        w2, b2 = self.trunk2.effective(use_noise)
        h2 = a1 @ w2.T + b2
        a2 = np.maximum(h2, 0.0)

        wa, ba = self.adv_head.effective(use_noise)
        adv = (a2 @ wa.T + ba).reshape(x.shape[0], self.n_actions, self.atoms)
        if self.value_head is not None:
            wv, bv = self.value_head.effective(use_noise)
            value = a2 @ wv.T + bv
            logits = value[:, None, :] + adv - adv.mean(axis=1, keepdims=True)
        else:
            logits = adv

        if cache is not None:
            cache.update(x=x, h1=h1, a1=a1, h2=h2, a2=a2, use_noise=use_noise)

        if not self.cfg.use_distributional:
            return logits  # (B, A, 1) raw Q values
        shifted = logits - logits.max(axis=2, keepdims=True)
        expd = np.exp(shifted)
        probs = expd / expd.sum(axis=2, keepdims=True)
        if cache is not None:
            cache.update(probs=probs)
        return probs

    def q_values(self, dist: np.ndarray) -> np.ndarray:
        """Expected return per action from forward() output."""
        if not self.cfg.use_distributional:
            return dist[..., 0]
        return dist @ self.support

    def backward(self, cache: dict, d_logits: np.ndarray) -> dict[str, np.ndarray]:
        """Gradients of a scalar loss given d(loss)/d(logits), (B, A, K)."""
        use_noise = cache["use_noise"]
        batch = d_logits.shape[0]
        grads: dict[str, np.ndarray] = {}

        d_adv = d_logits
        if self.value_head is not None:
            d_value = d_logits.sum(axis=1)
            d_adv = d_logits - d_logits.mean(axis=1, keepdims=True)
            grads.update(self.value_head.grads_from(d_value, cache["a2"], use_noise, "value"))
        d_adv_flat = d_adv.reshape(batch, self.n_actions * self.atoms)
        grads.update(self.adv_head.grads_from(d_adv_flat, cache["a2"], use_noise, "adv"))

        wa, _ = self.adv_head.effective(use_noise)
        d_a2 = d_adv_flat @ wa
        if self.value_head is not None:
            wv, _ = self.value_head.effective(use_noise)
            d_a2 = d_a2 + d_logits.sum(axis=1) @ wv
        d_h2 = d_a2 * (cache["h2"] > 0.0)
        grads.update(self.trunk2.grads_from(d_h2, cache["a1"], use_noise, "trunk2"))

        w2, _ = self.trunk2.effective(use_noise)
        d_a1 = d_h2 @ w2
        d_h1 = d_a1 * (cache["h1"] > 0.0)
        grads.update(self.trunk1.grads_from(d_h1, cache["x"], use_noise, "trunk1"))
        return grads

    def distributional_loss(
        self,
        obs: np.ndarray,
        actions: np.ndarray,
        target_probs: np.ndarray,
        weights: np.ndarray,
        use_noise: bool,
    ) -> tuple[float, dict[str, np.ndarray], np.ndarray]:
        """Importance-weighted cross-entropy to projected target atoms.

        Returns (loss, grads, selected-action Q values).
        """
        cache: dict = {}
        batch = obs.shape[0]
        self.forward(obs, use_noise=use_noise, cache=cache)
        probs = cache["probs"]
        sel = probs[np.arange(batch), actions]
        logp_sel = np.log(np.clip(sel, 1e-12, None))
        ce = -(target_probs * logp_sel).sum(axis=1)
        loss = float((weights * ce).mean())

        d_logits = np.zeros((batch, self.n_actions, self.atoms), dtype=self.dtype)
        d_logits[np.arange(batch), actions] = (sel - target_probs) * (weights / batch)[:, None]
        grads = self.backward(cache, d_logits)
        q_sel = sel @ self.support
        return loss, grads, q_sel

    def scalar_loss(
        self,
        obs: np.ndarray,
        actions: np.ndarray,
        target_q: np.ndarray,
        weights: np.ndarray,
        use_noise: bool,
    ) -> tuple[float, dict[str, np.ndarray], np.ndarray]:
        """Huber loss for the non-distributional ablation."""
        cache: dict = {}
        batch = obs.shape[0]
        out = self.forward(obs, use_noise=use_noise, cache=cache)
        q = out[..., 0]
        q_sel = q[np.arange(batch), actions]
        delta = q_sel - target_q
        huber = np.where(np.abs(delta) <= 1.0, 0.5 * delta * delta, np.abs(delta) - 0.5)
        loss = float((weights * huber).mean())
        d_q = np.clip(delta, -1.0, 1.0) * weights / batch
        d_logits = np.zeros((batch, self.n_actions, 1), dtype=self.dtype)
        d_logits[np.arange(batch), actions, 0] = d_q
        grads = self.backward(cache, d_logits)
        return loss, grads, q_sel


class Adam:
    """Per-parameter adaptive step sizes with bias correction."""

    def __init__(self, params: dict[str, np.ndarray], lr: float, beta1: float, beta2: float, eps: float):
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m = {k: np.zeros_like(v) for k, v in params.items()}
        self.v = {k: np.zeros_like(v) for k, v in params.items()}

    def step(self, params: dict[str, np.ndarray], grads: dict[str, np.ndarray]) -> None:
        self.t += 1
        bc1 = 1.0 - self.beta1**self.t
        bc2 = 1.0 - self.beta2**self.t
        for key, p in params.items():
            g = grads[key]
            m = self.m[key]
            v = self.v[key]
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            p -= (self.lr / bc1) * m / (np.sqrt(v / bc2) + self.eps)

    def state_arrays(self) -> dict[str, np.ndarray]:
        out = {f"m.{k}": v for k, v in self.m.items()}
        out.update({f"v.{k}": v for k, v in self.v.items()})
        return out

    def load_state(self, t: int, arrays: dict[str, np.ndarray]) -> None:
        self.t = t
        for k in self.m:
            np.copyto(self.m[k], arrays[f"m.{k}"])
            np.copyto(self.v[k], arrays[f"v.{k}"])
