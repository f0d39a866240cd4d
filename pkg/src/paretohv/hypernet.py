"""Preference-conditioned hypernetwork and its optimizers.

The network is a two-hidden-layer tanh perceptron that maps a
preference ray straight to the decision vector of a benchmark problem.
A logistic output head squashes into box bounds when the problem has
them; unbounded problems use the raw affine output.

Checkpoints are written as an .npz archive holding the flat parameter
vector plus a JSON metadata string (layer sizes, bounds, config echo).
"""

from __future__ import annotations

import json
from collections import deque

import numpy as np

from .autodiff import Tensor

HIDDEN_WIDTH = 100
CHECKPOINT_VERSION = 1


class TrainingDiverged(RuntimeError):
    """Raised when a loss or gradient stops being finite."""

    def __init__(self, message: str, iteration: int | None = None):
        super().__init__(message if iteration is None else f"{message} (iteration {iteration})")
        self.iteration = iteration


class HyperNet:
    """Two-hidden-layer MLP from rays (dim `n_inputs`) to decisions (dim `n_outputs`).

    Weights start from symmetric uniform fan-in scaling driven by the
    given generator, so a seed pins the whole parameter trajectory.
    """

    def __init__(
        self,
        n_inputs: int,
        n_outputs: int,
        rng: np.random.Generator,
        hidden: int = HIDDEN_WIDTH,
        bounds: tuple[float, float] | None = None,
    ):
        self.n_inputs = n_inputs
        self.n_outputs = n_outputs
        self.hidden = hidden
        self.bounds = bounds
        gains = (4.0, 2.0, 4.0) if bounds is not None else (1.0, 1.0, 1.0)
        self._params = [
            self._init_layer(rng, hidden, n_inputs, gains[0]),
            self._init_layer(rng, hidden, hidden, gains[1]),
            self._init_layer(rng, n_outputs, hidden, gains[2]),
        ]
        if bounds is not None:
            self._init_ray_ramps()
        self._pending: deque[tuple[Tensor, list[Tensor]]] = deque()
        self._grad_accum: np.ndarray | None = None

    # Ramp constants: ray contrast into the first pass-through units,
    # their relay through the second layer, and the output amplitude
    # that sweeps the logistic's active range.
    _RAMP_CONTRAST = 6.0
    _RAMP_RELAY = 1.5
    _RAMP_AMPLITUDE = 8.0

    def _init_ray_ramps(self) -> None:
        """Seed a squashed head with deterministic ray-to-output ramps.

        Plain fan-in init leaves a bounded head huddled at the box
        center, where losses with saturated powers or exponential tails
        have no usable gradient, and random wide inits only sometimes
        reach the interesting regions. Instead, the first `n_inputs`
        hidden units of both layers are repurposed as pass-through
        channels: unit k carries the centered k-th ray coordinate, and
        output coordinate m picks up channel (m mod n_inputs) with an
        amplitude spanning the logistic's active range. The initial
        decision map then sweeps every coordinate across its box as the
        ray moves, deterministically for every seed.
        """
        n = self.n_inputs
        w1, b1 = self._params[0]
        w1[:n] = self._RAMP_CONTRAST * (np.eye(n) - 1.0 / n)
        b1[:n] = 0.0
        w2, b2 = self._params[1]
        w2[:n, :] = 0.0
        w2[:n, :n] = self._RAMP_RELAY * np.eye(n)
        b2[:n] = 0.0
        w3, _ = self._params[2]
        for m in range(self.n_outputs):
            # full amplitude on the leading coordinates (the position-like
            # variables of the benchmark families come first), a gentle
            # spread on the rest so distance-like tails start mid-box
            amplitude = self._RAMP_AMPLITUDE if m < n else 1.0
            w3[m, m % n] += amplitude

    @staticmethod
    def _init_layer(rng: np.random.Generator, rows: int, fan_in: int, gain: float = 1.0):
        scale = gain / np.sqrt(fan_in)
        weight = rng.uniform(-scale, scale, size=(rows, fan_in))
        bias = rng.uniform(-scale, scale, size=rows)
        return weight, bias

    @property
    def n_params(self) -> int:
        return sum(w.size + b.size for w, b in self._params)

    def get_params(self) -> np.ndarray:
        return np.concatenate([np.concatenate([w.ravel(), b]) for w, b in self._params])

    def set_params(self, flat: np.ndarray) -> None:
        flat = np.asarray(flat, dtype=float)
        if flat.shape != (self.n_params,):
            raise ValueError(f"expected {self.n_params} parameters, got {flat.shape}")
        offset = 0
        for k, (w, b) in enumerate(self._params):
            w_new = flat[offset : offset + w.size].reshape(w.shape)
            offset += w.size
            b_new = flat[offset : offset + b.size]
            offset += b.size
            self._params[k] = (w_new.copy(), b_new.copy())

    def forward(self, rays: np.ndarray) -> np.ndarray:
        """Run the network and record the graph for a later `backward`.

        Accepts a single ray or a batch of rays (one per row); the
        output matches that layout.
        """
        rays = np.asarray(rays, dtype=float)
        single = rays.ndim == 1
        batch = rays[None, :] if single else rays
        if batch.shape[1] != self.n_inputs:
            raise ValueError(f"expected rays of dimension {self.n_inputs}, got {batch.shape[1]}")
        leaves = []
        x = Tensor(batch)
        for k, (w, b) in enumerate(self._params):
            wt = Tensor(w)
            bt = Tensor(b)
            leaves.extend([wt, bt])
            x = x @ _transpose(wt) + bt
            if k < len(self._params) - 1:
                x = x.tanh()
        if self.bounds is not None:
            lo, hi = self.bounds
            x = x.sigmoid() * (hi - lo) + lo
        self._pending.append((x, leaves))
        return x.data[0].copy() if single else x.data.copy()

    def predict(self, rays: np.ndarray) -> np.ndarray:
        """Forward pass without recording; used for evaluation."""
        rays = np.asarray(rays, dtype=float)
        single = rays.ndim == 1
        x = rays[None, :] if single else rays
        for k, (w, b) in enumerate(self._params):
            x = x @ w.T + b
            if k < len(self._params) - 1:
                x = np.tanh(x)
        if self.bounds is not None:
            lo, hi = self.bounds
            x = 1.0 / (1.0 + np.exp(-x)) * (hi - lo) + lo
        return x[0] if single else x

    def backward(self, upstream: np.ndarray) -> np.ndarray:
        """Consume the oldest recorded forward pass and accumulate gradients.

        Computes the gradient of <upstream, output> with respect to the
        flat parameter vector. Repeated calls before `take_grad` add up,
        which is how a batch of rays shares one optimizer step.
        """
        if not self._pending:
            raise RuntimeError("backward called with no recorded forward pass")
        out, leaves = self._pending.popleft()
        upstream = np.asarray(upstream, dtype=float)
        if upstream.ndim == 1 and out.data.ndim == 2 and out.data.shape[0] == 1:
            upstream = upstream[None, :]
        if upstream.shape != out.data.shape:
            raise ValueError(f"upstream shape {upstream.shape} != output shape {out.data.shape}")
        out.backward(upstream)
        if self._grad_accum is None:
            self._grad_accum = np.zeros(self.n_params)
        self._grad_accum += np.concatenate(
            [
                np.concatenate(
                    [
                        np.zeros(w.size) if wt.grad is None else wt.grad.ravel(),
                        np.zeros(b.size) if bt.grad is None else bt.grad,
                    ]
                )
                for (w, b), (wt, bt) in zip(self._params, _pairs(leaves))
            ]
        )
        return self._grad_accum.copy()

    def take_grad(self) -> np.ndarray:
        """Return the accumulated gradient and reset the accumulator."""
        if self._grad_accum is None:
            return np.zeros(self.n_params)
        grad = self._grad_accum
        self._grad_accum = None
        return grad

    def zero_grad(self) -> None:
        self._grad_accum = None
        self._pending.clear()


def _pairs(leaves: list[Tensor]):
    return [(leaves[i], leaves[i + 1]) for i in range(0, len(leaves), 2)]


def _transpose(t: Tensor) -> Tensor:
    out = Tensor(t.data.T, (t,))
    out._backward = lambda: t._accumulate(out.grad.T)
    return out


class Adam:
    """Adam with the conventional moment decay rates."""

    def __init__(self, beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.m: np.ndarray | None = None
        self.v: np.ndarray | None = None
        self.t = 0

    def step(self, net: HyperNet, gradient: np.ndarray, lr: float) -> None:
        gradient = np.asarray(gradient, dtype=float)
        if not np.all(np.isfinite(gradient)):
            raise TrainingDiverged("non-finite gradient")
        if self.m is None:
            self.m = np.zeros_like(gradient)
            self.v = np.zeros_like(gradient)
        self.t += 1
        self.m = self.beta1 * self.m + (1.0 - self.beta1) * gradient
        self.v = self.beta2 * self.v + (1.0 - self.beta2) * gradient**2
        m_hat = self.m / (1.0 - self.beta1**self.t)
        v_hat = self.v / (1.0 - self.beta2**self.t)
        net.set_params(net.get_params() - lr * m_hat / (np.sqrt(v_hat) + self.eps))


class GradientDescent:
    """Plain descent: parameters minus learning rate times gradient."""

    def step(self, net: HyperNet, gradient: np.ndarray, lr: float) -> None:
        gradient = np.asarray(gradient, dtype=float)
        if not np.all(np.isfinite(gradient)):
            raise TrainingDiverged("non-finite gradient")
        net.set_params(net.get_params() - lr * gradient)


def make_optimizer(name: str):
    if name == "adam":
        return Adam()
    if name == "sgd":
        return GradientDescent()
    raise ValueError(f"unknown optimizer {name!r}; expected 'adam' or 'sgd'")


def save_checkpoint(path, net: HyperNet, extra: dict | None = None) -> None:
    """Write a versioned checkpoint: flat parameters plus JSON metadata."""
    meta = {
        "version": CHECKPOINT_VERSION,
        "n_inputs": net.n_inputs,
        "n_outputs": net.n_outputs,
        "hidden": net.hidden,
        "bounds": list(net.bounds) if net.bounds is not None else None,
        "extra": extra or {},
    }
    np.savez(path, params=net.get_params(), meta=np.asarray(json.dumps(meta, sort_keys=True)))


def load_checkpoint(path) -> tuple[HyperNet, dict]:
    """Rebuild a network from a checkpoint; returns (net, metadata)."""
    archive = np.load(path, allow_pickle=False)
    meta = json.loads(str(archive["meta"]))
    if meta.get("version") != CHECKPOINT_VERSION:
        raise ValueError(f"unsupported checkpoint version {meta.get('version')}")
    bounds = meta["bounds"]
    net = HyperNet(
        meta["n_inputs"],
        meta["n_outputs"],
        rng=np.random.default_rng(0),
        hidden=meta["hidden"],
        bounds=tuple(bounds) if bounds is not None else None,
    )
    net.set_params(archive["params"])
    return net, meta
