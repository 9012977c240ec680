"""Plain-numpy feed-forward networks: forward, exact backprop, Adam, targets.

Everything is float64. Hidden layers are rectified; the output head is
identity, tanh (optionally scaled, for bounded actors), or rectifier (for
shared trunks). Parameters live in plain arrays so agents can snapshot and
soft-update them freely.
"""

from __future__ import annotations

import io
import json
import math
import zipfile
from dataclasses import dataclass

import numpy as np

OUTPUT_ACTIVATIONS = ("identity", "tanh", "relu")


class ShapeMismatch(ValueError):
    pass


class ArchitectureMismatch(ValueError):
    pass


class CheckpointError(RuntimeError):
    pass


@dataclass
class ForwardCache:
    activations: list  # per-layer inputs, activations[0] is the network input
    preacts: list
    squeeze: bool


class Mlp:
    def __init__(self, layer_sizes, output_activation: str = "identity",
                 output_scale: float = 1.0, rng=None, final_init: float | None = None):
        if output_activation not in OUTPUT_ACTIVATIONS:
            raise ValueError(f"unknown output activation {output_activation!r}")
        if len(layer_sizes) < 2:
            raise ValueError("need at least an input and an output layer")
        rng = np.random.default_rng(rng)
        self.layer_sizes = [int(n) for n in layer_sizes]
        self.output_activation = output_activation
        self.output_scale = float(output_scale)
        self.weights: list[np.ndarray] = []
        self.biases: list[np.ndarray] = []
        last = len(self.layer_sizes) - 2
        for i, (n_in, n_out) in enumerate(zip(self.layer_sizes, self.layer_sizes[1:])):
            bound = 1.0 / math.sqrt(n_in)
            if final_init is not None and i == last:
                bound = final_init
            self.weights.append(rng.uniform(-bound, bound, size=(n_in, n_out)))
            self.biases.append(rng.uniform(-bound, bound, size=n_out))

    @property
    def in_dim(self) -> int:
        return self.layer_sizes[0]

    @property
    def out_dim(self) -> int:
        return self.layer_sizes[-1]

    def parameters(self) -> list[np.ndarray]:
        out = []
        for w, b in zip(self.weights, self.biases):
            out.extend((w, b))
        return out

    def forward(self, x: np.ndarray) -> np.ndarray:
        y, _ = self.forward_cached(x)
        return y

    def forward_cached(self, x: np.ndarray) -> tuple[np.ndarray, ForwardCache]:
        x = np.asarray(x, dtype=float)
        squeeze = x.ndim == 1
        h = x[None, :] if squeeze else x
        if h.ndim != 2 or h.shape[1] != self.in_dim:
            raise ShapeMismatch(f"expected input dim {self.in_dim}, got shape {x.shape}")
        activations = [h]
        preacts = []
        n_layers = len(self.weights)
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            z = h @ w + b
            preacts.append(z)
            if i < n_layers - 1:
                h = np.maximum(z, 0.0)
            elif self.output_activation == "tanh":
                h = self.output_scale * np.tanh(z)
            elif self.output_activation == "relu":
                h = np.maximum(z, 0.0)
            else:
                h = z
            activations.append(h)
        y = h[0] if squeeze else h
        return y, ForwardCache(activations, preacts, squeeze)

    def backward(self, cache: ForwardCache, grad_output: np.ndarray):
        """Reverse-mode gradients: returns ([(dW, db), ...], grad_input)."""
        g = np.asarray(grad_output, dtype=float)
        if cache.squeeze:
            g = g[None, :]
        if g.shape != cache.activations[-1].shape:
            raise ShapeMismatch(f"upstream grad shape {g.shape} != output shape "
                                f"{cache.activations[-1].shape}")
        if self.output_activation == "tanh":
            t = cache.activations[-1] / self.output_scale
            delta = g * self.output_scale * (1.0 - t * t)
        elif self.output_activation == "relu":
            delta = g * (cache.preacts[-1] > 0.0)
        else:
            delta = g
        grads: list[tuple[np.ndarray, np.ndarray]] = []
        for i in range(len(self.weights) - 1, -1, -1):
            a_prev = cache.activations[i]
            grads.insert(0, (a_prev.T @ delta, delta.sum(axis=0)))
            delta = delta @ self.weights[i].T
            if i > 0:
                delta = delta * (cache.preacts[i - 1] > 0.0)
        grad_input = delta[0] if cache.squeeze else delta
        return grads, grad_input

    def copy(self) -> "Mlp":
        dup = Mlp.__new__(Mlp)
        dup.layer_sizes = list(self.layer_sizes)
        dup.output_activation = self.output_activation
        dup.output_scale = self.output_scale
        dup.weights = [w.copy() for w in self.weights]
        dup.biases = [b.copy() for b in self.biases]
        return dup


class Adam:
    """Per-parameter adaptive moments with bias correction.

    Scratch buffers are preallocated so an update allocates nothing; the hot
    training loop spends its time in BLAS, not the allocator.
    """

    def __init__(self, net: Mlp, lr: float, beta1: float = 0.9, beta2: float = 0.999,
                 eps: float = 1e-8):
        self.lr = float(lr)
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m = [(np.zeros_like(w), np.zeros_like(b)) for w, b in zip(net.weights, net.biases)]
        self.v = [(np.zeros_like(w), np.zeros_like(b)) for w, b in zip(net.weights, net.biases)]
        self._scratch = [(np.zeros_like(w), np.zeros_like(b))
                         for w, b in zip(net.weights, net.biases)]

    def step(self, net: Mlp, grads, lr: float | None = None):
        if lr is None:
            lr = self.lr
        self.t += 1
        c1 = 1.0 - self.beta1 ** self.t
        c2 = 1.0 - self.beta2 ** self.t
        for i, (dw, db) in enumerate(grads):
            for p, g, m, v, s in ((net.weights[i], dw, self.m[i][0], self.v[i][0],
                                   self._scratch[i][0]),
                                  (net.biases[i], db, self.m[i][1], self.v[i][1],
                                   self._scratch[i][1])):
                m *= self.beta1
                np.multiply(g, 1.0 - self.beta1, out=s)
                m += s
                v *= self.beta2
                np.multiply(g, g, out=s)
                s *= 1.0 - self.beta2
                v += s
                np.divide(v, c2, out=s)
                np.sqrt(s, out=s)
                s += self.eps
                np.divide(m, s, out=s)
                s *= lr / c1
                p -= s


def soft_update(target: Mlp, online: Mlp, tau: float):
    """Blend online parameters into the target network in place."""
    if target.layer_sizes != online.layer_sizes:
        raise ArchitectureMismatch(f"{target.layer_sizes} vs {online.layer_sizes}")
    for tw, ow in zip(target.weights, online.weights):
        tw *= 1.0 - tau
        tw += tau * ow
    for tb, ob in zip(target.biases, online.biases):
        tb *= 1.0 - tau
        tb += tau * ob


def adam_state_arrays(name: str, opt: Adam) -> dict:
    arrays = {}
    for i, ((mw, mb), (vw, vb)) in enumerate(zip(opt.m, opt.v)):
        arrays[f"opt/{name}/m_w{i}"] = mw
        arrays[f"opt/{name}/m_b{i}"] = mb
        arrays[f"opt/{name}/v_w{i}"] = vw
        arrays[f"opt/{name}/v_b{i}"] = vb
    return arrays


def save_checkpoint(path, nets: dict, optimizers: dict | None = None,
                    arrays: dict | None = None, meta: dict | None = None):
    """Write a self-describing .npz: network params, Adam moments, metadata.

    The zip member order and timestamps are fixed, so identical contents
    produce identical bytes (save -> load -> save round-trips bit-exactly).
    """
    optimizers = optimizers or {}
    meta = dict(meta or {})
    payload: dict[str, np.ndarray] = {}
    net_meta = {}
    for name, net in nets.items():
        net_meta[name] = {
            "layer_sizes": net.layer_sizes,
            "output_activation": net.output_activation,
            "output_scale": net.output_scale,
        }
        for i, (w, b) in enumerate(zip(net.weights, net.biases)):
            payload[f"net/{name}/w{i}"] = w
            payload[f"net/{name}/b{i}"] = b
    opt_meta = {}
    for name, opt in optimizers.items():
        opt_meta[name] = {"lr": opt.lr, "beta1": opt.beta1, "beta2": opt.beta2,
                          "eps": opt.eps, "t": opt.t}
        payload.update(adam_state_arrays(name, opt))
    for key, arr in (arrays or {}).items():
        payload[f"extra/{key}"] = np.asarray(arr, dtype=float)
    meta["nets"] = net_meta
    meta["optimizers"] = opt_meta
    header = json.dumps(meta, sort_keys=True)
    payload["meta_json"] = np.frombuffer(header.encode("utf-8"), dtype=np.uint8).copy()

    with zipfile.ZipFile(path, mode="w", compression=zipfile.ZIP_STORED) as zf:
        for key in sorted(payload):
            buf = io.BytesIO()
            np.lib.format.write_array(buf, np.ascontiguousarray(payload[key]))
            zf.writestr(zipfile.ZipInfo(key + ".npy"), buf.getvalue())


class Checkpoint:
    def __init__(self, nets: dict, optimizers: dict, arrays: dict, meta: dict):
        self.nets = nets
        self.optimizers = optimizers
        self.arrays = arrays
        self.meta = meta


def load_checkpoint(path) -> Checkpoint:
    try:
        data = np.load(path)
    except (OSError, ValueError, zipfile.BadZipFile) as exc:
        raise CheckpointError(f"cannot read checkpoint {path}: {exc}") from exc
    if "meta_json" not in data:
        raise CheckpointError(f"{path} is not a workbench checkpoint")
    meta = json.loads(bytes(data["meta_json"]).decode("utf-8"))
    nets = {}
    for name, info in meta["nets"].items():
        net = Mlp.__new__(Mlp)
        net.layer_sizes = [int(n) for n in info["layer_sizes"]]
        net.output_activation = info["output_activation"]
        net.output_scale = float(info["output_scale"])
        net.weights = []
        net.biases = []
        for i in range(len(net.layer_sizes) - 1):
            net.weights.append(data[f"net/{name}/w{i}"])
            net.biases.append(data[f"net/{name}/b{i}"])
        nets[name] = net
    optimizers = {}
    for name, info in meta["optimizers"].items():
        opt = Adam.__new__(Adam)
        opt.lr = info["lr"]
        opt.beta1 = info["beta1"]
        opt.beta2 = info["beta2"]
        opt.eps = info["eps"]
        opt.t = info["t"]
        n_layers = sum(1 for k in data.files if k.startswith(f"opt/{name}/m_w"))
        opt.m = [(data[f"opt/{name}/m_w{i}"], data[f"opt/{name}/m_b{i}"]) for i in range(n_layers)]
        opt.v = [(data[f"opt/{name}/v_w{i}"], data[f"opt/{name}/v_b{i}"]) for i in range(n_layers)]
        optimizers[name] = opt
    arrays = {k[len("extra/"):]: data[k] for k in data.files if k.startswith("extra/")}
    return Checkpoint(nets, optimizers, arrays, meta)
