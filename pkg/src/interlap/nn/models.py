"""MLP, GCN, GIN and GraphSAGE node classifiers on the autodiff engine."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import sparse

from ..errors import InvalidConfig
from ..graph import Graph, degree_vector
from . import autodiff as ad

ARCHS = ("MLP", "GCN", "GIN", "SAGE")
OPTIMIZERS = ("adam", "gd")


@dataclass(frozen=True)
class ModelConfig:
    """Architecture and training hyperparameters.

    ``layers=None`` resolves to 5 for the MLP baseline and 2 for the GNNs.
    ``optimizer`` is ``"adam"`` (default) or ``"gd"`` for plain gradient
    descent; both add ``weight_decay * W`` to every gradient.
    """

    arch: str = "GCN"
    layers: int | None = None
    hidden_dim: int = 32
    lr: float = 0.01
    epochs: int = 200
    weight_decay: float = 5e-4
    seed: int = 0
    gin_epsilon: float = 0.0
    optimizer: str = "adam"

    def __post_init__(self):
        arch = self.arch.upper()
        if arch == "GRAPHSAGE":
            arch = "SAGE"
        object.__setattr__(self, "arch", arch)
        if arch not in ARCHS:
            raise InvalidConfig(f"unknown architecture {self.arch!r}; expected one of {ARCHS}")
        opt = self.optimizer.lower()
        object.__setattr__(self, "optimizer", opt)
        if opt not in OPTIMIZERS:
            raise InvalidConfig(f"unknown optimizer {self.optimizer!r}; expected one of {OPTIMIZERS}")
        if self.layers is None:
            object.__setattr__(self, "layers", 5 if arch == "MLP" else 2)
        if self.layers < 1:
            raise InvalidConfig("layers must be >= 1")
        if self.hidden_dim < 1:
            raise InvalidConfig("hidden_dim must be >= 1")
        if not self.lr > 0:
            raise InvalidConfig("lr must be positive")
        if self.epochs < 0 or self.weight_decay < 0:
            raise InvalidConfig("epochs and weight_decay must be nonnegative")


def gcn_propagation(g: Graph) -> sparse.csr_matrix:
    """``D^-1/2 (A + I) D^-1/2`` with ``D`` the degrees of ``A + I``."""
    if "gcn_propagation" not in g._cache:
        d_hat = degree_vector(g) + 1.0
        inv_sqrt = 1.0 / np.sqrt(d_hat)
        A_hat = g.csr + sparse.identity(g.n, format="csr")
        S = sparse.diags(inv_sqrt) @ A_hat @ sparse.diags(inv_sqrt)
        g._cache["gcn_propagation"] = S.tocsr()
    return g._cache["gcn_propagation"]


def gin_aggregation(g: Graph, eps: float) -> sparse.csr_matrix:
    """``A + (1 + eps) I``, i.e. ``(1 + eps) x_u + sum of neighbours``."""
    key = ("gin", eps)
    if key not in g._cache:
        g._cache[key] = (g.csr + (1.0 + eps) * sparse.identity(g.n, format="csr")).tocsr()
    return g._cache[key]


class Linear:
    def __init__(self, fan_in, fan_out, rng, name=""):
        a = np.sqrt(6.0 / (fan_in + fan_out))
        self.W = ad.parameter(rng.uniform(-a, a, size=(fan_in, fan_out)), name=f"{name}.W")
        self.b = ad.parameter(np.zeros((1, fan_out)), name=f"{name}.b")

    def __call__(self, x):
        return ad.bias_add(ad.matmul(x, self.W), self.b)

    def parameters(self):
        return [self.W, self.b]


class Model:
    """Base class: holds layers and exposes ``parameters()`` / ``forward(X)``."""

    def __init__(self, cfg: ModelConfig, in_dim: int, num_classes: int, g: Graph | None):
        self.cfg = cfg
        self.graph = g
        self.rng = np.random.default_rng(cfg.seed)
        dims = [in_dim] + [cfg.hidden_dim] * (cfg.layers - 1) + [num_classes]
        self.dims = dims
        self.layers = self._build(dims)

    def _build(self, dims):
        return [Linear(a, b, self.rng, f"lin{i}") for i, (a, b) in enumerate(zip(dims, dims[1:]))]

    def parameters(self):
        return [p for layer in self.layers for p in layer.parameters()]

    def layer(self, i, h):
        raise NotImplementedError

    def forward(self, X) -> ad.Tensor:
        h = X if isinstance(X, ad.Tensor) else ad.constant(X)
        last = len(self.layers) - 1
        for i in range(len(self.layers)):
            h = self.layer(i, h)
            if i < last:
                h = ad.relu(h)
        return h

    __call__ = forward


class MLP(Model):
    """Affine layers with ReLU between; ignores the graph."""

    def layer(self, i, h):
        return self.layers[i](h)


class GCN(Model):
    def layer(self, i, h):
        S = gcn_propagation(self.graph)
        return self.layers[i](ad.sparse_matmul(S, h))


class GIN(Model):
    """Each layer: 2-layer MLP applied to ``(1 + eps) x_u + sum_{v ~ u} x_v``."""

    def _build(self, dims):
        layers = []
        for i, (a, b) in enumerate(zip(dims, dims[1:])):
            layers.append((Linear(a, b, self.rng, f"gin{i}.0"), Linear(b, b, self.rng, f"gin{i}.1")))
        return layers

    def parameters(self):
        return [p for pair in self.layers for lin in pair for p in lin.parameters()]

    def layer(self, i, h):
        first, second = self.layers[i]
        agg = ad.sparse_matmul(gin_aggregation(self.graph, self.cfg.gin_epsilon), h)
        return second(ad.relu(first(agg)))


class SAGE(Model):
    """Mean aggregator: ``W [x_u || mean_{v ~ u} x_v] + b``."""

    def _build(self, dims):
        return [Linear(2 * a, b, self.rng, f"sage{i}") for i, (a, b) in enumerate(zip(dims, dims[1:]))]

    def layer(self, i, h):
        return self.layers[i](ad.concat_cols(h, ad.mean_rows_by_neighbors(h, self.graph)))


_CLASSES = {"MLP": MLP, "GCN": GCN, "GIN": GIN, "SAGE": SAGE}


def build_model(cfg: ModelConfig, in_dim: int, num_classes: int, g: Graph | None = None) -> Model:
    if in_dim < 1 or num_classes < 1:
        raise InvalidConfig(f"bad dimensions in_dim={in_dim}, num_classes={num_classes}")
    if cfg.arch != "MLP" and g is None:
        raise InvalidConfig(f"{cfg.arch} needs a graph")
    return _CLASSES[cfg.arch](cfg, in_dim, num_classes, g)
