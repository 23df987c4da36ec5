# SPDX-License-Identifier: MIT
# Copyright (c) 2026 JAEHYUK CHO
"""다층 퍼셉트론 (torch, float64).

minibatch 경사하강 + 제곱오차 + 가중치 elastic-net 벌점
lambda * [alpha*|W|_1 + (1-alpha)*|W|_2^2] (bias 제외).
dropout 은 입력과 각 hidden layer 출력에 inverted scaling 으로 적용하고
추론(eval) 때는 끈다. dropout mask 는 모형마다 따로 둔 torch.Generator 에서
뽑으므로 replicate 를 몇 개의 thread 로 돌리든 결과가 같다.
"""
import logging
import math
from dataclasses import dataclass
from typing import Callable, Literal, Optional

import numpy as np
import torch
from pydantic import BaseModel, ConfigDict, Field, field_validator
from torch import nn

from ..config import settings
from ..errors import DivergedLoss
from ..randkit import RngStream, split_rng
from .base import Dataset, LearnerKind, as_matrix

logger = logging.getLogger(__name__)

torch.set_num_threads(settings.torch_threads)

CELU_ALPHA = 1.0
LEAKY_SLOPE = 0.01

Activation = Literal["relu", "leaky_relu", "tanh", "selu", "elu", "celu", "gelu"]

# 순서는 tuning 의 choice draw 순서이기도 하다
ACTIVATIONS: dict[str, Callable[[], nn.Module]] = {
    "relu": nn.ReLU,
    "leaky_relu": lambda: nn.LeakyReLU(LEAKY_SLOPE),
    "tanh": nn.Tanh,
    "selu": nn.SELU,
    "elu": nn.ELU,
    "celu": lambda: nn.CELU(CELU_ALPHA),
    "gelu": nn.GELU,
}
ACTIVATION_NAMES = tuple(ACTIVATIONS)


class NnConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    depth: int = Field(default=3, ge=0)
    width: int = Field(default=50, ge=1)
    activation: Activation = "relu"
    batch_fraction: float = Field(default=0.1, gt=0.0, le=1.0)
    learning_rate: float = Field(default=0.01, gt=0.0)
    epochs: int = Field(default=32, ge=1)
    optimizer: Literal["sgd", "adamax"] = "adamax"
    dropout_rate: float = Field(default=0.0, ge=0.0, lt=1.0)
    dropout_inputs: bool = True
    penalty_alpha: float = Field(default=0.5, ge=0.0, le=1.0)
    penalty_lambda: float = Field(default=0.0, ge=0.0)
    seed: Optional[int] = None

    def batch_size(self, n: int) -> int:
        return max(1, round(self.batch_fraction * n))

    def batches_per_epoch(self, n: int) -> int:
        return math.ceil(n / self.batch_size(n))

    @field_validator("activation", mode="before")
    @classmethod
    def normalize_activation(cls, v):
        return v.lower() if isinstance(v, str) else v


class StreamDropout(nn.Dropout):
    """nn.Dropout 과 같은 동작. mask 만 주어진 generator 에서 뽑는다."""

    def __init__(self, p: float, generator: Optional[torch.Generator] = None):
        super().__init__(p)
        self.generator = generator

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        if not self.training or self.p == 0.0:
            return x
        keep = 1.0 - self.p
        mask = torch.bernoulli(torch.full_like(x, keep), generator=self.generator)
        return x * mask / keep


def build_network(p: int, cfg: NnConfig, generator: Optional[torch.Generator] = None) -> nn.Sequential:
    """[dropout] -> (Linear -> activation -> [dropout]) x depth -> Linear(., 1)."""
    rate = cfg.dropout_rate
    layers: list[nn.Module] = []
    if rate > 0.0 and cfg.dropout_inputs:
        layers.append(StreamDropout(rate, generator))
    fan_in = p
    for _ in range(cfg.depth):
        layers.append(nn.Linear(fan_in, cfg.width, dtype=torch.float64))
        layers.append(ACTIVATIONS[cfg.activation]())
        if rate > 0.0:
            layers.append(StreamDropout(rate, generator))
        fan_in = cfg.width
    layers.append(nn.Linear(fan_in, 1, dtype=torch.float64))
    return nn.Sequential(*layers)


def linear_layers(net: nn.Sequential) -> list[nn.Linear]:
    return [m for m in net if isinstance(m, nn.Linear)]


def _penalty(net: nn.Sequential, alpha: float, lam: float):
    if lam == 0.0:
        return 0.0
    return lam * sum(
        alpha * layer.weight.abs().sum() + (1.0 - alpha) * (layer.weight ** 2).sum()
        for layer in linear_layers(net)
    )


def _loss(net: nn.Sequential, X: torch.Tensor, y: torch.Tensor, alpha: float, lam: float) -> torch.Tensor:
    out = net(X).squeeze(1)
    return torch.mean((out - y) ** 2) + _penalty(net, alpha, lam)


def _init_params(net: nn.Sequential, activation: str, rng: RngStream, y_mean: float):
    """hidden: Glorot uniform (SELU 는 N(0, 1/fan_in)). 출력층은 0 에서 시작한다."""
    layers = linear_layers(net)
    with torch.no_grad():
        for layer in layers:
            fan_out, fan_in = layer.weight.shape
            if activation == "selu":
                W = rng.normal(0.0, math.sqrt(1.0 / fan_in), size=(fan_in, fan_out))
            else:
                bound = math.sqrt(6.0 / (fan_in + fan_out))
                W = rng.uniform(-bound, bound, size=(fan_in, fan_out))
            layer.weight.copy_(torch.from_numpy(np.ascontiguousarray(W.T)))
            layer.bias.zero_()
        # 학습 전 예측은 상수 mean(y), ACE 는 0
        layers[-1].weight.zero_()
        layers[-1].bias.fill_(y_mean)


@dataclass(frozen=True)
class NeuralNet:
    network: nn.Sequential
    activation: str
    x_mean: np.ndarray
    x_sd: np.ndarray
    n_features: int
    kind: LearnerKind = LearnerKind.NEURAL_NET

    def _scale(self, X) -> torch.Tensor:
        Xs = (as_matrix(X, self.n_features) - self.x_mean) / self.x_sd
        return torch.from_numpy(np.ascontiguousarray(Xs, dtype=np.float64))

    @property
    def weights(self) -> tuple[np.ndarray, ...]:
        """층별 (fan_in, fan_out) 가중치 사본."""
        return tuple(layer.weight.detach().numpy().T.copy() for layer in linear_layers(self.network))

    @property
    def biases(self) -> tuple[np.ndarray, ...]:
        return tuple(layer.bias.detach().numpy().copy() for layer in linear_layers(self.network))

    def predict(self, X) -> np.ndarray:
        with torch.no_grad():
            return self.network(self._scale(X)).squeeze(1).numpy().copy()

    def loss_and_gradients(self, X, y, penalty_alpha: float = 0.0, penalty_lambda: float = 0.0):
        """dropout 없는 손실과 층별 (weights, biases) 기울기. weights 기울기는 (fan_in, fan_out)."""
        yt = torch.from_numpy(np.asarray(y, dtype=np.float64).ravel().copy())
        loss = _loss(self.network, self._scale(X), yt, penalty_alpha, penalty_lambda)
        layers = linear_layers(self.network)
        params = [p for layer in layers for p in (layer.weight, layer.bias)]
        grads = torch.autograd.grad(loss, params)
        gW = [g.numpy().T.copy() for g in grads[0::2]]
        gb = [g.numpy().copy() for g in grads[1::2]]
        return float(loss.detach()), gW, gb


TraceHook = Callable[[int, NeuralNet, float], None]


def fit_nn(
    d: Dataset,
    cfg: Optional[NnConfig] = None,
    rng: Optional[RngStream] = None,
    trace: Optional[TraceHook] = None,
) -> NeuralNet:
    """trace 가 주어지면 매 batch update 뒤에 trace(step, model, batch_loss) 를 호출한다."""
    if cfg is None:
        cfg = NnConfig()
    if rng is None:
        rng = split_rng(cfg.seed if cfg.seed is not None else 0, 0)

    x_mean = d.X.mean(axis=0)
    x_sd = d.X.std(axis=0, ddof=1) if d.n > 1 else np.ones(d.p)
    x_sd = np.where(np.isfinite(x_sd) & (x_sd > 0), x_sd, 1.0)
    Xt = torch.from_numpy(np.ascontiguousarray((d.X - x_mean) / x_sd))
    yt = torch.from_numpy(np.ascontiguousarray(d.y, dtype=np.float64))

    generator = torch.Generator()
    net = build_network(d.p, cfg, generator)
    _init_params(net, cfg.activation, rng, float(d.y.mean()))
    generator.manual_seed(int(rng.integers(0, 2 ** 62)))

    if cfg.optimizer == "adamax":
        opt = torch.optim.Adamax(net.parameters(), lr=cfg.learning_rate)
    else:
        opt = torch.optim.SGD(net.parameters(), lr=cfg.learning_rate)

    def freeze(source: nn.Sequential) -> NeuralNet:
        copy = build_network(d.p, cfg)
        copy.load_state_dict(source.state_dict())
        copy.eval()
        return NeuralNet(network=copy, activation=cfg.activation, x_mean=x_mean, x_sd=x_sd, n_features=d.p)

    bs = cfg.batch_size(d.n)
    net.train()
    step = 0
    value = float("nan")
    for epoch in range(cfg.epochs):
        perm = torch.from_numpy(rng.permutation(d.n))
        for start in range(0, d.n, bs):
            idx = perm[start:start + bs]
            opt.zero_grad()
            loss = _loss(net, Xt[idx], yt[idx], cfg.penalty_alpha, cfg.penalty_lambda)
            step += 1
            value = float(loss.detach())
            if not math.isfinite(value):
                raise DivergedLoss(f"Training loss became non-finite at step {step}", step=step)
            loss.backward()
            if not all(bool(torch.isfinite(p.grad).all()) for p in net.parameters() if p.grad is not None):
                raise DivergedLoss(f"Gradients became non-finite at step {step}", step=step)
            opt.step()
            if trace is not None:
                trace(step, freeze(net), value)
        logger.debug(f"NN epoch {epoch + 1}/{cfg.epochs}: last batch loss={value:.4g}")

    net.eval()
    return NeuralNet(network=net, activation=cfg.activation, x_mean=x_mean, x_sd=x_sd, n_features=d.p)
