"""Training-side objectives for the compressed split model.

Stage-1 pretraining distills teacher embeddings into the student while a
rate term keeps the noisy latent compressible; stage-2/3 fine-tuning of
the classification head uses a temperature-softened knowledge
distillation loss; both stages decay their learning rate with a
polynomial schedule.  Everything here is a pure function over tensors,
with analytic gradients where training would need them.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .codec.entropy_model import EntropyModel, _tail_stable_sigmoids
from .errors import DimensionError, InputError, ParameterError, RangeError
from .tensor import Tensor, as_tensor, log_softmax, softmax


@dataclass(frozen=True)
class DistillationPair:
    """Matched teacher/student embedding lists, one entry per stage tap."""

    teacher: tuple
    student: tuple

    def __init__(self, teacher: Sequence[Tensor], student: Sequence[Tensor]):
        t = tuple(as_tensor(x) for x in teacher)
        s = tuple(as_tensor(x) for x in student)
        if len(t) != len(s):
            raise DimensionError(
                f"{len(t)} teacher embeddings vs {len(s)} student embeddings")
        for i, (a, b) in enumerate(zip(t, s)):
            if a.shape != b.shape:
                raise DimensionError(
                    f"pair {i}: teacher shape {a.shape} != student {b.shape}")
        object.__setattr__(self, "teacher", t)
        object.__setattr__(self, "student", s)


def pretrain_loss(pairs: DistillationPair, latent_noisy: Tensor,
                  model: EntropyModel, beta: float):
    """Distortion-plus-rate objective of encoder pretraining.

    loss = sum_i ||h_i^t - h_i^s||_2^2 - beta * log p(latent_noisy)

    with log p the continuous logistic-mass relaxation (natural log)
    evaluated per channel.  Returns (loss, gradient of the rate term
    w.r.t. the latent).
    """
    if beta < 0:
        raise ParameterError(f"beta must be >= 0, got {beta}")
    y = as_tensor(latent_noisy)
    if y.ndim < 1 or y.shape[0] != model.channels:
        raise DimensionError(
            f"latent must have {model.channels} leading channels, "
            f"got shape {y.shape}")
    distortion = 0.0
    for t, s in zip(pairs.teacher, pairs.student):
        d = t - s
        distortion += float((d * d).sum())
    shape = (model.channels,) + (1,) * (y.ndim - 1)
    mu = model.loc.reshape(shape)
    s = model.scale.reshape(shape)
    a = (y + 0.5 - mu) / s
    b = (y - 0.5 - mu) / s
    raw_m, da, db = _tail_stable_sigmoids(a, b)
    m = np.maximum(raw_m, 1e-300)
    rate_nats = float(-np.log(m).sum())
    grad = -beta * (da - db) / (s * m)
    return distortion + beta * rate_nats, grad


@dataclass(frozen=True)
class KdConfig:
    """Knowledge-distillation mix: alpha weights the hard-label term,
    tau softens both logit sets."""

    alpha: float = 0.5
    tau: float = 1.0

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ParameterError(f"alpha must lie in [0, 1], got {self.alpha}")
        if self.tau <= 0:
            raise ParameterError(f"tau must be > 0, got {self.tau}")


def kd_loss(student_logits: Tensor, teacher_logits: Tensor, label: int,
            cfg: KdConfig = KdConfig()) -> float:
    """alpha * CE(student, label) + (1 - alpha) * tau^2 * KL(S_tau || T_tau).

    The KL term compares temperature-softened distributions and carries
    the tau^2 gradient-scale correction.
    """
    s = as_tensor(student_logits)
    t = as_tensor(teacher_logits)
    if s.shape != t.shape:
        raise DimensionError(
            f"student logits {s.shape} vs teacher logits {t.shape}")
    if not 0 <= label < s.shape[0]:
        raise InputError(f"label {label} out of range for {s.shape[0]} classes")
    ce = float(-log_softmax(s, 1.0)[label])
    p = softmax(s, cfg.tau)
    log_p = log_softmax(s, cfg.tau)
    log_q = log_softmax(t, cfg.tau)
    kl = float((p * (log_p - log_q)).sum())
    return cfg.alpha * ce + (1.0 - cfg.alpha) * cfg.tau ** 2 * kl


@dataclass(frozen=True)
class PolyLrSchedule:
    """eta(t) = eta0 * (1 - t/n_iter)^power, decaying to 0 at n_iter."""

    eta0: float
    n_iter: int
    power: float = 0.9

    def __post_init__(self):
        if self.eta0 <= 0:
            raise ParameterError(f"eta0 must be > 0, got {self.eta0}")
        if self.n_iter < 1:
            raise ParameterError(f"n_iter must be >= 1, got {self.n_iter}")


def poly_lr(sched: PolyLrSchedule, t: int) -> float:
    """Learning rate at iteration ``t`` of the polynomial decay."""
    if not 0 <= t <= sched.n_iter:
        raise RangeError(
            f"iteration {t} outside [0, {sched.n_iter}]")
    return sched.eta0 * (1.0 - t / sched.n_iter) ** sched.power
