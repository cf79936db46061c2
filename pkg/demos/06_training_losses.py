"""
The two-stage training objective, numerically
=============================================

Stage 1 distills teacher embeddings into the split encoder while a
rate term keeps the latent cheap to code; stage 2 trains the heads
with soft-label distillation under a polynomial learning-rate decay.
This demo just evaluates the pieces at a few telling points.
"""

import numpy as np

from splitcomp import Prng
from splitcomp.codec import EntropyModel
from splitcomp.losses import (
    DistillationPair,
    KdConfig,
    PolyLrSchedule,
    kd_loss,
    poly_lr,
    pretrain_loss,
)
from splitcomp.tensor import log_softmax

rng = Prng(2)

# stage 1: distortion + beta * rate, with the analytic rate gradient
model = EntropyModel(np.zeros(4), np.zeros(4))
pairs = DistillationPair([rng.uniform(8, -1.0, 1.0)],
                         [rng.uniform(8, -1.0, 1.0)])
latent = rng.uniform(4 * 36, -4.0, 4.0).reshape(4, 6, 6)
for beta in (0.0, 0.32, 5.12):
    loss, grad = pretrain_loss(pairs, latent, model, beta)
    print(f"beta {beta:5.2f}: loss {loss:8.3f}, "
          f"rate-grad norm {np.linalg.norm(grad):.3f}")

# a tighter prior makes the same latent more expensive to keep noisy
tight = EntropyModel(np.zeros(4), np.full(4, -1.5))
print("tight prior loss:", round(pretrain_loss(pairs, latent, tight, 0.32)[0], 3))

# stage 2: soft-label distillation; alpha=1 reduces to plain cross-entropy
student = rng.uniform(10, -2.0, 2.0)
teacher = rng.uniform(10, -2.0, 2.0)
label = 7
ce = -log_softmax(student)[label]
print(f"\nkd alpha=1.0 equals CE: {kd_loss(student, teacher, label, KdConfig(alpha=1.0)):.6f} "
      f"vs {ce:.6f}")
for alpha in (0.0, 0.5):
    v = kd_loss(student, teacher, label, KdConfig(alpha=alpha, tau=4.0))
    print(f"kd alpha={alpha}: {v:.6f}")
print("identical logits leave only the hard term:",
      round(kd_loss(student, student, label, KdConfig(alpha=0.5)), 6),
      "=", round(0.5 * float(ce), 6))

# the schedule decays from eta0 to exactly 0
sched = PolyLrSchedule(eta0=0.01, n_iter=10_000, power=0.9)
pts = [0, 2_500, 5_000, 7_500, 10_000]
print("\npoly lr:", ", ".join(f"t={t}: {poly_lr(sched, t):.5f}" for t in pts))
