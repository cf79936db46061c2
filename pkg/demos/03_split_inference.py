"""
One encoder, one backbone pass, three task heads
================================================

The split model runs its client half (encoder) and server half
(decoder, backbone, heads) as pure functions. The quantized latent is
the only thing that crosses the boundary, and the decoder plus
backbone run once no matter how many tasks are requested.
"""

import numpy as np

from splitcomp import Prng
from splitcomp.model import TASKS, SplitModel, forward_split

# a single-layer encoder keeps latent magnitudes above the rounding
# threshold, so the coded symbols are visibly nonzero
model = SplitModel({"input_hw": [64, 64], "seed": 3,
                    "encoder_channels": [16]})
rng = Prng(5)
image = rng.uniform(3 * 64 * 64, 0.0, 255.0).reshape(3, 64, 64)

# full split pass: encode, hard-round, tail with all three heads
res = forward_split(model, image, set(TASKS))
print(f"latent: {res.latent.shape} at 1/{model.downsample} resolution, "
      f"integer symbols in [{res.latent.min():.0f}, {res.latent.max():.0f}]")
print("stage executions:", res.counters)

cls = res.predictions["classify"]
print(f"classify: class {int(np.argmax(cls))} of {cls.shape[0]}")
boxes = res.predictions["detect"]
print(f"detect: {len(boxes)} boxes, best score {boxes[0][1]:.3f}")
seg = res.predictions["segment"]
print(f"segment: {seg.shape} class map, {len(np.unique(seg))} distinct classes")

# asking for one task still runs decoder and backbone exactly once
only_cls = forward_split(model, image, {"classify"})
print("classify-only counters:", only_cls.counters)

# the same latent fed to the tail directly reproduces the predictions
preds, _ = model.tail(res.latent, set(TASKS))
print("tail(latent) matches:",
      np.array_equal(preds["segment"], res.predictions["segment"]))
