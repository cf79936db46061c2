"""
Coding a quantized latent and getting it back bit for bit
=========================================================

A latent tensor is compressed against a per-channel logistic prior,
serialized into the container from docs/FORMAT.md, and decoded
losslessly. Out-of-range values ride the bypass section.
"""

import numpy as np

from splitcomp import Prng
from splitcomp.codec import Bitstream, EntropyModel, decode_latent, encode_latent

# a 16-channel prior: channel c is centered at loc[c] with width exp(log_scale[c])
rng = Prng(7)
model = EntropyModel(loc=rng.uniform(16, -2.0, 2.0),
                     log_scale=rng.uniform(16, 0.0, 1.5),
                     model_id=3)

# a plausible quantized latent: small integers clustered near each channel center
z = np.round(rng.uniform(16 * 20 * 20, -8.0, 8.0)).reshape(16, 20, 20)

stream = encode_latent(z, model)
print(f"latent {z.shape}, {z.size} symbols")
print(f"estimated {model.rate_bits(z) / 8:.1f} bytes, "
      f"payload {len(stream.payload)} bytes, "
      f"container {stream.total_bytes} bytes")

# the container survives serialization and decodes to the exact input
raw = stream.to_bytes()
back = decode_latent(Bitstream.from_bytes(raw), model)
print("lossless:", np.array_equal(back, z))

# values outside [min_sym, max_sym] escape into the raw bypass section
z_wild = z.copy()
z_wild[0, 0, 0] = 90_000
z_wild[3, 5, 5] = -40_000
stream_wild = encode_latent(z_wild, model)
print(f"with 2 out-of-range values: {len(stream_wild.bypass)} bypass entries, "
      f"still lossless: {np.array_equal(decode_latent(stream_wild, model), z_wild)}")
