# Walk one frame through the PAC chain: rate-profile map, convolutional
# precoder, polar transform, a noisy BPSK channel, and the list decoder.
import numpy as np

from pacrl import TABLE1, W_1011011, DecoderConfig, decode, pac_encode_all
from pacrl.channel import llr, sigma_from_ebn0

row = TABLE1["64-32-pac-l8"]
profile = row.profile
print(row.name, row.hex, "K =", profile.K)
print("information indices:", profile.info.tolist())

rng = np.random.default_rng(1)
d = rng.integers(0, 2, profile.K).astype(np.uint8)

# v carries d on the information indices, u = conv(v, w), x = u P^(x)n
v, u, x = pac_encode_all(d, profile, W_1011011)
print("v", "".join(map(str, v)))
print("u", "".join(map(str, u)))
print("x", "".join(map(str, x)))

# BPSK 0 -> +1, 1 -> -1 at Eb/N0 = 2 dB
sigma = sigma_from_ebn0(2.0, profile.K / profile.N)
y = 1.0 - 2.0 * x + sigma * rng.standard_normal(profile.N)
lam = llr(y, sigma**2)
print("hard-decision channel errors:", int(np.sum((lam < 0) != x.astype(bool))))

res = decode(lam, profile, DecoderConfig(L=8, w=W_1011011))
for rank, c in enumerate(res.candidates, 1):
    ok = np.array_equal(c.v[profile.info], d)
    print(f"rank {rank}  pm {c.pm:9.4f}  {'<- transmitted' if ok else ''}")

print("decoded correctly:", np.array_equal(res.best.v[profile.info], d))
