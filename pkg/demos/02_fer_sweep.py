# Frame error rate of the published (64,32) profiles: the polar-code row against
# the PAC row, both decoded with a list of 8. Small frame budget so it runs in
# well under a minute; raise FRAMES for smoother curves.
import numpy as np

from pacrl import TABLE1, CodeParams, DecoderConfig, SimConfig, run_fer

FRAMES = 4000
SNRS = (1.0, 1.5, 2.0, 2.5, 3.0)

code = CodeParams(64, 32)
sim = SimConfig(SNRS, max_frames=FRAMES, min_frame_errors=200)

curves = {}
for name in ("64-32-polar-l8", "64-32-pac-l8"):
    row = TABLE1[name]
    res = run_fer(code, row.profile, row.w, DecoderConfig(8, w=row.w), sim, seed=5)
    curves[name] = res
    print(name, "w =", row.w)
    print(res.to_csv())

# ratio of frame error rates, polar over PAC
ratio = curves["64-32-polar-l8"].fer / np.maximum(curves["64-32-pac-l8"].fer, 1e-12)
for snr, r in zip(SNRS, ratio):
    print(f"{snr:4.1f} dB  polar/PAC FER ratio {r:5.2f}")
