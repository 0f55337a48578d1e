# Learn a (64,32) rate profile with the maze Q-learner and compare it with the
# published profile for the same code. A short run (3000 episodes, a few seconds);
# the acceptance suite uses the full 20000.
import numpy as np

from pacrl import TABLE1, W_1011011, CodeParams, DecoderConfig, SimConfig, run_fer
from pacrl.profiler import TrainConfig, extract_profile, rm_score_partition, train

N, K = 64, 32

# only indices on the boundary Reed-Muller score are open to learning
part = rm_score_partition(N, K)
print(f"t_b = {part.t_b}, forced information {len(part.I_init)}, "
      f"boundary {len(part.N_set)}, to choose {K - len(part.I_init)}")

cfg = TrainConfig(episodes=3000, seed=1)
Q, report = train(N, K, W_1011011, cfg)
print(f"F-rate {report.f_rate:.3f}, greedy calls {report.greedy_calls}")

# drop rate in windows of 500 episodes
F = np.array([r["F"] for r in report.records])
print("F-rate per 500 episodes:", np.round(F.reshape(-1, 500).mean(axis=1), 3).tolist())

learned = extract_profile(Q, N, K)
table1 = TABLE1["64-32-pac-l8"].profile
print("learned ", learned.to_hex())
print("published", table1.to_hex())
print("chosen boundary indices:", sorted(set(learned.info.tolist()) & part.N_set))

sim = SimConfig((2.5, 3.0), max_frames=5000, min_frame_errors=0)
dec = DecoderConfig(8, w=W_1011011)
for name, prof in (("learned", learned), ("published", table1)):
    fer = run_fer(CodeParams(N, K), prof, W_1011011, dec, sim, seed=3).fer
    print(name, "FER at 2.5 / 3.0 dB:", fer.tolist())
