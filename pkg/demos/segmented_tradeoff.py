# %% [markdown]
# Segmented game: capacity grows linearly in T at fixed memory.

# %%
import math

import numpy as np

from nestedcol import OracleParams, make_instance
from nestedcol.bounds import segmented_capacity_bound
from nestedcol.classical import CarryPoints, FlipMemory, RestartBirthday, SegmentPlan, run_segmented

N, ell = 1 << 14, 2

# %%
for S in (64, 64 + 38 * 64):
    t_prime = math.ceil(math.sqrt(S * N))
    for T in (4096, 8192, 16384):
        caps = []
        for i in range(10):
            inst = make_instance(OracleParams(M=1 << 24, N=N, N0=2, ell=ell, y=i, seed=100 * T + i))
            strat = RestartBirthday() if S == 64 else CarryPoints(S)
            tr = run_segmented(strat, SegmentPlan(max(1, T // t_prime), t_prime, S), inst, FlipMemory.from_instance(inst), seed=i)
            caps.append(tr.final)
        print(f"S={S:5d} T={T:6d} capacity={np.mean(caps):8.1f}  curve={segmented_capacity_bound(S, T, N, ell):10.0f}")
