# %% [markdown]
# Same-sum pairs among T random H values: counts, variance and tail.

# %%
import math

import numpy as np

from nestedcol import OracleParams, make_instance
from nestedcol.problem import count_statistics, enumerate_same_sum_tuples

# %%
params = OracleParams(M=1 << 20, N=1024, N0=2, ell=2, y=0, seed=7)
st = count_statistics(256, 500, params)
print(f"mean {st.mean:.2f} (expected {st.expected_mean:.2f})")
print(f"var  {st.variance:.2f} (expected {st.expected_variance:.2f})")
print(f"Pr[K <= mean/2] = {st.tail_freq:.4f}")

# %%
# histogram of the per-trial counts
hist = np.bincount(st.counts)
for k in range(max(0, int(st.expected_mean) - 10), int(st.expected_mean) + 11, 2):
    print(f"{k:3d} {'#' * int(hist[k:k + 2].sum() // 2) if k < len(hist) else ''}")

# %%
# one instance, listed explicitly
inst = make_instance(OracleParams(M=64, N=16, N0=4, ell=2, y=3, seed=1))
pairs = enumerate_same_sum_tuples(inst, range(20), 3)
print(len(pairs), "pairs over 20 points, expected", math.comb(20, 2) / 16)
print(pairs[:5])
