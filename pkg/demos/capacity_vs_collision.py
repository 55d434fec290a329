# %% [markdown]
# Collision probability against database capacity for a small BHT-style finder.

# %%
import numpy as np

from nestedcol.quantum.capacity import bht_coherent, bht_reduced, collision_capacity_check

# %%
# the reduced engine agrees with the fully coherent simulation
for T in (2, 3, 4):
    a, b = bht_reduced(4, 4, T), bht_coherent(4, 4, T)
    print(T, a.p, b.p, abs(a.p - b.p))

# %%
pts = collision_capacity_check(8, (4, 8, 16), (2, 3, 4))
print(f"{'label':8s} {'N0':>3s} {'T':>2s} {'p':>9s} {'V':>7s} {'20T^2V/N0':>10s}")
for p in pts:
    print(f"{p.label:8s} {p.N0:3d} {p.T:2d} {p.p:9.5f} {p.V:7.3f} {p.bound:10.3f}")

# %%
r = [bht_reduced(8, N0, 2).ratio for N0 in (4, 8, 16, 32)]
print("p/(T^2 V) at T=2:", np.round(r, 5), "log2 slopes", np.round(np.diff(np.log2(r)), 2))
