# %% [markdown]
# Unbounded-memory classical solver: success rate and query scaling.

# %%
import numpy as np

from nestedcol import OracleParams, make_instance
from nestedcol.classical import default_config, solve_unbounded
from nestedcol.problem import verify_witness

# %%
rows = []
for N in (256, 1024, 4096):
    wins, q = 0, []
    for s in range(60):
        inst = make_instance(OracleParams(M=1 << 24, N=N, N0=N * N, ell=2, y=s % N, seed=s))
        res = solve_unbounded(inst, default_config(N, N * N, 2, seed=s))
        wins += res.success
        q.append(res.ledger.total)
        if res.success:
            assert verify_witness(inst, res.witness)
    rows.append((N, wins / 60, float(np.median(q))))
    print(f"N={N:5d}  success={wins / 60:.2f}  median queries={np.median(q):.0f}  ({np.median(q) / N:.2f} N)")

# %%
Ns, _, med = zip(*rows)
print("log-log slope", np.polyfit(np.log(Ns), np.log(med), 1)[0])
