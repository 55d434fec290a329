# %% [markdown]
# Compressed oracle: standard vs compressed runs, database growth, and what
# breaks without the decomposition step.

# %%
import numpy as np

from nestedcol.quantum import dense as q
from nestedcol.quantum.dense import _cpho_prime

rng = np.random.default_rng(0)
L = q.RegisterLayout(M=3, N=2, w=2, r=2)

# %%
for T in range(4):
    us = q.random_circuit(L, T, rng)
    print(f"T={T}  TV(standard, compressed) = {q.equivalence_check(us, L):.1e}")

# %%
# database size never exceeds the number of queries
Lc = L.with_mode("compressed")
us = q.random_circuit(L, 3, rng)
sv = q.apply_local(q.basis_state(Lc), us[0])
for t, U in enumerate(us[1:], 1):
    sv = q.apply_local(q.phase_query(sv), U)
    print(t, np.round(q.db_size_distribution(sv), 4))

# %%
# one query with u=1 on an empty database
sv = q.apply_cpho(q.basis_state(q.RegisterLayout(2, 2, mode="compressed"), x=0, u=1))
print(q.distribution_csv(q.measure_database(sv)))


# %%
def no_decomp(sv):
    sv = q.apply_v(sv)
    return q.apply_v(q.Statevector(sv.layout, _cpho_prime(sv.amps, sv.layout)))


print("without decomposition:", q.equivalence_check(us, L, no_decomp))
