# %% [markdown]
# Lower and upper query curves, and where the separation windows sit.

# %%
from fractions import Fraction

from nestedcol import bounds as b

N = 2.0**32
print(b.curve_csv([b.eval_lower_bound(N, N * N, 2, S) for S in (1, 4, 16, 64, 256, 1024)], "S"))

# %%
for ell in (2, 3, 4, 5):
    print(ell, "classical", b.separation_window(ell, "classical"), b.derived_separation_window(ell, "classical"))
    print(ell, "quantum  ", b.separation_window(ell, "quantum"), b.derived_separation_window(ell, "quantum"))

# %%
for eps in (Fraction(1, 2), Fraction(1), Fraction(3, 2), Fraction(2)):
    print(f"eps={eps}: exponent gap {b.exponent_gap(2, eps, 'classical')}")
