# %% [markdown]
# # Entanglement capacity
#
# The capacity of a channel is the logarithmic negativity of its normalized
# state.  Pure channels use their Schmidt spectrum; thermal ones the full
# partial transpose.

# %%
import numpy as np

from cvtb import ChannelSpec, GspParams, entanglement_capacity

s_grid = np.linspace(0, 1, 6)

# %% [markdown]
# Without an operation, a beam splitter cannot entangle classical inputs.

# %%
for spec in (ChannelSpec("coh1", alpha=1.0), ChannelSpec("thm1", nbar=0.1)):
    print(spec.family, entanglement_capacity(spec))

# %% [markdown]
# ## Single operated mode
#
# Capacity is largest at ``s = 0`` (pure ``a^dag a``) and falls as the
# ``a a^dag`` part takes over.

# %%
rows = {
    "coh1 a=0.5": lambda s: ChannelSpec("coh1", alpha=0.5, gsp=GspParams(s)),
    "thm1 n=0.05": lambda s: ChannelSpec("thm1", nbar=0.05, gsp=GspParams(s)),
    "sqz1 l=0.3": lambda s: ChannelSpec("sqz1", lam=0.3, gsp=GspParams(s)),
}
print(" " * 12 + "".join(f"{s:>8.1f}" for s in s_grid))
for name, make in rows.items():
    vals = []
    for s in s_grid:
        try:
            vals.append(entanglement_capacity(make(s)))
        except Exception:
            vals.append(np.nan)
    print(f"{name:>12}" + "".join(f"{v:8.4f}" for v in vals))

# %% [markdown]
# ## Two-mode squeezed vacuum with both halves operated
#
# At weak squeezing the capacity is low along the ``s = 0`` edges and rises in
# the interior.

# %%
grid = np.linspace(0, 1, 6)
for s1 in grid:
    print("".join(f"{entanglement_capacity(ChannelSpec('sqz2', lam=0.05, gsp=GspParams(s1, s2))):8.3f}" for s2 in grid))
