# %% [markdown]
# # Operated channels in the Fock basis
#
# A superposition ``s a a^dag + t a^dag a`` acts on a number state as
# ``s + n (s + t)``, so operating on an input only reweights its Fock
# amplitudes.  The operated mode then meets vacuum (or a second operated mode)
# on a 50:50 beam splitter.

# %%
import numpy as np

from cvtb import ChannelSpec, GspParams, build_channel
from cvtb.channels import local_core

# %% [markdown]
# ## Coherent channels are a small core plus local displacements
#
# For ``coh1`` the core is ``p1|00> + (p2/sqrt2)(|10> - |01>)``.  At
# ``alpha = 1`` and ``s = 0`` it is maximally simple:

# %%
spec = ChannelSpec("coh1", alpha=1.0, gsp=GspParams(0.0))
print(np.round(local_core(spec).real, 4))

# %% [markdown]
# The low-intensity build (``mode="paper"``) uses exactly this core, so it
# agrees with the full pipeline to rounding error.

# %%
def trace_distance(a, b):
    n = max(a.n_max, b.n_max)
    mats = []
    for st in (a, b):
        k = st.n_max
        m = np.zeros((n, n, n, n), dtype=complex)
        m[:k, :k, :k, :k] = st.density.tensor4()
        mats.append(m.reshape(n * n, n * n))
    return 0.5 * np.abs(np.linalg.eigvalsh(mats[0] - mats[1])).sum()


for fam, kw in [("coh1", {"alpha": 1.2}), ("coh2", {"alpha": 0.6, "beta": 0.3j})]:
    paper = build_channel(ChannelSpec(fam, gsp=GspParams(0.4), mode="paper", **kw))
    conv = build_channel(ChannelSpec(fam, gsp=GspParams(0.4), **kw))
    print(f"{fam}: trace distance {trace_distance(paper, conv):.1e}")

# %% [markdown]
# ## Truncated thermal and squeezed channels
#
# The thermal and squeezed closed forms keep only the first few photon
# numbers.  Their distance from the converged state equals the discarded
# weight (mixed) or its square root (pure), so it is tiny only when the input
# is weak.

# %%
print(f"{'channel':>8} {'param':>8} {'distance':>10}")
for fam, key, values in [("thm1", "nbar", (1e-4, 1e-2, 0.1)), ("sqz1", "lam", (1e-4, 1e-2, 0.2))]:
    for v in values:
        kw = {key: v}
        paper = build_channel(ChannelSpec(fam, gsp=GspParams(0.5), mode="paper", **kw))
        conv = build_channel(ChannelSpec(fam, gsp=GspParams(0.5), **kw))
        print(f"{fam:>8} {v:8.0e} {trace_distance(paper, conv):10.2e}")

# %% [markdown]
# Exchanging the two modes of ``coh2`` is a symmetry only up to a parity flip
# on mode b, because the beam splitter is not symmetric under the exchange.

# %%
from cvtb.channels import mode_swap

n = 30
a = build_channel(ChannelSpec("coh2", alpha=0.5, beta=0.2, gsp=GspParams(0.3, 0.8), cutoff=n))
b = build_channel(ChannelSpec("coh2", alpha=0.2, beta=-0.5, gsp=GspParams(0.8, 0.3), cutoff=n))
parity = (-1.0) ** np.arange(n)
print("max deviation:", np.abs(mode_swap(a.amplitudes) - b.amplitudes * parity).max())
