# %% [markdown]
# # Teleportation fidelity
#
# The average fidelity of teleporting a coherent state is an integral of the
# channel's characteristic function against the input's.  ``F = 1/2`` is the
# classical limit, ``F = 2/3`` the no-cloning limit.

# %%
import math

import numpy as np

from cvtb import ChannelSpec, GspParams, channel_fidelity, coherent_input, squeezed_input
from cvtb.teleport import tmsv_reference_report

inp = coherent_input()

# %% [markdown]
# The two-mode squeezed vacuum gives ``(1 + lambda)/2``.

# %%
for lam in (0.0, 0.5, 0.9):
    print(lam, channel_fidelity(ChannelSpec("sqz2", lam=lam), inp).F, (1 + lam) / 2)

# %% [markdown]
# ## Classical inputs stay below 1/2
#
# Operating on a coherent or thermal input entangles it with the vacuum port
# but does not lift the fidelity above the classical limit.

# %%
for s in (None, 0.0, 0.5, 1.0):
    g = None if s is None else GspParams(s)
    f_coh = channel_fidelity(ChannelSpec("coh1", alpha=0.5, gsp=g), inp).F
    f_thm = channel_fidelity(ChannelSpec("thm1", nbar=0.05, gsp=g), inp).F
    print(f"s={s}: coh1 {f_coh:.4f}  thm1 {f_thm:.4f}")

# %% [markdown]
# ## Single-mode squeezed channel
#
# The unoperated channel reaches ``1/sqrt(2(1 + e^{-2z}))``, which tends to
# ``1/sqrt2`` at strong squeezing.  The operation moves the fidelity only
# slightly, so the no-cloning limit stays out of reach.

# %%
for lam in (0.2, 0.9, 0.99):
    z = math.atanh(lam)
    vals = [channel_fidelity(ChannelSpec("sqz1", lam=lam, gsp=GspParams(s)), inp).F for s in (0.0, 0.5, 1.0)]
    unop = channel_fidelity(ChannelSpec("sqz1", lam=lam), inp).F
    print(f"lam={lam}: unop {unop:.4f} (closed form {1 / math.sqrt(2 * (1 + math.exp(-2 * z))):.4f}); "
          f"s=0,0.5,1: " + ", ".join(f"{v:.4f}" for v in vals))

# %% [markdown]
# ## Squeezed inputs through an operated two-mode squeezed channel

# %%
for s in (None, 0.0, 0.5, 1.0):
    g = None if s is None else GspParams(s)
    print(s, channel_fidelity(ChannelSpec("sqz2", lam=0.5, gsp=g), squeezed_input(0.5)).F)

# %% [markdown]
# Published closed forms for the operated two-mode squeezed channel at
# ``s = 0`` and ``s = 1`` do not match the integral; they are shown for
# comparison only.

# %%
for row in tmsv_reference_report([0.2, 0.5, 0.8]):
    print(f"lam {row['lambda']:.1f} s {row['s']}: quadrature {row['quadrature']:.4f} reference {row['reference']:.4f}")
