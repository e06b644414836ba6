# %% [markdown]
# # EPR variance and parameter scans
#
# ``Var(x1 - x2) + Var(p1 + p2)`` is 2 for any product of coherent states and
# ``2 e^{-2r}`` for the two-mode squeezed vacuum.

# %%
import math
import tempfile
from pathlib import Path

from cvtb import ChannelSpec, GspParams, channel_epr_variance
from cvtb.scan import ScanConfig, run_scan, write_csv

for r in (0.1, 0.5, 1.0):
    v = channel_epr_variance(ChannelSpec("sqz2", lam=math.tanh(r))).total_variance
    print(f"r={r}: {v:.6f}  (2 e^-2r = {2 * math.exp(-2 * r):.6f})")

# %% [markdown]
# Operating on both coherent inputs of ``coh2`` never pushes the variance
# below the product-state value.

# %%
for s in (0.0, 0.5, 1.0):
    print(s, channel_epr_variance(ChannelSpec("coh2", alpha=1.0, beta=1.0, gsp=GspParams(s))).total_variance)

# %% [markdown]
# ## Scans
#
# The same grids the command-line tool runs are available as a library call.
# Degenerate points (here ``alpha = 0, s = 0``) become error rows.

# %%
cfg = ScanConfig("ec", "coh1", alpha=[0.0, 0.5, 1.0], s=[0.0, 0.5, None])
result = run_scan(cfg, jobs=1)
for row in result.rows:
    print(row["alpha"], row["s"], row["ec"], row["error_kind"])

out = Path(tempfile.mkdtemp()) / "coh1_ec.csv"
write_csv(result, out)
print(out.read_text())
