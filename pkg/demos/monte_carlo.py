# %% [markdown]
# # Random paths through a two-atom model
#
# Following the greedy child at the upper dimension along a random atom
# sequence, ``sum log p / sum log a`` settles at ``updim``.  Every fixed
# selector settles at its own ratio ``H``.

# %%
import numpy as np

from moranphi import dims, sim
from moranphi.gcore import enumerate_selectors, h_of_selector
from moranphi.model import MoranModel

model = MoranModel.dependent([
    (0.5, (0.25, 0.5), (0.5, 0.5)),
    (0.5, (1 / 3, 1 / 3), (1 / 3, 2 / 3)),
])
print("updim", dims.updim(model), "lowdim", dims.lowdim(model))

# %%
seq = sim.sample_sequence(model, 100_000, seed=1)
for chi in enumerate_selectors(model):
    stats = sim.path_ratio(model, seq, chi)
    trace = ", ".join(f"{r:.4f}" for _, r in stats.trace)
    print(f"{tuple(chi)}: H = {h_of_selector(model, chi):.4f}; ratios at 1e2..1e5: {trace}")

# %%
summary = sim.empirical_dims(model, 100_000, 50, seed=2, threads=4)
ups = np.array(summary.upper_ratios)
print(f"m-path ratios: mean {ups.mean():.4f}, spread {ups.std():.4f}, within 0.02: {summary.within(0.02)}")

# %% [markdown]
# The first few levels of the interval tree.

# %%
table = sim.emit_intervals(model, seq, 3)
print(table.to_csv())
