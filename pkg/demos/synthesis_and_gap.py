# %% [markdown]
# # Prescribing measure dimensions
#
# With weights allowed to depend on the whole atom, any upper dimension
# ``>= D`` and any lower dimension in ``(0, D]`` can be realised.  With one
# weight vector shared by every atom, the upper dimension usually stays
# strictly above ``D``: the gap.

# %%
from moranphi import dims, synth
from moranphi.model import MoranModel

fam = MoranModel.independent([(0.5, (1 / 3, 1 / 3)), (0.5, (0.25, 0.5))])
D = dims.hausdorff_d(fam)
print(f"D = {D:.10f}")

# %%
for target in (D, D + 0.2, 1.0, 2.0):
    out = synth.synth_upper_dependent(fam, target)
    print(f"upper {target:.4f}: {out.mechanism:>15}, achieved {out.achieved:.10f}")
for target in (D, D / 2, 0.1):
    out = synth.synth_lower_dependent(fam, target)
    print(f"lower {target:.4f}: {out.mechanism:>15}, achieved {out.achieved:.10f}")

# %%
verdict = synth.detect_gap(fam)
up = synth.min_updim_single(fam)
low = synth.max_lowdim_single(fam)
print("gap:", verdict.has_gap, "witness:", verdict.witness)
print(f"best single upper {up.value:.8f} (margin {up.value - D:.2e}) at {up.weights}")
print(f"best single lower {low.value:.8f} (margin {D - low.value:.2e}) at {low.weights}")

# %% [markdown]
# Above the single-weight minimum every upper value is reachable again.

# %%
out = synth.attain_updim_single(fam, up.value + 0.1)
print(out.weights, out.achieved)
