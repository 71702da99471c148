# %% [markdown]
# # Which transverse modes need help, and where to push
#
# Transverse eigenvalues with nonnegative real part would destroy cluster
# consensus.  Each such eigenspace is split into parts living on one cluster
# and an intertwined remainder spread over several clusters.  Stabilizing
# inputs are differences ``e_k - e_l`` inside one cluster, so they never
# disturb the consensus motion.

# %%
import numpy as np

from symcon import (bounds, build_decomposition, load_fixture, orbital_partition, pbh_check, reduce_inputs,
                    select_drivers, transverse_spectrum)


def describe(name):
    net = load_fixture(name)
    p = orbital_partition(net)
    d = build_decomposition(net, p)
    s = transverse_spectrum(d)
    print(f"--- {name}: {net.n_nodes} nodes, clusters of sizes {p.sizes}")
    for g in s.non_stable:
        print(f"lambda = {g.lam:8.4f}  mu = {g.mu}  per-cluster dims {g.cluster_dims(p.n_clusters)}"
              f"  intertwined {g.residual_dim}")
    return net, p, d, s


# %%
net8, p8, d8, s8 = describe("net8")
print("bounds:", bounds(s8))

# %% [markdown]
# The greedy selection walks the non-stable groups and adds a column only
# when the projections of the columns on the eigenspace are short of its
# dimension.  It reuses existing drivers before recruiting new ones.

# %%
sel8 = select_drivers(s8)
print("D columns (1-based pairs):")
for col in sel8.d_matrix.T:
    k, l = np.flatnonzero(col > 0)[0], np.flatnonzero(col < 0)[0]
    print(f"  e{k + 1} - e{l + 1}")
print("driver nodes:", [i + 1 for i in sel8.driver_nodes])
print("PBH:", pbh_check(d8.a_perp, d8.t_perp @ sel8.d_matrix).ok)

# %%
net48, p48, d48, s48 = describe("net48")
sel48 = select_drivers(s48)
print(f"{sel48.n_columns} columns, {len(sel48.driver_nodes)} drivers:", [i + 1 for i in sel48.driver_nodes])
print("bounds:", sel48.bounds)

# %% [markdown]
# Columns acting on different clusters can share one input signal as long
# as every eigenspace stays covered; this brings the count down to the
# minimum number of inputs.

# %%
red = reduce_inputs(sel48, s48)
print("after merging:", red.n_columns, "columns; per-group ranks", red.per_group_rank)
