# %% [markdown]
# # Symmetry clusters and the block decomposition
#
# Nodes that an automorphism of the network maps onto each other form a
# cluster.  Within a cluster the nodes can synchronize; the orthogonal
# change of coordinates ``T_or`` splits the dynamics into the motion along
# the consensus subspace (one coordinate per cluster) and the transverse
# motion that must die out.

# %%
import numpy as np

from symcon import build_decomposition, load_fixture, orbital_partition

net = load_fixture("net8")
print(net.adjacency.astype(int))
print("input pattern:", net.input_pattern.ravel().astype(int))

# %% [markdown]
# The search refines an equitable partition and individualizes one node at
# a time; every automorphism it meets merges orbits.

# %%
p = orbital_partition(net)
for j, c in enumerate(p.clusters):
    print(f"cluster {j + 1}: nodes {[i + 1 for i in c]}")
print("generators found:", len(p.generators))

# %% [markdown]
# ``T_or`` stacks normalized cluster indicators on top of zero-sum rows built
# inside each cluster.  In the new coordinates ``A`` becomes block diagonal
# and the input only reaches the quotient block.  Listing the clusters as
# (1, 3, 2) gives the layout where the driven cluster comes second.

# %%
d = build_decomposition(net, p, order=(0, 2, 1))
np.set_printoptions(precision=4, suppress=True)
print("A_par =\n", d.a_parallel)
print("B_par =", d.b_parallel.ravel())
print("A_perp =\n", d.a_perp)
print("max |B_perp| =", np.abs(d.b_perp).max())
print("max |T T^T - I| =", np.abs(d.t_or @ d.t_or.T - np.eye(8)).max())

# %%
# the off-diagonal blocks vanish to roundoff
At = d.t_or @ net.adjacency @ d.t_or.T
print("coupling block norm:", np.abs(At[:3, 3:]).max())
