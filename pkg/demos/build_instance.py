"""Build a small hard instance and look at its structure.

Run: python3 demos/build_instance.py
"""
from fractions import Fraction

import numpy as np

from regforge import formats
from regforge.graph import density
from regforge.tower import ConstructionParams, build_instance, build_tower

# %% Parameters: three levels of weight 1/3 on 32 vertices.
params = ConstructionParams.custom(Fraction(1, 3), 3, 32, seed=4)
T = build_tower(params)
G = build_instance(T)
print("tower sizes:", T.sizes)
print("finest cells:", [list(T.cell(3, i)) for i in range(3)], "...")

# %% The count matrix: entry (u, v) is how many levels activate the pair.
print(G.counts[:8, :8])
print("count histogram:", np.bincount(G.counts.ravel(), minlength=G.s + 1))

# %% Every vertex sees exactly half of each coarse cell at each level.
for r in range(1, T.s + 1):
    L = G.levels[r - 1]
    w = T.cell_size(r - 1)
    print(f"level {r}: row sums per cell", L[0].reshape(-1, w).sum(axis=1))

# %% Densities are exact rationals.
print("d(V, V) =", density(G, None, range(32), range(32)).value)
print("d_1(X_1 halves) =", density(G, (1, 1), range(16), range(16, 32)).value)

# %% The whole instance regenerates from a one-line descriptor.
desc = formats.dumps_descriptor(params)
print(desc)
assert formats.instance_from_descriptor(desc) == G
