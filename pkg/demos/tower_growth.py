"""How fast the cell counts grow, and what that means for partition order.

Run: python3 demos/tower_growth.py
"""
from fractions import Fraction

from regforge.auditor import bounds_calculator, tower_height_bound, twr
from regforge.tower import tower_sizes

# %% With kappa = 512 the first 512 levels only double.
print(tower_sizes(9, 512))

# %% A small kappa shows the explosion: each step exponentiates.
for r, m in enumerate(tower_sizes(6, 4)):
    print(f"m_{r}: {m.bit_length()} bits")

# %% Tower function values.
print([twr(h) for h in range(5)])

# %% Bounds for a target epsilon.
b = bounds_calculator(Fraction(1, 8100))
print("delta", b["delta"], "s", b["s"], "sizes", b["tower_sizes"])
for line in b["statements"]:
    print(" ", line)

# %% A height bound for a deeper tower.
hb = tower_height_bound(600)
print("m_s is at least twr of", hb["height"], "after", hb["exact_levels"], "exact levels")
