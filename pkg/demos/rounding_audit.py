"""Round the weighted instance to a simple graph and measure density drift.

Run: python3 demos/rounding_audit.py
"""
from fractions import Fraction

from regforge.sampler import claim_threshold, deviation_audit, sample_graph
from regforge.tower import ConstructionParams, build_instance, build_tower

G = build_instance(build_tower(ConstructionParams.custom(Fraction(1, 3), 3, 400, seed=3)))
Gp = sample_graph(G, seed=0)
print("edges kept:", len(Gp.edges()))

# %% Each pair becomes an edge with probability equal to its weight.
zeta = Fraction(1, 10)
print("threshold set size for n=400:", claim_threshold(400, zeta))

# %% The threshold exceeds n at this scale, so audit smaller random sets.
for size in (50, 100, 200, 400):
    rep = deviation_audit(G, Gp, zeta, trials=100, seed=0, set_size=size)
    print(f"|A|=|B|={size}: max deviation {float(rep.max_deviation):.4f} (zeta={float(zeta)})")
