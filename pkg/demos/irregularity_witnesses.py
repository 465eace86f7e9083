"""Find irregular pairs in the hard instance and confirm them exhaustively.

Run: python3 demos/irregularity_witnesses.py
"""
from fractions import Fraction

from regforge.auditor import canonical_candidates, canonical_witness_search, exhaustive_pair_check, niceness_audit
from regforge.tower import ConstructionParams, build_instance, build_tower

eps = Fraction(1, 100)
T = build_tower(ConstructionParams.custom(Fraction(1, 3), 3, 160, seed=7))
G = build_instance(T)

# %% Two cells of X_1: the level-2 split of one cell, as seen from the other, gives a gap of delta.
for c in canonical_candidates(G, T, T.cell(1, 0), T.cell(1, 1), eps, 2):
    print(f"side {c.side}: |Za|={len(c.Za)} |Zb|={len(c.Zb)} |Zp|={len(c.Zp)} gap={c.gap}")

v = canonical_witness_search(G, T, T.cell(1, 0), T.cell(1, 1), eps)
print(v.status, "deviation", v.deviation)

# %% Every coarse level of the tower fails the niceness test.
for r in range(T.s):
    rep = niceness_audit(G, T.partition(r), eps, "canonical", T)
    print(f"X_{r}: k={rep.k} verdict={rep.verdict} irregular partners per part={rep.irregular_counts}")

# %% On a small instance the exhaustive checker confirms the witness.
small = build_tower(ConstructionParams.custom(Fraction(1, 3), 3, 8, seed=1))
Gs = build_instance(small)
A, B = small.cell(1, 0), small.cell(1, 1)
print("canonical:", canonical_witness_search(Gs, small, A, B, Fraction(1, 20)).status)
print("exhaustive:", exhaustive_pair_check(Gs, A, B, Fraction(1, 20)).status)
