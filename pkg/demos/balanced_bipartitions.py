"""Generate c-balanced bipartition sequences and probe the mass-splitting bound.

Run: python3 demos/balanced_bipartitions.py
"""
from fractions import Fraction

from regforge.bipartitions import (
    PAPER_C,
    base_case,
    biased_lemma_oracle,
    generate_balanced,
    is_balanced,
    split_mass_count,
)

# %% With two elements the only half-half split is {1} | {2}; they never share a side.
S = base_case(5)
print("base case:", is_balanced(S, PAPER_C))

# %% Larger ground sets use random half-half splits, retried until balanced.
for m, M in [(64, 4), (128, 8), (512, 16)]:
    S = generate_balanced(m, M, PAPER_C, seed=1, max_retries=10**5)
    ok, (t, u, count) = is_balanced(S, PAPER_C)
    print(f"m={m} M={M}: balanced={ok}, worst pair ({t},{u}) together {count} times, "
          f"attempt {S.meta.get('attempt')}")

# %% A mass profile that is not too concentrated is split evenly by many bipartitions.
S = generate_balanced(64, 4, PAPER_C, seed=1)
lam = (Fraction(2, 5), Fraction(1, 5), Fraction(1, 5), Fraction(1, 5))
count, which = split_mass_count(S, lam, Fraction(1, 20))
print(f"{count} of {S.m} bipartitions put mass at least 1/2 - 1/20 on each side")

# %% The grid oracle checks the bound over every profile on a 1/40 simplex grid.
for zeta in (Fraction(1, 40), Fraction(1, 20)):
    res = biased_lemma_oracle(S, zeta, Fraction(1, 40))
    print(f"zeta={zeta}: {res.points} profiles, minimum count {res.min_count}, "
          f"needed {Fraction(S.m, 6)}, holds={res.holds}")
