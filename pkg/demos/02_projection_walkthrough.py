"""Projecting share vectors onto the truncated simplex, exactly.

The feasible set is {x : sum x = 1, x_i >= eps}.  The projection clamps a
(possibly empty) set of coordinates to the floor and spreads the leftover
mass evenly across the rest; everything below runs in exact rationals.
"""

from fractions import Fraction as F

from fairmix import project_onto_truncated_simplex

cases = [
    ((F(1, 2), F(1, 2)), F(1, 10)),       # already feasible: unchanged
    ((F(3, 2), F(-1, 2)), F(1, 10)),      # one coordinate pinned to the floor
    ((F(1), F(1), F(-1)), F(1, 10)),      # the two high coordinates split the rest
    ((F(2), F(-1, 2), F(-1, 2)), F(1, 4)),
]

for y, eps in cases:
    x = project_onto_truncated_simplex(y, eps)
    pinned = [i + 1 for i, v in enumerate(x) if v == eps]
    print(f"y = {y}, floor {eps}")
    print(f"  -> {x}   (sum {sum(x)}, floor-pinned coordinates: {pinned or 'none'})")
    again = project_onto_truncated_simplex(x, eps)
    print(f"  projecting again returns the same point: {again == x}\n")

# the floor may take the whole budget: with eps = 1/n the simplex is a point
print("eps = 1/2 with two players leaves a single feasible point:")
print(" ", project_onto_truncated_simplex((F(7), F(-6)), F(1, 2)))
