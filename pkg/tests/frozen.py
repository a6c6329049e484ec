"""Reference values derived independently (see ``derive_frozen.py``) and frozen.

Derived quantities are not quoted anywhere authoritative, so they are
computed once with exact rationals or 50-digit arithmetic, or by the grid
oracle, and pinned here.
"""

# six-point codebook with u = v = 1/12: cell boundaries on the base
ALPHA6_BOUNDARIES = (1 / 3, 2 / 3, 1.0, 4 / 3, 5 / 3)

# progression formula at (ell, m) = (1, 1)
UV_1_1 = (0.25, 0.25)

# n^2 (V_n - 1/4) at the balanced odd split ((n+1)/2, (n-1)/2), 50-digit evaluation
ODD_COEFFICIENTS = {
    101: 0.08335784393809800993530335,
    1001: 0.08333358283441433818463043,
    10001: 0.08333333583283344164333819,
}

# apex (1, 1), n = 2, allocation (1, 1): grid oracle optimum, confirmed by
# minimizing 1/3 - t + 2 t^2 by hand
APEX11_PARAMS = (0.25, 0.25)
APEX11_VALUE = 5 / 24
