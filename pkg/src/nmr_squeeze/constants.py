"""Pinned physical constants (CODATA 2018 exact values)."""

import math

E_CHARGE = 1.602176634e-19        # elementary charge, C
H_PLANCK = 6.62607015e-34         # Planck constant, J s
HBAR = 1.054571817e-34            # reduced Planck constant, J s
PHI0 = H_PLANCK / (2.0 * E_CHARGE)  # superconducting flux quantum h/2e, Wb
TWO_PI = 2.0 * math.pi
