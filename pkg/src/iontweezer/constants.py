"""Physical constants (CODATA 2018, SI) and the built-in ion species."""
from scipy import constants as _c

C = _c.c
HBAR = _c.hbar
H = _c.h
EPS0 = _c.epsilon_0
E_CHARGE = _c.e
AMU = _c.atomic_mass
K_COULOMB = 1.0 / (4.0 * _c.pi * EPS0)

TWO_PI = 2.0 * _c.pi
