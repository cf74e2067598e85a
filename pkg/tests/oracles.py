"""Closed-form values used as frozen oracles."""

import math


def soliton_mass(omega, c):
    """M = 1/2 int phi^2 = 2 arccos(-c / (2 sqrt(omega)))."""
    return 2.0 * math.acos(-c / (2.0 * math.sqrt(omega)))


def soliton_momentum(omega, c):
    """P = sqrt(4 omega - c^2)."""
    return math.sqrt(4.0 * omega - c * c)


def d2_det(omega, c):
    """det of [[M_w, M_c], [P_w, P_c]] from the two closed forms above: -1/omega."""
    return -1.0 / omega
