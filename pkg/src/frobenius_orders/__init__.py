"""Projective orders of Frobenius in Sp4(F_l), Atkin-style coefficient
candidates, and genus-2 point-counting experiments."""

__version__ = "0.1.0"
