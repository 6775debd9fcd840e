"""Mazur-Tate elements and Iwasawa lambda-invariants at additive primes."""

__version__ = "0.1.0"
