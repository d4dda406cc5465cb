"""Source-to-source automatic differentiation for a typed lambda calculus."""

__version__ = "0.1.0"
