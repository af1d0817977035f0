"""European option pricing via a neural-network solution of the heat-equation
form of the Black-Scholes PDE, with closed-form and finite-difference baselines."""

__version__ = "0.1.0"
