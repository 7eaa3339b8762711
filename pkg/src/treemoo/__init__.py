"""treemoo: constrained multi-objective black-box optimization.

Tree-ensemble surrogates, a weighted-Chebyshev acquisition with a
distance-based exploration reward, an exact mixed-integer encoding of the
tree models, and a global branch-and-bound solver for the resulting
nonconvex problem, plus benchmark problems, baseline optimizers, and
Pareto-front quality metrics.
"""

__version__ = "0.1.0"
