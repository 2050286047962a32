"""Loop models, decohered topological states and their exact and Monte Carlo analysis."""
