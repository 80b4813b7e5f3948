"""Boxed CMSO queries with weight comparisons, answered on cliquewidth expressions."""
