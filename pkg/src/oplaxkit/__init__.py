"""oplaxkit: a workbench for oplax functors of finite k-linear categories.

Exact-arithmetic verification and construction of oplax functors, their 1- and
2-morphisms, bounded homotopy categories of projectives, and tilting data.
"""

__version__ = "0.1.0"
