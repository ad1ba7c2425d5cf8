"""
Exact kernel for the real closure of Q(t): ordered valued field arithmetic,
Newton polygons, generalized Taylor formulas, Thom-coded tableaux and the
valued sign condition algorithms.
"""
