"""Accumulator layout shared by the compiled and pure-Python kernels.

Both kernels return (hist, sums, clip_count) per chunk; ``sums`` is a
float64 vector indexed by the constants below. Clipped values feed the
plain moment slots; the ``R_*`` slots are restricted to raw outcomes
inside [-M, M]^2 and keep the square terms needed for Monte Carlo error
bars.
"""

# first moments (clipped outcomes)
S_QA, S_PA, S_QB, S_PB = 0, 1, 2, 3
# second moments, upper triangle over (q_A, p_A, q_B, p_B)
S_QAQA, S_QAPA, S_QAQB, S_QAPB = 4, 5, 6, 7
S_PAPA, S_PAQB, S_PAPB = 8, 9, 10
S_QBQB, S_QBPB, S_PBPB = 11, 12, 13
# range-restricted raw moments
S_R_QB2, S_R_QB4, S_R_QAQB, S_R_QAQB2 = 14, 15, 16, 17
S_R_PB2, S_R_PB4, S_R_PAPB, S_R_PAPB2 = 18, 19, 20, 21

NSUMS = 22

SECOND_MOMENT_INDEX = {
    ("q_A", "q_A"): S_QAQA, ("q_A", "p_A"): S_QAPA, ("q_A", "q_B"): S_QAQB,
    ("q_A", "p_B"): S_QAPB, ("p_A", "p_A"): S_PAPA, ("p_A", "q_B"): S_PAQB,
    ("p_A", "p_B"): S_PAPB, ("q_B", "q_B"): S_QBQB, ("q_B", "p_B"): S_QBPB,
    ("p_B", "p_B"): S_PBPB,
}
