"""Certified constants of the pipeline, each derived from the one before.

Every stage re-measures its output; these are the bounds the measured
values are checked against.
"""

from fractions import Fraction

# one refinement step of the outerstring induction
OUTER_REFINED_X = 70
# layered outerplanar coarsening
OUTERPLANAR_X = 11
OUTERPLANAR_Y = 9
OUTERSTRING_X = OUTERPLANAR_X * OUTER_REFINED_X  # 770
OUTERSTRING_Y = OUTERPLANAR_Y

# encasings
BASE_A = 3 * OUTER_REFINED_X  # 210
ENFORCED_A = 4 * BASE_A  # 840
FINAL_A = OUTERPLANAR_X * ENFORCED_A  # 9240
FINAL_B = OUTERPLANAR_Y
SURROUND_C = 4
CAGE_D = 7

# fortification recursion
FORTIFY_K = 2 * SURROUND_C  # 8
INDUCT_X = FINAL_A + 2  # 9242
# a cage chain of at most 7 steps crosses 8 sets, each of part-diameter <= 9
INDUCT_Y_SUM = CAGE_D + (CAGE_D + 1) * FINAL_B  # 79
# certified value; every later constant is built on it and it bounds the sum above
INDUCT_Y = 80
IMPRESSION_X = FORTIFY_K * INDUCT_X  # 73936
IMPRESSION_Y = INDUCT_Y
SPAN_Z = FORTIFY_K

# quasi-isometry to the contracted parts
QUASI_X1 = IMPRESSION_X + SPAN_Z  # 73944
QUASI_X2 = IMPRESSION_X
QUASI_X3 = 2 * IMPRESSION_Y  # 160
QUASI_X4 = IMPRESSION_Y

# bijective planar output
FINAL_CONTRACTION = 2 * QUASI_X4 * (QUASI_X1 + QUASI_X2)  # 23660800
FINAL_EXPANSION = QUASI_X3 + 2  # 162

# metric graphs go through one extra factor of two
METRIC_CONTRACTION = 2 * FINAL_CONTRACTION  # 47321600


def chain() -> dict[str, int]:
    """All derived constants by name."""
    return {
        "outerstring_x": OUTERSTRING_X,
        "base_a": BASE_A,
        "enforced_a": ENFORCED_A,
        "final_a": FINAL_A,
        "induct_x": INDUCT_X,
        "induct_y": INDUCT_Y,
        "induct_y_sum": INDUCT_Y_SUM,
        "impression_x": IMPRESSION_X,
        "quasi_x1": QUASI_X1,
        "quasi_x3": QUASI_X3,
        "final_contraction": FINAL_CONTRACTION,
        "final_expansion": FINAL_EXPANSION,
        "metric_contraction": METRIC_CONTRACTION,
    }


def quasi_slopes() -> dict[str, Fraction]:
    return {
        "lower_slope": Fraction(1, QUASI_X1),
        "lower_offset": Fraction(QUASI_X2, QUASI_X1),
        "upper_slope": Fraction(QUASI_X3),
    }
