from opconvex.certify.report import (CONCAVE, CONVEX, VIOLATION,
                                     ConvexityReport, TrialResult, run_trials)
from opconvex.certify.maps import (MapSpec, certify, find_violation,
                                   midpoint_margin, midpoint_trial)
from opconvex.certify.theorems import (exponent_simplex_concavity,
                                       fraction_trace_concavity,
                                       lieb_integral_convexity,
                                       lieb_ruskai_convexity, lieb_sweep,
                                       quadratic_form_convexity,
                                       rank_one_lift_check,
                                       reciprocal_convexity,
                                       t2_counterexample,
                                       tensor_quadratic_convexity,
                                       theorem1_bridge, two_of_three)
