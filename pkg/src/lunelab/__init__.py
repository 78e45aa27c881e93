"""Exact lunes between sheared meridians on the torus and the commutator bounds they give."""
from .exact_geom import DegenerateInput, LiftedCurve, Pt, Rat, TorusCurve, Window, pt, rat
from .flows import Profile, ScenarioConfig, ShearMap, apply_shear, make_profile
from .arrangement import XPoint, all_intersections, build_face_table, intersect_curves, point_winding
from .lunes import (
    LuneCertificate, SigmaP, check_lune, complete_in_window, enumerate_lunes, filter_forbidden,
    sigma_p,
)
from .bounds import BoundInputs, BoundReport, run_scenario, separation_lower_bound, verify_reduction

__version__ = "0.1.0"
