from .bootstrap import SurfacePoint, ThresholdSurface, bootstrap_surface
from .crossing import T_GRID, AccuracyCurve, Crossing, crossings_many, threshold_crossing
from .fit import FiniteSizeFit, SliceFit, fit_finite_size, wls_inverse_size
from .report import AdvantagePoint, AdvantageReport, advantage_report
from .validation import TrustGates, ValidationDiagnostics, forward_validation, select_slices

__all__ = [
    "AccuracyCurve", "Crossing", "threshold_crossing", "crossings_many", "T_GRID",
    "ThresholdSurface", "SurfacePoint", "bootstrap_surface",
    "FiniteSizeFit", "SliceFit", "fit_finite_size", "wls_inverse_size",
    "ValidationDiagnostics", "TrustGates", "forward_validation", "select_slices",
    "AdvantageReport", "AdvantagePoint", "advantage_report",
]
