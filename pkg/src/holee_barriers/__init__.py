"""Ho-Lee short-rate model with reflecting barriers, priced by Airy eigenfunction series."""
from .errors import (
    AdmissibilityError,
    AiryRangeError,
    BracketError,
    CalibrationError,
    DomainError,
    HoLeeError,
    NumericalError,
    ValidationError,
)
from .spectral import (
    ModelParams,
    build_interval_spectrum,
    build_robin_spectrum,
    build_semi_spectrum,
)
from .drift import DriftCurve
from .pricing import (
    ModelBundle,
    PricingConfig,
    YieldPoint,
    asymptotic_yield,
    bond_price_interval,
    bond_price_robin,
    bond_price_semi,
    yield_curve,
)
from .calibration import (
    CalibrationResult,
    EmpiricalCurve,
    SearchConfig,
    calibrate,
    cubic_baseline,
    reconstruct_drift,
    residual_yield,
    rmse,
)

__version__ = "0.1.0"
