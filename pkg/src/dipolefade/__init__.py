"""Channel statistics between randomly oriented dipoles."""

__version__ = "0.1.0"

from .geometry import (
    E_X,
    E_Y,
    E_Z,
    ChannelCoefficient,
    ComplexFieldVector,
    LinkGeometry,
    RegionKind,
    UnitVector3,
    alignment_factors,
    beta_ff,
    beta_nf,
    channel_coefficient,
    channel_matrix,
    field_vector,
    h_coax,
    h_copl,
    kr_threshold,
    optimal_pte,
)
from .montecarlo import Ecdf, SampleSet, sample_channel
from .outage import OutageSpec, ber_bound, ber_exact_region, outage_capacity, outage_pte
from .quadrature import QuadratureError
from .stats import DistributionCurve, pdf_h_conditional, pdf_h_full

__all__ = [
    "E_X", "E_Y", "E_Z", "ChannelCoefficient", "ComplexFieldVector", "DistributionCurve", "Ecdf",
    "LinkGeometry", "OutageSpec", "QuadratureError", "RegionKind", "SampleSet", "UnitVector3",
    "alignment_factors", "ber_bound", "ber_exact_region", "beta_ff", "beta_nf", "channel_coefficient",
    "channel_matrix", "field_vector", "h_coax", "h_copl", "kr_threshold", "optimal_pte", "outage_capacity",
    "outage_pte", "pdf_h_conditional", "pdf_h_full", "sample_channel",
]
