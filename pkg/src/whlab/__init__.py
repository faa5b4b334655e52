"""Numerical lab for truncated convolution operators with smooth momentum
symbols: spectral discretization, boundary trace asymptotics, and thermal
free-fermion entropies at desk scale."""

__version__ = "0.1.0"

from .symbols import (  # noqa: F401
    Decay,
    FermiModel,
    FermiSea,
    MultiScale,
    Symbol1D,
    build_multiscale,
    constant_symbol,
    find_fermi_sea,
    gaussian_symbol,
    make_fermi_symbol,
    make_indicator_symbol,
    table_symbol,
    v_integral,
)
from .specfun import (  # noqa: F401
    AlmostAnalytic,
    SpectralFunction,
    bump,
    eta_gamma,
    eta_plain,
    make_almost_analytic,
    power_abs,
    resolvent,
    seminorm,
    u_eta_closed,
    u_functional,
)
from .opcore import (  # noqa: F401
    DiscretizedWH,
    IntervalUnion,
    commutator_defect,
    discretize,
    hs_trace_f,
    interval,
    kernel,
    offdiag_qnorm,
    schatten_qnorm,
    trace_D,
    trace_f,
    weyl_trace,
)
from .asymptotics import (  # noqa: F401
    CoefficientResult,
    log_integral_oracle,
    lowT_prediction,
    resolvent_trace_check,
    widom_B,
    widom_B_split,
)
from .fermions import (  # noqa: F401
    EEResult,
    entanglement_entropy,
    entropy_density,
    idos,
    local_entropy,
    predict_EE,
    pressure,
    zero_T_entropy,
)
