"""Joint multifractal analysis of paired time series based on wavelet leaders."""

__version__ = "0.1.0"

from .core import (  # noqa: E402
    DiagonalResult,
    MomentGrid,
    PartitionTable,
    SpectrumSurface,
    ZetaSurface,
    diagonal_analysis,
    direct_spectrum,
    legendre_spectrum,
    loglog_fit,
    partition_table,
    plane_fit,
    scaling_exponents,
)
from .dwt import WaveletPyramid, haar_pyramid, pyramid_scales  # noqa: E402
from .errors import ConfigError, InputError, MfxwlError, NumericalError  # noqa: E402
from .leaders import LeaderPyramid, subtree_maxima, wavelet_leaders  # noqa: E402
from .signal_io import Signal, SignalKind, SignalPair, align_pair, load_series, log_returns, volatility  # noqa: E402
from .synth import (  # noqa: E402
    BfbmSpec,
    CascadeSpec,
    analytic_cross_spectrum,
    analytic_zeta_cross,
    analytic_zeta_single,
    bfbm,
    binomial_measure,
    pearson_correlation,
)
