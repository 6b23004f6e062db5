"""Multi-band channel characterization toolkit.

Sounding-signal generation, multipath channel simulation, MISO channel
estimation, frequency-smoothed MUSIC delay super-resolution, K-means delay
clustering, and with/without-target region analysis.
"""

from mbcc._core import (  # noqa: F401
    SPEED_OF_LIGHT,
    SOUNDING_SEED,
    ConfigError,
    CovarianceEstimate,
    DelayClustering,
    FrameSet,
    MultipathChannel,
    MusicParams,
    MusicResult,
    NumericalError,
    RegionInterval,
    RegionReport,
    SoundingConfig,
    Tap,
    antenna_response,
    build_frameset,
    covariance_eigenvalues,
    derive_orthogonal,
    elbow_order,
    estimate_gains,
    frameset_cir_pdp,
    freq_smooth,
    gen_qpsk,
    kmeans_1d,
    make_delay_grid,
    music_spectrum,
    pick_peaks,
    pn_regions,
    relative_delays,
    run_music,
    sample_covariance,
    select_k,
    silhouette,
    subcarrier_indices,
    synthesize_frameset,
    synthesize_rx,
    to_time,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
