"""Learning simplices from Gaussian-noise-corrupted samples."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    DegenerateSimplex,
    DimMismatch,
    EmptyFamily,
    InsufficientCover,
    InvalidConfidence,
    InvalidConfig,
    NoiseBoundUndefined,
    PackingBudgetExceeded,
    SimplexError,
    UnsupportedDimension,
    UnsupportedNoiseless,
)
from .geometry import GeometrySummary, Simplex, barycentric, geometry_summary, is_isoperimetric, snr  # noqa: E402
from .sampler import NoisyModel, SampleSet, dirichlet_uniform, sample  # noqa: E402
from .metrics import kl_noisy_mc, l2_uniform, tv_noisy_mc, tv_uniform, vertex_l1  # noqa: E402
from .localization import LocalizationBall, localize, min_samples_localize  # noqa: E402
from .cover import CandidateFamily, CoverSpec, cover_sphere, enumerate_candidates, family_size_bound, noise_grid  # noqa: E402
from .scheffe import LearnerConfig, TournamentOutcome, learn, min_samples_select, scheffe_select  # noqa: E402
from .spectral import TailReport, cf_noisy, cf_simplex, cf_standard, recoverability_check, tail_energy  # noqa: E402
from .minimax import HypothesisFamily, assouad_family, empirical_minimax, fano_family, lecam_pair  # noqa: E402
