"""Tensor-decomposition cascade-channel estimation for IRS-assisted
mmWave OFDM links, with a compressed-sensing baseline and a seeded
Monte-Carlo evaluation harness."""

from .channel import (CompositePathSet, FrequencyChannels, PathSet,
                      SystemConfig, cascade_channels, compose, draw_paths,
                      steer_bs, steer_irs)
from .estimator import (ChannelEstimate, EstimationError,
                        IdentifiabilityReport, check_identifiability,
                        estimate_rank_mdl, extract_parameters, scpd_decompose,
                        scpd_estimate)
from .harness import (ExperimentConfig, RunRecord, align_paths, nmse,
                      run_sweep)
from .somp import Dictionary, GridSpec, SompResult, build_dictionary, somp, \
    somp_estimate
from .training import (FactorMatrices, ReceivedTensor, TrainingMatrices,
                       add_noise, build_factors, gen_training, synthesize_rx)

__version__ = "0.1.0"
