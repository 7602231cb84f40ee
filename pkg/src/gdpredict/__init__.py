"""gdpredict: point prediction from conditional diffusion generators.

Train a conditional generator over tabular responses, draw m synthetic
responses at a query point, and predict by minimizing an arbitrary empirical
loss over the synthetic sample. One trained generator serves every loss:
means, medians, arbitrary quantiles, modal labels, medoids.
"""

from .checkpoint import load_checkpoint, save_checkpoint
from .dataio import load_csv, save_csv
from .discrete import (
    DiscreteGenerator,
    DiscreteSchedule,
    forward_corrupt,
    sample_discrete,
    train_discrete,
)
from .gaussian import (
    ConditionalGenerator,
    NoiseSchedule,
    Standardizer,
    TrainConfig,
    forward_noise,
    sample_chains,
    score_matching_loss,
    train,
)
from .metrics import MetricReport, accuracy, kappa, mad, rmse, wasserstein1_1d
from .nn import AdamState, Mlp, adam_step, time_embed
from .prediction import (
    LossSpec,
    Prediction,
    SyntheticSampleSet,
    empirical_loss,
    gdp_point,
    gdp_quantiles,
)
from .simbench import (
    SimConfig,
    SimDataset,
    make_transfer_pair,
    oracle_quantiles,
    oracle_quantiles_mc,
    run_benchmark,
    sample_response,
    simulate,
)
from .transfer import (
    TransferIncompatibleError,
    TransferPlan,
    finetune_target,
    pretrain_source,
)

__version__ = "0.1.0"
