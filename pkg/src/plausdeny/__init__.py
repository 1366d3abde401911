"""Plausible-deniability measurement for search sessions.

Estimators score advert pages for evidence of topic interest, the deniability
algebra turns scores into PDE values, and a simulated search engine lets
whole query sessions be played and reported end to end.
"""

__version__ = "0.1.0"

from plausdeny.core import (  # noqa: E402
    AdvertPage,
    DeniabilityParams,
    Interaction,
    InterestVector,
    Item,
    SessionLog,
    TopicSet,
    TrainingCorpus,
    complement_interest,
    make_single_interest,
)
from plausdeny.deniability import (  # noqa: E402
    DeniabilityRatio,
    PdeScore,
    check_indist,
    check_pd,
    incremental_ratio,
    lemma1_holds,
    pd_from_pri,
    pde,
    report_percent,
    session_ratio,
)
from plausdeny.estimators import (  # noqa: E402
    EstimatorConfig,
    PriScore,
    TrainedEstimator,
    detect,
    nb_posterior,
    nb_train,
    pri,
    pri_plus,
    session_detect,
    train,
)
from plausdeny.textpipe import Dictionary, build_dictionary, tokenize  # noqa: E402
