from .params import Activation, DenseHidden, FactoredHidden, NetworkParams, ParamGrad
from .jet import Jet
from .samples import SampleBatch, SampleKind, TrainingSet
from .records import ErrorReport, LossReport, RunRecord
from .checkpoint import Checkpoint
from .modes import MAIN_BLOCKS, OptimizerKind, TrainMode
