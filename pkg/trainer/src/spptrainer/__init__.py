from .cross_check import cross_check_forward
from .formats import TrainingPair, read_pair_file, write_bundle
from .model import SppModel, export_tensors, load_tensors
from .train import TrainConfig, evaluate, export_bundle, kl_loss, load_pairs, train

__version__ = "0.1.0"
