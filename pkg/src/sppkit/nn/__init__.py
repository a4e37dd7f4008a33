from .bundle_io import load_model, save_model
from .model import ModelBundle, ModelDescriptor, model_forward, param_count, random_bundle

__all__ = [
    "ModelBundle",
    "ModelDescriptor",
    "load_model",
    "model_forward",
    "param_count",
    "random_bundle",
    "save_model",
]
