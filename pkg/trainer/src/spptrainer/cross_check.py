"""Boundary contract check: the trainer-side forward pass against the
inference runtime's forward pass on identical inputs.

Requires the runtime package (``sppkit``) to be installed; the comparison
is the whole point of the check, so this module is the one place the
trainer imports it.
"""

from __future__ import annotations

import numpy as np
import torch

from .model import SppModel, load_tensors

TOLERANCE = 1e-4  # float32 activation/precision budget


def cross_check_forward(bundle_path, features: np.ndarray) -> float:
    """Max abs deviation between the two forward passes for one bundle.

    ``features`` is a normalized K x L matrix.  Raises on architecture
    mismatch (the runtime validates the bundle inventory on load).
    """
    from sppkit.frontend import LogPowerFeatures
    from sppkit.nn.bundle_io import load_model
    from sppkit.nn.model import model_forward

    bundle = load_model(bundle_path)
    runtime_out = model_forward(
        bundle, LogPowerFeatures(np.asarray(features, dtype=np.float64),
                                 normalized=True)).data

    model = SppModel(bundle.descriptor.variant)
    load_tensors(model, bundle.tensors)
    model.eval()
    with torch.no_grad():
        torch_out = model(torch.from_numpy(
            np.asarray(features, dtype=np.float32)).unsqueeze(0))[0].numpy()
    return float(np.max(np.abs(runtime_out - torch_out)))
