import numpy as np
import pytest
import torch

from spptrainer.cross_check import cross_check_forward
from spptrainer.formats import write_bundle
from spptrainer.model import SppModel, export_tensors, load_tensors


def random_features(seed, frames=24):
    return np.random.default_rng(seed).standard_normal((129, frames)).astype(np.float32)


class TestForwardSemantics:
    @pytest.mark.parametrize("variant", ["blstm", "attention"])
    def test_zero_weights_emit_half(self, variant):
        model = SppModel(variant)
        with torch.no_grad():
            for parameter in model.parameters():
                parameter.zero_()
        model.eval()
        with torch.no_grad():
            out = model(torch.zeros(1, 129, 5))
        np.testing.assert_allclose(out.numpy(), 0.5, atol=1e-7)

    @pytest.mark.parametrize("variant", ["blstm", "attention"])
    def test_export_load_round_trip_preserves_forward(self, variant):
        torch.manual_seed(11)
        source = SppModel(variant)
        tensors = export_tensors(source)
        clone = load_tensors(SppModel(variant), tensors)
        source.eval(), clone.eval()
        x = torch.from_numpy(random_features(0)).unsqueeze(0)
        with torch.no_grad():
            np.testing.assert_allclose(source(x).numpy(), clone(x).numpy(),
                                       atol=1e-6)


class TestCrossCheck:
    @pytest.mark.parametrize("variant", ["blstm", "attention"])
    def test_forward_agreement_within_budget(self, tmp_path, variant):
        torch.manual_seed(23)
        model = SppModel(variant)
        path = tmp_path / "m.sppm"
        write_bundle(path, export_tensors(model), 0.0, 1.0)
        for seed in range(3):
            deviation = cross_check_forward(path, random_features(seed))
            assert deviation <= 1e-4

    def test_permuted_gate_order_detected(self, tmp_path):
        # negative control: simulate an exporter that writes the decoder
        # LSTM gates in the wrong order, and compare the trainer's own
        # forward against the runtime loading that broken bundle; the
        # deviation must sit orders of magnitude above the tolerance
        from sppkit.frontend import LogPowerFeatures
        from sppkit.nn.bundle_io import load_model
        from sppkit.nn.model import model_forward

        torch.manual_seed(29)
        model = SppModel("blstm")
        model.eval()
        tensors = export_tensors(model)
        permuted = dict(tensors)
        hidden = 129
        for name in ("dec.fwd.w_ih", "dec.fwd.w_hh", "dec.fwd.b"):
            tensor = permuted[name].copy()
            i_block = tensor[0:hidden].copy()
            tensor[0:hidden] = tensor[3 * hidden:4 * hidden]
            tensor[3 * hidden:4 * hidden] = i_block
            permuted[name] = tensor
        good, bad = tmp_path / "good.sppm", tmp_path / "bad.sppm"
        write_bundle(good, tensors, 0.0, 1.0)
        write_bundle(bad, permuted, 0.0, 1.0)

        features = random_features(1)
        with torch.no_grad():
            trainer_out = model(torch.from_numpy(features).unsqueeze(0))[0].numpy()

        def runtime_out(path):
            bundle = load_model(path)
            return model_forward(bundle, LogPowerFeatures(
                features.astype(np.float64), normalized=True)).data

        assert np.max(np.abs(trainer_out - runtime_out(good))) <= 1e-4
        # measured 8.4e-3: well above the contract tolerance
        assert np.max(np.abs(trainer_out - runtime_out(bad))) > 1e-3
