import numpy as np
import pytest

from hameng.avgham import average_coefficients, engineered_transform, toggling_frames
from hameng.presets import PRESETS, get_preset, synthesize
from hameng.rotgroup import PHI

EXPECTED_SCALE = {
    "zeeman-clifford": 1 / 3,
    "zeeman-icosahedral": 0.5,
    "zeeman-icosahedral-max": PHI / 3,
    "zz-product": 0.5,
}


@pytest.mark.parametrize("name", sorted(PRESETS))
def test_preset_reaches_its_target(name):
    preset = get_preset(name)
    solution, seq = synthesize(preset)
    if name == "sigmaxy-clifford":
        assert seq is None and solution.unreachable == ("gamma3",)
        return
    assert seq.is_cyclic()
    t = engineered_transform(toggling_frames(seq))
    got = np.concatenate([t.S1 @ preset.v_in[:3], t.S2 @ preset.v_in[3:]])
    scale = 1 / 3 if solution is None else solution.scale
    free = {"n_x": 0, "n_y": 1, "n_z": 2}
    keep = [i for i in range(8) if i not in {free[r] for r in preset.free_rows}]
    assert np.allclose(got[keep], scale * preset.target[keep], atol=1e-10)
    if name in EXPECTED_SCALE:
        assert scale == pytest.approx(EXPECTED_SCALE[name], abs=1e-9)


def test_alpha_preserved():
    _, seq = synthesize(get_preset("zeeman-icosahedral"))
    before = get_preset("zeeman-icosahedral").input_coefficients()
    after = average_coefficients(before, engineered_transform(toggling_frames(seq)))
    assert after.form(0, 1).alpha == before.form(0, 1).alpha


def test_unknown_preset():
    with pytest.raises(ValueError):
        get_preset("xy8")
