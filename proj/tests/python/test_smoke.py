import json
import math

import pytest

import lrfree


def test_elementwise_ops():
    assert lrfree.ew_mul([1.0, 2.0], [3.0, 4.0]) == [3.0, 8.0]
    assert lrfree.ew_inv([2.0, 4.0]) == [0.5, 0.25]
    assert lrfree.norm2([3.0, 4.0]) == pytest.approx(5.0)
    with pytest.raises(ValueError):
        lrfree.ew_mul([1.0], [1.0, 2.0])
    with pytest.raises(ArithmeticError):
        lrfree.ew_inv([0.0, 1.0])


def test_adam_scaling_first_step():
    s = lrfree.ScalingState.adam(2, epsilon=0.0)
    alpha = s.update_and_get_alpha([3.0, 4.0])
    assert alpha == pytest.approx([math.sqrt(3.0), 2.0], rel=1e-15)
    assert s.step == 1


def test_ps_sps_step_hand_example():
    w, report = lrfree.ps_sps_step([1.0, 2.0], [1.0, 2.0], 2.5, [1.0, 2.0], f_star=0.0, c=0.5)
    assert report["eta"] == pytest.approx(2.5, rel=1e-14)
    assert w == pytest.approx([-1.5, 0.75], rel=1e-14)


def test_sps_lr_zero_gradient_is_none():
    assert lrfree.sps_lr(1.0, 0.0, 0.5, [0.0, 0.0]) is None


def test_ps_da_first_step():
    state = lrfree.PsDaState([1.0, 0.0])
    w, report = lrfree.ps_da_sgd_step([1.0, 0.0], [1.0, 0.0], state, [1.0, 1.0], 1.0)
    assert report["eta"] == pytest.approx(1e-6)
    assert w == pytest.approx([1.0 - 1e-6, 0.0], rel=1e-15)
    assert state.d == pytest.approx(1e-6)
    assert state.m == 0.0


def test_objectives_and_gamma():
    q = lrfree.quadratic([1.0, 4.0], [1.0, -1.0])
    assert q.value([1.0, -1.0]) == 0.0
    assert q.gradient([0.0, 0.0]) == pytest.approx([-1.0, 4.0])
    f = lrfree.logistic(samples=50, features=3, seed=1)
    assert f.value([0.0] * 3) == pytest.approx(math.log(2.0), rel=1e-12)
    assert lrfree.gamma("poly", 0) == 1.0
    assert lrfree.gamma("cosine", 10, total_steps=10) == 0.0


def test_run_config_dict():
    cfg = {
        "name": "smoke",
        "objective": {"kind": "quadratic", "dim": 4, "condition": 10.0, "seed": 1},
        "optimizer": {"kind": "ps_sps"},
        "scaling": {"rule": "amsgrad"},
        "steps": 200,
    }
    out = lrfree.run(cfg)
    assert len(out["trace"]) == 200
    assert out["summary"]["success"] is True
    assert out["summary"]["final_loss"] <= 1e-6
    assert out["trace"][0]["loss"] >= out["summary"]["final_loss"]


def test_bad_config_raises_with_field():
    with pytest.raises(lrfree.ConfigError, match="optimizer.kind"):
        lrfree.run(json.dumps({"objective": {"kind": "l1"}, "optimizer": {"kind": "nope"}}))


def test_invariant_suite_passes():
    ok, checks = lrfree.check_invariants("naive-sps")
    assert ok
    assert checks and all(passed for _, passed, _ in checks)
    assert "scale-equivalence" in lrfree.invariant_suites()
