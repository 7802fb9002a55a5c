import json
import math

import numpy as np
import pytest

import artrec


@pytest.fixture(scope="module")
def small():
    return artrec.generate_corpus(seed=3, n_users=120, n_titles=50, n_examples=600)


def test_corpus_and_split(small):
    assert len(small) == 600
    ex = small[0]
    assert 1 <= ex.truth_index <= ex.m == len(ex.captions)
    train, val, test = artrec.split(small, [0.8, 0.1, 0.1], seed=1)
    keys = [{e.key for e in s} for s in (train, val, test)]
    assert sum(map(len, keys)) == 600
    assert not (keys[0] & keys[1]) and not (keys[0] & keys[2]) and not (keys[1] & keys[2])


def test_prompt_round_trip(small):
    for ex in list(small)[:50]:
        parsed = artrec.parse_prompt(artrec.render_prompt(ex))
        assert parsed == list(enumerate(ex.captions, start=1))
    with pytest.raises(artrec.ParseError):
        artrec.parse_prompt("<option> a <option> b </option>")


def test_extraction():
    caps = ["red barn at dusk", "blue sea under storm clouds", "red barn at dusk"]
    r = artrec.extract_prediction("Prediction: <option> blue sea under storm clouds </option>", caps)
    assert (r.option_id, r.tie) == (2, False)
    r = artrec.extract_prediction("red barn at dusk", caps)
    assert (r.option_id, r.tie) == (1, True)
    assert artrec.ngram_score(["a", "b", "c", "d"], ["a", "b", "x", "c", "d"], 2) == pytest.approx(2 / 3)


def test_metrics_weighting():
    at40 = [artrec.PredictionRow("u/a", 3, 3, 40)]
    at2 = [artrec.PredictionRow("u/b", 1, 1, 2)]
    assert artrec.ips(at40) == 20 * artrec.ips(at2)
    report = artrec.evaluate(at40 + at2)
    assert report["accuracy"] == 1.0 and report["ips"] == 21.0


def test_inference_and_report(small):
    rows = artrec.run_inference(small, "oracle", seed=1, parallelism=2)
    assert artrec.accuracy(rows) == 1.0
    assert artrec.ips(rows) == pytest.approx(np.mean([e.m for e in small]))
    fixed = artrec.evaluate(artrec.run_inference(small, "fixed"))
    assert fixed["position_bias"]["flagged"]


def test_losses_match_finite_differences(small):
    rng = np.random.default_rng(0)
    batch = [(artrec.option_features(e), e.truth_index) for e in list(small)[:5]]
    w = rng.normal(0, 0.3, artrec.feature_dim())
    loss, grad = artrec.sft_loss(w, batch)
    eps = 1e-6
    for i in range(0, len(w), 5):
        d = np.zeros_like(w)
        d[i] = eps
        num = (artrec.sft_loss(w + d, batch)[0] - artrec.sft_loss(w - d, batch)[0]) / (2 * eps)
        assert num == pytest.approx(grad[i], abs=1e-6)
    pairs = [(f, t, 1 if t != 1 else 2) for f, t in batch]
    l0, _ = artrec.dpo_loss(w, w, 0.5, pairs)
    assert abs(l0 - math.log(2)) < 1e-12


def test_training_beats_random(small):
    train, val, test = artrec.split(small, [0.8, 0.1, 0.1], seed=2)
    out = artrec.train("sft", train, val, lr_grid=[1.0, 3.0], max_epochs=60)
    assert out["weights"].shape == (artrec.feature_dim(),)
    _, val_ips = artrec.score_policy(out["weights"], val)
    assert val_ips == pytest.approx(out["val_ips"])
    assert "selected" in out["table"]


def test_distillation(small):
    reasonings, stats = artrec.distill_reasoning(small, error_rate=0.0, seed=1)
    assert stats["accepted"] == len(reasonings) == len(small)
    assert stats["filter_rate"] == 0.0


def test_cli(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"corpus": {"n_users": 100, "n_titles": 40, "n_examples": 400},
                               "runs_dir": str(tmp_path / "runs")}))
    code, out, err = artrec.cli(["synth", "--config", str(cfg), "--seed", "4"])
    assert code == 0, err
    assert "run dir" in out
    code, _, err = artrec.cli(["synth", "--config", str(cfg)])
    assert code == 1 and "seed" in err


def test_errors_are_typed():
    with pytest.raises(artrec.ConfigError):
        artrec.generate_corpus(seed=1, preset="galaxy-scale")
    assert issubclass(artrec.ConfigError, artrec.ArtrecError)
