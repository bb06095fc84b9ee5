import numpy as np
import pytest

from gaitpipe.errors import CorruptModelFile, ShapeMismatch
from gaitpipe.imaging import ChannelSet
from gaitpipe.net import (
    GROUP_OUTPUT_SHAPES,
    Dense,
    Network,
    TrainedModel,
    TrainingConfig,
    build_network,
    load_model,
    predict,
    save_model,
    train,
)


def random_images(n, seed=0):
    rng = np.random.default_rng(seed)
    return rng.normal(size=(n, 45, 4, 1))


def test_shape_chain():
    net = build_network(seed=0)
    assert GROUP_OUTPUT_SHAPES == ((44, 3, 16), (43, 2, 32), (42, 1, 48), (42, 1, 64))
    out = net.forward(random_images(2), training=False)
    assert out.shape == (2,)


def test_tampered_stack_rejected():
    net = build_network(seed=0)
    layers = list(net.layers)
    del layers[3]  # drop the first max pool: group chain no longer matches
    with pytest.raises(ShapeMismatch):
        Network(layers)


def test_wrong_head_rejected():
    net = build_network(seed=0)
    layers = list(net.layers)
    layers[-1] = Dense(2688, 2, np.random.default_rng(0))
    with pytest.raises(ShapeMismatch):
        Network(layers)


def test_forward_rejects_wrong_input():
    net = build_network(seed=0)
    with pytest.raises(ShapeMismatch):
        net.forward(np.zeros((2, 45, 4)), training=False)
    with pytest.raises(ShapeMismatch):
        net.forward(np.zeros((2, 44, 4, 1)), training=False)


def test_memorize_single_image():
    """200 copies of one image, label 1.0: memorized within 0.01 in <= 200
    epochs (full batches so dropout noise averages out)."""
    net = build_network(seed=1)
    x = np.tile(random_images(1, seed=5), (200, 1, 1, 1))
    y = np.full(200, 1.0)
    errors = []
    for chunk in range(20):
        cfg = TrainingConfig(epochs=10, seed=1 + chunk, batch_size=200, learning_rate=5e-3)
        train(net, x, y, cfg)
        errors.append(abs(predict(net, x[:1])[0] - 1.0))
        if errors[-1] < 0.01:
            break
    assert errors[-1] < 0.01, f"not memorized within 200 epochs: {errors}"


def test_overfit_two_images():
    net = build_network(seed=2)
    base = random_images(2, seed=6)
    x = np.tile(base, (100, 1, 1, 1))
    y = np.tile([0.5, 1.5], 100)
    train(net, x, y, TrainingConfig(epochs=40, seed=2))
    pred = predict(net, base)
    assert pred[0] == pytest.approx(0.5, abs=0.05)
    assert pred[1] == pytest.approx(1.5, abs=0.05)


def test_training_deterministic():
    x = random_images(32, seed=7)
    y = np.random.default_rng(7).uniform(0.5, 1.5, 32)
    histories = []
    for _ in range(2):
        net = build_network(seed=3)
        histories.append(train(net, x, y, TrainingConfig(epochs=5, seed=3)))
    assert histories[0] == histories[1]


def test_training_loss_decreases():
    x = random_images(64, seed=8)
    # a learnable target: linear functional of the image
    w = np.random.default_rng(8).normal(size=180)
    y = x.reshape(64, -1) @ w * 0.05 + 1.0
    net = build_network(seed=4)
    history = train(net, x, y, TrainingConfig(epochs=15, seed=4))
    assert history[-1] < history[0]


def test_inference_deterministic():
    net = build_network(seed=5)
    x = random_images(4, seed=9)
    a = predict(net, x)
    b = predict(net, x)
    assert np.array_equal(a, b)


def _trained_model(tmp_path=None):
    net = build_network(seed=6)
    x = random_images(16, seed=10)
    y = np.random.default_rng(10).uniform(0.5, 1.5, 16)
    train(net, x, y, TrainingConfig(epochs=2, seed=6))
    return TrainedModel(net, None, ChannelSet.BOTH), x


def test_save_load_round_trip(tmp_path):
    model, x = _trained_model()
    path = str(tmp_path / "model.txt")
    save_model(model, path)
    back = load_model(path)
    assert back.channels is ChannelSet.BOTH
    assert back.window_seconds == model.window_seconds
    a = predict(model.network, x)
    b = predict(back.network, x)
    assert np.max(np.abs(a - b)) < 1e-9


def test_save_byte_identical(tmp_path):
    model, _ = _trained_model()
    p1, p2 = str(tmp_path / "a.txt"), str(tmp_path / "b.txt")
    save_model(model, p1)
    save_model(model, p2)
    assert open(p1, "rb").read() == open(p2, "rb").read()


def test_save_load_save_stable(tmp_path):
    model, _ = _trained_model()
    p1, p2 = str(tmp_path / "a.txt"), str(tmp_path / "b.txt")
    save_model(model, p1)
    save_model(load_model(p1), p2)
    assert open(p1, "rb").read() == open(p2, "rb").read()


def test_load_truncated(tmp_path):
    model, _ = _trained_model()
    path = str(tmp_path / "model.txt")
    save_model(model, path)
    lines = open(path).read().splitlines()
    open(path, "w").write("\n".join(lines[:-3]))
    with pytest.raises(CorruptModelFile):
        load_model(path)


def test_load_bad_magic(tmp_path):
    path = str(tmp_path / "model.txt")
    open(path, "w").write("not a model\n")
    with pytest.raises(CorruptModelFile):
        load_model(path)


def test_load_arch_mismatch(tmp_path):
    model, _ = _trained_model()
    path = str(tmp_path / "model.txt")
    save_model(model, path)
    text = open(path).read().replace("dense(2688->1)", "dense(2688->2)")
    open(path, "w").write(text)
    with pytest.raises(CorruptModelFile):
        load_model(path)
