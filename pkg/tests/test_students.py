import math

import numpy as np
import pytest
import torch

from policyrefactor.demos import label_multi_mnist
from policyrefactor.detector.model import Detection
from policyrefactor.envs import mmnist_generate
from policyrefactor.envs.base import BBox
from policyrefactor.rng import Pcg32
from policyrefactor.students import (
    TOPOLOGY_COMPLETE_SELF,
    TOPOLOGY_EMPTY,
    DataParameterBank,
    FallingEdgeConv,
    GraphBatch,
    GraphSpec,
    GtBoxSource,
    MultiMnistPointNet,
    PacmanPointConv,
    PlainCnn,
    RelationNet,
    StudentSpec,
    StudentTrainConfig,
    augment_low_confidence,
    batch_edges,
    bc_loss,
    build_scene_graph,
    degrade_detections,
    detections_from_gt,
    reweight,
    train_student,
)
from policyrefactor.students.baselines import CnnSpec
from policyrefactor.students.policy import StudentPolicy

SPEC_MM = GraphSpec(patch_size=16, topology=TOPOLOGY_EMPTY, include_box=False)
SPEC_PAC = GraphSpec(patch_size=8, topology=TOPOLOGY_COMPLETE_SELF, include_box=True)
SPEC_FD = GraphSpec(patch_size=16, topology=TOPOLOGY_COMPLETE_SELF, include_box=True)


def _det(x, y, w=0.1, h=0.1, score=1.0):
    return Detection(box=BBox(x, y, w, h), score=score, what=np.zeros(1), depth=0.0)


def _random_graph(rng, spec, n_nodes):
    frame = rng.integers(0, 256, (64, 64, 3), dtype=np.uint8)
    dets = [
        _det(rng.uniform(0.2, 0.8), rng.uniform(0.2, 0.8), rng.uniform(0.05, 0.3),
             rng.uniform(0.05, 0.3))
        for _ in range(n_nodes)
    ]
    return frame, dets, build_scene_graph(frame, dets, spec)


# ------------------------------------------------------------ graph building
def test_empty_topology_has_no_edges():
    frame, _, graph = _random_graph(np.random.default_rng(0), SPEC_MM, 3)
    assert graph.node_count == 3
    batch = GraphBatch.from_graphs([graph])
    senders, receivers = batch_edges(batch)
    assert len(senders) == 0


def test_complete_topology_with_self_loops_edge_count():
    _, _, graph = _random_graph(np.random.default_rng(1), SPEC_FD, 4)
    batch = GraphBatch.from_graphs([graph])
    senders, receivers = batch_edges(batch)
    assert len(senders) == 16  # 4 nodes -> 16 directed edges incl. self-loops
    assert set(zip(senders.tolist(), receivers.tolist())) == {
        (s, r) for s in range(4) for r in range(4)
    }


def test_zero_detections_build_empty_graph():
    frame = np.zeros((64, 64, 3), np.uint8)
    graph = build_scene_graph(frame, [], SPEC_MM)
    assert graph.node_count == 0


def test_patch_crop_matches_stn():
    rng = np.random.default_rng(2)
    frame, dets, graph = _random_graph(rng, SPEC_PAC, 2)
    from policyrefactor.detector import stn_crop

    expected = stn_crop(frame, dets[0].box, 8)
    got = graph.patches[0].permute(1, 2, 0).numpy()
    assert np.abs(got - expected).max() < 1e-6


# ----------------------------------------------------------- gnn forwards
@pytest.mark.parametrize("arch", ["pointnet", "pointconv", "edgeconv"])
def test_permutation_invariance(arch):
    torch.manual_seed(0)
    rng = np.random.default_rng(3)
    if arch == "pointnet":
        net = MultiMnistPointNet(SPEC_MM, patch_channels=(8, 16, 32, 32), head_hidden=32)
        spec = SPEC_MM
    elif arch == "pointconv":
        net = PacmanPointConv(SPEC_PAC, patch_channels=(8, 16, 32), edge_hidden=32)
        spec = SPEC_PAC
    else:
        net = FallingEdgeConv(SPEC_FD, patch_channels=(8, 16, 32, 32), hidden=32)
        spec = SPEC_FD
    net.eval()
    for trial in range(10):
        frame, dets, graph = _random_graph(rng, spec, int(rng.integers(1, 6)))
        perm = rng.permutation(len(dets))
        permuted = build_scene_graph(frame, [dets[i] for i in perm], spec)
        with torch.no_grad():
            a = net(GraphBatch.from_graphs([graph]))
            b = net(GraphBatch.from_graphs([permuted]))
        assert (a - b).abs().max().item() < 1e-5


def test_pointnet_duplicated_nodes_scale_additively():
    # with identical nodes and bias-free hidden layers, (output - bias)
    # scales linearly in the duplication count
    torch.manual_seed(1)
    net = MultiMnistPointNet(SPEC_MM, patch_channels=(4, 8, 8, 8), head_hidden=8)
    net.eval()
    frame, dets, _ = _random_graph(np.random.default_rng(4), SPEC_MM, 1)
    bias = float(net.head[-1].bias[0])
    outs = {}
    for k in (1, 2, 3):
        graph = build_scene_graph(frame, dets * k, SPEC_MM)
        with torch.no_grad():
            outs[k] = float(net(GraphBatch.from_graphs([graph]))[0, 0])
    for k in (2, 3):
        assert outs[k] - bias == pytest.approx(k * (outs[1] - bias), rel=1e-4)


def test_single_node_complete_graph_self_loop_only():
    torch.manual_seed(2)
    net = FallingEdgeConv(SPEC_FD, patch_channels=(4, 8, 8, 8), hidden=16)
    net.eval()
    frame, dets, graph = _random_graph(np.random.default_rng(5), SPEC_FD, 1)
    batch = GraphBatch.from_graphs([graph])
    senders, receivers = batch_edges(batch)
    assert senders.tolist() == [0] and receivers.tolist() == [0]
    # the edge difference term is zero: the edge input equals [feat, 0]
    feats = net.node_features(batch)
    edge_in = torch.cat([feats, feats - feats], dim=1)
    assert edge_in[:, feats.shape[1]:].abs().max().item() == 0.0


def test_edgeconv_duplicate_node_is_ignored():
    # max aggregation and max readout make duplicates invisible
    torch.manual_seed(3)
    net = FallingEdgeConv(SPEC_FD, patch_channels=(4, 8, 8, 8), hidden=16)
    net.eval()
    frame, dets, graph = _random_graph(np.random.default_rng(6), SPEC_FD, 3)
    with_dup = build_scene_graph(frame, dets + [dets[0]], SPEC_FD)
    with torch.no_grad():
        a = net(GraphBatch.from_graphs([graph]))
        b = net(GraphBatch.from_graphs([with_dup]))
    assert (a - b).abs().max().item() < 1e-6


def test_empty_graph_outputs_head_bias():
    torch.manual_seed(4)
    net = MultiMnistPointNet(SPEC_MM, patch_channels=(4, 8, 8, 8), head_hidden=8)
    net.eval()
    frame = np.zeros((54, 54, 3), np.uint8)
    graph = build_scene_graph(frame, [], SPEC_MM)
    with torch.no_grad():
        out = net(GraphBatch.from_graphs([graph]))
    assert out.shape == (1, 1)
    assert float(out[0, 0]) == pytest.approx(float(net.head[-1].bias[0]))


def test_gnn_gradients_match_finite_differences():
    torch.manual_seed(5)
    net = FallingEdgeConv(
        GraphSpec(patch_size=4, topology=TOPOLOGY_COMPLETE_SELF, include_box=True),
        patch_channels=(4,), hidden=8,
    ).double()
    frame = np.random.default_rng(7).integers(0, 256, (16, 16, 3), dtype=np.uint8)
    dets = [_det(0.3, 0.3, 0.2, 0.2), _det(0.7, 0.6, 0.25, 0.2)]
    graph = build_scene_graph(
        frame, dets, GraphSpec(patch_size=4, topology=TOPOLOGY_COMPLETE_SELF,
                               include_box=True))
    graph.patches = graph.patches.double()
    graph.boxes = graph.boxes.double()
    batch = GraphBatch.from_graphs([graph])
    target = torch.tensor([[0.2, -0.3, 0.8]], dtype=torch.float64)

    def loss_value():
        return bc_loss(net(batch), target).sum()

    net.train()
    loss = loss_value()
    net.zero_grad()
    loss.backward()

    rng = np.random.default_rng(8)
    worst, checked = 0.0, 0
    for p in net.parameters():
        if p.grad is None:
            continue
        flat, grad = p.detach().view(-1), p.grad.view(-1)
        for idx in rng.choice(flat.numel(), size=min(3, flat.numel()), replace=False):
            idx = int(idx)
            h = 1e-5 * max(1.0, abs(float(flat[idx])))
            orig = float(flat[idx])
            with torch.no_grad():
                flat[idx] = orig + h
                up = loss_value().item()
                flat[idx] = orig - h
                down = loss_value().item()
                flat[idx] = orig
            fd = (up - down) / (2 * h)
            denom = max(abs(float(grad[idx])), abs(fd), 1e-4)
            worst = max(worst, abs(float(grad[idx]) - fd) / denom)
            checked += 1
    assert checked > 20
    assert worst < 1e-3


# ------------------------------------------------------------------- losses
def test_bc_loss_zero_at_target():
    out = torch.tensor([[0.5, -1.0, 2.0]])
    assert bc_loss(out, out.clone()).item() == 0.0


def test_bc_loss_hand_case():
    out = torch.tensor([[1.0, 0.0, 0.0]])
    target = torch.tensor([[0.0, 1.0, 0.0]])
    assert bc_loss(out, target).item() == pytest.approx(2.0)


def test_bc_loss_is_per_sample():
    out = torch.zeros(3, 2)
    target = torch.tensor([[1.0, 0.0], [0.0, 2.0], [0.0, 0.0]])
    assert bc_loss(out, target).tolist() == pytest.approx([1.0, 4.0, 0.0])


def test_reweight_equal_sigmas_is_mean():
    losses = torch.tensor([1.0, 3.0, 5.0, 7.0])
    assert reweight(losses, torch.zeros(4)).item() == pytest.approx(4.0)
    assert reweight(losses, torch.full((4,), 2.5)).item() == pytest.approx(4.0)


def test_reweight_hand_case():
    losses = torch.tensor([1.0, 1.0])
    sigmas = torch.tensor([math.log(3.0), 0.0])
    w = torch.softmax(sigmas, dim=0)
    assert w.tolist() == pytest.approx([0.75, 0.25])
    assert reweight(losses, sigmas).item() == pytest.approx(1.0)


def test_reweight_shift_invariant_and_normalized():
    rng = np.random.default_rng(9)
    losses = torch.tensor(rng.uniform(0, 5, 16), dtype=torch.float32)
    sigmas = torch.tensor(rng.normal(0, 2, 16), dtype=torch.float32)
    a = reweight(losses, sigmas).item()
    b = reweight(losses, sigmas + 13.7).item()
    assert a == pytest.approx(b, rel=1e-5)
    assert torch.softmax(sigmas, 0).sum().item() == pytest.approx(1.0, abs=1e-6)


def test_reweight_gradient_reaches_sigmas():
    losses = torch.tensor([1.0, 2.0])
    sigmas = torch.zeros(2, requires_grad=True)
    reweight(losses, sigmas).backward()
    # dL/dsigma_i = w_i (l_i - L); here w = 1/2, L = 1.5
    assert sigmas.grad.tolist() == pytest.approx([-0.25, 0.25])


def test_data_parameter_bank_sparse_updates():
    bank = DataParameterBank(10, learning_rate=0.5)
    idx = torch.tensor([2, 5])
    sig = bank.gather(idx)
    loss = reweight(torch.tensor([4.0, 1.0]), sig)
    bank.zero_grad()
    loss.backward()
    bank.step()
    values = bank.values()
    assert values[2] != 0.0 and values[5] != 0.0
    untouched = [values[i] for i in range(10) if i not in (2, 5)]
    assert all(v == 0.0 for v in untouched)
    # the hard sample (higher loss) gets a lower sigma after the first step
    assert values[2] < values[5]


# ----------------------------------------------------- augment and degrade
def test_augment_fraction_zero_is_identity():
    dets = [_det(0.2, 0.2)]
    pool = [_det(0.5, 0.5, score=0.05)] * 10
    assert augment_low_confidence(dets, pool, Pcg32(0), fraction=0.0) == dets


def test_augment_adds_thirty_percent_of_pool():
    dets = [_det(0.2, 0.2, score=0.9)]
    candidates = dets + [_det(0.5, 0.5, score=0.01 + 0.001 * i) for i in range(60)]
    out = augment_low_confidence(dets, candidates, Pcg32(1), threshold=0.1, fraction=0.3)
    assert len(out) == 1 + 18  # ceil(0.3 * 60)
    assert out[: len(dets)] == dets  # superset, originals first


def test_augment_empty_pool_unchanged():
    dets = [_det(0.2, 0.2, score=0.9)]
    assert augment_low_confidence(dets, dets, Pcg32(2)) == dets


def test_degrade_identity():
    dets = [_det(0.1 * i + 0.1, 0.5) for i in range(5)]
    assert degrade_detections(dets, 0.0, 0, Pcg32(0)) == dets


def test_degrade_drop_rate_binomial():
    dets = [_det(0.5, 0.5) for _ in range(10_000)]
    out = degrade_detections(dets, 0.5, 0, Pcg32(3))
    assert abs(len(out) / 10_000 - 0.5) < 0.02


def test_degrade_appends_exact_false_positive_count():
    dets = [_det(0.3, 0.3)]
    out = degrade_detections(dets, 0.0, 25, Pcg32(4))
    assert len(out) == 26
    pool = [_det(0.6, 0.6, score=0.04)] * 7
    out = degrade_detections(dets, 0.0, 25, Pcg32(5), candidate_pool=pool)
    assert len(out) == 26
    assert all(d.score == 0.04 for d in out[1:])


def test_degrade_validates_args():
    with pytest.raises(ValueError):
        degrade_detections([], 1.5, 0, Pcg32(0))
    with pytest.raises(ValueError):
        degrade_detections([], 0.0, -1, Pcg32(0))


# ----------------------------------------------------------------- baselines
def test_cnn_head_dims_per_task():
    from policyrefactor.tasks import student_spec

    for task, dim in (("multi_mnist", 1), ("pacman", 4), ("falling_digit", 3)):
        spec = student_spec(task, "cnn", "desk")
        policy = StudentPolicy(spec)
        frame = np.zeros((spec.image_size, spec.image_size, 3), np.uint8)
        assert policy.predict(frame).shape == (dim,)


def test_relation_net_attention_sums_to_one():
    torch.manual_seed(6)
    net = RelationNet(CnnSpec(image_size=16, out_dim=3, channels=(4, 8), head_hidden=8),
                      heads=2, key_dim=4)
    x = torch.rand(2, 3, 16, 16)
    _, attention = net(x, return_attention=True)
    sums = attention.sum(dim=-1)
    assert torch.allclose(sums, torch.ones_like(sums), atol=1e-5)


def test_relation_net_uniform_map_attends_to_value_average():
    torch.manual_seed(7)
    net = RelationNet(CnnSpec(image_size=16, out_dim=2, channels=(4, 8), head_hidden=8),
                      heads=2, key_dim=4, with_coords=False)
    net.eval()
    f = torch.rand(1, net.attn_channels, 1, 1).expand(1, net.attn_channels, 4, 4)
    with torch.no_grad():
        v = net.relation.value(f).view(1, 2, net.attn_channels // 2, 16)
        out, attention = net.relation(f, return_attention=True)
        # uniform input -> uniform attention -> attended value = value average
        assert torch.allclose(attention, torch.full_like(attention, 1 / 16), atol=1e-6)
        attended = torch.einsum("bhqk,bhck->bhcq", attention, v)
        assert torch.allclose(attended, v.mean(dim=-1, keepdim=True).expand_as(v),
                              atol=1e-6)
        # residual preserved: output = input + post(attended)
        post = net.relation.post(attended.reshape(1, -1, 4, 4))
        assert torch.allclose(out, f + post, atol=1e-6)


# ------------------------------------------------------------------ trainer
def _tiny_mm_dataset(n=24, seed=0):
    return label_multi_mnist(n, Pcg32(seed), digits_low=1, digits_high=2)


def _tiny_mm_spec():
    return StudentSpec(
        arch="gnn_pointstyle",
        task_id="multi_mnist",
        out_dim=1,
        graph=SPEC_MM,
        params={"patch_channels": (4, 8, 8, 8), "head_hidden": 16},
    )


def test_train_student_learns_tiny_set():
    ds = _tiny_mm_dataset()
    config = StudentTrainConfig(steps=120, batch_size=8, learning_rate=3e-3,
                                val_fraction=0.2, eval_every=40, log_every=20)
    result = train_student(ds, _tiny_mm_spec(), GtBoxSource(ds), config, Pcg32(5))
    losses = [h["loss"] for h in result.history if "loss" in h]
    assert losses[-1] < losses[0]
    assert np.isfinite(result.best_val_loss)


def test_train_student_without_reweighting_matches_manual_loop():
    # oracle: a hand-written mean-loss BC loop with identical seeding and
    # batch draws must produce identical parameters
    ds = _tiny_mm_dataset()
    spec = _tiny_mm_spec()
    config = StudentTrainConfig(steps=12, batch_size=4, learning_rate=1e-3,
                                val_fraction=0.0, eval_every=1000, log_every=1000)
    result = train_student(ds, spec, GtBoxSource(ds), config, Pcg32(9))

    rng = Pcg32(9)
    torch.manual_seed(rng.next_u32())
    policy = StudentPolicy(spec)
    net = policy.net
    frames_t = torch.from_numpy(ds.frames.astype(np.float32) / 255.0).permute(0, 3, 1, 2)
    targets_t = torch.from_numpy(ds.targets.astype(np.float32))
    optimizer = torch.optim.Adam(net.parameters(), lr=1e-3)
    scheduler = torch.optim.lr_scheduler.LambdaLR(optimizer,
                                                  lambda s: 0.5 ** (s // 100_000))
    src = GtBoxSource(ds)
    net.train()
    for _ in range(12):
        idx = [rng.next_below(len(ds)) for _ in range(4)]
        graphs = [
            build_scene_graph(ds.frames[i], src.boxes_for(i)[0], SPEC_MM) for i in idx
        ]
        out = net(GraphBatch.from_graphs(graphs))
        loss = bc_loss(out, targets_t[torch.tensor(idx)]).mean()
        optimizer.zero_grad()
        loss.backward()
        optimizer.step()
        scheduler.step()

    for (name, a), (_, b) in zip(result.policy.net.state_dict().items(),
                                 net.state_dict().items()):
        assert torch.allclose(a, b, atol=1e-6), name


def test_train_student_rejects_dim_mismatch():
    ds = _tiny_mm_dataset()
    spec = StudentSpec(arch="gnn_pointstyle", task_id="multi_mnist", out_dim=3,
                       graph=SPEC_MM, params={"patch_channels": (4, 8, 8, 8)})
    with pytest.raises(ValueError, match="dim"):
        train_student(ds, spec, GtBoxSource(ds),
                      StudentTrainConfig(steps=5, batch_size=4), Pcg32(0))


def test_student_checkpoint_roundtrip(tmp_path):
    ds = _tiny_mm_dataset(8)
    config = StudentTrainConfig(steps=5, batch_size=4, val_fraction=0.0)
    result = train_student(ds, _tiny_mm_spec(), GtBoxSource(ds), config, Pcg32(3))
    path = str(tmp_path / "student.pt")
    result.policy.save(path)
    loaded = StudentPolicy.load(path)
    frame = ds.frames[0]
    objs = detections_from_gt(ds.gt[0])
    assert np.allclose(loaded.predict(frame, objs), result.policy.predict(frame, objs))
