"""Task preset values: the full-scale defaults match the published
training recipes; desk presets only shrink capacity and schedules."""

import pytest

from policyrefactor.tasks import (
    TASK_INFO,
    detector_space_config,
    detector_train_config,
    dqn_config,
    graph_spec,
    make_env_factory,
    student_out_dim,
    student_spec,
)


def test_frame_sizes():
    assert TASK_INFO["multi_mnist"].frame_size == 54
    assert TASK_INFO["falling_digit"].frame_size == 128
    assert TASK_INFO["pacman"].frame_size == 64


def test_train_and_eval_object_counts():
    assert TASK_INFO["pacman"].train_objects == 2
    assert TASK_INFO["pacman"].eval_objects == (2, 3, 5, 10)
    assert TASK_INFO["falling_digit"].train_objects == 3
    assert 9 in TASK_INFO["falling_digit"].eval_objects
    assert TASK_INFO["multi_mnist"].eval_objects == (4,)


def test_detector_paper_priors_multi_mnist():
    cfg = detector_space_config("multi_mnist", "paper")
    assert cfg.grid == (6, 6)
    assert cfg.glimpse_size == 14
    assert cfg.z_what_dim == 50
    pri = cfg.priors
    assert pri.pres_prior == (0.1, 0.01, 10_000, 50_000)
    assert pri.temperature == (2.0, 0.1, 10_000, 50_000)
    assert pri.where_prior_std == 0.2
    assert pri.what_prior_std == 1.0
    assert pri.depth_prior_std == 1.0
    assert pri.depth_scale == 10.0
    assert pri.fg_recon_std == 0.15
    assert pri.bg_recon_std == 0.15


def test_detector_paper_priors_control_tasks():
    for task in ("falling_digit", "pacman"):
        cfg = detector_space_config(task, "paper")
        assert cfg.grid == (16, 16)
        assert cfg.priors.pres_prior == (0.1, 0.005, 0, 50_000)
        assert cfg.priors.temperature == (2.5, 0.5, 0, 50_000)
    assert detector_space_config("falling_digit", "paper").glimpse_size == 16
    assert detector_space_config("falling_digit", "paper").z_what_dim == 50
    assert detector_space_config("falling_digit", "paper").priors.bg_recon_std == 0.1
    assert detector_space_config("pacman", "paper").glimpse_size == 8
    assert detector_space_config("pacman", "paper").z_what_dim == 32
    # the black-background variant trains without a background branch
    assert detector_space_config("falling_digit", "paper").background is False


def test_detector_train_batches_per_task():
    assert detector_train_config("multi_mnist", "paper").batch_size == 64
    assert detector_train_config("falling_digit", "paper").batch_size == 8
    assert detector_train_config("pacman", "paper").batch_size == 8
    for task in ("multi_mnist", "falling_digit", "pacman"):
        cfg = detector_train_config(task, "paper")
        assert cfg.steps == 100_000
        assert cfg.learning_rate == 1e-3
        assert cfg.grad_clip == 1.0


def test_dqn_paper_values():
    cfg = dqn_config("pacman", "paper")
    assert cfg.total_steps == 10_000_000
    assert cfg.learning_rate == 1e-4
    assert cfg.grad_clip == 10.0
    assert cfg.eps_start == 1.0 and cfg.eps_end == 0.1
    assert cfg.eps_anneal_steps == 1_000_000
    assert cfg.replay_capacity == 300_000
    assert cfg.target_update_every == 500
    assert cfg.discount == 0.99
    assert cfg.train_every == 4
    assert cfg.batch_size == 32
    assert cfg.double_q is True
    assert dqn_config("falling_digit", "paper").eps_anneal_steps == 300_000
    assert dqn_config("falling_digit", "paper").replay_capacity == 100_000
    with pytest.raises(ValueError):
        dqn_config("multi_mnist")


def test_graph_specs():
    assert graph_spec("multi_mnist").topology == "empty"
    assert graph_spec("multi_mnist").include_box is False
    assert graph_spec("multi_mnist").patch_size == 16
    for task in ("falling_digit", "pacman"):
        assert graph_spec(task).topology == "complete_with_self_loops"
        assert graph_spec(task).include_box is True
    assert graph_spec("falling_digit").patch_size == 16
    assert graph_spec("pacman").patch_size == 8


def test_student_specs():
    assert student_out_dim("multi_mnist") == 1
    assert student_out_dim("falling_digit") == 3
    assert student_out_dim("pacman") == 4
    # "gnn" resolves to the task's published architecture family
    assert student_spec("multi_mnist", "gnn").arch == "gnn_pointstyle"
    assert student_spec("pacman", "gnn").arch == "gnn_pointstyle"
    assert student_spec("falling_digit", "gnn").arch == "gnn_edgeconv"
    # digit-sum baseline flattens its feature map into a bias-free head
    mm_cnn = student_spec("multi_mnist", "cnn", "paper")
    assert mm_cnn.params["readout"] == "flatten"
    assert mm_cnn.params["head_bias"] is False
    assert student_spec("pacman", "cnn", "paper").params["readout"] == "gmp"
    assert student_spec("pacman", "relation_net", "paper").params["heads"] == 4


def test_desk_presets_shrink_capacity_only():
    paper = detector_space_config("multi_mnist", "paper")
    desk = detector_space_config("multi_mnist", "desk")
    assert desk.grid == paper.grid
    assert desk.glimpse_size == paper.glimpse_size
    assert desk.anchor_size == paper.anchor_size
    assert desk.z_what_dim < paper.z_what_dim
    assert desk.priors.pres_prior[:2] == paper.priors.pres_prior[:2]
    assert detector_train_config("multi_mnist", "desk").steps < 100_000


def test_env_factories():
    env = make_env_factory("pacman", 3)()
    assert env.n_dots == 3 and env.action_count == 4
    env = make_env_factory("falling_digit", 5)()
    assert env.n_targets == 5 and env.action_count == 3
    with pytest.raises(ValueError):
        make_env_factory("multi_mnist", 3)
    with pytest.raises(ValueError):
        detector_space_config("bogus", "paper")
    with pytest.raises(ValueError):
        detector_space_config("pacman", "huge")
