import numpy as np
import pytest
import torch

from policyrefactor.envs import FallingDigitEnv, FallingState, PacmanEnv, PacmanState
from policyrefactor.envs.falling import falling_step
from policyrefactor.envs.pacman import pacman_step
from policyrefactor.rng import Pcg32, episode_rng
from policyrefactor.teachers import (
    DqnConfig,
    QFunction,
    QNetwork,
    dqn_train,
    falling_heuristic,
    load_teacher,
    pacman_greedy,
    save_teacher,
)

UP, DOWN, LEFT, RIGHT = range(4)


# ------------------------------------------------------------ pacman greedy
def test_forced_move_toward_adjacent_dot():
    state = PacmanState(player=(5, 5), dots=[(1, (5, 4))])
    assert pacman_greedy(state) == LEFT


def test_prefers_nearer_dot():
    # dot A at distance 3, dot B at distance 5
    state = PacmanState(player=(5, 5), dots=[(1, (5, 10)), (2, (5, 8))])
    assert pacman_greedy(state) == RIGHT
    state = PacmanState(player=(5, 5), dots=[(1, (2, 5)), (2, (5, 10))])
    assert pacman_greedy(state) == UP


def test_direction_tie_break_order():
    # target up-left: vertical moves win ties (up < left in the fixed order)
    state = PacmanState(player=(5, 5), dots=[(1, (3, 3))])
    assert pacman_greedy(state) == UP


def test_distance_tie_breaks_on_row_col():
    # two dots at equal distance: the (row, col)-smaller dot wins
    state = PacmanState(player=(5, 5), dots=[(1, (5, 7)), (2, (3, 5))])
    assert pacman_greedy(state) == UP  # (3,5) < (5,7)


def test_greedy_strictly_decreases_distance():
    rng = Pcg32(3)
    from policyrefactor.envs.pacman import pacman_reset

    for ep in range(50):
        state = pacman_reset(3, episode_rng(3, ep))
        while not state.done:
            dmin = min(abs(r - state.player[0]) + abs(c - state.player[1])
                       for _, (r, c) in state.dots)
            result = pacman_step(state, pacman_greedy(state), render=False)
            if result.reward > 0:
                assert dmin == 1  # ate the nearest dot
            else:
                dmin_next = min(abs(r - state.player[0]) + abs(c - state.player[1])
                                for _, (r, c) in state.dots)
                assert dmin_next == dmin - 1


def test_greedy_requires_dots():
    with pytest.raises(ValueError):
        pacman_greedy(PacmanState(player=(0, 0), dots=[]))


def test_greedy_mean_return_two_dots():
    total = 0.0
    episodes = 100
    from policyrefactor.envs.pacman import pacman_reset

    for ep in range(episodes):
        state = pacman_reset(2, episode_rng(77, ep))
        while not state.done:
            total += pacman_step(state, pacman_greedy(state), render=False).reward
    assert total / episodes >= 1.80


def test_greedy_beats_random_paired_seeds():
    from policyrefactor.envs.pacman import pacman_reset

    greedy_total = random_total = 0.0
    for ep in range(100):
        state = pacman_reset(2, episode_rng(55, ep))
        while not state.done:
            greedy_total += pacman_step(state, pacman_greedy(state), render=False).reward
        state = pacman_reset(2, episode_rng(55, ep))
        act = Pcg32(900 + ep)
        while not state.done:
            random_total += pacman_step(state, act.next_below(4), render=False).reward
    assert greedy_total > random_total


# -------------------------------------------------------- falling heuristic
def test_heuristic_down_when_aligned():
    state = FallingState(falling=(5, 0, 4), targets=[(1, 5, 4)])
    assert falling_heuristic(state) == 1  # down


def test_heuristic_steers_and_lands_on_target():
    rng = Pcg32(0)
    state = FallingState(falling=(5, 0, 2), targets=[(1, 5, 5)])
    assert falling_heuristic(state) == 2  # down_right, target 3 columns right
    reward = 0.0
    while not state.done:
        reward = falling_step(state, falling_heuristic(state), rng, render=False).reward
    assert reward == 1.0


def test_heuristic_mean_return_three_targets():
    total = 0.0
    episodes = 100
    from policyrefactor.envs.falling import falling_reset

    for ep in range(episodes):
        rng = episode_rng(31, ep)
        state = falling_reset(3, rng)
        while not state.done:
            total += falling_step(state, falling_heuristic(state), rng, render=False).reward
    assert total / episodes >= 2.7


def test_heuristic_requires_falling_digit():
    with pytest.raises(ValueError):
        falling_heuristic(FallingState(falling=None, targets=[(1, 5, 4)]))


# --------------------------------------------------------------------- dqn
def test_epsilon_schedule_endpoints():
    config = DqnConfig(eps_start=1.0, eps_end=0.1, eps_anneal_steps=300_000)
    assert config.epsilon_at(0) == 1.0
    assert config.epsilon_at(300_000) == pytest.approx(0.1)
    assert config.epsilon_at(1_000_000) == pytest.approx(0.1)
    assert config.epsilon_at(150_000) == pytest.approx(0.55)


def test_config_validation():
    with pytest.raises(ValueError):
        DqnConfig(batch_size=0)
    with pytest.raises(ValueError):
        DqnConfig(eps_start=1.5)


def test_q_output_length_matches_actions():
    for env, actions in ((PacmanEnv(render=True), 4), (FallingDigitEnv(render=True), 3)):
        net = QNetwork(actions, channels=(4, 8), hidden=16)
        qf = QFunction(net=net, action_count=actions)
        obs = env.reset(Pcg32(0))
        assert qf.q_values(obs.frame).shape == (actions,)


def test_warmup_guard_no_gradients_below_learn_start():
    config = DqnConfig(total_steps=60, learn_start=1_000, replay_capacity=500,
                       eval_every=60, eval_episodes=1, channels=(4,), hidden=8,
                       eps_anneal_steps=10)
    result = dqn_train(lambda: PacmanEnv(n_dots=1), config, Pcg32(1))
    assert result.gradient_steps == 0


def test_dqn_short_run_deterministic():
    config = DqnConfig(total_steps=300, learn_start=64, replay_capacity=400,
                       eval_every=150, eval_episodes=2, channels=(4, 8), hidden=16,
                       eps_anneal_steps=200, batch_size=8)

    def run():
        torch.manual_seed(0)
        return dqn_train(lambda: PacmanEnv(n_dots=1), config, Pcg32(42))

    a, b = run(), run()
    assert a.history == b.history
    assert a.gradient_steps == b.gradient_steps > 0
    frame = PacmanEnv(n_dots=1).reset(Pcg32(3)).frame
    assert np.array_equal(a.qfunction.q_values(frame), b.qfunction.q_values(frame))


def test_dqn_warns_below_threshold():
    config = DqnConfig(total_steps=120, learn_start=32, replay_capacity=200,
                       eval_every=120, eval_episodes=2, channels=(4,), hidden=8,
                       eps_anneal_steps=100, reward_threshold=99.0, batch_size=8)
    with pytest.warns(UserWarning, match="below threshold"):
        result = dqn_train(lambda: PacmanEnv(n_dots=1), config, Pcg32(2))
    assert not result.reached_threshold


def test_teacher_checkpoint_roundtrip(tmp_path):
    net = QNetwork(4, channels=(4, 8), hidden=16)
    qf = QFunction(net=net, action_count=4)
    path = str(tmp_path / "teacher.pt")
    save_teacher(path, qf, extra={"note": "test"})
    loaded = load_teacher(path)
    frame = np.random.default_rng(0).integers(0, 256, (64, 64, 3), dtype=np.uint8)
    assert np.allclose(loaded.q_values(frame), qf.q_values(frame))
    assert loaded.pixel_scale == 255.0
