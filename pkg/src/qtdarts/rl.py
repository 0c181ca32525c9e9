"""Empty-room gridworld and the asynchronous advantage actor-critic trainer.

The environment is a size x size room whose border cells are walls, with
the agent starting at (1, 1) facing east and the goal fixed in the
opposite corner. Observations are a flattened 7x7 egocentric forward view
using a fixed cell-code table. Reaching the goal ends the episode with
reward 1 - 0.9 * steps / max_steps (max_steps = 4 * size**2); running out
of steps ends it with reward 0.

The trainer runs worker threads against shared actor and critic
generators. Workers read a consistent snapshot of the shared parameters
without locking (snapshots are replaced wholesale, never mutated), roll
out up to t_max steps with freshly generated network weights, and commit
the combined actor+critic gradient as one atomic optimizer transaction.
"""

import threading
import time
from dataclasses import dataclass

import numpy as np

from .nets import net_forward, net_backward
from .optim import adam_init, adam_step

TURN_LEFT, TURN_RIGHT, FORWARD = 0, 1, 2
ACTIONS = (TURN_LEFT, TURN_RIGHT, FORWARD)

# observation cell codes
CODE_EMPTY = 0.0
CODE_WALL = 0.33
CODE_GOAL = 0.67
CODE_OOB = 1.0

VIEW = 7  # egocentric view is VIEW x VIEW, agent at bottom-center

_DIR_VEC = ((1, 0), (0, 1), (-1, 0), (0, -1))  # east, south, west, north


class GridEnv:
    """Empty room, 3-action agent, bounded episode length."""

    def __init__(self, size):
        if size not in (5, 6):
            raise ValueError(f"grid size must be 5 or 6, got {size}")
        self.size = size
        self.goal = (size - 2, size - 2)
        self.max_steps = 4 * size * size
        self._done = True

    def reset(self, seed=None):
        # layout and start pose are fixed; seed kept for interface parity
        self.pos = (1, 1)
        self.direction = 0  # east
        self.step_count = 0
        self._done = False
        return self._observe()

    def _is_wall(self, x, y):
        return x == 0 or y == 0 or x == self.size - 1 or y == self.size - 1

    def _in_grid(self, x, y):
        return 0 <= x < self.size and 0 <= y < self.size

    def _observe(self):
        fx, fy = _DIR_VEC[self.direction]
        rx, ry = _DIR_VEC[(self.direction + 1) % 4]
        obs = np.empty(VIEW * VIEW)
        k = 0
        for r in range(VIEW):
            ahead = VIEW - 1 - r
            for c in range(VIEW):
                side = c - VIEW // 2
                x = self.pos[0] + ahead * fx + side * rx
                y = self.pos[1] + ahead * fy + side * ry
                if not self._in_grid(x, y):
                    obs[k] = CODE_OOB
                elif self._is_wall(x, y):
                    obs[k] = CODE_WALL
                elif (x, y) == self.goal:
                    obs[k] = CODE_GOAL
                else:
                    obs[k] = CODE_EMPTY
                k += 1
        return obs

    def step(self, action):
        if self._done:
            raise RuntimeError("step() called on a finished episode; call reset()")
        if action not in ACTIONS:
            raise ValueError(f"unknown action {action!r}")
        self.step_count += 1
        if action == TURN_LEFT:
            self.direction = (self.direction - 1) % 4
        elif action == TURN_RIGHT:
            self.direction = (self.direction + 1) % 4
        else:
            fx, fy = _DIR_VEC[self.direction]
            nx, ny = self.pos[0] + fx, self.pos[1] + fy
            if not self._is_wall(nx, ny):
                self.pos = (nx, ny)
        reward = 0.0
        done = False
        if self.pos == self.goal:
            done = True
            reward = 1.0 - 0.9 * (self.step_count / self.max_steps)
        elif self.step_count >= self.max_steps:
            done = True
        self._done = done
        return self._observe(), reward, done


def random_policy_baseline(size=5, episodes=1000, seed=0):
    """Mean episode reward of the uniform-random policy (the floor a
    trained agent must clear)."""
    rng = np.random.default_rng(seed)
    env = GridEnv(size)
    total = 0.0
    for _ in range(episodes):
        env.reset()
        done = False
        while not done:
            _, r, done = env.step(int(rng.integers(3)))
        total += r
    return total / episodes


@dataclass
class A3CConfig:
    workers: int = 16
    gamma: float = 0.9
    t_max: int = 5
    lr: float = 1e-4
    betas: tuple = (0.92, 0.999)
    entropy_coef: float = 0.01
    value_coef: float = 0.5
    grad_clip: float = 40.0
    episode_budget: int = 10000
    env_size: int = 5
    seed: int = 0

    def __post_init__(self):
        if self.workers < 1:
            raise ValueError("need at least one worker")
        if not 0.0 <= self.gamma < 1.0:
            raise ValueError("discount must be in [0, 1)")


@dataclass
class EpisodeRecord:
    episode: int
    worker: int
    steps: int
    reward: float
    wall_clock_ms: float


def n_step_returns(rewards, bootstrap, gamma):
    """Discounted returns R_t = r_t + gamma * R_{t+1}, seeded by bootstrap."""
    returns = np.empty(len(rewards))
    acc = float(bootstrap)
    for t in range(len(rewards) - 1, -1, -1):
        acc = rewards[t] + gamma * acc
        returns[t] = acc
    return returns


def softmax(z):
    e = np.exp(z - np.max(z, axis=-1, keepdims=True))
    return e / e.sum(axis=-1, keepdims=True)


def policy_entropy(probs):
    p = np.clip(probs, 1e-300, None)
    return float(-(p * np.log(p)).sum())


def clip_grad_norm(grads, max_norm):
    """Scale a gradient dict in place so its global norm is <= max_norm."""
    total = np.sqrt(sum(float(np.sum(g * g)) for g in grads.values()))
    if max_norm is not None and total > max_norm:
        scale = max_norm / total
        for g in grads.values():
            g *= scale
    return grads


class _SharedTrainables:
    """Snapshot reads are wait-free (whole dicts are swapped, never edited);
    commits serialize behind one lock and update actor and critic together."""

    def __init__(self, actor_params, critic_params, lr, betas):
        self._lock = threading.Lock()
        self._actor_opt = adam_init(actor_params, lr=lr, betas=betas)
        self._critic_opt = adam_init(critic_params, lr=lr, betas=betas)
        self._committed = (actor_params, critic_params)

    def snapshot(self):
        return self._committed

    def commit(self, actor_grads, critic_grads):
        with self._lock:
            actor, critic = self._committed
            new_actor = adam_step(self._actor_opt, actor, actor_grads)
            new_critic = adam_step(self._critic_opt, critic, critic_grads)
            self._committed = (new_actor, new_critic)


class _Coordinator:
    def __init__(self, budget, early_stop):
        self._lock = threading.Lock()
        self._budget = budget
        self._early_stop = early_stop
        self._stopped = False
        self.records = []
        self.error = None

    def should_stop(self):
        return self._stopped

    def fail(self, exc):
        with self._lock:
            if self.error is None:
                self.error = exc
            self._stopped = True

    def log_episode(self, worker, steps, reward, wall_ms):
        with self._lock:
            if self._stopped:
                return
            self.records.append(
                EpisodeRecord(
                    episode=len(self.records),
                    worker=worker,
                    steps=steps,
                    reward=reward,
                    wall_clock_ms=wall_ms,
                )
            )
            if len(self.records) >= self._budget:
                self._stopped = True
            elif self._early_stop is not None and self._early_stop(self.records):
                self._stopped = True


def _rollout_gradients(cfg, gen_pair, kappas, caches, env, obs, rng, ep_state):
    """One t_max rollout plus the full backward chain; returns (grads_a,
    grads_c, obs, done_record_or_None)."""
    actor_gen, critic_gen = gen_pair
    kappa_a, kappa_c = kappas
    states, actions, rewards = [], [], []
    done = False
    for _ in range(cfg.t_max):
        logits, _ = net_forward(actor_gen.net_spec, kappa_a, obs)
        probs = softmax(logits)
        action = int(rng.choice(len(ACTIONS), p=probs))
        next_obs, reward, done = env.step(action)
        states.append(obs)
        actions.append(action)
        rewards.append(reward)
        ep_state["steps"] += 1
        ep_state["reward"] += reward
        obs = next_obs
        if done:
            break
    if done:
        bootstrap = 0.0
    else:
        v_next, _ = net_forward(critic_gen.net_spec, kappa_c, obs)
        bootstrap = float(v_next[0])
    returns = n_step_returns(rewards, bootstrap, cfg.gamma)

    batch = np.asarray(states)
    steps = len(states)
    logits, cache_pi = net_forward(actor_gen.net_spec, kappa_a, batch)
    values, cache_v = net_forward(critic_gen.net_spec, kappa_c, batch)
    values = values[:, 0]
    adv = returns - values  # advantage is detached from the critic
    probs = softmax(logits)
    logp = np.log(np.clip(probs, 1e-300, None))
    entropy = -(probs * logp).sum(axis=1)
    policy_loss = float((-logp[np.arange(steps), actions] * adv - cfg.entropy_coef * entropy).sum())
    value_loss = float(((returns - values) ** 2).sum())
    if not (np.isfinite(policy_loss) and np.isfinite(value_loss)):
        raise FloatingPointError(
            f"non-finite loss (policy={policy_loss}, value={value_loss}); aborting run"
        )

    d_logits = probs.copy()
    d_logits[np.arange(steps), actions] -= 1.0
    d_logits *= adv[:, None]
    d_logits += cfg.entropy_coef * probs * (logp + entropy[:, None])
    d_values = cfg.value_coef * 2.0 * (values - returns)

    grads_a = actor_gen.backward(caches[0], net_backward(cache_pi, d_logits))
    grads_c = critic_gen.backward(caches[1], net_backward(cache_v, d_values[:, None]))
    if cfg.grad_clip is not None:
        clip_grad_norm(grads_a, cfg.grad_clip)
        clip_grad_norm(grads_c, cfg.grad_clip)
    return grads_a, grads_c, obs, done


def _worker_loop(wid, cfg, actor_gen, critic_gen, shared, coord, rng):
    env = GridEnv(cfg.env_size)
    obs = env.reset()
    ep_state = {"steps": 0, "reward": 0.0}
    ep_start = time.perf_counter()
    while not coord.should_stop():
        actor_params, critic_params = shared.snapshot()
        kappa_a, cache_a = actor_gen.generate(actor_params)
        kappa_c, cache_c = critic_gen.generate(critic_params)
        grads_a, grads_c, obs, done = _rollout_gradients(
            cfg,
            (actor_gen, critic_gen),
            (kappa_a, kappa_c),
            (cache_a, cache_c),
            env,
            obs,
            rng,
            ep_state,
        )
        shared.commit(grads_a, grads_c)
        if done:
            wall_ms = (time.perf_counter() - ep_start) * 1e3
            coord.log_episode(wid, ep_state["steps"], ep_state["reward"], wall_ms)
            obs = env.reset()
            ep_state = {"steps": 0, "reward": 0.0}
            ep_start = time.perf_counter()


def a3c_train(cfg, actor_gen, critic_gen, actor_params=None, critic_params=None, early_stop=None):
    """Train shared actor/critic generators with cfg.workers threads.

    Returns (episode records, final actor params, final critic params).
    With one worker and a fixed seed the whole trajectory is deterministic.
    ``early_stop`` (optional) sees the record list after each episode and
    may end the run by returning True.
    """
    seeds = np.random.SeedSequence(cfg.seed)
    init_rng = np.random.default_rng(seeds)
    if actor_params is None:
        actor_params = actor_gen.init_params(init_rng)
    if critic_params is None:
        critic_params = critic_gen.init_params(init_rng)
    shared = _SharedTrainables(actor_params, critic_params, lr=cfg.lr, betas=cfg.betas)
    coord = _Coordinator(cfg.episode_budget, early_stop)
    worker_seeds = seeds.spawn(cfg.workers)

    if cfg.workers == 1:
        _worker_loop(0, cfg, actor_gen, critic_gen, shared, coord, np.random.default_rng(worker_seeds[0]))
    else:
        threads = []
        for wid in range(cfg.workers):
            rng = np.random.default_rng(worker_seeds[wid])

            def run(wid=wid, rng=rng):
                try:
                    _worker_loop(wid, cfg, actor_gen, critic_gen, shared, coord, rng)
                except BaseException as exc:  # propagate to the caller
                    coord.fail(exc)

            t = threading.Thread(target=run, name=f"a3c-worker-{wid}", daemon=True)
            threads.append(t)
            t.start()
        for t in threads:
            t.join()
        if coord.error is not None:
            raise coord.error

    actor_final, critic_final = shared.snapshot()
    return coord.records, actor_final, critic_final
