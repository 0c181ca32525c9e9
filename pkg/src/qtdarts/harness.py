"""Experiment orchestration: configs, training loops, metrics persistence.

Runs are driven by a flat key = value config resolved against per-task
defaults (command-line overrides win). Every run writes the fully resolved
config next to its outputs, logs metrics as headered CSV, and checkpoints
the trainable triple as headered text with 17 significant digits. With a
fixed config and seed, single-worker runs are reproducible byte for byte
(the RL reward log's wall-clock column is the one documented exception).
"""

import csv
import os
from dataclasses import dataclass

import numpy as np

from . import ensemble as ens
from . import gradients as gr
from . import mapping as mp
from . import nets
from .circuits import ALL_CONFIGS, run_circuit
from .data import (
    filter_binary,
    gen_bessel_j2,
    gen_damped_shm,
    gen_narma,
    load_csv_series,
    load_idx,
    sliding_window,
)
from .generator import QTGenerator
from .optim import adam_init, adam_step, rmsprop_init, rmsprop_step
from .rl import A3CConfig, a3c_train, random_policy_baseline

TASKS = ("classify", "timeseries", "rl", "gradcheck")

_COMMON_DEFAULTS = {
    "seed": 0,
    "out": "",
    "prob_scale": 0.0,  # 0 = auto (2**n_qt)
    "softmax": False,
    "mapping_hidden": 0,
    "theta_scale": 3.141592653589793,
    "beta_scale": 0.2,
}

DEFAULTS = {
    "classify": {
        **_COMMON_DEFAULTS,
        "train_images": "data/mnist/train-images-idx3-ubyte",
        "train_labels": "data/mnist/train-labels-idx1-ubyte",
        "test_images": "data/mnist/t10k-images-idx3-ubyte",
        "test_labels": "data/mnist/t10k-labels-idx1-ubyte",
        "class_a": 1,
        "class_b": 5,
        "hidden_dims": "128,64",
        "batch_size": 100,
        "epochs": 10,
        "depth": 15,
        "lr": 1e-3,
        "beta1": 0.9,
        "beta2": 0.999,
        "eps": 1e-8,
    },
    "timeseries": {
        **_COMMON_DEFAULTS,
        "dataset": "bessel",
        "csv_path": "",
        "num_points": 200,
        "t_start": 0.0,
        "t_end": 20.0,
        "shm_gamma": 0.1,
        "shm_omega": 1.0,
        "data_seed": 0,
        "window": 4,
        "train_frac": 0.67,
        "lstm_hidden": 20,
        "batch_size": 10,
        "epochs": 100,
        "depth": 10,
        "lr": 0.01,
        "alpha": 0.99,
        "eps": 1e-8,
        "rollout_epochs": "1,15,30,100",
    },
    "rl": {
        **_COMMON_DEFAULTS,
        "env_size": 5,
        "workers": 16,
        "episodes": 10000,
        "gamma": 0.9,
        "t_max": 5,
        "lr": 1e-4,
        "beta1": 0.92,
        "beta2": 0.999,
        "entropy_coef": 0.01,
        "value_coef": 0.5,
        "grad_clip": 40.0,
        "depth": 10,
        "hidden": 113,
        "baseline_episodes": 1000,
        "baseline_seed": 0,
        "target_ma": 0.0,  # 0 = train for the full episode budget
        "ma_window": 1000,
    },
    "gradcheck": {
        "seed": 0,
        "out": "",
        "trials": 100,
    },
}


def _coerce(key, raw, template):
    if isinstance(template, bool):
        lowered = str(raw).strip().lower()
        if lowered in ("1", "true", "yes", "on"):
            return True
        if lowered in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"config key {key!r} expects a boolean, got {raw!r}")
    if isinstance(template, int):
        return int(str(raw).strip())
    if isinstance(template, float):
        return float(str(raw).strip())
    return str(raw).strip()


def parse_config_file(path):
    """Flat ``key = value`` lines; blank lines and # comments ignored."""
    entries = {}
    with open(path) as f:
        for line_num, line in enumerate(f, start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            if "=" not in stripped:
                raise ValueError(f"{path}:{line_num}: expected key = value, got {stripped!r}")
            key, _, value = stripped.partition("=")
            entries[key.strip()] = value.strip()
    return entries


def resolve_config(task, config_path=None, overrides=None):
    """Defaults <- config file <- overrides, with typed coercion."""
    if task not in TASKS:
        raise ValueError(f"unknown task {task!r}; expected one of {TASKS}")
    cfg = dict(DEFAULTS[task])
    layers = []
    if config_path:
        layers.append(parse_config_file(config_path))
    if overrides:
        layers.append(overrides)
    for layer in layers:
        for key, raw in layer.items():
            if key == "task":
                continue
            if key not in cfg:
                raise ValueError(f"unknown config key {key!r} for task {task!r}")
            cfg[key] = raw if type(raw) is type(cfg[key]) else _coerce(key, raw, cfg[key])
    if not cfg["out"]:
        cfg["out"] = os.path.join("runs", task)
    cfg["task"] = task
    return cfg


def _fmt(value):
    if isinstance(value, float):
        return str(value)
    return str(value)


def write_config_echo(cfg, out_dir):
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, "config.txt")
    with open(path, "w") as f:
        for key in sorted(cfg):
            f.write(f"{key} = {_fmt(cfg[key])}\n")
    return path


def write_csv(path, header, rows):
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])
    return path


def save_checkpoint(path, named_arrays):
    """Headered text: name, shape, then values at 17 significant digits."""
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w") as f:
        for name in sorted(named_arrays):
            arr = np.asarray(named_arrays[name], dtype=np.float64)
            f.write(f"name {name}\n")
            f.write("shape " + " ".join(str(d) for d in arr.shape) + "\n")
            f.write("values " + " ".join(f"{v:.17g}" for v in arr.ravel()) + "\n")
    return path


def load_checkpoint(path):
    named = {}
    with open(path) as f:
        lines = [ln.rstrip("\n") for ln in f]
    i = 0
    while i < len(lines):
        if not lines[i].startswith("name "):
            raise ValueError(f"{path}: malformed checkpoint at line {i + 1}")
        name = lines[i][5:]
        shape = tuple(int(d) for d in lines[i + 1].split()[1:])
        values = np.array([float(v) for v in lines[i + 2].split()[1:]])
        named[name] = values.reshape(shape)
        i += 3
    return named


def _auto_prob_scale(cfg):
    return None if cfg["prob_scale"] == 0.0 else cfg["prob_scale"]


def _build_generator(cfg, net_spec, depth):
    return QTGenerator(
        net_spec,
        depth=depth,
        prob_scale=_auto_prob_scale(cfg),
        softmax=cfg["softmax"],
        mapping_hidden=cfg["mapping_hidden"],
    )


# ---------------------------------------------------------------------------
# classification


def run_classification(cfg, log=print):
    paths = {
        "train_images": cfg["train_images"],
        "train_labels": cfg["train_labels"],
        "test_images": cfg["test_images"],
        "test_labels": cfg["test_labels"],
    }
    missing = [p for p in paths.values() if not os.path.exists(p)]
    if missing:
        raise FileNotFoundError(
            "missing data files (expected IDX images/labels):\n  " + "\n  ".join(missing)
        )
    train = filter_binary(load_idx(paths["train_images"], paths["train_labels"]), cfg["class_a"], cfg["class_b"])
    test = filter_binary(load_idx(paths["test_images"], paths["test_labels"]), cfg["class_a"], cfg["class_b"])

    hidden = tuple(int(h) for h in str(cfg["hidden_dims"]).split(",") if h.strip())
    net = nets.classifier_spec((784, *hidden, 2))
    gen = _build_generator(cfg, net, cfg["depth"])
    log(f"target network parameters: {gen.spec.param_count} (qubits: {gen.n_qt})")
    log(f"total trainable parameters: {gen.total_trainable()}")

    rng = np.random.default_rng(cfg["seed"])
    params = gen.init_params(rng, theta_scale=cfg["theta_scale"], beta_scale=cfg["beta_scale"])
    opt = adam_init(params, lr=cfg["lr"], betas=(cfg["beta1"], cfg["beta2"]), eps=cfg["eps"])

    def evaluate(kappa, dataset):
        logits, _ = nets.net_forward(net, kappa, dataset.images)
        loss, _ = nets.loss_and_grad(nets.CROSS_ENTROPY, logits, dataset.labels)
        acc = float(np.mean(np.argmax(logits, axis=1) == dataset.labels))
        return loss, acc

    rows = []
    batch = cfg["batch_size"]
    for epoch in range(1, cfg["epochs"] + 1):
        order = rng.permutation(len(train.labels))
        for start in range(0, len(order), batch):
            pick = order[start : start + batch]
            kappa, cache = gen.generate(params)
            logits, net_cache = nets.net_forward(net, kappa, train.images[pick])
            _, d_logits = nets.loss_and_grad(nets.CROSS_ENTROPY, logits, train.labels[pick])
            grads = gen.backward(cache, nets.net_backward(net_cache, d_logits))
            params = adam_step(opt, params, grads)
        kappa, _ = gen.generate(params)
        train_loss, train_acc = evaluate(kappa, train)
        test_loss, test_acc = evaluate(kappa, test)
        rows.append((epoch, train_loss, train_acc, test_loss, test_acc))
        log(
            f"epoch {epoch}: train loss {train_loss:.4f} acc {train_acc:.4f}"
            f" | test loss {test_loss:.4f} acc {test_acc:.4f}"
        )

    out = cfg["out"]
    write_config_echo(cfg, out)
    metrics_path = write_csv(
        os.path.join(out, "metrics.csv"),
        ("epoch", "train_loss", "train_acc", "test_loss", "test_acc"),
        rows,
    )
    save_checkpoint(os.path.join(out, "checkpoint.txt"), params)
    return {
        "rows": rows,
        "metrics_path": metrics_path,
        "total_trainable": gen.total_trainable(),
        "params": params,
        "best_test_acc": max(r[4] for r in rows),
    }


# ---------------------------------------------------------------------------
# time series


def build_series(cfg):
    name = cfg["dataset"]
    if name == "bessel":
        return gen_bessel_j2(cfg["t_start"], cfg["t_end"], cfg["num_points"])
    if name == "shm":
        t = np.linspace(cfg["t_start"], cfg["t_end"], cfg["num_points"])
        return gen_damped_shm(cfg["shm_gamma"], cfg["shm_omega"], t)
    if name == "narma5":
        return gen_narma(5, cfg["num_points"], cfg["data_seed"])[1]
    if name == "narma10":
        return gen_narma(10, cfg["num_points"], cfg["data_seed"])[1]
    if name == "csv":
        if not cfg["csv_path"]:
            raise ValueError("dataset 'csv' needs csv_path")
        return load_csv_series(cfg["csv_path"])
    raise ValueError(f"unknown dataset {name!r}")


def run_timeseries(cfg, log=print):
    series = build_series(cfg)
    window = cfg["window"]
    if len(series) < window + 2:
        raise ValueError(f"series of length {len(series)} is too short for window {window}")
    windows = sliding_window(series, window)
    m = len(windows.targets)
    n_train = int(cfg["train_frac"] * m)
    if n_train < 1 or n_train >= m:
        raise ValueError(f"train fraction {cfg['train_frac']} leaves no train/test split for {m} windows")

    net = nets.lstm_spec(1, cfg["lstm_hidden"])
    gen = _build_generator(cfg, net, cfg["depth"])
    log(f"target network parameters: {gen.spec.param_count} (qubits: {gen.n_qt})")
    log(f"total trainable parameters: {gen.total_trainable()}")

    rng = np.random.default_rng(cfg["seed"])
    params = gen.init_params(rng, theta_scale=cfg["theta_scale"], beta_scale=cfg["beta_scale"])
    opt = rmsprop_init(params, lr=cfg["lr"], alpha=cfg["alpha"], eps=cfg["eps"])
    rollout_epochs = {int(e) for e in str(cfg["rollout_epochs"]).split(",") if e.strip()}

    out = cfg["out"]
    os.makedirs(out, exist_ok=True)

    def mse_of(kappa, lo, hi):
        preds, _ = nets.net_forward(net, kappa, windows.inputs[lo:hi])
        return float(np.mean((preds - windows.targets[lo:hi]) ** 2))

    def write_rollout(kappa, epoch):
        preds, _ = nets.net_forward(net, kappa, windows.inputs)
        rows = [
            (k + window, windows.targets[k], preds[k], int(k >= n_train))
            for k in range(m)
        ]
        return write_csv(
            os.path.join(out, f"rollout_epoch{epoch}.csv"),
            ("t", "ground_truth", "prediction", "is_test"),
            rows,
        )

    rows = []
    batch = cfg["batch_size"]
    for epoch in range(1, cfg["epochs"] + 1):
        order = rng.permutation(n_train)
        for start in range(0, n_train, batch):
            pick = order[start : start + batch]
            kappa, cache = gen.generate(params)
            preds, net_cache = nets.net_forward(net, kappa, windows.inputs[pick])
            _, d_pred = nets.loss_and_grad(nets.MSE, preds, windows.targets[pick])
            grads = gen.backward(cache, nets.net_backward(net_cache, d_pred))
            params = rmsprop_step(opt, params, grads)
        kappa, _ = gen.generate(params)
        train_mse = mse_of(kappa, 0, n_train)
        test_mse = mse_of(kappa, n_train, m)
        rows.append((epoch, train_mse, test_mse))
        if epoch in rollout_epochs:
            write_rollout(kappa, epoch)
        log(f"epoch {epoch}: train mse {train_mse:.6g} | test mse {test_mse:.6g}")

    write_config_echo(cfg, out)
    metrics_path = write_csv(os.path.join(out, "metrics.csv"), ("epoch", "train_mse", "test_mse"), rows)
    save_checkpoint(os.path.join(out, "checkpoint.txt"), params)
    return {
        "rows": rows,
        "metrics_path": metrics_path,
        "total_trainable": gen.total_trainable(),
        "params": params,
        "best_test_mse": min(r[2] for r in rows),
        "windows": m,
    }


# ---------------------------------------------------------------------------
# reinforcement learning


def moving_stats(rewards, window):
    """Trailing mean/std per episode; shorter prefixes use what exists."""
    rows = []
    for i in range(len(rewards)):
        lo = max(0, i + 1 - window)
        chunk = np.asarray(rewards[lo : i + 1])
        rows.append((i, float(chunk.mean()), float(chunk.std())))
    return rows


def run_rl(cfg, log=print):
    baseline = random_policy_baseline(cfg["env_size"], cfg["baseline_episodes"], seed=cfg["baseline_seed"])
    log(f"random-policy baseline over {cfg['baseline_episodes']} episodes: {baseline:.4f}")

    actor_gen = _build_generator(cfg, nets.actor_spec((49, cfg["hidden"], 3)), cfg["depth"])
    critic_gen = _build_generator(cfg, nets.critic_spec((49, cfg["hidden"], 1)), cfg["depth"])
    log(f"total trainable parameters per network: {actor_gen.total_trainable()}")

    a3c_cfg = A3CConfig(
        workers=cfg["workers"],
        gamma=cfg["gamma"],
        t_max=cfg["t_max"],
        lr=cfg["lr"],
        betas=(cfg["beta1"], cfg["beta2"]),
        entropy_coef=cfg["entropy_coef"],
        value_coef=cfg["value_coef"],
        grad_clip=cfg["grad_clip"] if cfg["grad_clip"] > 0 else None,
        episode_budget=cfg["episodes"],
        env_size=cfg["env_size"],
        seed=cfg["seed"],
    )

    early_stop = None
    if cfg["target_ma"] > 0.0:
        window = cfg["ma_window"]
        target = cfg["target_ma"]

        def early_stop(records):
            if len(records) < window:
                return False
            recent = [r.reward for r in records[-window:]]
            return float(np.mean(recent)) >= target

    records, actor_params, critic_params = a3c_train(
        a3c_cfg, actor_gen, critic_gen, early_stop=early_stop
    )

    out = cfg["out"]
    write_config_echo(cfg, out)
    rewards_path = write_csv(
        os.path.join(out, "rewards.csv"),
        ("episode", "worker", "steps", "reward", "wall_clock_ms"),
        [(r.episode, r.worker, r.steps, r.reward, f"{r.wall_clock_ms:.3f}") for r in records],
    )
    rewards = [r.reward for r in records]
    curve_path = write_csv(
        os.path.join(out, "reward_curve.csv"),
        ("episode", f"mean_{cfg['ma_window']}", f"std_{cfg['ma_window']}"),
        moving_stats(rewards, cfg["ma_window"]),
    )
    with open(os.path.join(out, "baseline.txt"), "w") as f:
        f.write(f"random_policy_mean_reward = {baseline}\n")
    save_checkpoint(
        os.path.join(out, "checkpoint.txt"),
        {**{f"actor_{k}": v for k, v in actor_params.items()},
         **{f"critic_{k}": v for k, v in critic_params.items()}},
    )
    final_ma = float(np.mean(rewards[-cfg["ma_window"] :])) if rewards else 0.0
    log(f"episodes: {len(records)}; final moving average: {final_ma:.4f}")
    return {
        "records": records,
        "baseline": baseline,
        "rewards_path": rewards_path,
        "curve_path": curve_path,
        "final_ma": final_ma,
        "total_trainable": actor_gen.total_trainable(),
    }


# ---------------------------------------------------------------------------
# gradient verification


@dataclass
class ComponentReport:
    component: str
    checks: int
    worst_rel: float
    failures: int

    @property
    def passed(self):
        return self.failures == 0


def _grad_ok(analytic, numeric):
    # relative tolerance 1e-4, falling back to absolute 1e-7 for near-zero
    # gradients; the reported error is normalised by max(|g|, 1e-3) so tiny
    # finite-difference noise on exact zeros does not dominate the summary
    scale = abs(numeric)
    err = abs(analytic - numeric)
    ok = err <= 1e-7 if scale < 1e-3 else err <= 1e-4 * scale
    return ok, err / max(scale, 1e-3)


def _fd(f, x, h=1e-5):
    grad = np.zeros_like(x, dtype=np.float64)
    flat = x.ravel()
    gflat = grad.ravel()
    for i in range(flat.size):
        old = flat[i]
        flat[i] = old + h
        fp = f()
        flat[i] = old - h
        fm = f()
        flat[i] = old
        gflat[i] = (fp - fm) / (2 * h)
    return grad


def run_gradcheck(cfg, log=print):
    """Finite-difference verification of every analytic backward path.

    Returns the component reports; any failed entry names the component and
    the run exits nonzero through the CLI.
    """
    rng = np.random.default_rng(cfg["seed"])
    trials = cfg["trials"]
    reports = []

    def check_component(name, instances):
        worst, fails, count = 0.0, 0, 0
        for analytic, numeric in instances:
            a = np.asarray(analytic, dtype=np.float64).ravel()
            f = np.asarray(numeric, dtype=np.float64).ravel()
            for ai, fi in zip(a, f):
                ok, rel = _grad_ok(ai, fi)
                worst = max(worst, rel)
                fails += 0 if ok else 1
                count += 1
        reports.append(ComponentReport(name, count, worst, fails))

    def circuit_instances():
        for _ in range(max(1, trials // 4)):
            n = int(rng.integers(1, 7))
            depth = int(rng.integers(1, 5))
            config = ALL_CONFIGS[int(rng.integers(0, 12))]
            theta = rng.uniform(-np.pi, np.pi, (depth, n))
            cot = rng.normal(size=1 << n)
            analytic = gr.prob_vjp(config, theta, n, cot)
            shift = gr.parameter_shift_vjp(config, theta, n, cot)
            numeric = _fd(lambda: cot @ run_circuit(config, theta, n), theta)
            yield analytic, numeric
            yield analytic, shift  # method cross-check at the same tolerance

    check_component("circuit_vjp", circuit_instances())

    def ensemble_instances():
        for _ in range(max(1, trials // 8)):
            n = int(rng.integers(1, 5))
            depth = int(rng.integers(1, 4))
            theta = rng.uniform(-np.pi, np.pi, (depth, n))
            weights = rng.normal(0.2, 0.3, 12)
            cot = rng.normal(size=1 << n)
            state = ens.EnsembleState(theta=theta, weights=weights, n_qubits=n)
            p, cache = ens.ensemble_forward(state)
            d_theta, d_w = ens.ensemble_backward(cache, cot)

            def value():
                out, _ = ens.ensemble_forward(ens.EnsembleState(theta=theta, weights=weights, n_qubits=n))
                return cot @ out

            yield d_theta, _fd(value, theta)
            yield d_w, _fd(value, weights)

    check_component("ensemble_backward", ensemble_instances())

    def mapping_instances():
        for _ in range(max(1, trials // 8)):
            n_qt = int(rng.integers(1, 5))
            p = int(rng.integers(1, (1 << n_qt) + 1))
            spec = mp.GeneratorSpec(param_count=p, depth=1)
            vec = rng.normal(size=mp.mapping_param_count(spec))
            p_ens = rng.uniform(0, 1, 1 << spec.n_qt)
            d_kappa = rng.normal(size=p)
            _, cache = mp.generate_params(p_ens, spec, mp.MappingParams.from_vector(vec))
            d_beta, dp_ens = mp.mapping_backward(d_kappa, cache)

            def value():
                out, _ = mp.generate_params(p_ens, spec, mp.MappingParams.from_vector(vec))
                return d_kappa @ out

            yield d_beta, _fd(value, vec)
            yield dp_ens, _fd(value, p_ens)

    check_component("mapping_backward", mapping_instances())

    def net_instances():
        specs = [
            nets.NetSpec(nets.MLP_CLASSIFIER, (3, 4, 2)),
            nets.NetSpec(nets.ACTOR, (5, 4, 3)),
            nets.NetSpec(nets.CRITIC, (5, 4, 1)),
            nets.lstm_spec(1, 3),
        ]
        for _ in range(max(1, trials // 8)):
            spec = specs[int(rng.integers(len(specs)))]
            count = nets.param_count(spec)
            kappa = rng.normal(size=count) * 0.5
            if spec.variant == nets.LSTM_REGRESSOR:
                x = rng.normal(size=(3, 4))
            else:
                x = rng.normal(size=(3, spec.dims[0]))
            out, cache = nets.net_forward(spec, kappa, x)
            d_out = rng.normal(size=np.shape(out))
            grad = nets.net_backward(cache, d_out)

            def value():
                o, _ = nets.net_forward(spec, kappa, x)
                return float(np.sum(d_out * o))

            yield grad, _fd(value, kappa)

    check_component("net_backward", net_instances())

    def loss_instances():
        for _ in range(max(1, trials // 16)):
            logits = rng.normal(size=(4, 3))
            target = rng.integers(0, 3, 4)
            _, d = nets.loss_and_grad(nets.CROSS_ENTROPY, logits, target)

            def ce():
                return nets.loss_and_grad(nets.CROSS_ENTROPY, logits, target)[0]

            yield d, _fd(ce, logits)
            pred = rng.normal(size=6)
            targ = rng.normal(size=6)
            _, d2 = nets.loss_and_grad(nets.MSE, pred, targ)

            def se():
                return nets.loss_and_grad(nets.MSE, pred, targ)[0]

            yield d2, _fd(se, pred)

    check_component("loss_grad", loss_instances())

    for report in reports:
        status = "PASS" if report.passed else "FAIL"
        log(
            f"{status} {report.component}: {report.checks} derivatives,"
            f" worst rel err {report.worst_rel:.3e}, failures {report.failures}"
        )
    if cfg.get("out"):
        write_config_echo(cfg, cfg["out"])
        write_csv(
            os.path.join(cfg["out"], "gradcheck.csv"),
            ("component", "checks", "worst_rel_err", "failures", "passed"),
            [(r.component, r.checks, r.worst_rel, r.failures, int(r.passed)) for r in reports],
        )
    return reports


def run_task(cfg, log=print):
    task = cfg["task"]
    if task == "classify":
        return run_classification(cfg, log=log)
    if task == "timeseries":
        return run_timeseries(cfg, log=log)
    if task == "rl":
        return run_rl(cfg, log=log)
    if task == "gradcheck":
        return run_gradcheck(cfg, log=log)
    raise ValueError(f"unknown task {task!r}")
