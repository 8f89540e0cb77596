"""Population runs: presets, the per-agent training loop, aggregation, output files."""
from __future__ import annotations

import configparser
import csv
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from .agent import AgentConfig, AgentState, decay_epsilon, init_agent, q_update, select_action, td_error
from .asrn import AsrnConfig, filter_reward, init_asrn
from .bandit import EnvSpec, env_preset, fig3_bandit, make_env, sample_reward
from .metrics import StepRecord, TrapEvent, loss_curves, preference_scores
from .rng import derive_seed, make_rng

CHOICE_RULES = ("action", "preference")


@dataclass(frozen=True)
class ExperimentConfig:
    env: EnvSpec
    agent: AgentConfig
    asrn: AsrnConfig | None = None
    n_agents: int = 100
    n_steps: int = 20000
    master_seed: int = 0
    record_every: int = 1
    name: str = "custom"
    env_name: str = "custom"
    choice_rule: str = "action"
    outputs: str | None = None

    def __post_init__(self) -> None:
        if self.n_agents < 1:
            raise ValueError(f"n_agents must be >= 1, got {self.n_agents}")
        if self.n_steps < 0:
            raise ValueError(f"n_steps must be >= 0, got {self.n_steps}")
        if self.record_every < 1:
            raise ValueError(f"record_every must be >= 1, got {self.record_every}")
        if not 0 <= self.master_seed < 2**64:
            raise ValueError(f"master_seed must be a 64-bit unsigned integer, got {self.master_seed}")
        if self.choice_rule not in CHOICE_RULES:
            raise ValueError(f"choice_rule must be one of {CHOICE_RULES}, got {self.choice_rule!r}")

    @property
    def run_id(self) -> str:
        return f"{self.name}-s{self.master_seed}"

    @property
    def recorded_steps(self) -> np.ndarray:
        return np.arange(0, self.n_steps, self.record_every)


@dataclass
class Trace:
    """One agent's run, stored by column. Row i is recorded step ``steps[i]``.

    ``q`` holds the table after that step's update; ``initial_q`` is the table
    before the first step. ``events`` are trap episodes found on every step,
    not only recorded ones.
    """
    agent_id: int
    initial_q: np.ndarray
    steps: np.ndarray
    action: np.ndarray
    raw_reward: np.ndarray
    emitted_reward: np.ndarray
    epsilon: np.ndarray
    delta: np.ndarray
    interest: np.ndarray
    i_med: np.ndarray
    q: np.ndarray
    events: list[TrapEvent] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.steps)

    def records(self):
        """Rows as :class:`StepRecord` objects."""
        has_asrn = not np.all(np.isnan(self.interest)) if len(self) else False
        for i in range(len(self)):
            yield StepRecord(
                step=int(self.steps[i]), agent_id=self.agent_id, action=int(self.action[i]),
                raw_reward=float(self.raw_reward[i]), emitted_reward=float(self.emitted_reward[i]),
                delta=float(self.delta[i]), q_snapshot=tuple(self.q[i].tolist()),
                epsilon=float(self.epsilon[i]),
                interest=float(self.interest[i]) if has_asrn else None,
                i_med=float(self.i_med[i]) if has_asrn else None,
            )


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    traces: list[Trace]
    steps: np.ndarray
    right_fraction: np.ndarray
    mean_loss_right: np.ndarray
    mean_loss_left: np.ndarray
    n_right: np.ndarray
    n_left: np.ndarray
    events: list[TrapEvent]

    @property
    def run_id(self) -> str:
        return self.config.run_id


def agent_streams(master_seed: int, agent_index: int):
    """(policy, reward, noise) streams of one agent."""
    base = derive_seed(master_seed, agent_index)
    return tuple(make_rng(derive_seed(base, k)) for k in range(3))


def run_agent(config: ExperimentConfig, agent_index: int) -> Trace:
    """Train one agent for ``config.n_steps`` pulls.

    Each step: choose an arm, draw its raw reward, pass it through ASRN (when
    configured), compute the TD error on the reward the learner sees, update
    the table, decay epsilon.
    """
    if not 0 <= agent_index < config.n_agents:
        raise IndexError(f"agent_index {agent_index} outside 0..{config.n_agents - 1}")
    env = config.env
    n_arms = env.n_arms
    policy_rng, reward_rng, noise_rng = agent_streams(config.master_seed, agent_index)
    agent: AgentState = init_agent(config.agent, env, policy_rng)
    asrn = init_asrn(config.asrn, n_arms, noise_rng) if config.asrn is not None else None

    initial_q = np.array(agent.q)
    rec = config.recorded_steps
    n_rec = len(rec)
    actions = [0] * n_rec
    raw = [0.0] * n_rec
    emitted = [0.0] * n_rec
    eps_log = [0.0] * n_rec
    deltas = [0.0] * n_rec
    interest = [math.nan] * n_rec
    i_med = [math.nan] * n_rec
    q_log = [None] * n_rec

    events: list[TrapEvent] = []
    trapped = initial_q[0] > initial_q[1]
    entry = 0
    every = config.record_every
    q = agent.q
    for t in range(config.n_steps):
        eps = agent.epsilon
        a = select_action(agent, policy_rng)
        r = sample_reward(env, a, reward_rng)
        v = filter_reward(asrn, a, r, noise_rng) if asrn is not None else r
        d = td_error(agent, a, v)
        q_update(agent, a, v)
        decay_epsilon(agent)

        if not trapped:
            if q[0] > q[1]:
                trapped, entry = True, t
        elif q[1] > q[0]:
            events.append(TrapEvent(agent_index, entry, t))
            trapped = False

        if t % every == 0:
            i = t // every
            actions[i] = a
            raw[i] = r
            emitted[i] = v
            eps_log[i] = eps
            deltas[i] = d
            q_log[i] = tuple(q)
            if asrn is not None:
                interest[i] = asrn.last_interest
                i_med[i] = asrn.last_median
    if trapped:
        events.append(TrapEvent(agent_index, entry, None))

    q_arr = np.array(q_log, dtype=float) if n_rec else np.empty((0, n_arms))
    return Trace(
        agent_id=agent_index,
        initial_q=initial_q,
        steps=rec.copy(),
        action=np.array(actions, dtype=int),
        raw_reward=np.array(raw),
        emitted_reward=np.array(emitted),
        epsilon=np.array(eps_log),
        delta=np.array(deltas),
        interest=np.array(interest),
        i_med=np.array(i_med),
        q=q_arr.reshape(n_rec, n_arms),
        events=events,
    )


def _run_one(args):
    config, index = args
    return run_agent(config, index)


def aggregate(config: ExperimentConfig, traces: Sequence[Trace]) -> ExperimentResult:
    """Per-step population metrics from finished traces."""
    traces = sorted(traces, key=lambda tr: tr.agent_id)
    steps = config.recorded_steps
    if traces and len(steps):
        q = np.stack([tr.q for tr in traces])             # agents x steps x arms
        acts = np.stack([tr.action for tr in traces])
        deltas = np.stack([tr.delta for tr in traces])
        rf = preference_scores(q).mean(axis=0)
        mr, ml, nr, nl = loss_curves(deltas, acts, q, by=config.choice_rule)
    else:
        empty = np.empty(0)
        rf, mr, ml = empty, empty, empty
        nr = nl = np.empty(0, dtype=int)
    events = [ev for tr in traces for ev in tr.events]
    return ExperimentResult(config, list(traces), steps, rf, mr, ml, nr, nl, events)


def run_experiment(config: ExperimentConfig, workers: int = 1) -> ExperimentResult:
    """Run every agent and aggregate. Results do not depend on ``workers``."""
    jobs = [(config, i) for i in range(config.n_agents)]
    if workers <= 1 or config.n_agents == 1:
        traces = [_run_one(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            traces = list(pool.map(_run_one, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    return aggregate(config, traces)


# --------------------------------------------------------------------------
# presets

def _figure_agent(**kw) -> AgentConfig:
    base = dict(alpha=0.05, gamma=0.95, epsilon0=1.0, epsilon_decay=0.001,
                epsilon_min=0.0, init_mode="optimal", bootstrap=False)
    base.update(kw)
    return AgentConfig(**base)


FIG1_ASRN = AsrnConfig()
SIGMA_SWEEP = (0.25, 0.5, 1.0, 2.0)


def _presets() -> dict[str, ExperimentConfig]:
    broken = env_preset("broken_armed")
    fig1 = ExperimentConfig(env=broken, agent=_figure_agent(), n_agents=100, n_steps=20000,
                            name="fig1_no_asrn", env_name="broken_armed")
    fig3_agent = _figure_agent(alpha=0.1, gamma=0.9)
    return {
        "fig1_no_asrn": fig1,
        "fig1_asrn": replace(fig1, asrn=FIG1_ASRN, name="fig1_asrn"),
        "fig2": replace(fig1, asrn=replace(FIG1_ASRN, activation_step=1000), name="fig2"),
        # the update exactly as written, gamma * max Q included
        "fig1_bootstrap": replace(fig1, agent=_figure_agent(bootstrap=True), name="fig1_bootstrap"),
        "fig3": ExperimentConfig(env=fig3_bandit(), agent=fig3_agent, n_agents=1, n_steps=2000,
                                 name="fig3", env_name="fig3"),
        "sigma_sweep": ExperimentConfig(env=fig3_bandit(), agent=fig3_agent, n_agents=200, n_steps=2000,
                                        name="sigma_sweep", env_name="fig3"),
    }


PRESET_NAMES = tuple(_presets())


def preset(name: str) -> ExperimentConfig:
    presets = _presets()
    if name not in presets:
        raise KeyError(f"unknown preset {name!r}; available: {', '.join(presets)}")
    return presets[name]


def sigma_sweep_configs(base: ExperimentConfig | None = None,
                        sigmas: Sequence[float] = SIGMA_SWEEP) -> list[ExperimentConfig]:
    """One config per left-arm sigma, everything else taken from ``base``."""
    base = base or preset("sigma_sweep")
    out = []
    for s in sigmas:
        env = make_env([base.env.arms[0].mu, base.env.arms[1].mu], [s, base.env.arms[1].sigma])
        out.append(replace(base, env=env, env_name="custom", name=f"{base.name}_sl{s:g}"))
    return out


# --------------------------------------------------------------------------
# config files

def _fmt(x) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return repr(x)
    return str(x)


def config_to_ini(config: ExperimentConfig) -> str:
    """Full config as INI text; :func:`config_from_ini` reads it back unchanged."""
    lines = [
        "# experiment config echo; rerun with: asrnlab run --config <this file>",
        "[experiment]",
        f"name = {config.name}",
        f"n_agents = {config.n_agents}",
        f"n_steps = {config.n_steps}",
        f"master_seed = {config.master_seed}",
        f"record_every = {config.record_every}",
        f"choice_rule = {config.choice_rule}",
        "",
        "[env]",
        f"preset = {config.env_name}",
        "mus = " + ", ".join(repr(m) for m in config.env.means),
        "sigmas = " + ", ".join(repr(s) for s in config.env.sigmas),
        "",
        "[agent]",
    ]
    lines += [f"{f.name} = {_fmt(getattr(config.agent, f.name))}" for f in fields(AgentConfig)]
    lines += ["", "[asrn]", f"enabled = {_fmt(config.asrn is not None)}"]
    asrn = config.asrn or AsrnConfig()
    for f in fields(AsrnConfig):
        val = getattr(asrn, f.name)
        lines.append(f"{f.name} = {'' if val is None else _fmt(val)}")
    return "\n".join(lines) + "\n"


def _coerce(kind, text: str):
    text = text.strip()
    if kind is bool:
        low = text.lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"not a boolean: {text!r}")
    if kind is int:
        return int(text)
    if kind is float:
        return float(text)
    return text


_AGENT_TYPES = {"alpha": float, "gamma": float, "epsilon0": float, "epsilon_decay": float,
                "epsilon_min": float, "init_mode": str, "init_value": float, "bootstrap": bool}
_ASRN_TYPES = {"ensemble_size": int, "window_k": int, "predictor_lr": float,
               "predictor_init_sigma": float, "activation_step": int, "noise_scale_mode": str,
               "warmup": int}


def _floats(text: str) -> list[float]:
    return [float(x) for x in text.replace(",", " ").split()]


def config_from_ini(text: str, base: ExperimentConfig | None = None) -> ExperimentConfig:
    """Parse INI text. Keys left out fall back to ``base`` (or library defaults).

    Unknown sections or keys are errors, so typos do not pass silently.
    """
    cp = configparser.ConfigParser(interpolation=None)
    cp.read_string(text)
    known = {"experiment", "env", "agent", "asrn"}
    extra = set(cp.sections()) - known
    if extra:
        raise ValueError(f"unknown config section(s): {sorted(extra)}")

    cfg = base
    exp = dict(cp["experiment"]) if cp.has_section("experiment") else {}
    if "preset" in exp:
        cfg = preset(exp.pop("preset").strip())
    if cfg is None:
        cfg = ExperimentConfig(env=env_preset("broken_armed"), agent=AgentConfig(), env_name="broken_armed")

    exp_types = {"name": str, "n_agents": int, "n_steps": int, "master_seed": int,
                 "record_every": int, "choice_rule": str, "outputs": str}
    updates = {}
    for key, val in exp.items():
        if key not in exp_types:
            raise ValueError(f"unknown key [experiment] {key}")
        updates[key] = _coerce(exp_types[key], val)

    if cp.has_section("env"):
        sec = dict(cp["env"])
        bad = set(sec) - {"preset", "mus", "sigmas"}
        if bad:
            raise ValueError(f"unknown key(s) in [env]: {sorted(bad)}")
        name = sec.get("preset", "custom").strip()
        if name == "custom" or "mus" in sec or "sigmas" in sec:
            if "mus" not in sec or "sigmas" not in sec:
                raise ValueError("[env] needs both mus and sigmas for a custom bandit")
            updates["env"] = make_env(_floats(sec["mus"]), _floats(sec["sigmas"]))
            updates["env_name"] = name if name != "custom" and updates["env"] == env_preset(name) else "custom"
        else:
            updates["env"] = env_preset(name)
            updates["env_name"] = name

    if cp.has_section("agent"):
        sec = dict(cp["agent"])
        kw = {}
        for key, val in sec.items():
            if key not in _AGENT_TYPES:
                raise ValueError(f"unknown key [agent] {key}")
            kw[key] = _coerce(_AGENT_TYPES[key], val)
        updates["agent"] = replace(cfg.agent, **kw)

    if cp.has_section("asrn"):
        sec = dict(cp["asrn"])
        enabled = _coerce(bool, sec.pop("enabled", "true"))
        kw = {}
        for key, val in sec.items():
            if key not in _ASRN_TYPES:
                raise ValueError(f"unknown key [asrn] {key}")
            kw[key] = None if (key == "warmup" and val.strip() == "") else _coerce(_ASRN_TYPES[key], val)
        updates["asrn"] = replace(cfg.asrn or AsrnConfig(), **kw) if enabled else None

    return replace(cfg, **updates)


def load_config(path: str | os.PathLike) -> ExperimentConfig:
    return config_from_ini(Path(path).read_text())


# --------------------------------------------------------------------------
# output files

STEPS_COLUMNS = ["run_id", "agent_id", "step", "action", "raw_reward", "emitted_reward",
                 "epsilon", "delta", "interest", "i_med"]
AGGREGATE_COLUMNS = ["run_id", "step", "right_fraction", "mean_loss_right", "mean_loss_left",
                     "n_right", "n_left"]
EVENTS_COLUMNS = ["run_id", "agent_id", "entry_step", "exit_step"]


def _cell(x: float) -> str:
    return "" if x != x else repr(x)  # NaN -> empty


def write_outputs(result: ExperimentResult, out_dir: str | os.PathLike, plots: bool = True) -> list[Path]:
    """Write steps.csv, aggregate.csv, events.csv, config.ini and optional SVGs."""
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out}: {exc}") from exc
    run_id = result.run_id
    n_arms = result.config.env.n_arms
    written = []

    def _open(name):
        path = out / name
        written.append(path)
        try:
            return path.open("w", newline="")
        except OSError as exc:
            raise OSError(f"cannot write {path}: {exc}") from exc

    with _open("steps.csv") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(STEPS_COLUMNS + [f"q_{k}" for k in range(n_arms)])
        for tr in result.traces:
            cols = zip(tr.steps.tolist(), tr.action.tolist(), tr.raw_reward.tolist(),
                       tr.emitted_reward.tolist(), tr.epsilon.tolist(), tr.delta.tolist(),
                       tr.interest.tolist(), tr.i_med.tolist(), tr.q.tolist())
            for step, a, r, v, e, d, it, im, qrow in cols:
                w.writerow([run_id, tr.agent_id, step, a, repr(r), repr(v), repr(e), repr(d),
                            _cell(it), _cell(im), *map(repr, qrow)])

    with _open("aggregate.csv") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(AGGREGATE_COLUMNS)
        for row in zip(result.steps.tolist(), result.right_fraction.tolist(), result.mean_loss_right.tolist(),
                       result.mean_loss_left.tolist(), result.n_right.tolist(), result.n_left.tolist()):
            step, rf, mr, ml, nr, nl = row
            w.writerow([run_id, step, repr(rf), _cell(mr), _cell(ml), nr, nl])

    with _open("events.csv") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(EVENTS_COLUMNS)
        for ev in result.events:
            w.writerow([run_id, ev.agent_id, ev.entry_step, "" if ev.exit_step is None else ev.exit_step])

    with _open("config.ini") as fh:
        fh.write(config_to_ini(result.config))

    if plots:
        from .plotting import render_all
        written += render_all(out, result=result)
    return written
