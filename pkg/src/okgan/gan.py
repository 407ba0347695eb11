"""Training drivers: the kernel-discriminator GAN on 2D mixtures, its
encoder variant for flat-vector data, and a vanilla GAN baseline for the
cycling comparison. Plus sample generation and versioned binary checkpoints.

Per round the kernel trainers (a) draw reals and noise and generate fakes,
(b) run one classifier fit round (reals +1, fakes -1), (c) take `gen_steps`
generator steps on the hinge generator loss mean(max(0, 1 - f(G(z)))) with
the classifier frozen, then (d) decay the learning rate and advance the
Gaussian bandwidth schedule. The encoder variant prepends an encoder update
(skipped on the first round) and feeds the classifier encoded points.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import struct
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import (CheckpointCorruptError, CheckpointVersionError,
                     ConfigError, TrainingDivergedError)
from .kernels import (GammaSchedule, GaussianKernel, kernel_from_config,
                      kernel_to_config, schedule_step)
from .numerics import (AdamState, MlpNetwork, adam_step, build_mlp,
                       named_streams, sample_gaussian)
from .okc import LOSS_KINDS, BudgetedKernelMachine
from .synthdata import (GaussianMixtureSpec, VectorDataset, load_vectors,
                        preset, sample, PRESET_NAMES)

TRAINER_KINDS = ("okgan", "okgan-encoder", "vanilla")

# Per-preset defaults: initial Gaussian bandwidth and training length.
PRESET_GAMMA = {"grid25": 0.2, "grid49": 0.5, "ring8": 3.2, "circle": 0.2}
PRESET_ROUNDS = {"grid25": 4000, "grid49": 4000, "ring8": 5000, "circle": 3000}

_PROB_CLAMP = 1e-7  # clamp for log arguments in the vanilla baseline


@dataclass
class TrainConfig:
    """Full experiment configuration; defaults are the 2D-synthetic settings."""

    dataset: str = "grid25"           # preset name ("file" when data_path set)
    data_path: Optional[str] = None
    trainer: str = "okgan"
    seed: int = 0
    rounds: int = 4000

    # generator network
    noise_dim: int = 2
    gen_hidden: tuple = (400, 400, 400, 400)
    gen_batch_norm: bool = True
    gen_out_activation: str = "identity"

    # encoder network (okgan-encoder only)
    encoder_hidden: tuple = (400, 400, 400, 400)
    encoder_dim: int = 100
    encoder_batch_norm: bool = True
    freeze_encoder: bool = False

    # vanilla baseline discriminator
    disc_hidden: tuple = (200, 200, 200)

    # kernel classifier
    kernel: dict = field(default_factory=lambda: {"type": "gaussian", "gamma": 0.2})
    gamma_ratio: float = 1.0015
    budget: int = 4096
    step_size: float = 0.05
    reg_lambda: float = 0.1
    loss: str = "hinge"
    margin: float = 1.0
    keep_zero_coeffs: bool = True

    # loop sizes
    batch_size: int = 500             # examples per round and per generator step
    clf_batch_size: int = 64          # classifier minibatch
    gen_steps: int = 5                # generator iterations per round

    # optimizer
    lr: float = 5e-4
    lr_decay: float = 0.999
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999

    # data options
    rescale_data: bool = False

    # evaluation and diagnostics
    eval_every: int = 50
    eval_samples: int = 2500
    record_every: int = 0
    probe_count: int = 256
    record_probability: bool = False  # vanilla trajectory rows: D(x) not logits
    sample_batch_stats: bool = False  # train-mode batch norm when sampling

    def validate(self):
        if self.trainer not in TRAINER_KINDS:
            raise ConfigError(f"trainer: must be one of {TRAINER_KINDS}")
        if self.data_path is None and self.dataset not in PRESET_NAMES:
            raise ConfigError(
                f"dataset: unknown preset {self.dataset!r} and no data_path")
        if self.loss not in LOSS_KINDS:
            raise ConfigError(f"loss: must be one of {LOSS_KINDS}")
        for name in ("rounds", "noise_dim", "budget", "batch_size",
                     "clf_batch_size", "gen_steps", "encoder_dim",
                     "eval_samples"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name}: must be >= 1")
        if self.clf_batch_size > 2 * self.batch_size:
            raise ConfigError("clf_batch_size: must be <= 2 * batch_size")
        for name in ("step_size", "reg_lambda", "margin", "lr"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name}: must be > 0")
        if not 0 < self.lr_decay <= 1:
            raise ConfigError("lr_decay: must be in (0, 1]")
        for name in ("adam_beta1", "adam_beta2"):
            if not 0 <= getattr(self, name) < 1:
                raise ConfigError(f"{name}: must be in [0, 1)")
        if self.gamma_ratio < 1:
            raise ConfigError("gamma_ratio: must be >= 1")
        if self.probe_count < 2:
            raise ConfigError("probe_count: must be >= 2")
        if self.eval_every < 0 or self.record_every < 0:
            raise ConfigError("eval_every/record_every: must be >= 0")
        try:
            self.build_kernel()
        except (ValueError, KeyError) as exc:
            raise ConfigError(f"kernel: {exc}") from None
        return self

    def build_kernel(self):
        return kernel_from_config(self.kernel)

    def gamma_schedule(self):
        """Schedule over the configured kernel, or None for non-Gaussian."""
        kernel = self.build_kernel()
        if isinstance(kernel, GaussianKernel):
            return GammaSchedule(initial=kernel.gamma, ratio=self.gamma_ratio)
        return None

    def to_dict(self):
        out = dataclasses.asdict(self)
        for name in ("gen_hidden", "encoder_hidden", "disc_hidden"):
            out[name] = list(out[name])
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "TrainConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config fields: {sorted(unknown)}")
        coerced = dict(data)
        for name in ("gen_hidden", "encoder_hidden", "disc_hidden"):
            if name in coerced:
                coerced[name] = tuple(coerced[name])
        return cls(**coerced)

    def config_hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


def default_config(preset_name: str, trainer: str = "okgan",
                   **overrides) -> TrainConfig:
    """Per-preset defaults (initial bandwidth and round count) plus overrides."""
    base = {
        "dataset": preset_name,
        "trainer": trainer,
        "kernel": {"type": "gaussian", "gamma": PRESET_GAMMA.get(preset_name, 0.2)},
        "rounds": PRESET_ROUNDS.get(preset_name, 4000),
    }
    base.update(overrides)
    return TrainConfig(**base).validate()


# ---------------------------------------------------------------------------
# Trainer state

@dataclass
class TrainingHooks:
    """Optional callbacks; eval/record fire on the config cadences."""

    on_fit_round: Optional[Callable] = None   # fn(state)
    on_gen_step: Optional[Callable] = None    # fn(state, step)
    on_eval: Optional[Callable] = None        # fn(state)
    on_record: Optional[Callable] = None      # fn(state)


@dataclass
class TrainerState:
    kind: str
    config: TrainConfig
    streams: dict
    generator: MlpNetwork
    gen_opt: AdamState
    machine: Optional[BudgetedKernelMachine] = None
    schedule: Optional[GammaSchedule] = None
    encoder: Optional[MlpNetwork] = None
    enc_opt: Optional[AdamState] = None
    disc: Optional[MlpNetwork] = None
    disc_opt: Optional[AdamState] = None
    real_source: object = None
    round_index: int = 0
    lr: float = 0.0


def _resolve_source(config, dataset=None):
    if dataset is not None:
        return dataset
    if config.data_path is not None:
        return load_vectors(config.data_path, rescale=config.rescale_data)
    return preset(config.dataset)


def build_state(config: TrainConfig, dataset=None) -> TrainerState:
    """Fresh trainer state. Initialization draws happen in a fixed order
    (generator first, then encoder or discriminator) from the init stream."""
    config.validate()
    streams = named_streams(config.seed)
    source = _resolve_source(config, dataset)
    data_dim = source.dim
    init = streams["init"]
    generator = build_mlp(init, config.noise_dim, config.gen_hidden, data_dim,
                          hidden_activation="relu",
                          out_activation=config.gen_out_activation,
                          batch_norm=config.gen_batch_norm)
    state = TrainerState(
        kind=config.trainer,
        config=config,
        streams=streams,
        generator=generator,
        gen_opt=AdamState(generator.params(), config.adam_beta1, config.adam_beta2),
        real_source=source,
        lr=config.lr,
    )
    if config.trainer in ("okgan", "okgan-encoder"):
        state.machine = BudgetedKernelMachine(
            kernel=config.build_kernel(),
            budget=config.budget,
            step_size=config.step_size,
            reg_lambda=config.reg_lambda,
            loss=config.loss,
            margin=config.margin,
            keep_zero_coeffs=config.keep_zero_coeffs,
        )
        state.schedule = config.gamma_schedule()
    if config.trainer == "okgan-encoder":
        state.encoder = build_mlp(init, data_dim, config.encoder_hidden,
                                  config.encoder_dim,
                                  hidden_activation="leaky_relu",
                                  out_activation="identity",
                                  batch_norm=config.encoder_batch_norm)
        state.enc_opt = AdamState(state.encoder.params(),
                                  config.adam_beta1, config.adam_beta2)
    if config.trainer == "vanilla":
        state.disc = build_mlp(init, data_dim, config.disc_hidden, 1,
                               hidden_activation="leaky_relu",
                               out_activation="identity", batch_norm=False)
        state.disc_opt = AdamState(state.disc.params(),
                                   config.adam_beta1, config.adam_beta2)
    return state


def _draw_reals(source, rng, n):
    if isinstance(source, GaussianMixtureSpec):
        return sample(source, rng, n)
    return source.minibatch(rng, n)


def _sigmoid(s):
    return 0.5 * (1.0 + np.tanh(0.5 * s))


def hinge_generator_loss(machine, points):
    """Loss mean(max(0, 1 - f(points))) and its gradient wrt the points.

    The gradient is -grad f / n on points with f < 1 and zero elsewhere
    (subgradient 0 at the kink).
    """
    scores, grad = machine.predict_and_input_gradient(points)
    margins = 1.0 - scores
    loss = float(np.maximum(margins, 0.0).mean())
    active = margins > 0
    d_points = -(grad * active[:, None]) / points.shape[0]
    return loss, d_points


def _check_finite(state, loss, what):
    if not np.isfinite(loss):
        raise TrainingDivergedError(
            f"non-finite {what} at round {state.round_index + 1}",
            state=state, round_index=state.round_index + 1)


def _encoder_step(state, reals, fakes):
    """Encoder update on V(theta_e) with classifier and generator frozen."""
    n = reals.shape[0]
    batch = np.concatenate([reals, fakes])
    enc_out, cache = state.encoder.forward(batch, training=True)
    e_r, e_f = enc_out[:n], enc_out[n:]
    s_r, g_r = state.machine.predict_and_input_gradient(e_r)
    s_f, g_f = state.machine.predict_and_input_gradient(e_f)
    loss = float(np.maximum(0.0, 1.0 - s_r).mean()
                 + np.maximum(0.0, 1.0 + s_f).mean())
    _check_finite(state, loss, "encoder loss")
    d_r = -(g_r * (s_r < 1.0)[:, None]) / n
    d_f = (g_f * (s_f > -1.0)[:, None]) / n
    grads, _ = state.encoder.backward(cache, np.concatenate([d_r, d_f]))
    adam_step(state.encoder.params(), grads, state.enc_opt, state.lr)
    return loss


def _okgan_round(state, hooks):
    cfg = state.config
    reals = _draw_reals(state.real_source, state.streams["data"], cfg.batch_size)
    z = sample_gaussian(state.streams["noise"], cfg.batch_size, cfg.noise_dim)
    fakes = state.generator.forward(z, training=True)[0]

    if state.encoder is not None:
        if state.round_index > 0 and not cfg.freeze_encoder:
            _encoder_step(state, reals, fakes)
        # one pass over the concatenated batch keeps batch-norm statistics
        # shared between real and fake halves
        both = state.encoder.forward(np.concatenate([reals, fakes]),
                                     training=True)[0]
        clf_reals, clf_fakes = both[:cfg.batch_size], both[cfg.batch_size:]
    else:
        clf_reals, clf_fakes = reals, fakes

    state.machine.fit_round(clf_reals, clf_fakes, cfg.clf_batch_size,
                            state.streams["shuffle"])
    if hooks and hooks.on_fit_round:
        hooks.on_fit_round(state)

    for step in range(cfg.gen_steps):
        z = sample_gaussian(state.streams["noise"], cfg.batch_size, cfg.noise_dim)
        fakes, gen_cache = state.generator.forward(z, training=True)
        if state.encoder is not None:
            enc_out, enc_cache = state.encoder.forward(fakes, training=True)
            loss, d_enc = hinge_generator_loss(state.machine, enc_out)
            _check_finite(state, loss, "generator loss")
            _, d_fakes = state.encoder.backward(enc_cache, d_enc)
        else:
            loss, d_fakes = hinge_generator_loss(state.machine, fakes)
            _check_finite(state, loss, "generator loss")
        grads, _ = state.generator.backward(gen_cache, d_fakes)
        adam_step(state.generator.params(), grads, state.gen_opt, state.lr)
        if hooks and hooks.on_gen_step:
            hooks.on_gen_step(state, step)

    state.lr *= cfg.lr_decay
    if state.schedule is not None:
        state.machine.kernel = schedule_step(state.machine.kernel, state.schedule)


def discriminator_bce_loss(disc, reals, fakes):
    """Negated value of the two-sided log-likelihood objective, with exact
    gradients for the discriminator parameters."""
    n_r, n_f = reals.shape[0], fakes.shape[0]
    s_r, c_r = disc.forward(reals, training=True)
    s_f, c_f = disc.forward(fakes, training=True)
    p_r = _sigmoid(s_r[:, 0])
    p_f = _sigmoid(s_f[:, 0])
    loss = -(np.log(np.clip(p_r, _PROB_CLAMP, 1.0 - _PROB_CLAMP)).mean()
             + np.log(np.clip(1.0 - p_f, _PROB_CLAMP, 1.0 - _PROB_CLAMP)).mean())
    g_r, _ = disc.backward(c_r, ((p_r - 1.0) / n_r)[:, None])
    g_f, _ = disc.backward(c_f, (p_f / n_f)[:, None])
    grads = [a + b for a, b in zip(g_r, g_f)]
    return float(loss), grads


def generator_nonsaturating_loss(disc, fakes):
    """-mean(log D(fakes)) and its gradient wrt the fakes (through the
    discriminator only)."""
    n = fakes.shape[0]
    s, cache = disc.forward(fakes, training=True)
    p = _sigmoid(s[:, 0])
    loss = -np.log(np.clip(p, _PROB_CLAMP, 1.0 - _PROB_CLAMP)).mean()
    _, d_fakes = disc.backward(cache, (-(1.0 - p) / n)[:, None])
    return float(loss), d_fakes


def _vanilla_round(state, hooks):
    cfg = state.config
    reals = _draw_reals(state.real_source, state.streams["data"], cfg.batch_size)
    z = sample_gaussian(state.streams["noise"], cfg.batch_size, cfg.noise_dim)
    fakes = state.generator.forward(z, training=True)[0]

    loss_d, grads_d = discriminator_bce_loss(state.disc, reals, fakes)
    _check_finite(state, loss_d, "discriminator loss")
    adam_step(state.disc.params(), grads_d, state.disc_opt, state.lr)
    if hooks and hooks.on_fit_round:
        hooks.on_fit_round(state)

    z = sample_gaussian(state.streams["noise"], cfg.batch_size, cfg.noise_dim)
    fakes, gen_cache = state.generator.forward(z, training=True)
    loss_g, d_fakes = generator_nonsaturating_loss(state.disc, fakes)
    _check_finite(state, loss_g, "generator loss")
    grads_g, _ = state.generator.backward(gen_cache, d_fakes)
    adam_step(state.generator.params(), grads_g, state.gen_opt, state.lr)
    if hooks and hooks.on_gen_step:
        hooks.on_gen_step(state, 0)

    state.lr *= cfg.lr_decay


def run_rounds(state: TrainerState, n_rounds: int,
               hooks: Optional[TrainingHooks] = None) -> TrainerState:
    """Advance training by n_rounds rounds (resumable)."""
    cfg = state.config
    for _ in range(n_rounds):
        if state.kind == "vanilla":
            _vanilla_round(state, hooks)
        else:
            _okgan_round(state, hooks)
        state.round_index += 1
        if hooks:
            if hooks.on_eval and cfg.eval_every > 0 \
                    and state.round_index % cfg.eval_every == 0:
                hooks.on_eval(state)
            if hooks.on_record and cfg.record_every > 0 \
                    and state.round_index % cfg.record_every == 0:
                hooks.on_record(state)
    return state


def train_okgan_2d(config: TrainConfig, hooks=None) -> TrainerState:
    """Kernel-discriminator training directly on a 2D mixture preset."""
    if config.trainer != "okgan":
        raise ConfigError("trainer: expected 'okgan'")
    return run_rounds(build_state(config), config.rounds, hooks)


def train_okgan_encoder(config: TrainConfig, dataset: VectorDataset = None,
                        hooks=None) -> TrainerState:
    """Kernel-discriminator training through a learned encoder."""
    if config.trainer != "okgan-encoder":
        raise ConfigError("trainer: expected 'okgan-encoder'")
    return run_rounds(build_state(config, dataset), config.rounds, hooks)


def train_vanilla_gan(config: TrainConfig, hooks=None) -> TrainerState:
    """Alternating single-step GAN baseline with an MLP discriminator."""
    if config.trainer != "vanilla":
        raise ConfigError("trainer: expected 'vanilla'")
    return run_rounds(build_state(config), config.rounds, hooks)


def generate(state: TrainerState, n: int) -> np.ndarray:
    """n generator samples on fresh noise (evaluation-mode batch norm unless
    config.sample_batch_stats is set)."""
    z = sample_gaussian(state.streams["eval"], n, state.config.noise_dim)
    training = bool(state.config.sample_batch_stats)
    return state.generator.forward(z, training=training)[0]


def discriminator_score_fn(state: TrainerState):
    """Read-only scoring function for trajectory recording: the kernel
    classifier value (through the encoder when present), or the vanilla
    discriminator's pre-sigmoid logit (probability behind a config flag)."""
    if state.kind == "vanilla":
        def score(points):
            logits = state.disc.forward(points, training=False)[0][:, 0]
            if state.config.record_probability:
                return _sigmoid(logits)
            return logits
        return score
    if state.kind == "okgan-encoder":
        def score(points):
            encoded = state.encoder.forward(points, training=False)[0]
            return state.machine.predict(encoded)
        return score
    return lambda points: state.machine.predict(points)


# ---------------------------------------------------------------------------
# Checkpoints

_CKPT_MAGIC = b"OKGC"
CHECKPOINT_VERSION = 1


def _bn_blocks(net):
    return [l.batch_norm for l in net.layers if l.batch_norm is not None]


def _state_arrays(state):
    """(name, array) pairs covering every float of mutable training state."""
    pairs = []

    def add_net(prefix, net, opt):
        for i, p in enumerate(net.params()):
            pairs.append((f"{prefix}.p{i}", p))
        for j, bn in enumerate(_bn_blocks(net)):
            pairs.append((f"{prefix}.bn{j}.mean", bn.running_mean))
            pairs.append((f"{prefix}.bn{j}.var", bn.running_var))
        for i, m in enumerate(opt.m):
            pairs.append((f"{prefix}.opt.m{i}", m))
        for i, v in enumerate(opt.v):
            pairs.append((f"{prefix}.opt.v{i}", v))

    add_net("gen", state.generator, state.gen_opt)
    if state.encoder is not None:
        add_net("enc", state.encoder, state.enc_opt)
    if state.disc is not None:
        add_net("disc", state.disc, state.disc_opt)
    if state.machine is not None:
        snap = state.machine.snapshot()
        pairs.append(("machine.examples", snap["examples"]))
        pairs.append(("machine.coeffs", snap["coeffs"]))
        pairs.append(("machine.ids", snap["ids"]))
    return pairs


def save_checkpoint(state: TrainerState, path) -> None:
    """Versioned little-endian binary dump; round-trips bit-exactly."""
    arrays = _state_arrays(state)
    header = {
        "kind": state.kind,
        "round": state.round_index,
        "lr": state.lr,
        "config": state.config.to_dict(),
        "config_hash": state.config.config_hash(),
        "rng": {name: gen.bit_generator.state
                for name, gen in state.streams.items()},
        "opt_t": {
            "gen": state.gen_opt.t,
            "enc": state.enc_opt.t if state.enc_opt else None,
            "disc": state.disc_opt.t if state.disc_opt else None,
        },
        "machine": None,
        "arrays": [[name, list(a.shape), str(a.dtype)] for name, a in arrays],
    }
    if state.machine is not None:
        header["machine"] = {
            "offset": state.machine.offset,
            "next_id": state.machine.insertion_counter,
            "kernel": kernel_to_config(state.machine.kernel),
        }
    blob = json.dumps(header).encode()
    with open(path, "wb") as fh:
        fh.write(struct.pack("<4sIQ", _CKPT_MAGIC, CHECKPOINT_VERSION, len(blob)))
        fh.write(blob)
        for _, a in arrays:
            fh.write(np.ascontiguousarray(a).tobytes())


def load_checkpoint(path, dataset=None) -> TrainerState:
    """Rebuild a trainer state; continuing training reproduces the
    uninterrupted trajectory bit for bit."""
    with open(path, "rb") as fh:
        blob = fh.read()
    head_size = struct.calcsize("<4sIQ")
    if len(blob) < head_size:
        raise CheckpointCorruptError(f"{path}: truncated header")
    magic, version, header_len = struct.unpack_from("<4sIQ", blob)
    if magic != _CKPT_MAGIC:
        raise CheckpointCorruptError(f"{path}: bad magic {magic!r}")
    if version != CHECKPOINT_VERSION:
        raise CheckpointVersionError(
            f"{path}: format version {version}, expected {CHECKPOINT_VERSION}")
    if len(blob) < head_size + header_len:
        raise CheckpointCorruptError(f"{path}: truncated header block")
    try:
        header = json.loads(blob[head_size:head_size + header_len])
    except json.JSONDecodeError as exc:
        raise CheckpointCorruptError(f"{path}: unreadable header: {exc}") from None

    config = TrainConfig.from_dict(header["config"])
    state = build_state(config, dataset)
    state.round_index = int(header["round"])
    state.lr = float(header["lr"])
    for name, gen in state.streams.items():
        gen.bit_generator.state = header["rng"][name]
    state.gen_opt.t = int(header["opt_t"]["gen"])
    if state.enc_opt is not None:
        state.enc_opt.t = int(header["opt_t"]["enc"])
    if state.disc_opt is not None:
        state.disc_opt.t = int(header["opt_t"]["disc"])

    offset = head_size + header_len
    loaded = {}
    for name, shape, dtype in header["arrays"]:
        shape = tuple(int(s) for s in shape)
        dt = np.dtype(dtype)
        nbytes = int(np.prod(shape, dtype=np.int64)) * dt.itemsize
        if offset + nbytes > len(blob):
            raise CheckpointCorruptError(f"{path}: truncated array {name!r}")
        loaded[name] = np.frombuffer(
            blob, dtype=dt, count=int(np.prod(shape, dtype=np.int64)),
            offset=offset).reshape(shape).copy()
        offset += nbytes
    if offset != len(blob):
        raise CheckpointCorruptError(f"{path}: trailing bytes")

    if state.machine is not None:
        mach = header["machine"]
        state.machine.kernel = kernel_from_config(mach["kernel"])
        state.machine.restore(
            examples=loaded.pop("machine.examples"),
            coeffs=loaded.pop("machine.coeffs"),
            ids=loaded.pop("machine.ids"),
            offset=float(mach["offset"]),
            next_id=int(mach["next_id"]),
        )

    def fill_net(prefix, net, opt):
        for i, p in enumerate(net.params()):
            src = loaded.pop(f"{prefix}.p{i}")
            if src.shape != p.shape:
                raise CheckpointCorruptError(
                    f"{path}: shape mismatch for {prefix}.p{i}")
            p[...] = src
        for j, bn in enumerate(_bn_blocks(net)):
            bn.running_mean = loaded.pop(f"{prefix}.bn{j}.mean")
            bn.running_var = loaded.pop(f"{prefix}.bn{j}.var")
        for i in range(len(opt.m)):
            opt.m[i] = loaded.pop(f"{prefix}.opt.m{i}")
            opt.v[i] = loaded.pop(f"{prefix}.opt.v{i}")

    fill_net("gen", state.generator, state.gen_opt)
    if state.encoder is not None:
        fill_net("enc", state.encoder, state.enc_opt)
    if state.disc is not None:
        fill_net("disc", state.disc, state.disc_opt)
    if loaded:
        raise CheckpointCorruptError(
            f"{path}: unexpected arrays {sorted(loaded)}")
    return state
