"""Deterministic in-process federated learning rounds.

Four pipelines share the same data, model init, and per-client training
randomness (all derived from the experiment seed, independent of pipeline):

* ``plain``           classic federated averaging of raw parameter deltas;
* ``quant_only``      ternary quantization, exact per-client weighted sum;
* ``quant_approx``    ternary quantization with the scalars fixed-point
                      encoded and summed separately from the directions, no
                      encryption (plaintext shadow of the encrypted path);
* ``full_encrypted``  per-round key generation, scalar encryption, server
                      side ciphertext products, threshold decryption and
                      integer recovery.

The ternarized object is the negated local delta (global minus trained),
so the server's ``theta - s * summed_dirs`` step moves downhill.
"""

from __future__ import annotations

import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .. import ahe, quant
from ..codec import EncodingConfig, decode
from ..errors import AbortInsufficientQual, ProtocolAbort
from ..fkg import FkgClient, FkgTranscript, decryption_lagrange, run_fkg
from ..group import GroupParams, generate_params
from ..seeds import derive_int, derive_rng
from ..wire import ciphertext_nbytes, element_width
from . import model as toy_model
from .adversary import PHASE_DECRYPT, PHASE_FKG, inject_adversary, parse_plan, validate_plan
from .bus import SERVER, MessageBus
from .config import ENCRYPTED_PIPELINES, ExperimentConfig
from .data import ToyDataset, make_blobs, partition_noniid, split_train_test
from .metrics import RoundMetrics

WORKERS_ENV = "FEDTERN_WORKERS"

# Recovery search ceiling: scalars beyond this magnitude mean the run has
# diverged, so the linear search gives up instead of walking toward q.
_MAX_SCALAR_MAGNITUDE = 4096

_group_cache: dict[tuple, GroupParams] = {}


def group_for_config(cfg: ExperimentConfig) -> GroupParams:
    key = (cfg.key_bits, cfg.group_bits, cfg.seed)
    if key not in _group_cache:
        _group_cache[key] = generate_params(
            cfg.key_bits, cfg.group_bits, seed=f"fedtern-group-{cfg.seed}")
    return _group_cache[key]


@dataclass
class RunState:
    cfg: ExperimentConfig
    dataset: ToyDataset
    train_idx: dict[int, np.ndarray]
    test_idx: dict[int, np.ndarray]
    theta: list[np.ndarray]
    params: GroupParams | None
    enc_cfg: EncodingConfig | None
    plan: tuple
    transcript: list[dict] = field(default_factory=list)
    fkg_events: list[dict] = field(default_factory=list)
    key_cache: tuple[FkgTranscript, dict[int, int]] | None = None
    server_reads: list[str] = field(default_factory=list)


@dataclass
class RunResult:
    metrics: list[RoundMetrics]
    summary: dict
    transcript: list[dict]
    final_theta: list[np.ndarray]

    @property
    def final_accuracy(self) -> float:
        return self.metrics[-1].test_accuracy


def build_state(cfg: ExperimentConfig) -> RunState:
    cfg.validate()
    plan = parse_plan(cfg.adversary_plan)
    n = cfg.n_participants()
    validate_plan(plan, cfg.N, cfg.threshold_for(n))
    if cfg.reuse_keys and cfg.C < 1:
        raise ValueError("reuse_keys requires full participation (C = 1)")

    d = cfg.data
    data_rng = np.random.default_rng(derive_int(cfg.seed, "data"))
    X, y = make_blobs(d.classes, d.features, cfg.N * d.samples_per_client,
                      d.separation, d.noise, data_rng)
    dataset = partition_noniid(X, y, cfg.N, d.classes_per_client, data_rng)
    train_idx, test_idx = {}, {}
    for k in range(cfg.N):
        split_rng = np.random.default_rng(derive_int(cfg.seed, "split", k))
        train_idx[k], test_idx[k] = split_train_test(
            dataset.partition[k], d.test_fraction, split_rng)

    params = group_for_config(cfg) if cfg.pipeline in ENCRYPTED_PIPELINES else None
    enc_cfg = EncodingConfig(b=cfg.b, q=params.q) if params is not None else None
    init_rng = np.random.default_rng(derive_int(cfg.seed, "init"))
    theta = toy_model.init_model(d.features, cfg.model.hidden, d.classes, init_rng)
    return RunState(cfg=cfg, dataset=dataset, train_idx=train_idx, test_idx=test_idx,
                    theta=theta, params=params, enc_cfg=enc_cfg, plan=plan)


def _participants(cfg: ExperimentConfig, round_no: int) -> list[int]:
    if cfg.n_participants() >= cfg.N:
        return list(range(cfg.N))
    rng = derive_rng(cfg.seed, "participants", round_no)
    return sorted(rng.sample(range(cfg.N), cfg.n_participants()))


def _worker_count() -> int:
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        return 1


def _map_clients(fn: Callable, ids: list[int]) -> list:
    workers = _worker_count()
    if workers == 1 or len(ids) <= 1:
        return [fn(i) for i in ids]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, ids))  # order preserved; rngs pre-assigned per client


def _train_deltas(state: RunState, contributors: list[int], round_no: int,
                  eta_t: float) -> dict[int, list[np.ndarray]]:
    cfg = state.cfg
    X, y = state.dataset.features, state.dataset.labels

    def train_one(client_id: int):
        idx = state.train_idx[client_id]
        rng = np.random.default_rng(derive_int(cfg.seed, "train", round_no, client_id))
        return toy_model.local_train(state.theta, X[idx], y[idx],
                                     cfg.E, cfg.batch_size, eta_t, rng)

    return dict(zip(contributors, _map_clients(train_one, contributors)))


def _evaluate(state: RunState) -> float:
    X, y = state.dataset.features, state.dataset.labels
    correct = total = 0
    for k in range(state.cfg.N):
        idx = state.test_idx[k]
        c, t = toy_model.evaluate_counts(state.theta, X[idx], y[idx])
        correct += c
        total += t
    return correct / total


def _ternarize_client(state: RunState, delta: list[np.ndarray], round_no: int,
                      client_id: int) -> list[quant.TernaryGradient]:
    rng = np.random.default_rng(derive_int(state.cfg.seed, "tern", round_no, client_id))
    # negate: ternary directions describe the descent step the server subtracts
    return [quant.ternarize(-d, rng) for d in delta]


def _weights(state: RunState, participants: list[int],
             contributors: list[int]) -> tuple[dict[int, int], int]:
    sizes = {i: len(state.train_idx[participants[i - 1]]) for i in contributors}
    return sizes, sum(sizes.values())


def run_round(state: RunState, cfg: ExperimentConfig, round_no: int) -> RoundMetrics:
    """Execute one communication round and append to the state's transcript."""
    eta_t = cfg.eta * cfg.lr_decay ** round_no
    bus = MessageBus()
    if cfg.pipeline == "plain":
        row = _round_plain(state, cfg, round_no, eta_t, bus)
    elif cfg.pipeline == "quant_only":
        row = _round_quant(state, cfg, round_no, eta_t, bus, approx=False)
    elif cfg.pipeline == "quant_approx":
        row = _round_quant(state, cfg, round_no, eta_t, bus, approx=True)
    elif cfg.pipeline == "full_encrypted":
        row = _round_encrypted(state, cfg, round_no, eta_t, bus)
    else:
        raise ValueError(f"unknown pipeline {cfg.pipeline!r}")
    for rec in bus.transcript_rows():
        rec["round"] = round_no
        state.transcript.append(rec)
    state.server_reads.extend(bus.server_reads)
    return row


def _broadcast_model(state: RunState, bus: MessageBus, receivers, extra: int = 0):
    nbytes = toy_model.model_nbytes(state.theta) + extra
    for i in receivers:
        bus.record(phase="download", kind="model_download", sender=SERVER,
                   receiver=i, nbytes=nbytes)


def _round_plain(state, cfg, round_no, eta_t, bus) -> RoundMetrics:
    participants = _participants(cfg, round_no)
    contributors = list(range(1, len(participants) + 1))
    _broadcast_model(state, bus, contributors)
    t0 = time.perf_counter()
    deltas = _train_deltas(state, [participants[i - 1] for i in contributors],
                           round_no, eta_t)
    t_train = time.perf_counter() - t0
    sizes, n_total = _weights(state, participants, contributors)
    for i in contributors:
        bus.record(phase="upload", kind="model_delta", sender=i, receiver=SERVER,
                   nbytes=toy_model.model_nbytes(state.theta))
    new_theta = [t.copy() for t in state.theta]
    for i in contributors:
        w = sizes[i] / n_total
        for t, d in zip(new_theta, deltas[participants[i - 1]]):
            t += w * d
    state.theta = new_theta
    return _metrics_row(state, bus, round_no, t_train, 0.0, 0.0, 0.0, encrypted=False)


def _round_quant(state, cfg, round_no, eta_t, bus, approx: bool) -> RoundMetrics:
    participants = _participants(cfg, round_no)
    contributors = list(range(1, len(participants) + 1))
    _broadcast_model(state, bus, contributors)
    t0 = time.perf_counter()
    deltas = _train_deltas(state, [participants[i - 1] for i in contributors],
                           round_no, eta_t)
    t_train = time.perf_counter() - t0
    sizes, n_total = _weights(state, participants, contributors)
    L = len(state.theta)

    t0 = time.perf_counter()
    terns: dict[int, list[quant.TernaryGradient]] = {}
    encoded: dict[int, list[int]] = {}
    for i in contributors:
        pid = participants[i - 1]
        terns[i] = _ternarize_client(state, deltas[pid], round_no, pid)
        if approx:
            encoded[i] = [quant.scale_and_encode(t.s, sizes[i], n_total, state.enc_cfg)
                          for t in terns[i]]
        tern_nbytes = sum(quant.ternary_nbytes(t.dirs.size) for t in terns[i])
        scalar_nbytes = (L * ((state.enc_cfg.q.bit_length() + 7) // 8)
                         if approx else L * 8)
        bus.record(phase="upload", kind="encoded_scalar" if approx else "raw_scalar",
                   sender=i, receiver=SERVER, nbytes=scalar_nbytes)
        bus.record(phase="upload", kind="ternary", sender=i, receiver=SERVER,
                   nbytes=tern_nbytes)
    t_enc = time.perf_counter() - t0

    if approx:
        # shadow of the encrypted path: summed encodings, summed directions
        new_theta = []
        for t_i in range(L):
            dirs_sum = quant.aggregate_ternary([terns[i][t_i].dirs for i in contributors])
            m_sum = sum(encoded[i][t_i] for i in contributors) % state.enc_cfg.q
            s_global = decode(m_sum, state.enc_cfg)
            new_theta.append(state.theta[t_i] - s_global * dirs_sum)
        state.theta = new_theta
    else:
        # exact per-client weighting of s * dirs
        new_theta = [t.copy() for t in state.theta]
        for i in contributors:
            w = sizes[i] / n_total
            for t_i in range(L):
                new_theta[t_i] = new_theta[t_i] - w * terns[i][t_i].s * terns[i][t_i].dirs
        state.theta = new_theta
    return _metrics_row(state, bus, round_no, t_train, t_enc, 0.0, 0.0, encrypted=False)


def _round_encrypted(state, cfg, round_no, eta_t, bus) -> RoundMetrics:
    participants = _participants(cfg, round_no)
    n = len(participants)
    T = cfg.threshold_for(n)
    params = state.params
    proto_of = {pid: i + 1 for i, pid in enumerate(participants)}
    fkg_plan = {proto_of[c]: b for c, b in inject_adversary(state.plan, PHASE_FKG).items()
                if c in proto_of}

    if cfg.reuse_keys and state.key_cache is not None:
        transcript, x_shares = state.key_cache
    else:
        transcript = None
        for attempt in range(cfg.fkg_retries):
            clients = [FkgClient(index=i + 1, params=params, T=T,
                                 rng=derive_rng(cfg.seed, "fkg", round_no, attempt, i + 1))
                       for i in range(n)]
            try:
                transcript = run_fkg(clients, T, params, adversary_plan=fkg_plan,
                                     bus=bus, round_no=round_no)
                break
            except AbortInsufficientQual:
                continue
        if transcript is None:
            raise ProtocolAbort(
                f"key generation failed {cfg.fkg_retries} times in round {round_no}")
        x_shares = {c.index: c.x_i for c in clients}
        if cfg.reuse_keys:
            state.key_cache = (transcript, x_shares)
    state.fkg_events.append({
        "round": round_no,
        "participants": participants,
        "qual": sorted(transcript.qual),
        "disqualified": sorted(transcript.disqualified),
        "reconstructed": sorted(transcript.reconstructed),
    })

    pk = transcript.h
    qual = sorted(transcript.qual)
    contributors = qual
    _broadcast_model(state, bus, contributors, extra=element_width(params))
    sizes, n_total = _weights(state, participants, contributors)
    L = len(state.theta)

    t0 = time.perf_counter()
    deltas = _train_deltas(state, [participants[i - 1] for i in contributors],
                           round_no, eta_t)
    t_train = time.perf_counter() - t0

    t0 = time.perf_counter()
    upload_ct: dict[int, list[ahe.Ciphertext]] = {}
    upload_dirs: dict[int, list[np.ndarray]] = {}
    ct_nb = ciphertext_nbytes(params)
    for i in contributors:
        pid = participants[i - 1]
        terns = _ternarize_client(state, deltas[pid], round_no, pid)
        enc_rng = derive_rng(cfg.seed, "enc", round_no, pid)
        ms = [quant.scale_and_encode(t.s, sizes[i], n_total, state.enc_cfg) for t in terns]
        upload_ct[i] = [ahe.encrypt(params, pk, m, enc_rng) for m in ms]
        upload_dirs[i] = [t.dirs for t in terns]
        for ct in upload_ct[i]:
            bus.record(phase="upload", kind="ciphertext", sender=i, receiver=SERVER,
                       nbytes=ct_nb)
        bus.record(phase="upload", kind="ternary", sender=i, receiver=SERVER,
                   nbytes=sum(quant.ternary_nbytes(d.size) for d in upload_dirs[i]))
    t_enc = time.perf_counter() - t0

    agg_cts = [ahe.aggregate(params, [upload_ct[i][t_i] for i in contributors])
               for t_i in range(L)]
    dirs_sums = [quant.aggregate_ternary([upload_dirs[i][t_i] for i in contributors])
                 for t_i in range(L)]

    dropouts = {proto_of[c] for c in inject_adversary(state.plan, PHASE_DECRYPT)
                if c in proto_of}
    pool = [i for i in qual if i not in dropouts]
    if len(pool) < T:
        raise ProtocolAbort(f"only {len(pool)} responsive shareholders, need {T}")
    sel_rng = derive_rng(cfg.seed, "select", round_no)
    subset = sorted(sel_rng.sample(pool, T))
    lambdas = decryption_lagrange(subset, params.q)

    t0 = time.perf_counter()
    partials: list[list[ahe.PartialDecryption]] = [[] for _ in range(L)]
    el_nb = element_width(params)
    for i in subset:
        for t_i in range(L):
            bus.record(phase="decrypt", kind="agg_ciphertext", sender=SERVER,
                       receiver=i, nbytes=ct_nb)
        for t_i in range(L):
            pd = ahe.partial_decrypt(params, agg_cts[t_i], client=i,
                                     x_i=x_shares[i], lambda_i=lambdas[i], T=T)
            partials[t_i].append(pd)
            bus.record(phase="decrypt", kind="partial_decryption", sender=i,
                       receiver=SERVER, nbytes=el_nb)
    t_dec = time.perf_counter() - t0

    t0 = time.perf_counter()
    bound = min(params.q - 1, T * (n + (1 << cfg.b) * _MAX_SCALAR_MAGNITUDE))
    recovered = [ahe.decrypt_aggregate(params, agg_cts[t_i], partials[t_i], T,
                                       recovery_mode=cfg.recovery_mode, max_m=bound)
                 for t_i in range(L)]
    t_rec = time.perf_counter() - t0

    state.theta = quant.apply_global_update(state.theta, dirs_sums, recovered, T,
                                            state.enc_cfg, eta=cfg.server_eta)
    return _metrics_row(state, bus, round_no, t_train, t_enc, t_dec, t_rec,
                        encrypted=True)


def _metrics_row(state, bus, round_no, t_train, t_enc, t_dec, t_rec,
                 encrypted: bool) -> RoundMetrics:
    L = len(state.theta)
    return RoundMetrics(
        round=round_no,
        test_accuracy=_evaluate(state),
        bytes_enc_upload=bus.nbytes(phase="upload",
                                    kinds={"ciphertext", "ternary", "encoded_scalar",
                                           "raw_scalar"}),
        bytes_enc_upload_ct=bus.nbytes(phase="upload", kinds={"ciphertext"}),
        bytes_dec_download=bus.nbytes(phase="decrypt", kinds={"agg_ciphertext"}),
        bytes_dec_upload=bus.nbytes(phase="decrypt", kinds={"partial_decryption"}),
        ct_enc_per_client=2 * L if encrypted else 0,
        ct_dec_per_decryptor=3 * L if encrypted else 0,
        time_train=t_train, time_encrypt=t_enc, time_decrypt=t_dec, time_recover=t_rec)


def run_experiment(cfg: ExperimentConfig) -> RunResult:
    """Run all configured rounds and assemble the summary."""
    state = build_state(cfg)
    rows = [run_round(state, cfg, t) for t in range(cfg.rounds)]
    L = len(state.theta)
    encrypted = cfg.pipeline == "full_encrypted"
    summary = {
        "pipeline": cfg.pipeline,
        "seed": cfg.seed,
        "rounds": cfg.rounds,
        "tensors": L,
        "final_test_accuracy": rows[-1].test_accuracy,
        "ciphertexts_per_client": f"{2 * L}+{3 * L}" if encrypted else "0+0",
        "per_client": {
            "enc_upload_ct_bytes": L * ciphertext_nbytes(state.params) if encrypted else 0,
            "dec_download_bytes": L * ciphertext_nbytes(state.params) if encrypted else 0,
            "dec_upload_bytes": L * element_width(state.params) if encrypted else 0,
        },
        "group": None if state.params is None else {
            "p_bits": state.params.p.bit_length(),
            "q_bits": state.params.q.bit_length(),
            "g0_in_subgroup": state.params.g0_in_subgroup,
        },
        "fkg": state.fkg_events,
        "server_private_reads": list(state.server_reads),
        "timings": [{
            "round": r.round, "train": r.time_train, "encrypt": r.time_encrypt,
            "decrypt": r.time_decrypt, "recover": r.time_recover} for r in rows],
        "accuracy_by_round": [r.test_accuracy for r in rows],
    }
    return RunResult(metrics=rows, summary=summary,
                     transcript=state.transcript, final_theta=state.theta)
