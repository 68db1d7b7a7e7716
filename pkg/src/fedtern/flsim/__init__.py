"""Federated learning simulator: data, toy model, round loop, metrics."""

from .adversary import AdversaryEntry, inject_adversary, parse_plan, validate_plan
from .bus import SERVER, BusRecord, MessageBus
from .config import (ExperimentConfig, DataConfig, ModelConfig, apply_overrides,
                     config_from_dict, config_to_dict, load_config, save_config)
from .data import ToyDataset, make_blobs, partition_noniid, split_train_test
from .metrics import CSV_COLUMNS, RoundMetrics, metrics_to_csv, write_outputs
from .model import (evaluate_counts, init_model, local_train, logits,
                    loss_and_grads, model_nbytes, predict)
from .simulator import (RunResult, RunState, build_state, group_for_config,
                        run_experiment, run_round)

__all__ = [
    "AdversaryEntry", "inject_adversary", "parse_plan", "validate_plan",
    "SERVER", "BusRecord", "MessageBus",
    "ExperimentConfig", "DataConfig", "ModelConfig", "apply_overrides",
    "config_from_dict", "config_to_dict", "load_config", "save_config",
    "ToyDataset", "make_blobs", "partition_noniid", "split_train_test",
    "CSV_COLUMNS", "RoundMetrics", "metrics_to_csv", "write_outputs",
    "evaluate_counts", "init_model", "local_train", "logits",
    "loss_and_grads", "model_nbytes", "predict",
    "RunResult", "RunState", "build_state", "group_for_config",
    "run_experiment", "run_round",
]
