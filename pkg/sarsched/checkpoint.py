# coding=utf-8
"""
Checkpoint files for trained policies.

A checkpoint is a numpy .npz archive holding every weight array under a
stable key plus a JSON metadata record (format version, layer sizes,
config hash, observation-normalizer state).

"""

import json
import logging
from pathlib import Path
from typing import Dict, Optional, Tuple, Union

import numpy as np

from .env import OBS_DIM
from .exceptions import CheckpointError
from .network import MLP, RunningNorm
from .agent import PolicyParams

log = logging.getLogger(__name__)
log.addHandler(logging.NullHandler())

FORMAT_VERSION = 1


def _mlp_arrays(prefix: str, net: MLP) -> Dict[str, np.ndarray]:
    out = {}
    for k, (w, b) in enumerate(zip(net.weights, net.biases)):
        out[f"{prefix}/W{k}"] = w
        out[f"{prefix}/b{k}"] = b
    return out


def save_checkpoint(path: Union[str, Path], params: PolicyParams, config_hash: str,
                    extra: Optional[dict] = None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    meta = {
        "format_version": FORMAT_VERSION,
        "policy_sizes": list(params.policy.sizes),
        "value_sizes": list(params.value.sizes),
        "config_hash": config_hash,
        "obs_norm": params.obs_norm is not None,
        "extra": extra or {},
    }
    arrays = {**_mlp_arrays("policy", params.policy), **_mlp_arrays("value", params.value)}
    if params.obs_norm is not None:
        arrays["obs_norm/mean"] = params.obs_norm.mean
        arrays["obs_norm/var"] = params.obs_norm.var
        arrays["obs_norm/count"] = np.array(params.obs_norm.count)
    with open(path, "wb") as fh:
        np.savez(fh, meta=np.array(json.dumps(meta, sort_keys=True)), **arrays)
    log.info("Saved checkpoint %s (config hash %s)", path, config_hash[:12])
    return path


def _load_mlp(data, prefix: str, sizes) -> MLP:
    net = MLP(sizes)
    for k in range(len(sizes) - 1):
        w, b = data[f"{prefix}/W{k}"], data[f"{prefix}/b{k}"]
        if w.shape != net.weights[k].shape or b.shape != net.biases[k].shape:
            raise CheckpointError(f"{prefix} layer {k} has shape {w.shape}, expected {net.weights[k].shape}")
        net.weights[k] = w.astype(np.float64)
        net.biases[k] = b.astype(np.float64)
    return net


def load_checkpoint(path: Union[str, Path], expected_hash: Optional[str] = None,
                    obs_dim: int = OBS_DIM) -> Tuple[PolicyParams, dict]:
    """Read a checkpoint; the observation normalizer comes back frozen."""
    path = Path(path)
    try:
        data = np.load(path, allow_pickle=False)
    except (OSError, ValueError) as e:
        raise CheckpointError(f"Cannot read checkpoint {path}: {e}") from e
    with data:
        try:
            meta = json.loads(str(data["meta"]))
        except KeyError:
            raise CheckpointError(f"{path} has no metadata record") from None
        if meta.get("format_version") != FORMAT_VERSION:
            raise CheckpointError(f"{path}: unsupported checkpoint version {meta.get('format_version')}")
        for key in ("policy_sizes", "value_sizes"):
            if meta[key][0] != obs_dim:
                raise CheckpointError(f"{path}: {key} expects {meta[key][0]} inputs, observations have {obs_dim}")
        try:
            policy = _load_mlp(data, "policy", meta["policy_sizes"])
            value = _load_mlp(data, "value", meta["value_sizes"])
        except KeyError as e:
            raise CheckpointError(f"{path}: missing array {e}") from None
        norm = None
        if meta["obs_norm"]:
            norm = RunningNorm(obs_dim)
            norm.mean = data["obs_norm/mean"].astype(np.float64)
            norm.var = data["obs_norm/var"].astype(np.float64)
            norm.count = float(data["obs_norm/count"])
            norm.frozen = True
    if expected_hash is not None and meta["config_hash"] != expected_hash:
        log.warning("Checkpoint %s was trained under config %s, evaluating under %s",
                    path, meta["config_hash"][:12], expected_hash[:12])
    return PolicyParams(policy=policy, value=value, obs_norm=norm), meta
