import json
import os

from dataclasses import dataclass
from typing import Optional

import numpy as np
import yaml

from safetensors import safe_open
from safetensors.numpy import save_file

from ..errors import ConfigError
from ..modeling.mlp import NetworkParams
from ..modeling.mlp_config import MLPConfig

import logging

logger = logging.getLogger(__name__)


@dataclass
class CheckpointState:
    params    : NetworkParams
    lam       : Optional[np.ndarray] = None
    lam_init  : Optional[np.ndarray] = None
    phase     : str   = ''
    pretrained: bool  = False
    problem   : str   = ''
    scheme    : str   = ''
    time_scale: float = 1.0


class Checkpoint:
    PARAMS_FILE = 'params.safetensors'
    SPEC_FILE   = 'network.yaml'

    def __init__(self):
        pass

    def save_spec(self, spec, path_spec):
        with open(path_spec, 'w') as fh:
            yaml.safe_dump(spec.to_dict(), fh, sort_keys = False)

    def load_spec(self, path_spec):
        with open(path_spec, 'r') as fh:
            return MLPConfig.from_dict(yaml.safe_load(fh))

    def save_params(self, state, path_params):
        tensors = { 'theta': np.ascontiguousarray(state.params.theta, dtype = '<f8') }
        if state.lam is not None:
            tensors['lambda']      = np.ascontiguousarray(state.lam, dtype = '<f8')
            tensors['lambda_init'] = np.ascontiguousarray(state.lam_init, dtype = '<f8')

        layout = [ dict(weight_offset = l.weight_offset, fan_in = l.fan_in, fan_out = l.fan_out,
                        bias_offset = l.bias_offset) for l in state.params.spec.layout() ]
        metadata = {
            'layout'     : json.dumps(layout),
            'phase'      : state.phase,
            'pretrained' : json.dumps(bool(state.pretrained)),
            'problem'    : state.problem,
            'scheme'     : state.scheme,
            'time_scale' : repr(float(state.time_scale)),
        }
        save_file(tensors, path_params, metadata = metadata)

    def load_params(self, spec, path_params):
        with safe_open(path_params, framework = 'numpy') as fh:
            metadata = fh.metadata() or {}
            tensors  = { k: fh.get_tensor(k) for k in fh.keys() }

        # The stored layout must describe the sidecar spec
        expected = [ [l.weight_offset, l.fan_in, l.fan_out] for l in spec.layout() ]
        stored   = [ [l['weight_offset'], l['fan_in'], l['fan_out']] for l in json.loads(metadata.get('layout', '[]')) ]
        if stored != expected:
            raise ConfigError(f"{path_params}: parameter layout does not match network {spec.layer_dims}")

        return CheckpointState(
            params     = NetworkParams(spec, tensors['theta']),
            lam        = tensors.get('lambda'),
            lam_init   = tensors.get('lambda_init'),
            phase      = metadata.get('phase', ''),
            pretrained = json.loads(metadata.get('pretrained', 'false')),
            problem    = metadata.get('problem', ''),
            scheme     = metadata.get('scheme', ''),
            time_scale = float(metadata.get('time_scale', '1.0')),
        )

    def save(self, model, path_checkpoint):
        """ A discovery or estimation model as a checkpoint directory. """
        os.makedirs(path_checkpoint, exist_ok = True)
        path_params = os.path.join(path_checkpoint, self.PARAMS_FILE)
        path_spec   = os.path.join(path_checkpoint, self.SPEC_FILE)

        scheme = '' if getattr(model, 'scheme', None) is None else model.scheme.name
        state  = CheckpointState(model.params, scheme = scheme)
        if hasattr(model, 'lam'):
            state.lam        = model.lam
            state.lam_init   = model.lam_init
            state.phase      = model.phase
            state.pretrained = model.pretrained
            state.problem    = model.problem_name
            state.time_scale = model.time_scale

        self.save_spec(model.spec, path_spec)
        self.save_params(state, path_params)
        logger.info(f"Saved checkpoint to {path_checkpoint}")
        return path_checkpoint

    def load(self, path_checkpoint):
        path_params = os.path.join(path_checkpoint, self.PARAMS_FILE)
        path_spec   = os.path.join(path_checkpoint, self.SPEC_FILE)

        spec  = self.load_spec(path_spec)
        state = self.load_params(spec, path_params)
        logger.info(f"Loaded checkpoint from {path_checkpoint} (phase '{state.phase}', pretrained {state.pretrained})")
        return state
