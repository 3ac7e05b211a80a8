from dataclasses import dataclass, asdict
from typing import List

from ..errors import ConfigError


@dataclass(frozen = True)
class LayerSlice:
    weight_offset: int
    fan_in       : int
    fan_out      : int

    @property
    def weight_slice(self):
        return slice(self.weight_offset, self.bias_offset)

    @property
    def bias_offset(self):
        return self.weight_offset + self.fan_in * self.fan_out

    @property
    def bias_slice(self):
        return slice(self.bias_offset, self.end)

    @property
    def end(self):
        return self.bias_offset + self.fan_out


@dataclass(frozen = True)
class MLPConfig:
    input_dim      : int  = 1
    output_dim     : int  = 1
    hidden_layers  : int  = 2
    hidden_width   : int  = 64
    skip_connection: bool = False    # ...input_dim 1 broadcasts across outputs

    def __post_init__(self):
        for name in ('input_dim', 'output_dim', 'hidden_width'):
            if int(getattr(self, name)) < 1:
                raise ConfigError(f"{name} must be positive, got {getattr(self, name)}")
        if int(self.hidden_layers) < 0:
            raise ConfigError(f"hidden_layers must be non-negative, got {self.hidden_layers}")
        if self.skip_connection and self.input_dim not in (1, self.output_dim):
            raise ConfigError(
                f"skip connection needs input_dim 1 or input_dim == output_dim, "
                f"got {self.input_dim} -> {self.output_dim}"
            )

    @property
    def layer_dims(self) -> List[int]:
        return [self.input_dim] + [self.hidden_width] * self.hidden_layers + [self.output_dim]

    def layout(self) -> List[LayerSlice]:
        dims   = self.layer_dims
        layers = []
        offset = 0
        for fan_in, fan_out in zip(dims[:-1], dims[1:]):
            layer = LayerSlice(offset, fan_in, fan_out)
            layers.append(layer)
            offset = layer.end
        return layers

    @property
    def num_params(self):
        return self.layout()[-1].end

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, d):
        return cls(**{k: d[k] for k in ('input_dim', 'output_dim', 'hidden_layers', 'hidden_width', 'skip_connection') if k in d})


# The architecture of a network is described by its config.
NetworkSpec = MLPConfig
