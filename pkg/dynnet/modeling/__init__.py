from .mlp_config import MLPConfig, NetworkSpec
from .mlp        import MLP, NetworkParams, init_network
from .models     import DiscoveryModel, EstimationModel
