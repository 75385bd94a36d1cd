from cyclemimo.nn.checkpoint import load_network, network_from_bytes, network_to_bytes, save_network
from cyclemimo.nn.layers import LayerSpec, dense_forward
from cyclemimo.nn.network import NeuralNet, Trace, net_backward, net_forward
from cyclemimo.nn.optim import AdamState, adam_step

__all__ = [
    "AdamState",
    "LayerSpec",
    "NeuralNet",
    "Trace",
    "adam_step",
    "dense_forward",
    "load_network",
    "net_backward",
    "net_forward",
    "network_from_bytes",
    "network_to_bytes",
    "save_network",
]
