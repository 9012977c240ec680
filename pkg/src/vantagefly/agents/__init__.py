from .ddpg import DdpgAgent, DdpgConfig
from .dddqn import DddqnAgent, DddqnConfig, DuelingQNet, discretize_action, encode_action
from .noise import OuNoise, decayed_sigma
from .pg import GaussianPolicy, PgAgent, PgConfig
from .pid import PidController, PidGains, pid_act
from .replay import EmptyBuffer, ReplayBuffer, Transition

__all__ = [
    "DdpgAgent", "DdpgConfig", "DddqnAgent", "DddqnConfig", "DuelingQNet",
    "discretize_action", "encode_action", "OuNoise", "decayed_sigma",
    "GaussianPolicy", "PgAgent", "PgConfig", "PidController", "PidGains",
    "pid_act", "EmptyBuffer", "ReplayBuffer", "Transition",
]
