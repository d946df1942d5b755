from .episodes import (
    ACTION_DIM,
    DEFAULT_MAX_STEPS,
    EpisodeRecord,
    filter_trajectories,
    load_records,
    load_trajectories,
    records_from_doc,
    records_to_doc,
    run_episode,
    run_suite,
    save_records,
    save_trajectories,
)
from .protocol import (
    PROTOCOL_VERSION,
    AdapterClient,
    PipeTransport,
    RemoteEnv,
    SocketTransport,
    connect_tcp,
    decode_message,
    decode_observation,
    encode_message,
    encode_observation,
)
from .synthetic import SyntheticEnv, SyntheticEnvModel

__all__ = [
    "ACTION_DIM",
    "DEFAULT_MAX_STEPS",
    "PROTOCOL_VERSION",
    "AdapterClient",
    "EpisodeRecord",
    "PipeTransport",
    "RemoteEnv",
    "SocketTransport",
    "SyntheticEnv",
    "SyntheticEnvModel",
    "connect_tcp",
    "decode_message",
    "decode_observation",
    "encode_message",
    "encode_observation",
    "filter_trajectories",
    "load_records",
    "load_trajectories",
    "records_from_doc",
    "records_to_doc",
    "run_episode",
    "run_suite",
    "save_records",
    "save_trajectories",
]
