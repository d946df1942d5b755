"""Bridge between the evaluation wire protocol and simulator-native assets.

The evaluation harness streams scene patches and observations over a
line-delimited JSON protocol; this package applies the patches to native
scene files through a declarative binding, forwards observations to a
policy, and reports the environment's verdict.  It depends only on the
wire contract and the patch text format, not on the harness codebase.
"""

from .binding import (
    UNSUPPORTED,
    PatchBinding,
    apply_patch_native,
    format_value,
    parse_patch,
)
from .demo import DEMO_BINDING, write_demo_assets
from .errors import (
    AdapterError,
    BindingError,
    PatchFormatError,
    UnboundPathError,
    WireError,
)
from .server import ACTION_DIM, AdapterServer, StepOutcome, StubEnv, checksum_policy
from .wire import MESSAGE_TYPES, PROTOCOL_VERSION

__all__ = [
    "ACTION_DIM",
    "AdapterError",
    "AdapterServer",
    "BindingError",
    "DEMO_BINDING",
    "MESSAGE_TYPES",
    "PROTOCOL_VERSION",
    "PatchBinding",
    "PatchFormatError",
    "StepOutcome",
    "StubEnv",
    "UNSUPPORTED",
    "UnboundPathError",
    "WireError",
    "apply_patch_native",
    "checksum_policy",
    "format_value",
    "parse_patch",
    "write_demo_assets",
]
