"""Command line entry point for the adapter."""

from __future__ import annotations

import argparse
import sys

from .binding import PatchBinding
from .demo import write_demo_assets
from .errors import AdapterError
from .server import AdapterServer, StubEnv, checksum_policy


def _parse_endpoint(text: str):
    if text == "stdio":
        return None
    host, sep, port = text.rpartition(":")
    if not sep or not port.isdigit():
        raise argparse.ArgumentTypeError(
            f"endpoint must be HOST:PORT or 'stdio', got {text!r}"
        )
    return (host or "127.0.0.1", int(port))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="policy-adapter",
        description=(
            "Serve the evaluation wire protocol: apply scene patches to "
            "native assets, forward observations to a policy, report the "
            "environment verdict.  Ships with a stub environment and a "
            "checksum policy; real deployments wire in their simulator "
            "through the library API."
        ),
    )
    parser.add_argument(
        "--endpoint",
        type=_parse_endpoint,
        default="127.0.0.1:0",
        help="HOST:PORT to listen on (port 0 picks a free port), or 'stdio'",
    )
    parser.add_argument("--asset-root", help="directory of native scene assets")
    parser.add_argument("--binding", help="JSON file mapping canonical paths to assets")
    parser.add_argument(
        "--stub-steps",
        type=int,
        default=3,
        help="steps until the stub environment reports success (default 3)",
    )
    parser.add_argument(
        "--stub-delay",
        type=float,
        default=0.0,
        help="seconds the stub environment stalls per step (default 0)",
    )
    parser.add_argument(
        "--connections",
        type=int,
        default=None,
        help="serve this many connections then exit (default: serve forever)",
    )
    parser.add_argument(
        "--write-demo-assets",
        metavar="DIR",
        help="write demo scene.xml, task.json, and binding.json to DIR and exit",
    )
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)

    if args.write_demo_assets:
        paths = write_demo_assets(args.write_demo_assets)
        for name, path in paths.items():
            print(f"{name}: {path}", file=sys.stderr)
        return 0

    if (args.asset_root is None) != (args.binding is None):
        print("--asset-root and --binding must be given together", file=sys.stderr)
        return 2
    binding = None
    if args.binding is not None:
        try:
            binding = PatchBinding.load(args.binding)
        except AdapterError as exc:
            print(f"cannot load binding: {exc}", file=sys.stderr)
            return 2

    def env_factory(task_id, instruction, scene_dir):
        return StubEnv(
            task_id,
            instruction,
            succeed_after=args.stub_steps,
            step_delay_s=args.stub_delay,
            scene_dir=scene_dir,
        )

    server = AdapterServer(
        env_factory, checksum_policy, asset_root=args.asset_root, binding=binding
    )

    if args.endpoint is None:
        server.serve_stdio(sys.stdin.buffer, sys.stdout.buffer)
        return 0

    def announce(bound):
        print(f"listening on {bound[0]}:{bound[1]}", file=sys.stderr, flush=True)

    host, port = args.endpoint
    try:
        server.serve_tcp(host, port, ready=announce, max_connections=args.connections)
    except KeyboardInterrupt:
        pass
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
