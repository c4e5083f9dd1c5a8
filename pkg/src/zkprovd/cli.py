"""``zkprovd`` command: run the proving service or the verifier stub.

Service settings resolve flag > environment (``ZKPROVD_<NAME>``, e.g.
``ZKPROVD_WORKERS``) > built-in default.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import uvicorn

from .encoding import circuit_id, decode_circuit
from .errors import ZkProvdError
from .service import ProvingService, create_app
from .service import config as service_config


def serve(args) -> int:
    cfg = service_config.resolve(args)
    service = ProvingService(cfg)
    if args.rescan:
        n = service.registry.rescan()
        logging.getLogger("zkprovd").info("registry holds %d circuits", n)
    uvicorn.run(create_app(service), host=cfg.host, port=cfg.port, log_level=args.log_level)
    return 0


def verifier(args) -> int:
    from .verifier import create_verifier_app

    uvicorn.run(create_verifier_app(args.registry_root), host=args.host, port=args.port, log_level=args.log_level)
    return 0


def show_id(args) -> int:
    print(circuit_id(decode_circuit(Path(args.file).read_bytes())))
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="zkprovd")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("serve", help="run the proving service")
    service_config.add_arguments(p)
    p.add_argument("--rescan", action="store_true", help="clean and count the registry directory before serving")
    p.add_argument("--log-level", default="warning")
    p.set_defaults(func=serve)

    p = sub.add_parser("verifier", help="run the verifier service over a registry root (read-only)")
    p.add_argument("--registry-root", required=True)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8081)
    p.add_argument("--log-level", default="warning")
    p.set_defaults(func=verifier)

    p = sub.add_parser("circuit-id", help="print the content id of an .ecs.json file")
    p.add_argument("file")
    p.set_defaults(func=show_id)

    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO, format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ZkProvdError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
