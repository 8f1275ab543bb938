"""Command line entry point: ``phasebench run|validate <config>``."""
import argparse
import json
import logging
import sys

from ..errors import CapExceededError, InvariantError
from .config import ConfigError, config_hash, load_config

EXIT_OK = 0
EXIT_OTHER = 1
EXIT_CONFIG = 2
EXIT_CAP = 3
EXIT_INVARIANT = 4


def _parser():
    p = argparse.ArgumentParser(prog="phasebench", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)
    for name, help_ in (("run", "run an experiment config"), ("validate", "check a config and print its hash")):
        s = sub.add_parser(name, help=help_)
        s.add_argument("config")
        s.add_argument("--seed", type=int)
        s.add_argument("--max-qubits", type=int, dest="max_qubits")
        s.add_argument("--cycle-time-s", type=float, dest="cycle_time_s")
        if name == "run":
            s.add_argument("--out", help="output directory (else $PHASEBENCH_OUT, else the config's)")
            s.add_argument("--threads", type=int, default=1)
    return p


def _fail(code, kind, exc):
    print(json.dumps({"error": kind, "message": str(exc), "exit_code": code}), file=sys.stderr)
    return code


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(asctime)s %(levelname)s %(message)s", stream=sys.stderr)
    overrides = {"seed": args.seed, "max_qubits": args.max_qubits, "cycle_time_s": args.cycle_time_s}
    try:
        cfg = load_config(args.config, overrides)
        if args.command == "validate":
            print(json.dumps({"valid": True, "kind": cfg.kind, "config_hash": config_hash(cfg)}))
            return EXIT_OK
        from .runner import run_experiment

        if args.threads < 1:
            raise ConfigError("threads: must be >= 1")
        run_experiment(cfg, args.out, args.threads)
    except ConfigError as exc:
        return _fail(EXIT_CONFIG, "config", exc)
    except FileNotFoundError as exc:
        return _fail(EXIT_CONFIG, "config", exc)
    except CapExceededError as exc:
        return _fail(EXIT_CAP, "cap_exceeded", exc)
    except InvariantError as exc:
        return _fail(EXIT_INVARIANT, "invariant", exc)
    except Exception as exc:  # noqa: BLE001
        return _fail(EXIT_OTHER, type(exc).__name__, exc)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
