"""Command-line entry point: run a sweep and write ``<out>.csv`` + ``<out>.manifest``."""
import argparse
import csv
import io
import json
import logging
import sys
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from .config import emit_config, parse_config, preset
from .errors import ConfigError
from .scenario import resolve_threads, run_sweep

log = logging.getLogger("emfe_ris")

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2


def fmt(x):
    return f"{x:.9g}"


def emit_csv(result):
    """One row per sweep value (ascending), three columns per method."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    header = ["sweep_value"]
    for m in result.methods:
        header += [f"{m}_rate_bps", f"{m}_stderr", f"{m}_violations"]
    w.writerow(header)
    order = sorted(range(len(result.sweep_values)), key=lambda i: result.sweep_values[i])
    for i in order:
        row = [fmt(result.sweep_values[i])]
        for j in range(len(result.methods)):
            row += [fmt(result.mean[i, j]), fmt(result.stderr[i, j]), str(int(result.violations[i, j]))]
        w.writerow(row)
    return buf.getvalue()


def parse_csv(text):
    """Read back ``emit_csv`` output as ``{column: [float, ...]}``."""
    rows = list(csv.reader(io.StringIO(text)))
    header, body = rows[0], rows[1:]
    return {h: [float(r[k]) for r in body] for k, h in enumerate(header)}


def load_config(path, base=None):
    """A TOML scenario document, or a ``.manifest`` from an earlier run."""
    text = Path(path).read_text()
    if Path(path).suffix == ".manifest":
        try:
            text = json.loads(text)["config"]
        except (ValueError, KeyError) as exc:
            raise ConfigError(f"{path}: not a run manifest ({exc})") from exc
        base = None
    return parse_config(text, base=base)


def build_manifest(config, started, finished, threads):
    return {
        "artifact": "emfe_ris",
        "version": __version__,
        "seed": config.seed,
        "config_hash": config.digest(),
        "config": emit_config(config),
        "threads": threads,
        "started": started,
        "finished": finished,
    }


def _parser():
    p = argparse.ArgumentParser(prog="emfe-ris", description=__doc__)
    p.add_argument("--config", type=Path, help="TOML scenario document or .manifest file")
    p.add_argument("--preset", choices=("fig4", "fig5", "fig6"))
    p.add_argument("--seed", type=int, help="master seed (u64)")
    p.add_argument("--out", default="sweep", help="output prefix (default: sweep)")
    p.add_argument("--trials", type=int, help="Monte Carlo trials per sweep point")
    p.add_argument("--threads", default="1", help="worker processes, or 'auto'")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def resolve(args):
    base = preset(args.preset) if args.preset else None
    if args.config is not None:
        config = load_config(args.config, base=base)
    else:
        config = base if base is not None else parse_config("")
    overrides = []
    if args.seed is not None:
        if not 0 <= args.seed < 2**64:
            raise ConfigError("--seed must be an unsigned 64-bit integer")
        overrides.append(f"seed = {args.seed}")
    if args.trials is not None:
        overrides.append(f"trials = {args.trials}")
    if overrides:
        config = parse_config("\n".join(overrides), base=config)
    return config


def main(argv=None):
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        config = resolve(args)
        threads = resolve_threads(None if args.threads == "auto" else int(args.threads))
    except (ConfigError, OSError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    try:
        started = datetime.now(timezone.utc).isoformat()
        result = run_sweep(config, threads=threads)
        finished = datetime.now(timezone.utc).isoformat()
        out = Path(args.out)
        out.parent.mkdir(parents=True, exist_ok=True)
        Path(f"{out}.csv").write_text(emit_csv(result))
        Path(f"{out}.manifest").write_text(
            json.dumps(build_manifest(config, started, finished, threads), indent=2) + "\n")
    except Exception as exc:  # noqa: BLE001 - any failure past config is a runtime error
        log.exception("sweep failed")
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    log.info("wrote %s.csv and %s.manifest", args.out, args.out)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
