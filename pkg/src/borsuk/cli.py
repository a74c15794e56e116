"""Command line entry point: ``borsuk {ucs,partition,table1,lower,table2,solid}``."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__, lowerbound, render, solids3d, tables, ucs
from .optimizer import NoFeasibleResult, OptimizerConfig, SearchConfig, config_dict, search

log = logging.getLogger("borsuk")

EXIT_OK, EXIT_INFEASIBLE, EXIT_CONFIG, EXIT_IO = 0, 2, 3, 4
OUT_ENV = "BORSUK_OUT"


class ConfigError(ValueError):
    pass


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def dumps(obj) -> str:
    # repr floats round-trip exactly (at most 17 significant digits)
    return json.dumps(_plain(obj), indent=1, sort_keys=True) + "\n"


class Writer:
    """Serialised file output plus the run manifest."""

    def __init__(self, out: Path, command: str, argv: dict):
        self.out = out
        self.manifest = {"command": command, "args": argv, "version": __version__, "outputs": []}
        self.t0 = time.perf_counter()
        try:
            out.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise IOError(f"cannot create {out}: {exc}") from exc

    def write(self, name: str, text: str, **facts) -> Path:
        path = self.out / name
        path.write_text(text, encoding="utf-8")
        self.manifest["outputs"].append({"file": name, **facts})
        return path

    def close(self, **extra) -> None:
        self.manifest.update(extra)
        (self.out / f"manifest_{self.manifest['command']}.json").write_text(dumps(self.manifest))
        # wall time kept out of the JSON so reruns are byte-identical
        with open(self.out / "run.log", "a", encoding="utf-8") as fh:
            fh.write(f"{self.manifest['command']} {json.dumps(self.manifest['args'], sort_keys=True)} "
                     f"wall={time.perf_counter() - self.t0:.2f}s\n")


# -- commands ----------------------------------------------------------------

def cmd_ucs(args) -> int:
    w = Writer(args.out, "ucs", {})
    shapes = ucs.all_shapes()
    for s in shapes:
        w.write(f"{s.name}.json", ucs.dumps_shape(s) + "\n", shape=s.name)
    w.write("ucs_sheet.svg", render.sheet_svg([(s.name, s.polygon.vertices) for s in shapes]))
    w.close(shapes=[s.name for s in shapes])
    print(f"wrote {len(shapes)} shapes to {args.out}")
    return EXIT_OK


def _shapes_for(name: str):
    if name == "all":
        return ucs.build_s10()
    return [ucs.shape_by_name(n) for n in name.split(",")]


def run_partition(shapes, k: int, restarts: int, seed: int, jobs: int, w: Writer,
                  pack_steps: int = 1000) -> tuple[float | None, list[str]]:
    """Search every shape; returns (max rho over shapes or None, infeasible shape names)."""
    cfg = OptimizerConfig()
    worst = None
    failed = []
    for s in shapes:
        scfg = SearchConfig(k=k, restarts=restarts, pack_steps=pack_steps, seed=seed, jobs=jobs)
        base = f"{s.name}_k{k}_seed{seed}"
        try:
            res = search(s.polygon, scfg, cfg)
        except NoFeasibleResult as exc:
            failed.append(s.name)
            bad = exc.best_infeasible
            log.error("%s: %s", s.name, exc)
            if bad is not None:
                w.write(base + ".json", dumps({**bad.to_json(s.name), "config": config_dict(scfg, cfg)}),
                        shape=s.name, k=k, rho=None)
            continue
        data = {**res.to_json(s.name), "config": config_dict(scfg, cfg)}
        w.write(base + ".json", dumps(data), shape=s.name, k=k, rho=res.rho)
        w.write(base + ".svg", render.partition_svg(s.polygon.vertices, res.structure.X,
                                                    res.structure.parts,
                                                    f"{s.name}, k={k}, rho={res.rho:.6f}"))
        print(f"{s.name:>9}  k={k:<3} rho={res.rho:.6f}  restart={res.restart}")
        worst = res.rho if worst is None else max(worst, res.rho)
    return (None if failed else worst), failed


def cmd_partition(args) -> int:
    shapes = _shapes_for(args.shape)
    w = Writer(args.out, "partition", {"shape": args.shape, "k": args.k, "restarts": args.restarts,
                                       "seed": args.seed, "pack_steps": args.pack_steps})
    worst, failed = run_partition(shapes, args.k, args.restarts, args.seed, args.jobs, w,
                                  args.pack_steps)
    summary = {"k": args.k, "shapes": [s.name for s in shapes], "seed": args.seed,
               "restarts": args.restarts, "bound": worst, "infeasible": failed}
    w.write(f"summary_k{args.k}_seed{args.seed}.json", dumps(summary), bound=worst)
    w.close()
    if failed:
        print(f"infeasible: {', '.join(failed)}", file=sys.stderr)
        return EXIT_INFEASIBLE
    print(f"d_{args.k} <= {worst:.6f}")
    return EXIT_OK


def _krange(text: str) -> list[int]:
    try:
        if "-" in text:
            a, b = text.split("-")
            ks = list(range(int(a), int(b) + 1))
        else:
            ks = [int(x) for x in text.split(",")]
    except ValueError as exc:
        raise ConfigError(f"bad --k-range {text!r}: use 'a-b' or 'a,b,c'") from exc
    if not ks or min(ks) < 1:
        raise ConfigError(f"bad --k-range {text!r}")
    return ks


def cmd_table1(args) -> int:
    ks = _krange(args.k_range)
    w = Writer(args.out, "table1", {"k_range": args.k_range, "budget": args.budget, "seed": args.seed})
    uppers, lowers = {}, {}
    code = EXIT_OK
    for k in ks:
        worst, failed = run_partition(ucs.build_s10(), k, args.budget, args.seed, args.jobs, w,
                                      args.pack_steps)
        if failed:
            code = EXIT_INFEASIBLE
        elif worst is not None:
            uppers[k] = worst
        if k in lowerbound.SIGMA:
            lowers[k] = lowerbound.lower_bound(k).value
    rows = tables.table1_rows(uppers, lowers)
    w.write("table1.json", dumps(rows))
    w.close()
    print(tables.format_table1(rows))
    return code


def cmd_lower(args) -> int:
    try:
        lb = lowerbound.lower_bound(args.k)
    except lowerbound.UnsupportedCase as exc:
        raise ConfigError(str(exc)) from exc
    print(f"d_{args.k} >= {lb.value:.6f}  (binding case {lb.binding})")
    for name, val in lb.cases.items():
        print(f"  {name:>5}: {val:.6f}")
    for c in (1, 2):
        if (args.k, c) in lowerbound.J_INDEX:
            case = lowerbound.extremal_case(args.k, c)
            print(f"  c={c}: f(alpha_min, alpha_min, gamma_max) at sigma_k = {case.f:.6f}")
    if args.out_given:
        w = Writer(args.out, "lower", {"k": args.k})
        w.write(f"lower_k{args.k}.json", dumps(lb.to_json()), bound=lb.value)
        w.close()
    return EXIT_OK


def cmd_table2(args) -> int:
    rows = tables.table2_rows()
    print(tables.format_table2(rows))
    if args.out_given:
        w = Writer(args.out, "table2", {})
        w.write("table2.json", dumps(rows))
        w.close()
    return EXIT_OK


def cmd_solid(args) -> int:
    host = solids3d.build_trd()
    w = Writer(args.out, "solid", {"mode": args.mode, "budget": args.budget, "seed": args.seed})
    scfg = SearchConfig(k=4, restarts=args.budget, pack_steps=args.pack_steps, seed=args.seed,
                        jobs=args.jobs)
    w.write("trd.obj", host.to_obj())
    w.write("trd.json", dumps(host.to_json()))
    try:
        res = solids3d.search3d_planes(host, scfg)
        if args.mode == "cover":
            res = solids3d.search3d_cover(host, scfg, start=res)
    except NoFeasibleResult as exc:
        print(str(exc), file=sys.stderr)
        w.close()
        return EXIT_INFEASIBLE
    base = f"trd_{args.mode}_seed{args.seed}"
    w.write(base + ".json", dumps(res.to_json()), rho=res.rho)
    if args.mode == "planes":
        objs = []
        offset = 0
        for i, c in enumerate(res.cells):
            text = c.to_obj().splitlines()
            objs.append(f"o cell{i}")
            for line in text:
                if line.startswith("f "):
                    idx = [str(int(t) + offset) for t in line.split()[1:]]
                    objs.append("f " + " ".join(idx))
                else:
                    objs.append(line)
            offset += len(c.vertices)
        w.write(base + ".obj", "\n".join(objs) + "\n")
    w.close()
    print(f"d_3,4 <= {res.rho:.6f}")
    return EXIT_OK


# -- argument handling -----------------------------------------------------------

def read_config(path: Path) -> dict:
    out = {}
    for n, line in enumerate(path.read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{n}: expected key=value")
        key, val = (x.strip() for x in line.split("=", 1))
        out[key.replace("-", "_")] = val
    return out


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int)
    common.add_argument("--jobs", type=int)
    common.add_argument("--out", type=Path)
    common.add_argument("--config", type=Path, help="key=value file, overridden by flags")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="borsuk", description=__doc__)
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("ucs", parents=[common], help="write the covering shapes")
    sp = sub.add_parser("partition", parents=[common], help="search partitions of covering shapes")
    sp.add_argument("--shape", help="shape name(s), comma separated, or 'all' for S10")
    sp.add_argument("--k", type=int)
    sp.add_argument("--restarts", type=int)
    sp.add_argument("--pack-steps", type=int)
    st = sub.add_parser("table1", parents=[common], help="regenerate upper and lower bounds")
    st.add_argument("--k-range")
    st.add_argument("--budget", type=int, help="restarts per shape")
    st.add_argument("--pack-steps", type=int)
    sl = sub.add_parser("lower", parents=[common], help="lower bound for k in 10..12")
    sl.add_argument("--k", type=int)
    sub.add_parser("table2", parents=[common], help="extremal parameters of the lower bound")
    so = sub.add_parser("solid", parents=[common], help="3D partitions of the truncated rhombic dodecahedron")
    so.add_argument("--mode", choices=["planes", "cover"])
    so.add_argument("--budget", type=int, help="restarts")
    so.add_argument("--pack-steps", type=int)
    return p


DEFAULTS = {"seed": 0, "jobs": 1, "shape": "all", "k": 10, "restarts": 200, "pack_steps": 1000,
            "k_range": "10-17", "budget": 200, "mode": "planes"}
INT_KEYS = {"seed", "jobs", "k", "restarts", "pack_steps", "budget"}


def resolve(args: argparse.Namespace) -> argparse.Namespace:
    """Flags override the config file, which overrides the defaults."""
    conf = read_config(args.config) if args.config else {}
    args.out_given = args.out is not None or "out" in conf
    for key, default in DEFAULTS.items():
        if not hasattr(args, key):
            continue
        if getattr(args, key) is None:
            val = conf.get(key, default)
            if key in INT_KEYS:
                try:
                    val = int(val)
                except ValueError as exc:
                    raise ConfigError(f"{key} must be an integer, got {val!r}") from exc
            setattr(args, key, val)
    if args.out is None:
        args.out = Path(conf.get("out", os.environ.get(OUT_ENV, "borsuk_out")))
    for key in ("k", "restarts", "budget", "jobs", "pack_steps"):
        if hasattr(args, key) and getattr(args, key) < 1:
            raise ConfigError(f"--{key.replace('_', '-')} must be >= 1")
    if not 0 <= args.seed < 2**64:
        raise ConfigError("--seed must be a 64-bit unsigned integer")
    return args


COMMANDS = {"ucs": cmd_ucs, "partition": cmd_partition, "table1": cmd_table1,
            "lower": cmd_lower, "table2": cmd_table2, "solid": cmd_solid}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args = resolve(args)
        return COMMANDS[args.command](args)
    except (ConfigError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
