"""Command-line pipeline: prep, train, eval, account, sweep.

Settings resolve as command-line flags > ``DPGEMB_*`` environment variables >
``--config`` key-value file > built-in defaults.
"""

from __future__ import annotations

import argparse
import csv
import logging
import os
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from . import accountant as acct
from .evaluation import auc, split_links, struc_equ
from .graph import read_edge_list, write_relabel_map
from .io import (
    ensure_dir,
    file_digest,
    load_embedding,
    read_kv,
    save_embedding_binary,
    save_embedding_text,
    write_kv,
)
from .proximity import (
    compute_proximity,
    load_proximity,
    negative_weights,
    sampler_mass_violations,
    save_proximity,
)
from .sampler import SamplingError, generate_subgraphs, read_subgraphs, write_subgraphs
from .trainer import BudgetError, TrainConfig, TrainingError, train

logger = logging.getLogger("dpgemb")

ENV_PREFIX = "DPGEMB_"
TASK_EPOCHS = {"strucequ": 200, "linkpred": 2000}
CSV_FIELDS = [
    "run_id", "version", "epsilon", "mode", "proximity", "metric", "mean", "stddev", "n_seeds",
]

# key -> (type, default)
SETTINGS = {
    "input": (str, None),
    "relabel": ("bool", False),
    "proximity": (str, "deepwalk"),
    "window": (int, 10),
    "k": (int, 5),
    "B": (int, 128),
    "C": (float, 2.0),
    "sigma": (float, 5.0),
    "eta": (float, 0.1),
    "r": (int, 128),
    "n_epoch": (int, None),
    "eps": (float, 3.5),
    "delta": (float, 1e-5),
    "sensitivity": (float, None),
    "mode": (str, "nonzero"),
    "neg_weighting": (str, "theoretical"),
    "reject_neighbors": ("bool", True),
    "both_directions": ("bool", False),
    "resample_negatives": ("bool", False),
    "strict_accounting": ("bool", False),
    "seed": (int, 0),
    "task": (str, "strucequ"),
    "test_fraction": (float, 0.1),
    "binary": ("bool", False),
    "cache_dir": (str, None),
    "out": (str, None),
}


class CliError(RuntimeError):
    pass


def _parse_bool(text: str) -> bool:
    low = str(text).strip().lower()
    if low in {"1", "true", "yes", "on"}:
        return True
    if low in {"0", "false", "no", "off"}:
        return False
    raise CliError(f"not a boolean: {text!r}")


def _convert(key: str, value):
    kind = SETTINGS[key][0]
    if value is None:
        return None
    if kind == "bool":
        return value if isinstance(value, bool) else _parse_bool(value)
    return kind(value)


def resolve_settings(flags: dict, config_path: str | None = None, environ=None) -> dict:
    environ = os.environ if environ is None else environ
    settings = {key: default for key, (_, default) in SETTINGS.items()}
    if config_path:
        for key, value in read_kv(config_path).items():
            if key not in SETTINGS:
                raise CliError(f"unknown config key {key!r}")
            settings[key] = _convert(key, value)
    for key in SETTINGS:
        env_key = ENV_PREFIX + key.upper()
        if env_key in environ:
            settings[key] = _convert(key, environ[env_key])
    for key, value in flags.items():
        if key in SETTINGS and value is not None:
            settings[key] = _convert(key, value)
    if settings["n_epoch"] is None:
        settings["n_epoch"] = TASK_EPOCHS.get(settings["task"], 200)
    return settings


def train_config(s: dict) -> TrainConfig:
    return TrainConfig(
        eta=s["eta"], B=s["B"], C=s["C"], sigma=s["sigma"], k=s["k"], r=s["r"],
        n_epoch=s["n_epoch"], eps_target=s["eps"], delta=s["delta"],
        sensitivity=s["sensitivity"], mode=s["mode"], neg_weighting=s["neg_weighting"],
        reject_neighbors=s["reject_neighbors"], both_directions=s["both_directions"],
        resample_negatives=s["resample_negatives"], strict_accounting=s["strict_accounting"],
        seed=s["seed"],
    )


def _require_input(s: dict) -> Path:
    if not s["input"]:
        raise CliError("an --input edge list is required")
    return Path(s["input"])


def _prepare(g, s: dict):
    P = compute_proximity(g, s["proximity"], s["window"])
    samples = generate_subgraphs(
        g, s["k"], seed=s["seed"], reject=s["reject_neighbors"],
        both_directions=s["both_directions"],
    )
    return P, samples


# ---------------------------------------------------------------------------
# commands


def cmd_prep(s: dict) -> int:
    g = read_edge_list(_require_input(s), relabel=s["relabel"])
    out = ensure_dir(s["out"] or "prep")
    P = compute_proximity(g, s["proximity"], s["window"])
    save_proximity(P, out / "proximity.bin")
    if g.labels is not None:
        with open(out / "relabel_map.tsv", "w", encoding="utf-8") as fh:
            write_relabel_map(g, fh)
    print(f"nodes={g.num_nodes} edges={g.num_edges} self_loops_dropped={g.self_loops_dropped}")
    print(f"min(P)={P.min_positive:.6g}")
    print(f"sampling_mass_violations={sampler_mass_violations(P).size}")
    sys.stdout.flush()

    samples = generate_subgraphs(
        g, s["k"], seed=s["seed"], reject=s["reject_neighbors"],
        both_directions=s["both_directions"],
    )
    with open(out / "subgraphs.txt", "w", encoding="utf-8") as fh:
        write_subgraphs(samples, fh)
    w = negative_weights(P, samples.centers, samples.positives)
    w = w[np.unique(samples.centers)]
    gamma = min(s["B"], len(samples)) / len(samples)
    print(f"gamma={gamma:.6g}")
    print(f"negative_weight_range={w.min():.6g},{w.max():.6g}")
    return 0


def run_training(s: dict) -> Path:
    """Train one model per the settings and write the run directory."""
    path = _require_input(s)
    g_full = read_edge_list(path, relabel=s["relabel"])
    out = ensure_dir(s["out"] or "run")
    config = train_config(s)

    if s["task"] == "linkpred":
        split = split_links(g_full, s["test_fraction"], seed=s["seed"])
        g = split.train_graph
        np.savetxt(out / "test_pos.txt", split.test_pos, fmt="%d")
        np.savetxt(out / "test_neg.txt", split.test_neg, fmt="%d")
        np.savetxt(out / "train_neg.txt", split.train_neg, fmt="%d")
        P, samples = _prepare(g, s)
    else:
        g = g_full
        cache = Path(s["cache_dir"]) if s["cache_dir"] else None
        if cache and (cache / "proximity.bin").exists() and (cache / "subgraphs.txt").exists():
            P = load_proximity(cache / "proximity.bin")
            with open(cache / "subgraphs.txt", encoding="utf-8") as fh:
                samples = read_subgraphs(fh)
            if P.num_nodes != g.num_nodes:
                raise CliError("cached proximity does not match the graph")
        else:
            P, samples = _prepare(g, s)

    model, report = train(g, P, samples, config)

    ext = "bin" if s["binary"] else "txt"
    saver = save_embedding_binary if s["binary"] else save_embedding_text
    saver(model.w_in, out / f"w_in.{ext}")
    saver(model.w_out, out / f"w_out.{ext}")
    with open(out / "loss_trace.csv", "w", encoding="utf-8") as fh:
        fh.write("epoch,loss\n")
        for e, value in enumerate(report.loss_trace, start=1):
            fh.write(f"{e},{value!r}\n")
    write_kv(out / "report.txt", {**report.as_dict(), "loss_trace": "loss_trace.csv"})

    manifest = {f"config.{k}": v for k, v in s.items() if k not in {"out", "cache_dir"}}
    manifest.update({
        "version": __version__,
        "input_path": str(path.resolve()),
        "input_sha256": file_digest(path),
        "seed": s["seed"],
        "w_in": f"w_in.{ext}",
        "w_out": f"w_out.{ext}",
        "report": "report.txt",
        "epochs": report.epochs,
        "final_eps": report.eps,
        "final_delta_hat": report.delta_hat,
        "gamma": report.gamma,
        "sensitivity": report.sensitivity,
    })
    write_kv(out / "manifest.txt", manifest)
    return out


def cmd_train(s: dict) -> int:
    out = run_training(s)
    report = read_kv(out / "report.txt")
    print(
        f"epochs={report['epochs']} eps={report['eps']} delta_hat={report['delta_hat']} "
        f"gamma={report['gamma']} S={report['sensitivity']} stopped_early={report['stopped_early']}"
    )
    print(f"outputs written to {out}")
    return 0


def evaluate_run(run_dir, task: str) -> tuple[dict, float]:
    run = Path(run_dir)
    if not (run / "manifest.txt").exists():
        raise CliError(f"{run}: no manifest; refusing to evaluate embeddings without provenance")
    manifest = read_kv(run / "manifest.txt")
    emb = load_embedding(run / manifest["w_in"])
    input_path = Path(manifest["input_path"])
    if file_digest(input_path) != manifest["input_sha256"]:
        raise CliError(f"{run}: input edge list changed since training")
    g = read_edge_list(input_path, relabel=_parse_bool(manifest["config.relabel"]))
    if emb.shape[0] != g.num_nodes:
        raise CliError(f"{run}: embedding has {emb.shape[0]} rows but graph has {g.num_nodes} nodes")
    if task == "strucequ":
        value = struc_equ(g, emb)
    elif task == "linkpred":
        if not (run / "test_pos.txt").exists():
            raise CliError(f"{run}: not a link-prediction run (no held-out edges)")
        pos = np.loadtxt(run / "test_pos.txt", dtype=np.int64, ndmin=2)
        neg = np.loadtxt(run / "test_neg.txt", dtype=np.int64, ndmin=2)
        split = _SplitView(pos, neg)
        value = auc(emb, split)
    else:
        raise CliError(f"unknown task {task!r}")
    return manifest, value


@dataclass
class _SplitView:
    test_pos: np.ndarray
    test_neg: np.ndarray


def aggregate_rows(results, task: str, run_id: str) -> list[dict]:
    groups: dict[tuple, list[float]] = {}
    for manifest, value in results:
        key = (manifest["config.eps"], manifest["config.mode"], manifest["config.proximity"])
        groups.setdefault(key, []).append(value)
    rows = []
    for (eps, mode, prox), values in groups.items():
        arr = np.asarray(values)
        rows.append({
            "run_id": run_id,
            "version": __version__,
            "epsilon": eps,
            "mode": mode,
            "proximity": prox,
            "metric": task,
            "mean": repr(float(arr.mean())),
            "stddev": repr(float(arr.std(ddof=1))) if arr.size > 1 else "0.0",
            "n_seeds": arr.size,
        })
    return rows


def append_csv(path, rows: list[dict]) -> None:
    path = Path(path)
    new = not path.exists() or path.stat().st_size == 0
    with open(path, "a", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=CSV_FIELDS)
        if new:
            writer.writeheader()
        writer.writerows(rows)


def cmd_eval(s: dict, runs: list[str], csv_path: str, run_id: str) -> int:
    if not runs:
        raise CliError("no run directories given")
    results = [evaluate_run(r, s["task"]) for r in runs]
    rows = aggregate_rows(results, s["task"], run_id)
    append_csv(csv_path, rows)
    for row in rows:
        print(f"{row['metric']} eps={row['epsilon']} mode={row['mode']} "
              f"proximity={row['proximity']} mean={float(row['mean']):.4f} "
              f"sd={float(row['stddev']):.4f} n={row['n_seeds']}")
    return 0


def cmd_account(sigma, S, gamma, epochs, delta, strict=False) -> int:
    state = acct.make_accountant(gamma, S, sigma)
    state = acct.compose(state, epochs * (2 if strict else 1))
    eps, alpha = acct.to_dp(state, delta)
    print("eps,alpha_star")
    print(f"{eps!r},{alpha}")
    print("alpha,rdp,eps_at_delta")
    for a, rdp, e in acct.rdp_table(state, delta):
        print(f"{a},{rdp!r},{e!r}")
    return 0


def cmd_sweep(s: dict, eps_grid, modes, seeds, csv_path, run_id) -> int:
    base = ensure_dir(s["out"] or "sweep")
    for eps in eps_grid:
        for mode in modes:
            results = []
            for seed in seeds:
                run_s = dict(s, eps=eps, mode=mode, seed=seed)
                run_s["out"] = str(base / f"eps{eps}_{mode}_seed{seed}")
                results.append(evaluate_run(run_training(run_s), s["task"]))
            rows = aggregate_rows(results, s["task"], run_id)
            append_csv(csv_path, rows)
            for row in rows:
                print(f"eps={eps} mode={mode} {s['task']}={float(row['mean']):.4f}"
                      f"±{float(row['stddev']):.4f}")
    return 0


# ---------------------------------------------------------------------------
# argument parsing


def _add_settings(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="flat key=value settings file")
    for key, (kind, _) in SETTINGS.items():
        flag = "--" + key.replace("_", "-")
        if kind == "bool":
            p.add_argument(flag, dest=key, default=None, type=_parse_bool, metavar="BOOL")
        else:
            p.add_argument(flag, dest=key, default=None)


def _floats(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x]


def _ints(text: str) -> list[int]:
    out = []
    for part in text.split(","):
        if "-" in part:
            lo, hi = part.split("-")
            out.extend(range(int(lo), int(hi) + 1))
        elif part:
            out.append(int(part))
    return out


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dpgemb", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    _add_settings(sub.add_parser("prep", help="compute proximity and subgraph caches"))
    _add_settings(sub.add_parser("train", help="train private embeddings"))

    p = sub.add_parser("eval", help="evaluate trained runs and append metrics CSV")
    _add_settings(p)
    p.add_argument("--runs", nargs="+", default=[])
    p.add_argument("--csv", default="metrics.csv")
    p.add_argument("--run-id", default="eval")

    p = sub.add_parser("account", help="print privacy spend for given parameters")
    p.add_argument("--sigma", type=float, required=True)
    p.add_argument("--S", type=float, default=1.0)
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--epochs", type=int, required=True)
    p.add_argument("--delta", type=float, default=1e-5)
    p.add_argument("--strict", action="store_true", help="count two releases per epoch")

    p = sub.add_parser("sweep", help="train and evaluate over an eps x mode x seed grid")
    _add_settings(p)
    p.add_argument("--eps-grid", type=_floats, default=[0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5])
    p.add_argument("--modes", type=lambda t: t.split(","), default=["naive", "nonzero"])
    p.add_argument("--seeds", type=_ints, default=list(range(10)))
    p.add_argument("--csv", default="metrics.csv")
    p.add_argument("--run-id", default="sweep")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        if args.command == "account":
            return cmd_account(args.sigma, args.S, args.gamma, args.epochs, args.delta, args.strict)
        s = resolve_settings(vars(args), args.config)
        if args.command == "prep":
            return cmd_prep(s)
        if args.command == "train":
            return cmd_train(s)
        if args.command == "eval":
            return cmd_eval(s, args.runs, args.csv, args.run_id)
        if args.command == "sweep":
            return cmd_sweep(s, args.eps_grid, args.modes, args.seeds, args.csv, args.run_id)
    except (CliError, SamplingError, BudgetError, TrainingError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 1


if __name__ == "__main__":
    sys.exit(main())
