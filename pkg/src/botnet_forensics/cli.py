"""Command-line entry point: ``detect``, ``synth``, ``train-tree`` and ``scan``.

Exit codes: 0 success (for ``detect``: a controller was found), 1 ``detect``
found nothing, 2 error.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import random
import sys
from typing import Optional, Sequence

from .errors import EmptyDataset, ForensicsError, InvalidConfig, StageError
from .pipeline import (
    RunConfig,
    detect,
    labeled_flows,
    load_inputs,
    read_dataset,
    stage,
    write_dataset,
    write_outputs,
)
from .scanner import scan, write_log
from .signatures import default_signatures, load_signatures, sensor_signatures
from .synth import ScenarioConfig, generate_scenario, write_ground_truth, write_jsonl, write_pcap
from .tree import accuracy, save_model, train_tree

EXIT_FOUND = 0
EXIT_NONE = 1
EXIT_ERROR = 2


def _fail(exc: BaseException, default_stage: str) -> int:
    if isinstance(exc, StageError):
        print(f"error {exc}", file=sys.stderr)
    else:
        print(f"error [{default_stage}] {type(exc).__name__}: {exc}", file=sys.stderr)
    return EXIT_ERROR


def _load_json_config(path: Optional[str]) -> dict:
    if not path:
        return {}
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InvalidConfig(f"cannot read config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise InvalidConfig("config file must hold a JSON object")
    return data


def _run_config(args) -> RunConfig:
    base = RunConfig.from_dict(_load_json_config(args.config))
    overrides = {
        "input": args.input,
        "format": args.format,
        "out": args.out,
        "seed": args.seed,
        "signatures": getattr(args, "signatures", None),
    }
    for name in ("tree_model", "idle_timeout", "threshold", "cluster_method", "k", "min_fanout",
                 "bin_width", "min_overlap_bins", "max_flows"):
        overrides[name] = getattr(args, name, None)
    cfg = base.merged(**overrides)
    cfg.validate()
    return cfg


def cmd_detect(args) -> int:
    try:
        with stage("config"):
            cfg = _run_config(args)
            if not cfg.out:
                raise InvalidConfig("--out is required")
        trace, sigs, model = load_inputs(cfg)
        result = detect(trace, cfg, sigs, model)
        write_outputs(result, cfg.out)
    except ForensicsError as exc:
        return _fail(exc, "detect")
    sys.stdout.write(result.report.render_text())
    return EXIT_FOUND if result.report.controllers else EXIT_NONE


def cmd_scan(args) -> int:
    try:
        with stage("config"):
            cfg = _run_config(args)
            if not cfg.out:
                raise InvalidConfig("--out is required")
        trace, sigs, _ = load_inputs(dataclasses.replace(cfg, tree_model=None))
        with stage("scan"):
            log = scan(trace, sensor_signatures(sigs))
        with stage("output"):
            os.makedirs(cfg.out, exist_ok=True)
            write_log(log, os.path.join(cfg.out, "scanlog.json"))
    except (ForensicsError, OSError) as exc:
        return _fail(exc, "scan")
    print(f"scanned {len(trace)} packets: {len(log.markings)} markings, "
          f"{len(log.suspicious_ips)} suspicious IPs, {len(log.dns_queries)} DNS queries")
    return 0


def _scenario_config(args) -> ScenarioConfig:
    data = _load_json_config(args.config)
    names = {f.name for f in dataclasses.fields(ScenarioConfig)}
    unknown = set(data) - names
    if unknown:
        raise InvalidConfig(f"unknown scenario keys: {sorted(unknown)}")
    cfg = ScenarioConfig(**data)
    overrides = {
        "n_bots": args.n_bots,
        "n_background_hosts": args.n_background_hosts,
        "duration_s": args.duration,
        "c2_msg_period_s": args.period,
        "c2_jitter_s": args.jitter,
        "background_flows_per_host": args.flows_per_host,
        "seed": args.seed,
    }
    cfg = dataclasses.replace(cfg, **{k: v for k, v in overrides.items() if v is not None})
    cfg.validate()
    return cfg


def cmd_synth(args) -> int:
    try:
        with stage("config"):
            cfg = _scenario_config(args)
            if not args.out:
                raise InvalidConfig("--out is required")
            fmt = args.format or "pcap"
            if fmt not in ("pcap", "jsonl"):
                raise InvalidConfig("synth --format must be pcap or jsonl")
        with stage("synth"):
            trace, truth = generate_scenario(cfg)
        with stage("output"):
            os.makedirs(args.out, exist_ok=True)
            trace_path = os.path.join(args.out, f"trace.{fmt}")
            (write_pcap if fmt == "pcap" else write_jsonl)(trace, trace_path)
            write_ground_truth(truth, os.path.join(args.out, "ground_truth.json"))
            if args.dataset:
                write_dataset(labeled_flows(trace, truth), args.dataset)
    except (ForensicsError, OSError) as exc:
        return _fail(exc, "synth")
    print(f"wrote {len(trace)} packets to {trace_path}")
    return 0


def cmd_train_tree(args) -> int:
    try:
        with stage("config"):
            if args.max_depth < 0 or args.min_leaf < 1 or not 0 <= args.holdout < 1:
                raise InvalidConfig("need max_depth >= 0, min_leaf >= 1, 0 <= holdout < 1")
            if not args.input or not args.out:
                raise InvalidConfig("--input and --out are required")
        with stage("dataset"):
            rows = read_dataset(args.input)
            if not rows:
                raise EmptyDataset(f"{args.input} holds no samples")
        test: list = []
        train = rows
        if args.holdout > 0:
            order = list(range(len(rows)))
            random.Random(args.seed or 0).shuffle(order)
            n_test = int(round(len(rows) * args.holdout))
            test = [rows[i] for i in order[:n_test]]
            train = [rows[i] for i in order[n_test:]]
        with stage("train"):
            model = train_tree(train, args.max_depth, args.min_leaf)
        with stage("output"):
            save_model(model, args.out)
    except (ForensicsError, OSError) as exc:
        return _fail(exc, "train-tree")
    print(f"training accuracy: {accuracy(model, train):.4f} ({len(train)} samples, {len(model.nodes)} nodes)")
    if test:
        print(f"held-out accuracy: {accuracy(model, test):.4f} ({len(test)} samples)")
    return 0


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--input", help="input trace (or dataset for train-tree)")
    p.add_argument("--format", choices=("auto", "pcap", "jsonl"), help="input/output trace format")
    p.add_argument("--config", help="JSON config file; flags override its values")
    p.add_argument("--out", help="output directory (model file for train-tree)")
    p.add_argument("--seed", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="botnet-forensics",
                                     description="Offline botnet controller detection from packet traces.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("detect", help="run the full pipeline and report suspected controllers")
    _common(p)
    p.add_argument("--signatures", help="signature JSON file (default: built-in set)")
    p.add_argument("--tree-model", dest="tree_model", help="decision-tree model JSON")
    p.add_argument("--idle-timeout", dest="idle_timeout", type=float)
    p.add_argument("--threshold", type=float, help="correlation threshold for graph clustering")
    p.add_argument("--method", dest="cluster_method", choices=("GRAPH", "KMEANS"))
    p.add_argument("--k", type=int, help="k for KMEANS clustering")
    p.add_argument("--min-fanout", dest="min_fanout", type=int)
    p.add_argument("--bin-width", dest="bin_width", type=float)
    p.add_argument("--min-overlap-bins", dest="min_overlap_bins", type=int)
    p.add_argument("--max-flows", dest="max_flows", type=int)
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("scan", help="run only the traffic scanner and write scanlog.json")
    _common(p)
    p.add_argument("--signatures", help="signature JSON file (default: built-in set)")
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("synth", help="generate a synthetic scenario with ground truth")
    _common(p)
    p.add_argument("--n-bots", dest="n_bots", type=int)
    p.add_argument("--n-background-hosts", dest="n_background_hosts", type=int)
    p.add_argument("--duration", type=float)
    p.add_argument("--period", type=float, help="controller command period in seconds")
    p.add_argument("--jitter", type=float)
    p.add_argument("--flows-per-host", dest="flows_per_host", type=int)
    p.add_argument("--dataset", help="also write labeled flow features (JSONL) here")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("train-tree", help="train the decision-tree flow classifier")
    _common(p)
    p.add_argument("--max-depth", dest="max_depth", type=int, default=6)
    p.add_argument("--min-leaf", dest="min_leaf", type=int, default=1)
    p.add_argument("--holdout", type=float, default=0.0, help="fraction held out for evaluation")
    p.set_defaults(func=cmd_train_tree)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
