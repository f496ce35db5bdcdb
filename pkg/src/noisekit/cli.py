"""Command-line pipeline: characterize, fit, evaluate, demo.

All randomness funnels through one --seed flag; every report embeds the
config hash and seed, and timestamps are isolated to the meta block so
fixed-seed reruns are byte-identical elsewhere.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from datetime import datetime, timezone
from pathlib import Path

from . import devices
from .applications import build_bv, build_ghz, bv_accuracy
from .backend import FileBackend, MockBackend, MockGroundTruth
from .characterization import (
    SuiteConfig,
    archive_dict,
    archive_hash,
    build_suite,
    count_experiments,
    materialize,
    read_archive,
    run_suite,
    TestKind,
)
from .circuit import DeviceTopology
from .errors import ConfigError, NoisekitError
from .estimation import FitConfig, fit_composite
from .evaluation import (
    ApplicationRun,
    compare_models,
    scaling_report,
    score_model,
    select_model,
    write_scaling_csv,
    write_scores_csv,
    write_scores_json,
)
from .noise import PER_ELEMENT, REGISTER_AVERAGE, SUBSET_AVERAGE, VARIANTS, CompositeNoiseModel
from .rng import child_seed
from .simulator import TrajectorySampler

VARIANT_ORDER = ["noiseless", "sro", "aro", "dp", "sro+dp", "aro+dp"]


def _meta(args_dict: dict) -> dict:
    canonical = json.dumps(args_dict, sort_keys=True)
    return {
        "created_at": datetime.now(timezone.utc).isoformat(),
        "config_hash": hashlib.sha256(canonical.encode()).hexdigest()[:16],
        "config": args_dict,
    }


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True))


def _out_dir(args) -> Path:
    out = Path(args.out or os.environ.get("NOISEKIT_OUT", "."))
    out.mkdir(parents=True, exist_ok=True)
    return out


def _load_device(path: str) -> DeviceTopology:
    if not Path(path).exists():
        raise FileNotFoundError(f"device file {path} not found")
    return DeviceTopology.load(path)


def _make_backend(spec: str, topo: DeviceTopology):
    if ":" not in spec:
        raise ConfigError(f"backend must be mock:<truth.json> or file:<archive.json>, got {spec!r}")
    kind, _, path = spec.partition(":")
    if not Path(path).exists():
        raise FileNotFoundError(f"backend file {path} not found")
    if kind == "mock":
        return MockBackend(topo, MockGroundTruth.load(path))
    if kind == "file":
        return FileBackend(path, topo)
    raise ConfigError(f"unknown backend kind {kind!r}")


def _parse_subset(text: str | None) -> tuple[int, ...] | None:
    if text is None:
        return None
    return tuple(int(tok) for tok in text.split(",") if tok != "")


def _parse_app(spec: str, topo: DeviceTopology) -> list:
    """Parse ghz:<n>, ghz:<a>..<b>, or bv:<secret>@<d1,d2,...>/<oracle>."""
    if spec.startswith("ghz:"):
        body = spec[4:]
        if ".." in body:
            lo, hi = body.split("..")
            sizes = range(int(lo), int(hi) + 1)
        else:
            sizes = [int(body)]
        return [build_ghz(n, topo) for n in sizes]
    if spec.startswith("bv:"):
        body = spec[3:]
        try:
            secret, rest = body.split("@")
            data_text, oracle_text = rest.split("/")
        except ValueError as exc:
            raise ConfigError(
                f"bad bv app spec {spec!r}; expected bv:<secret>@<d1,d2,...>/<oracle>"
            ) from exc
        data = [int(tok) for tok in data_text.split(",")]
        return [build_bv(secret, data, int(oracle_text), topo)]
    raise ConfigError(f"unknown app spec {spec!r}")


# -- subcommands ---------------------------------------------------------------

def cmd_characterize(args) -> int:
    if args.shots < 1:
        raise ConfigError("--shots must be >= 1")
    topo = _load_device(args.device)
    backend = _make_backend(args.backend, topo)
    config = SuiteConfig(
        granularity=args.granularity,
        subset=_parse_subset(args.subset),
        hadamard_lengths=tuple(
            int(tok) for tok in (args.hadamard_lengths or "").split(",") if tok
        ),
        shots=args.shots,
        seed=args.seed,
    )
    plan = build_suite(topo, config)
    chars = run_suite(plan, backend)
    budget = count_experiments(plan)
    out = _out_dir(args)
    meta = _meta(
        {"command": "characterize", "device": args.device, "backend": args.backend,
         "shots": args.shots, "seed": args.seed, "granularity": args.granularity,
         "subset": args.subset, "hadamard_lengths": args.hadamard_lengths}
    )
    archive_path = out / args.archive_name
    data = archive_dict(plan, chars, window=args.window, meta=meta)
    _write_json(archive_path, data)
    _write_json(
        out / "budget.json",
        {
            "meta": meta,
            "num_circuits": budget.num_circuits,
            "shots_per_circuit": budget.shots_per_circuit,
            "total_shots": budget.total_shots,
            "num_qubits_covered": budget.num_qubits_covered,
            "num_couplings_covered": budget.num_couplings_covered,
            "formula_2q_plus_2c_plus_1_shots": budget.formula_shots,
        },
    )
    print(f"characterized {budget.num_circuits} circuits x {plan.shots} shots "
          f"-> {archive_path}")
    print(f"census total shots: {budget.total_shots}; "
          f"N_s(2q+2c+1) = {budget.formula_shots} "
          f"(q={budget.num_qubits_covered}, c={budget.num_couplings_covered})")
    return 0


def cmd_fit(args) -> int:
    if not Path(args.archive).exists():
        raise FileNotFoundError(f"archive {args.archive} not found")
    data, chars = read_archive(args.archive)
    config = FitConfig(
        variant=args.flags,
        granularity=args.granularity,
        subset=_parse_subset(args.subset),
        window=data.get("window", ""),
        provenance=archive_hash(args.archive),
    )
    fit = fit_composite(chars, config)
    out = _out_dir(args)
    name = args.name or f"model-{args.flags.replace('+', '_')}-{args.granularity}"
    model_path = out / f"{name}.json"
    fit.model.save(model_path)
    _write_json(out / f"{name}.diagnostics.json", fit.diagnostics_dict())
    infeasible = [n for n, r in fit.estimates.items() if not r.feasible]
    print(f"fitted {len(fit.estimates)} parameters -> {model_path}")
    if infeasible:
        print(f"clamped infeasible estimates: {', '.join(sorted(infeasible))}")
    return 0


def cmd_evaluate(args) -> int:
    if args.select and args.threshold is None:
        raise ConfigError("--select requires --threshold (the bound is user-defined)")
    if args.threshold is not None and not (0.0 < args.threshold <= 1.0):
        raise ConfigError("--threshold must lie in (0, 1]")
    if args.shots < 1:
        raise ConfigError("--shots must be >= 1")
    if not args.model:
        raise ConfigError("evaluate needs at least one --model")
    topo = _load_device(args.device)
    backend = _make_backend(args.backend, topo)
    circuits = _parse_app(args.app, topo)
    if len(circuits) > 1 and not args.scaling:
        raise ConfigError("multi-instance app specs (ghz:a..b) require --scaling")
    models = []
    for path in args.model:
        if not Path(path).exists():
            raise FileNotFoundError(f"model file {path} not found")
        models.append((Path(path).stem, CompositeNoiseModel.load(path)))

    counts_list = backend.run(circuits, args.shots, args.seed)
    runs = [ApplicationRun(c, counts) for c, counts in zip(circuits, counts_list)]
    out = _out_dir(args)
    meta = _meta(
        {"command": "evaluate", "device": args.device, "backend": args.backend,
         "app": args.app, "models": [m[0] for m in models], "shots": args.shots,
         "seed": args.seed, "resamples": args.resamples, "sim_shots": args.sim_shots,
         "exact": args.exact, "threshold": args.threshold}
    )
    report: dict = {"meta": meta, "app": args.app}
    kwargs = dict(sim_shots=args.sim_shots, resamples=args.resamples, seed=args.seed)

    if args.scaling:
        sc = scaling_report(runs, models[0][1], **kwargs)
        write_scaling_csv(out / "scaling.csv", sc)
        report["scaling"] = {
            "model_id": models[0][0],
            "cv_tvd_per_cnot": sc.cv_tvd_per_cnot,
            "rows": [vars(r) for r in sc.rows],
        }
        print(f"scaling over n={sc.rows[0].n}..{sc.rows[-1].n}: "
              f"cv(tvd/cnot) = {sc.cv_tvd_per_cnot:.4f} -> {out / 'scaling.csv'}")
    elif args.select:
        sel = select_model(runs[0], models, args.threshold, **kwargs)
        report["selection"] = {
            "model_id": sel.model_id,
            "iterations": sel.iterations,
            "threshold": sel.threshold,
            "threshold_met": sel.threshold_met,
            "score": sel.score.to_json_dict(),
        }
        status = "met" if sel.threshold_met else "NOT met"
        print(f"selected {sel.model_id} after {sel.iterations} iteration(s); "
              f"threshold {args.threshold} {status} (tvd={sel.score.tvd:.5f})")
    elif args.compare or len(models) > 1:
        scores = compare_models(runs[0], models, **kwargs)
        write_scores_csv(out / "scores.csv", scores)
        report["ranking"] = [s.to_json_dict() for s in scores]
        for s in scores:
            print(f"  {s.model_id:<28} tvd={s.tvd:.5f} +/- {s.tvd_stderr:.5f}")
    else:
        model_id, model = models[0]
        if args.app.startswith("bv:"):
            secret = args.app[3:].split("@")[0]
            observed = bv_accuracy(runs[0], secret)
            sampler = TrajectorySampler(runs[0].circuit, model)
            predicted_counts = sampler.sample(args.shots, child_seed(args.seed, 1_000_001))
            predicted = predicted_counts.frequency(secret)
            report["bv"] = {
                "secret": secret,
                "observed_accuracy": observed,
                "predicted_accuracy": predicted,
                "model_id": model_id,
            }
            print(f"bv {secret}: predicted={predicted:.5f} observed={observed:.5f}")
        else:
            score = score_model(runs[0], model, exact=args.exact,
                                model_id=model_id, **kwargs)
            report["score"] = score.to_json_dict()
            print(f"{model_id}: tvd={score.tvd:.5f} +/- {score.tvd_stderr:.5f} "
                  f"(per cnot {score.tvd_per_cnot:.5f})")
    _write_json(out / "report.json", report)
    return 0


def cmd_demo(args) -> int:
    if args.what != "full-paper":
        raise ConfigError(f"unknown demo {args.what!r}; available: full-paper")
    out = _out_dir(args)
    shots, seed = args.shots, args.seed
    print(f"== demo full-paper (shots={shots}, seed={seed}) -> {out}")

    topo = devices.ladder20()
    topo.save(out / "device.json")
    truth = MockGroundTruth(
        devices.jittered_truth(topo, seed), hidden_readout_strength=args.hidden
    )
    truth.save(out / "truth.json")
    backend = MockBackend(topo, truth)

    print("-- characterization suite")
    plan = build_suite(topo, SuiteConfig(shots=shots, seed=seed))
    chars = run_suite(plan, backend)
    budget = count_experiments(plan)
    meta = _meta({"command": "demo", "shots": shots, "seed": seed, "hidden": args.hidden})
    _write_json(out / "archive.json", archive_dict(plan, chars, window="demo", meta=meta))
    print(f"   {budget.num_circuits} circuits, census {budget.total_shots} shots, "
          f"formula N_s(2q+2c+1) = {budget.formula_shots}")

    print("-- fitting model family")
    fits = {}
    for variant in VARIANT_ORDER:
        fits[variant] = fit_composite(chars, FitConfig(variant=variant))
        fits[variant].model.save(out / f"model-{variant.replace('+', '_')}.json")
    fit_register = fit_composite(
        chars, FitConfig(variant="aro+dp", granularity=REGISTER_AVERAGE)
    )
    fit_2q = fit_composite(
        chars, FitConfig(variant="aro+dp", granularity=SUBSET_AVERAGE, subset=(0, 1))
    )
    fit_register.model.save(out / "model-register-average.json")
    fit_2q.model.save(out / "model-2q-average.json")

    print("-- Bell-state model comparison (readout/gate ablations)")
    bell_circuit, _ = materialize(TestKind("bell", coupling=(0, 1)))
    bell_counts = backend.run([bell_circuit], shots, child_seed(seed, 1))[0]
    bell_run = ApplicationRun(bell_circuit, bell_counts)
    scores = compare_models(
        bell_run, [(v, fits[v].model) for v in VARIANT_ORDER],
        resamples=args.resamples, seed=seed,
    )
    write_scores_csv(out / "bell_comparison.csv", scores)
    write_scores_json(out / "bell_comparison.json", scores, meta)
    for s in scores:
        print(f"   {s.model_id:<10} tvd={s.tvd:.5f} +/- {s.tvd_stderr:.5f}")

    print(f"-- GHZ scaling n=2..{args.max_ghz} (fully spatial model)")
    ghz_circuits = [build_ghz(n, topo) for n in range(2, args.max_ghz + 1)]
    ghz_counts = backend.run(ghz_circuits, shots, child_seed(seed, 2))
    ghz_runs = [ApplicationRun(c, k) for c, k in zip(ghz_circuits, ghz_counts)]
    sc = scaling_report(ghz_runs, fits["aro+dp"].model,
                        resamples=args.resamples, seed=seed)
    write_scaling_csv(out / "ghz_scaling.csv", sc)
    print(f"   cv of tvd-per-cnot across widths: {sc.cv_tvd_per_cnot:.4f}")

    print("-- GHZ granularity sweep (largest instance)")
    grans = [
        ("noiseless", fits["noiseless"].model),
        ("2q-average", fit_2q.model),
        ("register-average", fit_register.model),
        ("fully-spatial", fits["aro+dp"].model),
    ]
    gran_scores = compare_models(ghz_runs[-1], grans,
                                 resamples=args.resamples, seed=seed)
    write_scores_csv(out / "ghz_granularity.csv", gran_scores)
    by_id = {s.model_id: s for s in gran_scores}
    ratio = by_id["noiseless"].tvd / max(by_id["fully-spatial"].tvd, 1e-12)
    for s in gran_scores:
        print(f"   {s.model_id:<18} tvd={s.tvd:.5f}")
    print(f"   fully-spatial improves on noiseless by {ratio:.1f}x")

    print("-- Bernstein-Vazirani accuracy, all 3-bit secrets on (6,8,12)/7")
    secrets = [format(i, "03b") for i in range(8)]
    bv_circuits = [build_bv(s, [6, 8, 12], 7, topo) for s in secrets]
    bv_counts = backend.run(bv_circuits, shots, child_seed(seed, 3))
    bv_rows = []
    for secret, circuit, counts in zip(secrets, bv_circuits, bv_counts):
        run = ApplicationRun(circuit, counts)
        sampler = TrajectorySampler(circuit, fits["aro+dp"].model)
        predicted = sampler.sample(shots, child_seed(seed, 4)).frequency(secret)
        bv_rows.append(
            {"secret": secret, "predicted": predicted,
             "observed": bv_accuracy(run, secret)}
        )
        print(f"   {secret}: predicted={predicted:.4f} observed={bv_rows[-1]['observed']:.4f}")
    _write_json(out / "bv_accuracy.json", {"meta": meta, "rows": bv_rows})

    _write_json(
        out / "summary.json",
        {
            "meta": meta,
            "budget": {"circuits": budget.num_circuits,
                       "census_shots": budget.total_shots,
                       "formula_shots": budget.formula_shots},
            "bell_ranking": [s.model_id for s in scores],
            "ghz_cv_tvd_per_cnot": sc.cv_tvd_per_cnot,
            "ghz_noiseless_over_spatial_tvd": ratio,
            "bv": bv_rows,
        },
    )
    print(f"== reports in {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="noisekit",
        description="Characterize device noise, fit composite models, and "
                    "evaluate them by total variation distance.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("characterize", help="run a characterization suite")
    p.add_argument("--device", required=True, help="device topology JSON")
    p.add_argument("--backend", required=True, help="mock:<truth.json> | file:<archive.json>")
    p.add_argument("--shots", type=int, default=8192)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--granularity", default=PER_ELEMENT,
                   choices=[PER_ELEMENT, REGISTER_AVERAGE, SUBSET_AVERAGE])
    p.add_argument("--subset", default=None, help="comma-separated qubits")
    p.add_argument("--hadamard-lengths", default=None,
                   help="comma-separated even sequence lengths")
    p.add_argument("--window", default="", help="calibration window tag")
    p.add_argument("--archive-name", default="archive.json")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_characterize)

    p = sub.add_parser("fit", help="fit a composite noise model from an archive")
    p.add_argument("--archive", required=True)
    p.add_argument("--flags", default="aro+dp", choices=sorted(VARIANTS))
    p.add_argument("--granularity", default=PER_ELEMENT,
                   choices=[PER_ELEMENT, REGISTER_AVERAGE, SUBSET_AVERAGE])
    p.add_argument("--subset", default=None)
    p.add_argument("--name", default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("evaluate", help="score/compare/select models on an application")
    p.add_argument("--device", required=True)
    p.add_argument("--backend", required=True)
    p.add_argument("--app", required=True,
                   help="ghz:<n> | ghz:<a>..<b> | bv:<secret>@<d1,...>/<oracle>")
    p.add_argument("--model", action="append", default=[])
    p.add_argument("--shots", type=int, default=8192)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--resamples", type=int, default=100)
    p.add_argument("--sim-shots", type=int, default=None)
    p.add_argument("--compare", action="store_true")
    p.add_argument("--select", action="store_true")
    p.add_argument("--threshold", type=float, default=None)
    p.add_argument("--scaling", action="store_true")
    p.add_argument("--exact", action="store_true")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("demo", help="end-to-end mock reproduction pipeline")
    p.add_argument("what", nargs="?", default="full-paper")
    p.add_argument("--shots", type=int, default=8192)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--resamples", type=int, default=50)
    p.add_argument("--hidden", type=float, default=0.0,
                   help="state-dependent hidden readout strength")
    p.add_argument("--max-ghz", type=int, default=10)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_demo)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, FileNotFoundError) as exc:
        _emit_error(exc)
        return 2
    except NoisekitError as exc:
        _emit_error(exc)
        return 1


def _emit_error(exc: Exception) -> None:
    payload = {"error": type(exc).__name__, "message": str(exc)}
    print(json.dumps(payload), file=sys.stderr)


if __name__ == "__main__":
    sys.exit(main())
