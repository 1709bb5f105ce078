"""Runs the full synth -> calibrate -> run -> report chain through the CLI."""

from pathlib import Path

from scenario_ecl.cli import main

STEPS = ("synth", "calibrate", "run", "report")


def run_pipeline(out: Path, config: Path, seed: int | None = None) -> dict[str, int]:
    out.mkdir(parents=True, exist_ok=True)
    seed_args = [] if seed is None else ["--seed", str(seed)]
    codes = {
        "synth": main(["synth", "--config", str(config), "--out", str(out), *seed_args]),
        "calibrate": main(["calibrate", str(out / "sample.csv"), "--config", str(config), "--out", str(out)]),
        "run": main(["run", str(out / "portfolio.csv"), str(out / "deltas.csv"),
                     "--config", str(config), "--out", str(out)]),
        "report": main(["report", str(out / "results.csv"), "--out", str(out)]),
    }
    return codes


def output_bytes(out: Path) -> dict[str, bytes]:
    return {p.name: p.read_bytes() for p in sorted(out.iterdir()) if p.is_file()}
