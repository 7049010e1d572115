"""Command-line interface: run configs, verify presets, render reports.

Exit status is 0 only when every non-skipped check passed; any failed
check, config error, or I/O problem exits nonzero with a message on
stderr.  The MOMENTLAB_OUTPUT_DIR environment variable sets the default
directory for output files (default: current directory).
"""

from __future__ import annotations

import os
import sys
from concurrent.futures import ProcessPoolExecutor

import click

from .experiments import ConfigError, emit_outputs, load_report, parse_config, run_experiment
from .presets import preset_names, preset_text


def _output_prefix(explicit: str | None, fallback_stem: str) -> str:
    if explicit:
        return explicit
    base = os.environ.get("MOMENTLAB_OUTPUT_DIR", ".")
    return os.path.join(base, fallback_stem)


def _execute(text: str, prefix: str) -> dict:
    """Parse + run one config; used directly and as the pool worker."""
    config = parse_config(text)
    report = run_experiment(config)
    emit_outputs(report, config.output_prefix or prefix)
    return report


def _print_summary(label: str, report: dict) -> bool:
    summary = report["summary"]
    click.echo(
        f"{label}: {summary['passed']} passed, {summary['failed']} failed, "
        f"{summary['skipped']} skipped"
    )
    for check in report["checks"]:
        mark = {"pass": "ok  ", "fail": "FAIL", "skipped": "skip"}[check["status"]]
        line = f"  [{mark}] {check['name']} (tol {check['tolerance']:g})"
        if check["note"]:
            line += f" -- {check['note']}"
        click.echo(line)
    return summary["all_passed"]


@click.group()
def main():
    """Moment-growth experiment laboratory."""


@main.command()
@click.argument("configs", nargs=-1, required=True,
                type=click.Path(exists=True, dir_okay=False))
@click.option("--jobs", default=1, show_default=True,
              help="Run configs in parallel worker processes.")
@click.option("--out", default=None, help="Output prefix (single config only).")
def run(configs, jobs, out):
    """Run one or more experiment config files."""
    if out is not None and len(configs) > 1:
        raise click.UsageError("--out applies to a single config only")
    texts, prefixes = [], []
    for path in configs:
        with open(path) as fh:
            texts.append(fh.read())
        stem = os.path.splitext(os.path.basename(path))[0]
        prefixes.append(_output_prefix(out, stem))

    all_ok = True
    try:
        if jobs > 1 and len(configs) > 1:
            with ProcessPoolExecutor(max_workers=jobs) as pool:
                reports = list(pool.map(_execute, texts, prefixes))
        else:
            reports = [_execute(t, p) for t, p in zip(texts, prefixes)]
    except ConfigError as exc:
        for err in exc.errors:
            click.echo(f"config error: {err}", err=True)
        sys.exit(2)
    for path, report in zip(configs, reports):
        all_ok = _print_summary(path, report) and all_ok
    sys.exit(0 if all_ok else 1)


@main.command()
@click.argument("preset")
@click.option("--out", default=None, help="Output prefix.")
def verify(preset, out):
    """Run a named preset and report its checks."""
    try:
        text = preset_text(preset)
    except KeyError as exc:
        click.echo(str(exc.args[0]), err=True)
        sys.exit(2)
    try:
        report = _execute(text, _output_prefix(out, preset))
    except ConfigError as exc:
        for err in exc.errors:
            click.echo(f"config error: {err}", err=True)
        sys.exit(2)
    ok = _print_summary(preset, report)
    sys.exit(0 if ok else 1)


@main.command("list-presets")
def list_presets():
    """List the available preset names."""
    for name in preset_names():
        click.echo(name)


@main.command()
@click.argument("report_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--figures", is_flag=True,
              help="Also render PNG figures next to the report.")
def report(report_path, figures):
    """Summarize a stored JSON report; optionally render figures."""
    data = load_report(report_path)
    ok = _print_summary(report_path, data)
    if figures:
        from .plots import render_figures

        prefix = report_path
        if prefix.endswith(".report.json"):
            prefix = prefix[: -len(".report.json")]
        for path in render_figures(data, prefix):
            click.echo(f"wrote {path}")
    sys.exit(0 if ok else 1)


if __name__ == "__main__":
    main()
