"""Command-line entry points.

The CLI is a thin client over the library: ``serve`` runs the HTTP service,
``simulate`` runs seeded Monte Carlo batches, ``exact`` prints the exact
terminal-wealth distribution, ``analytics`` prints the reference figure
table, and ``analyze`` computes behavioral metrics from persisted event
logs. Output formats: aligned ``table``, ``csv``, or ``structured`` (JSON).
"""

from __future__ import annotations

import csv
import json
import sys
from dataclasses import asdict
from typing import Any, Optional

import click

from .analytics import GameParams, exact_capped_distribution, headline_table
from .behavior import (
    DEFAULT_STREAK_K,
    bet_fraction_stats,
    cohort_report,
    is_martingale_like,
    martingale_score,
    tails_stats,
)
from .engine import GameConfig
from .montecarlo import BatchSpec, run_batch
from .strategies import parse_strategy

FORMATS = click.Choice(["table", "csv", "structured"])


# -- output formatting ---------------------------------------------------


def _cell(value: Any) -> str:
    if value is None:
        return "-"
    if isinstance(value, bool):
        return "yes" if value else "no"
    if isinstance(value, float):
        if value != 0.0 and (abs(value) >= 1e16 or abs(value) < 1e-4):
            return f"{value:.6e}"
        text = f"{value:.6f}".rstrip("0").rstrip(".")
        return text if text not in ("", "-") else "0"
    return str(value)


def _emit_rows(rows: list[dict], fmt: str) -> None:
    if fmt == "structured":
        click.echo(json.dumps(rows, indent=2))
        return
    if not rows:
        return
    headers = list(rows[0].keys())
    if fmt == "csv":
        writer = csv.writer(sys.stdout)
        writer.writerow(headers)
        for row in rows:
            writer.writerow(["" if row[h] is None else row[h] for h in headers])
        return
    cells = [[_cell(row[h]) for h in headers] for row in rows]
    widths = [max(len(h), *(len(r[i]) for r in cells)) for i, h in enumerate(headers)]
    click.echo("  ".join(h.ljust(w) for h, w in zip(headers, widths)))
    click.echo("  ".join("-" * w for w in widths))
    for r in cells:
        click.echo("  ".join(c.ljust(w) for c, w in zip(r, widths)))


def _emit_mapping(data: dict, fmt: str) -> None:
    if fmt == "structured":
        click.echo(json.dumps(data, indent=2))
        return
    if fmt == "csv":
        writer = csv.writer(sys.stdout)
        writer.writerow(["field", "value"])
        for key, value in data.items():
            writer.writerow([key, "" if value is None else value])
        return
    width = max(len(k) for k in data)
    for key, value in data.items():
        click.echo(f"{key.ljust(width)}  {_cell(value)}")


# -- commands -------------------------------------------------------------


@click.group()
@click.version_option(package_name="coinlab")
def main() -> None:
    """Biased-coin betting laboratory: service, simulation, and analysis."""


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True, help="Bind address.")
@click.option("--port", default=8000, show_default=True, type=int, help="Bind port.")
@click.option("--data-dir", default="coinlab-data", show_default=True,
              type=click.Path(file_okay=False), help="Event-log directory.")
@click.option("--session-minutes", default=30, show_default=True, type=int,
              help="Betting-window length; 0 disables the clock.")
@click.option("--max-flips", default=300, show_default=True, type=int,
              help="Default flip budget per session.")
@click.option("--min-interval-ms", default=0, show_default=True, type=int,
              help="Minimum milliseconds between bets (0 = no throttle).")
@click.option("--master-seed", default=None, type=int,
              help="Master seed for per-session randomness derivation.")
@click.option("--test-mode", is_flag=True,
              help="Accept explicit per-session seeds on creation.")
@click.option("--static-dir", default=None, type=click.Path(file_okay=False, exists=True),
              help="Serve a built web UI from this directory at /.")
def serve(host: str, port: int, data_dir: str, session_minutes: int, max_flips: int,
          min_interval_ms: int, master_seed: Optional[int], test_mode: bool,
          static_dir: Optional[str]) -> None:
    """Run the HTTP betting service."""
    import uvicorn

    from .service import ServiceSettings, create_app

    settings = ServiceSettings(
        data_dir=data_dir,
        session_seconds=session_minutes * 60,
        max_flips=max_flips,
        min_interval_ms=min_interval_ms,
        master_seed=master_seed,
        test_mode=test_mode,
        static_dir=static_dir,
    )
    uvicorn.run(create_app(settings), host=host, port=port)


@main.command()
@click.option("--strategy", required=True,
              help="kelly | fractional:f=0.15 | constant:c=100 | "
                   "martingale:base=25,factor=2 | allin:side=heads | glide:f=0.2")
@click.option("--paths", default=10_000, show_default=True, type=int)
@click.option("--seed", default=0, show_default=True, type=int,
              help="Master seed; each path derives its own stream from it.")
@click.option("--stop-at-cap/--no-stop-at-cap", default=True, show_default=True,
              help="End a path on the flip that reaches the cap.")
@click.option("--rounding", type=click.Choice(["cents", "real"]), default="cents",
              show_default=True, help="Integer-cents wagers or real-valued wealth.")
@click.option("--parallel", is_flag=True, help="Run chunks on a thread pool.")
@click.option("--p-heads", default=0.6, show_default=True, type=float)
@click.option("--start-cents", default=2500, show_default=True, type=int)
@click.option("--cap-cents", default=25_000, show_default=True, type=int)
@click.option("--no-cap", is_flag=True, help="Remove the payout cap entirely.")
@click.option("--max-flips", default=300, show_default=True, type=int)
@click.option("--min-bet-cents", default=1, show_default=True, type=int)
@click.option("--out", type=click.Path(dir_okay=False), default=None,
              help="Also write the structured report to this JSON file.")
@click.option("--format", "fmt", type=FORMATS, default="table", show_default=True)
def simulate(strategy: str, paths: int, seed: int, stop_at_cap: bool, rounding: str,
             parallel: bool, p_heads: float, start_cents: int, cap_cents: int,
             no_cap: bool, max_flips: int, min_bet_cents: int,
             out: Optional[str], fmt: str) -> None:
    """Run a seeded Monte Carlo batch and summarize it."""
    try:
        strat = parse_strategy(strategy)
        config = GameConfig(
            p_heads=p_heads,
            start_cents=start_cents,
            cap_cents=None if no_cap else cap_cents,
            max_flips=max_flips,
            min_bet_cents=min_bet_cents,
        )
        spec = BatchSpec(
            strategy=strat,
            config=config,
            n_paths=paths,
            master_seed=seed,
            stop_at_cap=stop_at_cap,
            rounding=rounding,
        )
    except ValueError as exc:
        raise click.ClickException(str(exc)) from exc

    stats = run_batch(spec, parallel=parallel)
    q5, q25, q50, q75, q95 = stats.payout_quantiles
    report = {
        "strategy": strat.label(),
        "rounding": rounding,
        "stop_at_cap": stop_at_cap,
        "n_paths": stats.n_paths,
        "master_seed": seed,
        "p_heads": p_heads,
        "start_cents": start_cents,
        "cap_cents": None if no_cap else cap_cents,
        "max_flips": max_flips,
        "p_cap": stats.p_cap,
        "p_cap_se": stats.p_cap_se,
        "expected_payout": stats.expected_payout,
        "expected_payout_se": stats.expected_payout_se,
        "ruin_rate": stats.ruin_rate,
        "payout_p5": q5,
        "payout_p25": q25,
        "payout_p50": q50,
        "payout_p75": q75,
        "payout_p95": q95,
        "mean_flips": stats.mean_flips,
    }
    if out is not None:
        with open(out, "w", encoding="utf-8") as fh:
            json.dump(report, fh, indent=2)
            fh.write("\n")
    _emit_mapping(report, fmt)


@main.command()
@click.option("--fraction", "-f", required=True, type=float,
              help="Fixed fraction of wealth wagered each flip.")
@click.option("--p-heads", default=0.6, show_default=True, type=float)
@click.option("--flips", default=300, show_default=True, type=int)
@click.option("--start", default=25.0, show_default=True, type=float,
              help="Starting wealth in dollars.")
@click.option("--cap", default=250.0, show_default=True, type=float,
              help="Payout cap in dollars.")
@click.option("--no-cap", is_flag=True, help="Remove the cap (binomial case).")
@click.option("--no-stop", is_flag=True,
              help="Keep flipping after touching the cap.")
@click.option("--strict", is_flag=True,
              help="Require strictly exceeding the cap to count as reaching it.")
@click.option("--format", "fmt", type=FORMATS, default="table", show_default=True)
def exact(fraction: float, p_heads: float, flips: int, start: float, cap: float,
          no_cap: bool, no_stop: bool, strict: bool, fmt: str) -> None:
    """Print the exact terminal-wealth distribution for a fixed fraction."""
    try:
        params = GameParams(
            p=p_heads, f=fraction, n=flips, w0=start, cap=None if no_cap else cap
        )
        dist = exact_capped_distribution(params, stop_at_cap=not no_stop, strict=strict)
    except ValueError as exc:
        raise click.ClickException(str(exc)) from exc

    summary = {
        "f": fraction,
        "p_heads": p_heads,
        "n_flips": flips,
        "start": start,
        "cap": None if no_cap else cap,
        "stop_at_cap": not no_stop,
        "strict": strict,
        "p_cap": dist.p_cap,
        "expected_payout": dist.expected_payout,
        "n_atoms": len(dist.atoms),
    }
    if fmt == "structured":
        summary["atoms"] = [
            {"wealth": w, "probability": pr} for w, pr in dist.atoms
        ]
    _emit_mapping(summary, fmt)


@main.command()
@click.option("--table", "table_name", type=click.Choice(["paper"]), default="paper",
              show_default=True, help="Which reference table to print.")
@click.option("--format", "fmt", type=FORMATS, default="table", show_default=True)
def analytics(table_name: str, fmt: str) -> None:
    """Print the reference headline figures next to their published values."""
    rows = [
        {
            "name": row.name,
            "computed": row.computed,
            "published": row.published,
            "tolerance": row.tolerance,
            "ok": row.ok,
        }
        for row in headline_table()
    ]
    _emit_rows(rows, fmt)
    if not all(r["ok"] for r in rows):
        raise click.ClickException("some computed figures drifted from their published values")


@main.command()
@click.argument("events_path", type=click.Path(exists=True))
@click.option("--streak-k", default=DEFAULT_STREAK_K, show_default=True, type=int,
              help="Heads-run length that defines a streak window.")
@click.option("--cohort", is_flag=True, help="Aggregate across sessions.")
@click.option("--format", "fmt", type=FORMATS, default="table", show_default=True)
def analyze(events_path: str, streak_k: int, cohort: bool, fmt: str) -> None:
    """Behavioral metrics from persisted event logs (file or directory)."""
    from .service.store import read_ledgers

    ledgers = [lg for lg in read_ledgers(events_path) if lg.records]
    if not ledgers:
        raise click.ClickException(f"no sessions with flips found under {events_path!r}")

    if cohort:
        stats = cohort_report(ledgers, streak_k=streak_k)
        _emit_mapping(asdict(stats), fmt)
        return

    rows = []
    for ledger in ledgers:
        bets = bet_fraction_stats(ledger)
        tails = tails_stats(ledger, streak_k=streak_k)
        score = martingale_score(ledger)
        rows.append(
            {
                "session_id": ledger.session_id,
                "flips": len(ledger.records),
                "mean_bet_fraction": bets.mean,
                "bet_fraction_std": bets.std,
                "max_bet_fraction": bets.max,
                "all_in_flips": bets.all_in_flips,
                "tails_share": tails.tails_share,
                "post_streak_tails_rate": tails.post_streak_tails_rate,
                "streak_lift": tails.streak_lift,
                "martingale_score": score,
                "martingale_flag": is_martingale_like(score),
            }
        )
    _emit_rows(rows, fmt)


if __name__ == "__main__":
    main()
