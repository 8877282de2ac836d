"""Command-line driver: synth | transform | ridges | extract | ellipse.

Frequencies on the command line are cyclic, in cycles per time unit of
the input's time column (cycles per day for daily-stamped floats).

Exit codes: 0 success, 2 usage, 3 bad input, 4 numeric problem (Nyquist
violation, non-finite data, not a modulated oscillation).
"""
from __future__ import annotations

import json
import sys
from pathlib import Path

import click
import numpy as np

from . import io
from .cwt import transform
from .ellipse import EllipseSnapshot, ellipse_params, snapshot_times
from .errors import InvalidGridError, MVRidgeError, NonFiniteError, NotModulatedError
from .pipeline import PRESETS, PipelineConfig, run_on_cube, run_pipeline, write_outputs
from .signal import MultivariateSeries
from .synth import KINDS, SyntheticSpec, float_like_trajectory, generate

EXIT_INPUT = 3
EXIT_NUMERIC = 4


class _Group(click.Group):
    def invoke(self, ctx):
        try:
            return super().invoke(ctx)
        except (NonFiniteError, InvalidGridError, NotModulatedError) as exc:
            click.echo(f"error: {exc}", err=True)
            ctx.exit(EXIT_NUMERIC)
        except (MVRidgeError, OSError) as exc:
            click.echo(f"error: {exc}", err=True)
            ctx.exit(EXIT_INPUT)


def _config_options(func):
    opts = [
        click.option("--preset", type=click.Choice(sorted(PRESETS)), default=None,
                     help="Start from a named configuration; explicit options override it."),
        click.option("--beta", type=float, default=None, help="Morse beta (default 3)."),
        click.option("--gamma", type=float, default=None, help="Morse gamma (default 3)."),
        click.option("--levels", type=int, default=None, help="Number of frequency levels (default 82)."),
        click.option("--fmin", type=float, default=None, help="Lowest cyclic frequency (default 0.01)."),
        click.option("--fmax", type=float, default=None, help="Highest cyclic frequency (default 0.28)."),
        click.option("--max-level-jump", type=float, default=None,
                     help="Chaining bound in grid levels per sample (default 2)."),
        click.option("--min-cycles", type=float, default=None,
                     help="Discard ridges shorter than this many cycles (default 2P)."),
        click.option("--floor", "magnitude_floor", type=float, default=None,
                     help="Magnitude floor relative to the cube maximum (default 1e-3)."),
        click.option("--pad/--no-pad", default=None, help="Mirror-pad the record ends."),
    ]
    for opt in reversed(opts):
        func = opt(func)
    return func


_CONFIG_KEYS = ("beta", "gamma", "levels", "fmin", "fmax", "max_level_jump", "min_cycles",
                "magnitude_floor", "pad")


def _build_config(preset, **kw) -> PipelineConfig:
    values = dict(PRESETS[preset]) if preset else {}
    values.update({k: v for k, v in kw.items() if k in _CONFIG_KEYS and v is not None})
    return PipelineConfig(**values)


def _read_input(path, trajectory_id) -> MultivariateSeries:
    with open(path) as fh:
        first = next((line for line in fh if not line.startswith("#") and line.strip()), "")
    if first.strip().startswith("id,"):
        groups = io.read_trajectories(path)
        if trajectory_id is None:
            if len(groups) > 1:
                raise click.UsageError(f"file holds {len(groups)} trajectories; pick one with --id")
            trajectory_id = next(iter(groups))
        if trajectory_id not in groups:
            raise click.UsageError(f"no trajectory with id {trajectory_id!r}")
        return io.latlon_to_xy(*groups[trajectory_id])
    return io.read_channels(path)


@click.group(cls=_Group)
@click.version_option(package_name="artifact")
def cli():
    """Multivariate wavelet ridge analysis of modulated oscillations."""


@cli.command()
@click.option("--kind", type=click.Choice(KINDS + ("float_like",)), default="chirp", show_default=True)
@click.option("--channels", type=int, default=2, show_default=True)
@click.option("--samples", type=int, default=4096, show_default=True)
@click.option("--dt", type=float, default=1.0, show_default=True)
@click.option("--noise", type=float, default=0.0, show_default=True, help="White-noise standard deviation.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--param", "params", multiple=True, metavar="KEY=VALUE", help="Override a kind parameter.")
@click.option("-o", "--output", type=click.Path(dir_okay=False), required=True, help="Channel CSV to write.")
def synth(kind, channels, samples, dt, noise, seed, params, output):
    """Write a synthetic modulated oscillation as a channel CSV."""
    if kind == "float_like":
        series, _ = float_like_trajectory(seed=seed, samples=samples, dt=dt)
        note = [f"synthetic float_like seed={seed}"]
    else:
        overrides = {}
        for item in params:
            key, sep, value = item.partition("=")
            if not sep:
                raise click.BadParameter(f"expected KEY=VALUE, got {item!r}", param_hint="--param")
            try:
                overrides[key.strip()] = float(value)
            except ValueError:
                raise click.BadParameter(f"value of {key} is not a number", param_hint="--param") from None
        spec = SyntheticSpec(kind, channels, samples, dt, overrides, noise_sigma=noise, seed=seed)
        series, _ = generate(spec)
        note = ["synthetic " + json.dumps(json.loads(spec.to_json()), sort_keys=True)]
    io.write_channels(output, series, "channels", note)
    click.echo(f"wrote {series.channels} x {series.samples} samples to {output}")


@cli.command(name="transform")
@click.argument("input_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--id", "trajectory_id", default=None, help="Trajectory id for id,time,lat,lon input.")
@_config_options
@click.option("--derivatives", type=click.IntRange(0, 2), default=2, show_default=True)
@click.option("--dump-cube", type=click.Path(dir_okay=False), required=True,
              help="Binary cube path; a JSON sidecar is written next to it.")
def transform_cmd(input_path, trajectory_id, derivatives, dump_cube, preset, **kw):
    """Compute the wavelet transform cube and dump it to disk."""
    config = _build_config(preset, **kw)
    series = _read_input(input_path, trajectory_id)
    cube = transform(series, config.wavelet, config.grid(series.dt), derivatives, pad=config.pad)
    io.dump_cube(dump_cube, cube, config.config_hash(), series.time_origin)
    click.echo(f"wrote cube {cube.shape} to {dump_cube}")


@cli.command()
@click.option("--cube", "cube_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--input", "input_path", type=click.Path(exists=True, dir_okay=False), default=None,
              help="Series the cube came from; enables residual output.")
@click.option("--max-level-jump", type=float, default=None)
@click.option("--min-cycles", type=float, default=None)
@click.option("--floor", "magnitude_floor", type=float, default=None)
@click.option("-o", "--outdir", type=click.Path(file_okay=False), required=True)
def ridges(cube_path, input_path, max_level_jump, min_cycles, magnitude_floor, outdir):
    """Extract and merge ridges from a dumped cube."""
    cube, meta = io.load_cube(cube_path)
    if cube.wt is None or cube.wtt is None:
        raise click.UsageError("cube was dumped without time derivatives; rerun transform with --derivatives 2")
    freqs = cube.grid.cyclic_frequencies
    config = _build_config(None, beta=cube.wavelet.beta, gamma=cube.wavelet.gamma, levels=cube.grid.levels,
                           fmin=float(freqs[-1]), fmax=float(freqs[0]), max_level_jump=max_level_jump,
                           min_cycles=min_cycles, magnitude_floor=magnitude_floor)
    if input_path is not None:
        series = io.read_channels(input_path)
    else:
        # without the series the residual is relative to a zero record
        series = MultivariateSeries(np.zeros((cube.channels, cube.samples)), cube.dt, meta["time_origin"])
    result = run_on_cube(config, series, cube)
    paths = write_outputs(result, outdir)
    click.echo(f"{len(result.merged)} merged ridge(s); wrote {', '.join(str(p) for p in paths.values())}")


@cli.command()
@click.argument("input_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--id", "trajectory_id", default=None, help="Trajectory id for id,time,lat,lon input.")
@_config_options
@click.option("-o", "--outdir", type=click.Path(file_okay=False), required=True)
def extract(input_path, trajectory_id, outdir, preset, **kw):
    """Full pipeline: transform, ridges, merge, residual, ellipses, diagnostics."""
    config = _build_config(preset, **kw)
    series = _read_input(input_path, trajectory_id)
    result = run_pipeline(config, series)
    paths = write_outputs(result, outdir)
    d = result.diagnostics
    click.echo(f"{len(result.curves)} ridge(s), {len(result.merged)} merged; "
               f"{d['occupied_samples']} of {series.samples} samples occupied")
    click.echo(f"outputs in {Path(outdir)}: {', '.join(p.name for p in paths.values())}")


@cli.command()
@click.argument("ridges_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--residual", "residual_path", type=click.Path(exists=True, dir_okay=False), default=None,
              help="Residual CSV supplying ellipse centres (zero otherwise).")
@click.option("--bias", is_flag=True, help="Use the bias columns instead of the signal estimate.")
@click.option("-o", "--output", type=click.Path(dir_okay=False), required=True)
def ellipse(ridges_path, residual_path, bias, output):
    """Ellipse snapshots, one per estimated period, from a bivariate ridge CSV."""
    cols = io.read_ridges(ridges_path)
    if "re_2" not in cols or "re_3" in cols:
        raise click.UsageError("ellipse conversion needs a two-channel ridge file")
    prefix = "bias_" if bias else ""
    t = cols["t"]
    x = cols[f"{prefix}re_1"] + 1j * cols[f"{prefix}im_1"]
    y = cols[f"{prefix}re_2"] + 1j * cols[f"{prefix}im_2"]
    omega = cols["omega_hat"]
    centre_t = centre = None
    if residual_path is not None:
        res = io.read_channels(residual_path)
        centre_t, centre = res.time, res.data
    snapshots = []
    if t.size:
        dt = float(np.min(np.diff(t))) if t.size > 1 else 1.0
        # contiguous runs of the ridge file are separate merged ridges
        breaks = np.flatnonzero(np.abs(np.diff(t) - dt) > 1e-6 * dt) + 1
        for run in np.split(np.arange(t.size), breaks):
            for k in snapshot_times(omega[run], dt):
                i = run[k]
                a, b, theta, phi = ellipse_params(x[i], y[i])
                c = (0.0, 0.0)
                if centre is not None:
                    j = int(np.argmin(np.abs(centre_t - t[i])))
                    c = (float(centre[0, j]), float(centre[1, j]))
                snapshots.append(EllipseSnapshot(i, c, a, b, theta, phi, float(t[i])))
    io.write_ellipses(output, snapshots)
    click.echo(f"wrote {len(snapshots)} ellipse(s) to {output}")


def main(argv=None):
    """Console entry point."""
    return cli.main(args=argv, prog_name="mvridge")


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
