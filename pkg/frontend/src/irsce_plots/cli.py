"""Command-line front end: CSV log(s) in, figure out."""

import click

from .plots import PlotSpec, SchemaError, plot_nmse


@click.command()
@click.argument("inputs", nargs=-1, required=True,
                type=click.Path(exists=True))
@click.option("--output", "-o", required=True, type=click.Path(),
              help="Image file to write (format from the extension).")
@click.option("--x-column", default="axis_value", show_default=True)
@click.option("--y-column", default="median_nmse", show_default=True)
@click.option("--group-column", default="method", show_default=True)
@click.option("--log-y/--linear-y", default=True, show_default=True)
@click.option("--x-label", default="")
@click.option("--y-label", default="")
@click.option("--title", default="")
def main(inputs, output, x_column, y_column, group_column, log_y,
         x_label, y_label, title):
    """Render one line per group from sweep CSV logs."""
    spec = PlotSpec(inputs=tuple(inputs), output=output, x_column=x_column,
                    y_column=y_column, group_column=group_column,
                    log_y=log_y, x_label=x_label, y_label=y_label,
                    title=title)
    try:
        path = plot_nmse(spec)
    except SchemaError as exc:
        raise click.ClickException(str(exc))
    click.echo(f"wrote {path}")


if __name__ == "__main__":
    main()
