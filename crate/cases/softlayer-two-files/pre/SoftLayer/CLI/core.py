import click
from rich.console import Console
from rich.table import Table


@click.command()
def main():
    table = Table(title="slcli")
    Console().print(table)
