import typer
import httpx
from pydantic import BaseModel

app = typer.Typer()
