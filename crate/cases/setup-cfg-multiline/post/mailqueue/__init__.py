import click
import redis
import jinja2
