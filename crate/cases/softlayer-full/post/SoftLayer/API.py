import requests


class BaseClient:
    session = requests.Session
