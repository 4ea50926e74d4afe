"""HTTP helpers."""
import json

import attr
import requests


@attr.s
class Endpoint:
    base = attr.ib()

    def url(self, path):
        return self.base.rstrip("/") + "/" + path.lstrip("/")

    def get(self, path):
        return json.loads(requests.get(self.url(path)).text)
