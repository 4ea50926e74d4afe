import jwt
from flask import request
