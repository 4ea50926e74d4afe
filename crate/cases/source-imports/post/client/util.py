import os, sys


def here():
    return os.path.dirname(sys.argv[0])
