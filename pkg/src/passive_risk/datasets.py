"""Bundled synthetic fixtures.

All files are generated by ``scripts/generate_fixtures.py`` from fixed seeds;
see ``data/README.md`` for how each one was built.

========================  ==================================================
index_prices.csv          long daily index history (date, INDEX)
constituents.csv          50 constituents and the index around an event date
index_weights.csv         cap weights of the 50 constituents (asset, weight)
single_stock.csv          one stock and the index over half a year
compare.conf              comparison experiment on ``constituents.csv``
========================  ==================================================
"""
from importlib import resources

PREFIX = "builtin:"
EVENT_DATE = "2022-02-24"


def fixture_path(name):
    """Filesystem path of a bundled data file."""
    path = resources.files("passive_risk").joinpath("data").joinpath(name)
    if not path.is_file():
        raise FileNotFoundError(f"no bundled fixture named {name!r}")
    return str(path)


def resolve(path):
    """Map ``builtin:<name>`` to the bundled file; other paths pass through."""
    path = str(path)
    if path.startswith(PREFIX):
        return fixture_path(path[len(PREFIX):])
    return path
