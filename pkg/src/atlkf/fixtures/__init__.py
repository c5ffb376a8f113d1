"""Bundled example models."""

from importlib import resources

NAMES = ("m1", "m2", "cg_oneround", "cg_repeat", "cg_repeat_fair")


def path(name):
    return resources.files(__name__).joinpath(f"{name}.amf")


def source(name):
    return path(name).read_text(encoding="utf-8")


def load(name):
    from ..amf import load_model

    return load_model(source(name))
