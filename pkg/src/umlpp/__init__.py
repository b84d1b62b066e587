"""Executable class/object modeling engine.

Classes are live, instantiable elements; objects execute: constraints are
checked at runtime with custom messages, slots are entered or computed,
operations run on request or on state change, and one integrated store feeds
both class and object views.
"""

__version__ = "0.1.0"
