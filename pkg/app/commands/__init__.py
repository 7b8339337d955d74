"""
Command-line subcommands, one module per command group
"""
from app.commands import features, learning, volumes

COMMAND_MODULES = (volumes, features, learning)
