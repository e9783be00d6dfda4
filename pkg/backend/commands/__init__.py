"""
Command registration

This module maps every CLI command to its handler. Handlers live in one
module per command group and are registered here by name.

- validate, tg           - network.py
- cycles, cones, trap    - cones.py
- refine                 - refine.py
- simulate, blocks, fit  - estimate.py
- report                 - report.py

Every handler takes a RunConfig and returns an exit code.
"""
import importlib
import logging

logger = logging.getLogger('glassbound.cli')

handlers = {}


def register_command(registry, command, module_name, handler_name):
    """Register a command handler by import path."""
    module = importlib.import_module(f'backend.commands.{module_name}')
    registry[command] = getattr(module, handler_name)
    logger.debug(f"Registered {command} from {module_name}.{handler_name}")
    return registry[command]


register_command(handlers, 'validate', 'network', 'validate_command')
register_command(handlers, 'tg', 'network', 'tg_command')
register_command(handlers, 'cycles', 'cones', 'cycles_command')
register_command(handlers, 'cones', 'cones', 'cones_command')
register_command(handlers, 'trap', 'cones', 'trap_command')
register_command(handlers, 'refine', 'refine', 'refine_command')
register_command(handlers, 'simulate', 'estimate', 'simulate_command')
register_command(handlers, 'blocks', 'estimate', 'blocks_command')
register_command(handlers, 'fit', 'estimate', 'fit_command')
register_command(handlers, 'report', 'report', 'report_command')
