"""
sparc-mod: PSK-modulated sparse superposition codes for the complex AWGN channel.

The numerical library lives in :mod:`sparcmod.sparc`, the Monte Carlo driver in
:mod:`sparcmod.harness`, and the command line front-end in :mod:`sparcmod.core`
with its subcommands supplied by :mod:`sparcmod.plugins`.
"""

__version__ = "1.0.0"
