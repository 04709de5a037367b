# SPDX-License-Identifier: Apache-2.0
"""Channel-charting based mmWave beam tracking."""

from chartbeam._chartbeam import *  # noqa: F401,F403

__version__ = "0.1.0"
