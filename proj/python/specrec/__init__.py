# Copyright 2026 The specrec Authors
# SPDX-License-Identifier: Apache-2.0
"""Spectral filtering pipeline for sequential recommendation."""

from ._specrec import *  # noqa: F401,F403
from ._specrec import __version__  # noqa: F401
