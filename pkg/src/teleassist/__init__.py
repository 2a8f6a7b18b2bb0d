"""Shared-autonomy engine that learns a user's repeated tasks from teleoperation alone.

The robot watches windows of (state, human command) pairs, embeds them into a
latent task code, decodes assistive actions that replicate earlier
demonstrations, and hands control back whenever the current behavior looks
unfamiliar. Everything retrains between interactions on the growing dataset.
"""

__version__ = "0.1.0"
