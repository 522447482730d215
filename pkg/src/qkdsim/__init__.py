"""Desk-scale simulator of a quantum-secured DWDM link and its key-consuming services.

Subpackages:
    physmodel      parametric QBER/SKR link model and its calibration routine
    session        stateful link endpoints integrating key rate into key blocks
    kms            paired key-delivery service with an HTTP front end
    securechannel  AES-256-GCM data channel with once-per-second key refresh
    scenario       deterministic scripted runs, CSV logs, summary reports
    chain          secret-sharing consensus transport over the secured links
"""

__version__ = "0.1.0"
