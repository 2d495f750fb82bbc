"""Error taxonomy for the exporter."""


class ExporterError(Exception):
    """Base for every error this package raises on purpose."""


class ValidationError(ExporterError):
    """Inputs are structurally wrong (mismatched sidecar, bad folder layout)."""


class BackendLoadError(ExporterError):
    """The requested encoder could not be constructed (missing package,
    missing weights, no network)."""
