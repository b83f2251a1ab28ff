"""Exception hierarchy.

Each class carries the CLI exit code it maps to: 1 usage, 2 data, 3 numerical.
"""


class FleetcapError(Exception):
    exit_code = 1
    module = "fleetcap"


class UsageError(FleetcapError):
    exit_code = 1
    module = "cli"


class DataError(FleetcapError):
    """Malformed or invalid input data."""

    exit_code = 2
    module = "panel_data"

    def __init__(self, message, *, line=None, field=None, year=None, province=None):
        self.line = line
        self.field = field
        self.year = year
        self.province = province
        parts = []
        if line is not None:
            parts.append(f"line {line}")
        if year is not None:
            parts.append(f"year {year}")
        if province is not None:
            parts.append(f"province {province}")
        if field is not None:
            parts.append(f"field {field}")
        prefix = f"[{', '.join(parts)}] " if parts else ""
        super().__init__(prefix + message)


class NumericalError(FleetcapError):
    """A solver or estimator could not produce a trustworthy answer."""

    exit_code = 3
    module = "numerics"


class DimensionError(NumericalError):
    module = "lp_solver"


class RankDeficientError(NumericalError):
    module = "econometrics"

    def __init__(self, message, columns=()):
        self.columns = tuple(columns)
        super().__init__(message)
