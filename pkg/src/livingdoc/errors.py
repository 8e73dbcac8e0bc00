"""Exception hierarchy.

Every error carries an ``exit_code`` used by the CLI:

    1  validation / citation / content errors
    2  network errors (including offline cache misses)
    3  external converter failures
"""


class LivingDocError(Exception):
    exit_code = 1

    def __init__(self, message, *, file=None, line=None, column=None):
        super().__init__(message)
        self.message = message
        self.file = file
        self.line = line
        self.column = column

    def location(self):
        if self.file is None:
            return ""
        parts = [str(self.file)]
        if self.line is not None:
            parts.append(str(self.line))
            if self.column is not None:
                parts.append(str(self.column))
        return ":".join(parts)

    def __str__(self):
        loc = self.location()
        return f"{loc}: {self.message}" if loc else self.message


class ConfigError(LivingDocError):
    pass


class MalformedKey(LivingDocError):
    pass


class InvalidAccession(MalformedKey):
    """Accession fails the source's syntax check; raised before any network call."""


class UnknownPrefix(LivingDocError):
    pass


class NetworkError(LivingDocError):
    exit_code = 2


class OfflineMiss(NetworkError):
    def __init__(self, keys, message=None):
        self.keys = sorted(str(k) for k in keys)
        super().__init__(message or "not in cache (offline): " + ", ".join(self.keys))


class FetchFailed(NetworkError):
    def __init__(self, message, status=None, url=None):
        super().__init__(message)
        self.status = status
        self.url = url


class NetworkDisabled(NetworkError):
    pass


class RevisionDiscoveryFailed(NetworkError):
    pass


class ParseFailed(LivingDocError):
    pass


class MissingContent(LivingDocError):
    pass


class MetadataInvalid(LivingDocError):
    def __init__(self, message, field_path=None, **kwargs):
        if field_path:
            message = f"{field_path}: {message}"
        super().__init__(message, **kwargs)
        self.field_path = field_path


class UnknownVariable(LivingDocError):
    def __init__(self, names, file=None):
        self.names = sorted(set(names))
        super().__init__("unknown template variable(s): " + ", ".join(self.names), file=file)


class UnterminatedPlaceholder(LivingDocError):
    pass


class VariableConflict(LivingDocError):
    pass


class UnresolvedCitations(LivingDocError):
    """Aggregates per-key failures so CI sees all of them at once."""

    def __init__(self, failures):
        self.failures = failures
        lines = [f"{key}: {err}" for key, err in failures]
        super().__init__("unresolved citations:\n  " + "\n  ".join(lines))
        if failures and all(isinstance(e, NetworkError) for _, e in failures):
            self.exit_code = 2


class AssetMissing(LivingDocError):
    pass


class UnknownSection(LivingDocError):
    pass


class ConverterFailed(LivingDocError):
    exit_code = 3


class EmptySeries(LivingDocError):
    pass


class DictionaryMissing(LivingDocError):
    pass
